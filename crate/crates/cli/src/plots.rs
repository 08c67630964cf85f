//! Generated gnuplot scripts. Each reads CSVs from its own directory,
//! skipping the schema line and the header row.

use crate::args::Collapse;

const PREAMBLE: &str = "set datafile separator \",\"\nset terminal pngcairo size 900,650\n";

fn sizes(l_values: &[usize]) -> String {
    l_values.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

/// σ against h per L from sweep.csv, optionally rescaled.
pub fn sweep(l_values: &[usize], collapse: Collapse) -> String {
    let (factor, label) = match collapse {
        Collapse::None => ("1.0", "sigma"),
        Collapse::Ordered => ("($1/128.0)**1.5", "sigma * (L/128)^{3/2}"),
        Collapse::Disordered => ("($1/128.0)", "sigma * (L/128)"),
    };
    format!(
        "{PREAMBLE}set output \"sigma.png\"\n\
         set logscale y\n\
         set xlabel \"h\"\n\
         set ylabel \"{label}\"\n\
         set key top left\n\
         plot for [L in \"{}\"] \"sweep.csv\" skip 2 using 2:($1 == L+0 ? $3*{factor} : 1/0) \
         with linespoints title \"L = \".L\n",
        sizes(l_values)
    )
}

pub fn surface(l_values: &[usize], h_crit: f64) -> String {
    format!(
        "{PREAMBLE}set output \"surface.png\"\n\
         set logscale y\n\
         set xlabel \"h\"\n\
         set ylabel \"sigma(L, h)\"\n\
         set arrow from {h_crit},graph 0 to {h_crit},graph 1 nohead dashtype 2\n\
         plot for [L in \"{}\"] \"surface_grid.csv\" skip 2 using 2:($1 == L+0 ? $3 : 1/0) \
         with lines title \"L = \".L\n",
        sizes(l_values)
    )
}

/// Four stacked panels: m with ±m_crit, Δm, l_b with the 2L reference, and
/// rolling against predicted volatility.
pub fn micro_macro(m_crit: f64, side: usize) -> String {
    format!(
        "set datafile separator \",\"\n\
         set terminal pngcairo size 900,1200\n\
         set output \"micro_macro.png\"\n\
         set multiplot layout 4,1\n\
         set xlabel \"t\"\n\
         set ylabel \"m\"\n\
         plot \"micro_macro.csv\" skip 2 using 1:2 with lines notitle, {m_crit} dashtype 2 title \"m_crit\", -{m_crit} dashtype 2 notitle\n\
         set ylabel \"dm\"\n\
         plot \"micro_macro.csv\" skip 2 using 1:3 with lines notitle\n\
         set ylabel \"l_b\"\n\
         plot \"micro_macro.csv\" skip 2 using 1:4 with lines notitle, {} dashtype 2 title \"2L\"\n\
         set ylabel \"volatility\"\n\
         set logscale y\n\
         plot \"micro_macro.csv\" skip 2 using 1:6 with lines title \"rolling\", \
         \"micro_macro.csv\" skip 2 using 1:7 with lines title \"surface\"\n\
         unset multiplot\n",
        2 * side
    )
}

/// Empirical |Δm| density with the fitted tail and, if present, the
/// mixture prediction.
pub fn density(empirical: &str, mixture: Option<&str>, fit: Option<(f64, f64)>, png: &str) -> String {
    let mut s = format!(
        "{PREAMBLE}set output \"{png}\"\n\
         set logscale xy\n\
         set xlabel \"|dm|\"\n\
         set ylabel \"density\"\n\
         plot \"{empirical}\" skip 2 using (sqrt($1*$2)):($3 > 0 ? $3 : 1/0) with points title \"empirical\""
    );
    if let Some(m) = mixture {
        s.push_str(&format!(", \"{m}\" skip 2 using (sqrt($1*$2)):3 with lines title \"mixture\""));
    }
    if let Some((prefactor, exponent)) = fit {
        s.push_str(&format!(", {prefactor:e}*x**({exponent}) dashtype 2 title \"power law {exponent:.2}\""));
    }
    s.push('\n');
    s
}

pub fn return_to_zero(files: &[String]) -> String {
    let series: Vec<String> = files
        .iter()
        .map(|f| format!("\"{f}\" skip 2 using (sqrt($1*$2)):($3 > 0 ? $3 : 1/0) with linespoints title \"{f}\""))
        .collect();
    format!(
        "{PREAMBLE}set output \"rtz.png\"\n\
         set logscale xy\n\
         set xlabel \"return-to-zero time\"\n\
         set ylabel \"density\"\n\
         plot {}\n",
        series.join(", ")
    )
}
