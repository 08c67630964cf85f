//! Acceptance suite: runs every criterion at its stated tolerance and
//! prints one PASS/FAIL line per criterion. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use spinmarket::frozen::{
    self, locate_transition_in, scaling_collapse, FrozenRunConfig, SweepResult, TRANSITION_LOG_SLOPE_THRESHOLD,
};
use spinmarket::lattice::{magnetization_quantum, ModelParams, SeriesRecord, Simulation, UpdaterKind};
use spinmarket::macro_model::{
    compare_micro_macro, density_agreement, fit_surface, mixture_density, return_density, return_density_at,
    VolatilityModel, VolatilitySurface,
};
use spinmarket::rng;
use spinmarket::stats::{
    self, cutoff_scaling_check, density, powerlaw_fit, return_to_zero, tail_fit, Binning, CutoffPoint,
    ReturnToZeroOptions,
};

const SEED: u64 = 2024;
const DYNAMIC_STEPS: usize = 3_000_000;
const DYNAMIC_EQUILIBRATION: usize = 1000;
const COLLAPSE_TOLERANCE: f64 = 0.15;
/// Fitted slope of log(step time) against log N below which scaling counts
/// as sublinear.
const SUBLINEAR_SLOPE: f64 = 0.75;

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect()
}

/// Frozen sweeps: L = 128 on a fine grid over both phases, L = 64 and 256
/// on the two collapse windows.
fn sweeps() -> SweepResult {
    let template = FrozenRunConfig::new(128, 0.0).with_updater(UpdaterKind::ActiveSet).with_seed(SEED);
    let coarse: Vec<f64> = grid(1.0, 1.7, 0.1).into_iter().chain(grid(2.0, 2.5, 0.1)).collect();
    let mut cells = Vec::new();
    for (sides, hs) in [(vec![128], grid(0.0, 2.5, 0.05)), (vec![64, 256], coarse)] {
        cells.extend(frozen::sweep(&sides, &hs, &template).expect("sweep").cells);
    }
    SweepResult::assemble(&template, cells)
}

fn sweep_criteria(r: &mut Report, sweep: &SweepResult) {
    for c in sweep.failures() {
        println!("note: cell L={} h={} failed: {:?}", c.side, c.h, c.error);
    }
    let curve: Vec<(f64, f64)> =
        sweep.curve(128).into_iter().filter(|&(h, _)| (1.0 - 1e-9..=2.5 + 1e-9).contains(&h)).collect();
    match locate_transition_in(&curve, TRANSITION_LOG_SLOPE_THRESHOLD) {
        Ok(t) => {
            let h = t.h_crit();
            r.check(
                "1",
                h.is_some_and(|h| (h - 1.86).abs() <= 0.10),
                format!("transition at L=128: {t:?}; target 1.86 ± 0.10"),
            );
        }
        Err(e) => r.check("1", false, format!("transition search failed: {e}")),
    }

    for (id, exponent, lo, hi, rows_expected) in [("2", 1.5, 1.0, 1.7, 8), ("3", 1.0, 2.0, 2.5, 6)] {
        let report = scaling_collapse(sweep, exponent, 128, COLLAPSE_TOLERANCE).expect("collapse");
        let rows: Vec<_> = report.rows_in(lo, hi).collect();
        let complete = rows.len() == rows_expected && rows.iter().all(|row| row.scaled.len() == 3);
        let spread = report.max_spread_on(lo, hi);
        r.check(
            id,
            complete && spread < COLLAPSE_TOLERANCE,
            format!(
                "sigma*(L/128)^{exponent} over L in {{64,128,256}}, h in [{lo}, {hi}]: \
                 {} rows, max spread {spread:.4} (limit {COLLAPSE_TOLERANCE})",
                rows.len()
            ),
        );
    }

    let at = |h: f64| sweep.summaries().find(|s| s.side == 128 && (s.h0 - h).abs() < 1e-9).cloned();
    match (at(1.5), at(2.0)) {
        (Some(a), Some(b)) => {
            let pass = (a.kurtosis - 3.0).abs() < 0.5 && a.ac1.abs() < 0.05 && b.ac1 < -0.1;
            r.check(
                "4",
                pass,
                format!(
                    "h=1.5: kurtosis {:.3}, ac1 {:.4}; h=2.0: ac1 {:.4} (need |k-3|<0.5, |ac1|<0.05; ac1<-0.1)",
                    a.kurtosis, a.ac1, b.ac1
                ),
            );
        }
        _ => r.check("4", false, "h=1.5 or h=2.0 cell missing at L=128".into()),
    }
}

fn dynamic_run(side: usize, alpha: f64, steps: usize) -> Vec<SeriesRecord> {
    let params = ModelParams::new(side).with_alpha(alpha).with_updater(UpdaterKind::ActiveSet).with_seed(SEED);
    let mut sim = Simulation::new(params).expect("params");
    sim.skip(DYNAMIC_EQUILIBRATION);
    sim.run(steps)
}

fn dynamic_criteria(r: &mut Report, records: &[SeriesRecord], surface: &VolatilitySurface) {
    let dm: Vec<f64> = records.iter().map(|x| x.dm).collect();
    let est = density(&dm, &Binning::returns(Some(magnetization_quantum(128)))).expect("density");
    match tail_fit(&dm, &est) {
        Ok(t) => r.check(
            "5",
            (t.fit.exponent + 3.1).abs() <= 0.3,
            format!(
                "tail exponent {:.3} ± {:.3} over [{:.2e}, {:.2e}] (reduced chi2 {:.2}); target -3.1 ± 0.3",
                t.fit.exponent, t.fit.stderr, t.range.0, t.range.1, t.fit.reduced_chi2
            ),
        ),
        Err(e) => r.check("5", false, format!("tail fit failed: {e}")),
    }

    match compare_micro_macro(records, surface, 128) {
        Ok(c) => r.check(
            "6",
            c.median_abs_log_ratio < 2f64.ln(),
            format!(
                "median |ln(sigma_micro/sigma_macro)| {:.4} over {} points ({} excluded, h_crit {}); limit ln 2",
                c.median_abs_log_ratio, c.used, c.excluded, c.h_crit
            ),
        ),
        Err(e) => r.check("6", false, format!("comparison failed: {e}")),
    }

    let hs: Vec<f64> = records.iter().map(|x| x.h_smoothed).collect();
    let agreement = return_density(surface, 128, &hs, &est.edges).and_then(|mix| density_agreement(&dm, &est, &mix, 2.0));
    match agreement {
        Ok(a) => r.check(
            "7",
            a.holds,
            format!(
                "empirical/mixture density in [{:.3}, {:.3}] over {} bins of [{:.2e}, {:.2e}]; limit factor 2",
                a.min_ratio, a.max_ratio, a.bins_checked, a.window.0, a.window.1
            ),
        ),
        Err(e) => r.check("7", false, format!("density comparison failed: {e}")),
    }
}

fn cutoff_criteria(r: &mut Report, main_run: &[SeriesRecord]) {
    let opts = ReturnToZeroOptions::default();
    let mut points = Vec::new();
    let mut detail = Vec::new();
    let mut table_ok = true;
    for (side, alpha, expected) in [(32, 10.0, Some(400.0)), (32, 5.0, None), (64, 20.0, None), (128, 20.0, Some(6000.0))] {
        let m: Vec<f64> = if side == 128 && alpha == 20.0 {
            main_run.iter().map(|x| x.m).collect()
        } else {
            dynamic_run(side, alpha, DYNAMIC_STEPS).iter().map(|x| x.m).collect()
        };
        let t_cutoff = return_to_zero(&m, &opts).ok().and_then(|z| z.t_cutoff);
        if let Some(t) = t_cutoff {
            points.push(CutoffPoint { side, alpha, t_cutoff: t });
        }
        if let Some(e) = expected {
            table_ok &= t_cutoff.is_some_and(|t| t >= e / 2.0 && t <= e * 2.0);
        }
        detail.push(format!(
            "({side},{alpha}) T_cutoff {}{}",
            t_cutoff.map_or("none".into(), |t| format!("{t:.0}")),
            expected.map_or(String::new(), |e| format!(" (expected {e} within x2)"))
        ));
    }
    let slope = cutoff_scaling_check(&points, 0.15);
    let slope_ok = slope.as_ref().is_ok_and(|s| s.consistent);
    detail.push(match &slope {
        Ok(s) => format!("slope vs L^3/alpha^2 {:.3} over {} pairs (target 1.0 ± 0.15)", s.slope, s.points.len()),
        Err(e) => format!("slope: {e}"),
    });
    r.check("8", table_ok && slope_ok, detail.join("; "));
}

fn updater_criteria(r: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for h in [1.0, 1.5, 2.5] {
        let run = |u| frozen::run_frozen(&FrozenRunConfig::new(128, h).with_updater(u).with_seed(SEED)).expect("run").1.sigma;
        let (naive, active) = (run(UpdaterKind::Naive), run(UpdaterKind::ActiveSet));
        let rel = (active / naive - 1.0).abs();
        worst = worst.max(rel);
        parts.push(format!("h={h}: naive {naive:.4e} active {active:.4e}"));
    }

    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for side in [128usize, 256, 512] {
        let params = ModelParams::new(side)
            .frozen(1.0)
            .with_pinning(true)
            .with_updater(UpdaterKind::ActiveSet)
            .with_seed(SEED);
        let mut sim = Simulation::new(params).expect("params");
        sim.skip(200);
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let t0 = Instant::now();
            sim.skip(200);
            best = best.min(t0.elapsed().as_secs_f64() / 200.0);
        }
        xs.push(((side * side) as f64).ln());
        ys.push(best.ln());
        parts.push(format!("L={side}: {:.1} us/step", best * 1e6));
    }
    let slope = least_squares_slope(&xs, &ys);
    r.check(
        "9",
        worst < 0.10 && slope < SUBLINEAR_SLOPE,
        format!(
            "{}; max sigma deviation {:.2}% (limit 10%); time slope in N {slope:.3} (limit {SUBLINEAR_SLOPE})",
            parts.join(", "),
            100.0 * worst
        ),
    );
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (stats::mean(xs), stats::mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn property_criteria(r: &mut Report, surface: &VolatilitySurface, main_run: &[SeriesRecord]) {
    let mut notes = Vec::new();

    let mut coherent = true;
    for u in [UpdaterKind::Naive, UpdaterKind::ActiveSet] {
        let mut sim = Simulation::new(ModelParams::new(64).with_alpha(20.0).with_updater(u).with_seed(SEED)).unwrap();
        sim.skip(10_000);
        let l = sim.lattice();
        coherent &= l.spin_sum() == l.recompute_spin_sum() && l.border_length() == l.recompute_border_length();
    }
    notes.push(format!("cache coherence after 10^4 steps: {coherent}"));

    let mut deterministic = true;
    for u in [UpdaterKind::Naive, UpdaterKind::ActiveSet] {
        let run = || Simulation::new(ModelParams::new(64).with_alpha(20.0).with_updater(u).with_seed(7)).unwrap().run(2000);
        deterministic &= run() == run();
    }
    let fz = |s| frozen::run_frozen(&FrozenRunConfig::new(32, 1.5).with_seed(s).with_steps(100, 500)).unwrap();
    deterministic &= fz(3) == fz(3);
    notes.push(format!("bit-identical reruns: {deterministic}"));

    // Mixture normalization: exact bin masses and Simpson quadrature of the
    // pointwise density, for the volatilities the surface assigns to the run.
    let sigmas: Vec<f64> = main_run.iter().step_by(3000).map(|x| surface.sigma(128, x.h_smoothed)).collect();
    let top = 12.0 * sigmas.iter().copied().fold(0.0, f64::max);
    let edges: Vec<f64> = (0..=4000).map(|i| top * i as f64 / 4000.0).collect();
    let mass = mixture_density(&sigmas, &edges).map(|m| m.integral()).unwrap_or(f64::NAN);
    let smallest = sigmas.iter().copied().fold(f64::INFINITY, f64::min);
    let panels = 2 * ((top / smallest * 20.0).ceil() as usize);
    let quad = simpson(|x| return_density_at(&sigmas, x), 0.0, top, panels);
    let normalized = (mass - 1.0).abs() < 1e-3 && (quad - 1.0).abs() < 1e-3;
    notes.push(format!("mixture mass {mass:.6}, quadrature {quad:.6}"));

    let mut recovered = true;
    let mut exps = Vec::new();
    for a in [2.0, 3.0, 4.0] {
        let mut g = rng::stream(SEED, a as u64);
        let xs: Vec<f64> = (0..200_000).map(|_| (1.0 - g.random::<f64>()).powf(-1.0 / (a - 1.0))).collect();
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        let fit = powerlaw_fit(&est, (1.0, 30.0)).map(|f| f.exponent).unwrap_or(f64::NAN);
        recovered &= (fit + a).abs() <= 0.2;
        exps.push(format!("{fit:.3}"));
    }
    notes.push(format!("synthetic exponents for -2,-3,-4: {}", exps.join(",")));

    let mut g = rng::stream(SEED, 99);
    let mut walk = Vec::with_capacity(1_000_000);
    let mut x = 0i64;
    for _ in 0..1_000_000 {
        x += if g.random::<bool>() { 1 } else { -1 };
        walk.push(x as f64);
    }
    let survival = return_to_zero(&walk, &ReturnToZeroOptions::default()).ok().and_then(|z| z.survival_exponent);
    let walk_ok = survival.is_some_and(|s| (s - 0.5).abs() <= 0.1);
    notes.push(format!("random-walk survival exponent {survival:?}"));

    // Symmetry: Δm has no drift or skew beyond sampling error.
    let dm: Vec<f64> = main_run.iter().map(|x| x.dm).collect();
    notes.push(format!("dm mean {:.2e}, skewness {:.3}", stats::mean(&dm), stats::skewness(&dm)));

    r.check("10", coherent && deterministic && normalized && recovered && walk_ok, notes.join("; "));
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut report = Report { failed: 0 };

    let sweep = sweeps();
    sweep_criteria(&mut report, &sweep);
    let surface = match fit_surface(&sweep) {
        Ok(s) => s,
        Err(e) => {
            println!("FAIL [surface] cannot fit the volatility surface: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("note: surface h_crit(L=128) = {}", surface.h_crit_for(128));

    let main_run = dynamic_run(128, 20.0, DYNAMIC_STEPS);
    dynamic_criteria(&mut report, &main_run, &surface);
    cutoff_criteria(&mut report, &main_run);
    updater_criteria(&mut report);
    property_criteria(&mut report, &surface, &main_run);

    println!(
        "acceptance: {} of 10 criteria failed ({:.0} s)",
        report.failed,
        started.elapsed().as_secs_f64()
    );
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
