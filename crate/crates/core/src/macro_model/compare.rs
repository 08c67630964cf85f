use serde::{Deserialize, Serialize};

use super::{VolatilityModel, VolatilitySurface};
use crate::error::{Error, Result};
use crate::lattice::{SeriesRecord, SMOOTHING_WINDOW};
use crate::stats::{self, DensityEstimate};

/// Trailing population standard deviation of `xs` over `window` values;
/// `None` until the first full window.
pub fn rolling_volatility(xs: &[f64], window: usize) -> Vec<Option<f64>> {
    (0..xs.len())
        .map(|i| (i + 1 >= window).then(|| stats::std_dev(&xs[i + 1 - window..=i])))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonPoint {
    pub t: u64,
    pub h_smoothed: f64,
    /// Rolling microscopic volatility σ̄(t).
    pub sigma_micro: f64,
    /// Model prediction σ(L, |h̄(t)|).
    pub sigma_macro: f64,
    /// Counted in the score: |h̄| below h_crit and both volatilities positive.
    pub included: bool,
}

impl ComparisonPoint {
    pub fn log_ratio(&self) -> f64 {
        (self.sigma_micro / self.sigma_macro).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub side: usize,
    pub window: usize,
    pub h_crit: f64,
    pub used: usize,
    pub excluded: usize,
    pub median_abs_log_ratio: f64,
    pub mean_log_ratio: f64,
    /// Pearson correlation of ln σ̄ and ln σ_model over the used points;
    /// `None` if either is constant.
    pub correlation: Option<f64>,
    pub points: Vec<ComparisonPoint>,
}

/// Compares the rolling volatility of a microscopic run with the model
/// evaluated at the recorded smoothed field. Points with |h̄| ≥ h_crit are
/// excluded from the score.
pub fn compare_with<V: VolatilityModel + ?Sized>(
    records: &[SeriesRecord],
    model: &V,
    side: usize,
    h_crit: f64,
) -> Result<ComparisonReport> {
    let window = SMOOTHING_WINDOW;
    if records.len() < window {
        return Err(Error::InsufficientData(format!(
            "comparison needs at least {window} steps, got {}",
            records.len()
        )));
    }
    let dm: Vec<f64> = records.iter().map(|r| r.dm).collect();
    let rolling = rolling_volatility(&dm, window);
    let points: Vec<ComparisonPoint> = records
        .iter()
        .zip(rolling)
        .filter_map(|(r, s)| {
            let sigma_micro = s?;
            let sigma_macro = model.sigma(side, r.h_smoothed);
            Some(ComparisonPoint {
                t: r.t,
                h_smoothed: r.h_smoothed,
                sigma_micro,
                sigma_macro,
                included: r.h_smoothed.abs() < h_crit && sigma_micro > 0.0 && sigma_macro > 0.0,
            })
        })
        .collect();
    let used: Vec<&ComparisonPoint> = points.iter().filter(|p| p.included).collect();
    if used.is_empty() {
        return Err(Error::InsufficientData("no comparison points below h_crit".into()));
    }
    let ratios: Vec<f64> = used.iter().map(|p| p.log_ratio()).collect();
    let mut abs: Vec<f64> = ratios.iter().map(|r| r.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let median_abs_log_ratio = median_sorted(&abs);
    let lm: Vec<f64> = used.iter().map(|p| p.sigma_micro.ln()).collect();
    let lp: Vec<f64> = used.iter().map(|p| p.sigma_macro.ln()).collect();
    Ok(ComparisonReport {
        side,
        window,
        h_crit,
        used: used.len(),
        excluded: points.len() - used.len(),
        median_abs_log_ratio,
        mean_log_ratio: stats::mean(&ratios),
        correlation: pearson(&lm, &lp),
        points,
    })
}

/// [`compare_with`] using the surface's own h_crit for `side`.
pub fn compare_micro_macro(
    records: &[SeriesRecord],
    surface: &VolatilitySurface,
    side: usize,
) -> Result<ComparisonReport> {
    compare_with(records, surface, side, surface.h_crit_for(side))
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let constant = |xs: &[f64]| xs.iter().all(|&x| x == xs[0]);
    if a.is_empty() || constant(a) || constant(b) {
        return None;
    }
    let (ma, mb) = (stats::mean(a), stats::mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    Some(sab / (saa * sbb).sqrt())
}

/// Superposition of half-normal densities, one per time step:
/// ρ(x) = (1/T) Σ_t √2 / (√π σ_t) · exp(−x² / 2σ_t²).
pub fn return_density_at(sigmas: &[f64], x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    sigmas.iter().map(|&s| c / s * (-0.5 * (x / s).powi(2)).exp()).sum::<f64>() / sigmas.len() as f64
}

/// The half-normal mixture averaged over bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensity {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl MixtureDensity {
    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| (w[0] * w[1]).sqrt()).collect()
    }

    /// Probability mass inside the edges.
    pub fn integral(&self) -> f64 {
        self.density.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }
}

/// Exact bin averages of the mixture, from the half-normal CDF erf(x/√2σ).
pub fn mixture_density(sigmas: &[f64], edges: &[f64]) -> Result<MixtureDensity> {
    if sigmas.is_empty() {
        return Err(Error::InsufficientData("mixture needs at least one volatility".into()));
    }
    if let Some(s) = sigmas.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter(format!("volatility {s} must be positive")));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) || edges[0] < 0.0 {
        return Err(Error::InvalidParameter("bin edges must be non-negative and increasing".into()));
    }
    let mut mass = vec![0.0; edges.len() - 1];
    let mut cdf = vec![0.0; edges.len()];
    for &s in sigmas {
        let k = 1.0 / (std::f64::consts::SQRT_2 * s);
        for (c, &e) in cdf.iter_mut().zip(edges) {
            *c = libm::erf(e * k);
        }
        for (m, w) in mass.iter_mut().zip(cdf.windows(2)) {
            *m += w[1] - w[0];
        }
    }
    let t = sigmas.len() as f64;
    let density = mass.iter().zip(edges.windows(2)).map(|(m, w)| m / (t * (w[1] - w[0]))).collect();
    Ok(MixtureDensity { edges: edges.to_vec(), density })
}

/// Mixture density for σ_t = σ(L, |h̄(t)|) over a smoothed-field series.
pub fn return_density<V: VolatilityModel + ?Sized>(
    model: &V,
    side: usize,
    h_series: &[f64],
    edges: &[f64],
) -> Result<MixtureDensity> {
    let sigmas: Vec<f64> = h_series.iter().map(|&h| model.sigma(side, h)).collect();
    mixture_density(&sigmas, edges)
}

/// Width in decades of the |Δm| window checked by [`density_agreement`].
pub const AGREEMENT_DECADES: f64 = 3.0;
/// Bins with fewer samples are left out of the pointwise check.
pub const AGREEMENT_MIN_COUNT: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityAgreement {
    /// Median of the nonzero |Δm|, the geometric center of the window.
    pub center: f64,
    pub window: (f64, f64),
    pub bins_checked: usize,
    /// Extremes of empirical / predicted over the checked bins.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub factor: f64,
    pub holds: bool,
}

/// Pointwise ratio of an empirical |Δm| density to a mixture prediction on
/// the same bins, over the [`AGREEMENT_DECADES`] centered on the median
/// nonzero |Δm|. The empirical density is rescaled to all samples, so the
/// mass of exact zeros is accounted for as in the mixture.
pub fn density_agreement(
    returns: &[f64],
    empirical: &DensityEstimate,
    predicted: &MixtureDensity,
    factor: f64,
) -> Result<DensityAgreement> {
    if empirical.edges != predicted.edges {
        return Err(Error::InvalidParameter("empirical and predicted densities use different bins".into()));
    }
    let nonzero: Vec<f64> = returns.iter().map(|x| x.abs()).filter(|&x| x > 0.0).collect();
    if nonzero.is_empty() {
        return Err(Error::InsufficientData("no nonzero returns".into()));
    }
    let center = stats::median(&nonzero);
    let half = 10f64.powf(AGREEMENT_DECADES / 2.0);
    let window = (center / half, center * half);
    let scale = empirical.total as f64 / (empirical.total + empirical.zero_count) as f64;
    let ratios: Vec<f64> = (0..empirical.len())
        .filter(|&i| {
            empirical.edges[i] >= window.0
                && empirical.edges[i + 1] <= window.1
                && empirical.counts[i] >= AGREEMENT_MIN_COUNT
                && predicted.density[i] > 0.0
        })
        .map(|i| scale * empirical.density[i] / predicted.density[i])
        .collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientData("no populated bins inside the agreement window".into()));
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DensityAgreement {
        center,
        window,
        bins_checked: ratios.len(),
        min_ratio,
        max_ratio,
        factor,
        holds: max_ratio <= factor && min_ratio >= 1.0 / factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macro_model::ConstantVolatility;

    /// Composite Simpson rule on [a, b] with n (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn point_density_integrates_to_one() {
        let sigmas = [1e-3, 2.5e-3, 4e-2, 4e-2, 7e-3];
        let total = simpson(|x| return_density_at(&sigmas, x), 0.0, 0.5, 200_000);
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn single_sigma_is_half_normal() {
        let s = 0.02;
        for x in [0.0, 0.01, 0.05] {
            let half_normal = 2.0 / (s * (2.0 * std::f64::consts::PI).sqrt()) * (-x * x / (2.0 * s * s)).exp();
            assert!((return_density_at(&[s], x) - half_normal).abs() < 1e-10);
        }
    }

    #[test]
    fn two_valued_sigma_is_equal_mixture() {
        let x = 0.013;
        let mixed = return_density_at(&[0.01, 0.03, 0.01, 0.03], x);
        let expected = 0.5 * (return_density_at(&[0.01], x) + return_density_at(&[0.03], x));
        assert!((mixed - expected).abs() < 1e-12);
    }

    #[test]
    fn bin_averages_match_quadrature() {
        let sigmas = [1e-3, 5e-3];
        let edges: Vec<f64> = (0..=40).map(|i| i as f64 * 5e-4).collect();
        let md = mixture_density(&sigmas, &edges).unwrap();
        for (w, d) in edges.windows(2).zip(&md.density) {
            let avg = simpson(|x| return_density_at(&sigmas, x), w[0], w[1], 200) / (w[1] - w[0]);
            assert!((avg - d).abs() < 1e-8 * avg.max(1.0));
        }
        let wide: Vec<f64> = (0..=100).map(|i| i as f64 * 1e-3).collect();
        assert!((mixture_density(&sigmas, &wide).unwrap().integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_rejects_bad_input() {
        assert!(mixture_density(&[], &[0.0, 1.0]).is_err());
        assert!(mixture_density(&[0.0], &[0.0, 1.0]).is_err());
        assert!(mixture_density(&[1.0], &[1.0, 0.5]).is_err());
    }

    fn records_with(dm: &[f64], h: f64) -> Vec<SeriesRecord> {
        let mut m = 0.0;
        dm.iter()
            .enumerate()
            .map(|(i, &d)| {
                m += d;
                SeriesRecord { t: i as u64 + 1, m, dm: d, lb: None, h_smoothed: h }
            })
            .collect()
    }

    #[test]
    fn rolling_volatility_windows() {
        let v = rolling_volatility(&[1.0, -1.0, 1.0, -1.0], 2);
        assert_eq!(v, vec![None, Some(1.0), Some(1.0), Some(1.0)]);
    }

    #[test]
    fn self_consistent_comparison_has_zero_log_ratio() {
        let dm: Vec<f64> = (0..300).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let rep = compare_with(&records_with(&dm, 0.5), &ConstantVolatility(0.01), 16, 1.86).unwrap();
        assert_eq!(rep.used, 300 - SMOOTHING_WINDOW + 1);
        assert!(rep.median_abs_log_ratio.abs() < 1e-12);
        assert!(rep.correlation.is_none());
    }

    #[test]
    fn supercritical_points_are_excluded() {
        let dm: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        let mut recs = records_with(&dm, 0.5);
        for r in recs.iter_mut().skip(50) {
            r.h_smoothed = -2.5;
        }
        let rep = compare_with(&recs, &ConstantVolatility(0.02), 16, 1.86).unwrap();
        assert_eq!(rep.used, 50 - SMOOTHING_WINDOW + 1);
        assert_eq!(rep.excluded, 50);
        assert!((rep.median_abs_log_ratio - 2f64.ln()).abs() < 1e-12);
        assert!(compare_with(&recs[..10], &ConstantVolatility(0.02), 16, 1.86).is_err());
    }

    #[test]
    fn gaussian_returns_agree_with_their_own_mixture() {
        use rand::Rng;
        let mut r = crate::rng::stream(11, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| 0.01 * r.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let est = stats::density(&xs, &stats::Binning::per_decade(10)).unwrap();
        let good = mixture_density(&[0.01], &est.edges).unwrap();
        let a = density_agreement(&xs, &est, &good, 2.0).unwrap();
        assert!(a.holds && a.bins_checked > 10, "{a:?}");
        assert!((a.center / (0.01 * 0.6745) - 1.0).abs() < 0.05);
        let bad = mixture_density(&[0.04], &est.edges).unwrap();
        assert!(!density_agreement(&xs, &est, &bad, 2.0).unwrap().holds);
        let other = mixture_density(&[0.01], &[0.001, 0.002]).unwrap();
        assert!(density_agreement(&xs, &est, &other, 2.0).is_err());
    }
}
