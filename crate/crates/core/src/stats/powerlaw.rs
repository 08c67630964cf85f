use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{weighted_linear_fit, DensityEstimate};
use crate::error::{Error, Result};
use crate::rng;

/// Fits with a reduced χ² (Poisson errors on log density) above this are
/// flagged as poor.
pub const POOR_FIT_REDUCED_CHI2: f64 = 4.0;

const BOOTSTRAP_ROUNDS: usize = 500;
const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// Slope of log density against log |x| (negative for a decaying tail).
    pub exponent: f64,
    /// Bootstrap standard error of the slope.
    pub stderr: f64,
    pub prefactor: f64,
    pub bins_used: usize,
    /// RMS residual in log10 units.
    pub residual_rms: f64,
    pub reduced_chi2: f64,
    pub poor: bool,
}

impl PowerLawFit {
    /// Fitted density at x.
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Least-squares slope of log10 density on log10 bin center over the bins
/// with nonzero counts whose centers fall in `range`. Bins are weighted by
/// their counts, the inverse Poisson variance of log density.
pub fn powerlaw_fit(estimate: &DensityEstimate, range: (f64, f64)) -> Result<PowerLawFit> {
    let centers = estimate.centers();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut counts = Vec::new();
    for ((&c, &d), &x) in estimate.counts.iter().zip(&estimate.density).zip(&centers) {
        if c > 0 && x >= range.0 && x <= range.1 {
            xs.push(x.log10());
            ys.push(d.log10());
            counts.push(c as f64);
        }
    }
    if xs.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least 5 occupied bins in [{}, {}], found {}",
            range.0,
            range.1,
            xs.len()
        )));
    }
    let (intercept, slope) = weighted_linear_fit(&xs, &ys, &counts);
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / xs.len() as f64).sqrt();
    // Poisson: sd(log10 n) ≈ 1 / (ln 10 · √n).
    let chi2: f64 = residuals
        .iter()
        .zip(&counts)
        .map(|(r, &n)| r * r * n * std::f64::consts::LN_10.powi(2))
        .sum();
    let reduced_chi2 = chi2 / (xs.len() - 2) as f64;

    let mut rng = rng::stream(BOOTSTRAP_SEED, 0);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_ROUNDS);
    let mut bx = vec![0.0; xs.len()];
    let mut by = vec![0.0; xs.len()];
    let mut bw = vec![0.0; xs.len()];
    for _ in 0..BOOTSTRAP_ROUNDS {
        for i in 0..xs.len() {
            let j = rng.random_range(0..xs.len());
            bx[i] = xs[j];
            by[i] = ys[j];
            bw[i] = counts[j];
        }
        let (_, s) = weighted_linear_fit(&bx, &by, &bw);
        if s.is_finite() {
            slopes.push(s);
        }
    }
    let stderr = super::std_dev(&slopes);

    Ok(PowerLawFit {
        exponent: slope,
        stderr,
        prefactor: 10f64.powf(intercept),
        bins_used: xs.len(),
        residual_rms,
        reduced_chi2,
        poor: reduced_chi2 > POOR_FIT_REDUCED_CHI2,
    })
}

/// Tail fit window for returns, in units of their standard deviation.
pub const TAIL_RANGE_IN_SIGMAS: (f64, f64) = (2.0, 10.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Standard deviation of the returns, zeros included.
    pub sigma: f64,
    pub range: (f64, f64),
    pub fit: PowerLawFit,
}

/// Power-law fit of the |return| density over [`TAIL_RANGE_IN_SIGMAS`].
pub fn tail_fit(returns: &[f64], estimate: &DensityEstimate) -> Result<TailFit> {
    let sigma = super::std_dev(returns);
    if !(sigma > 0.0) {
        return Err(Error::InsufficientData("returns have zero variance".into()));
    }
    let range = (TAIL_RANGE_IN_SIGMAS.0 * sigma, TAIL_RANGE_IN_SIGMAS.1 * sigma);
    Ok(TailFit { sigma, range, fit: powerlaw_fit(estimate, range)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{density, Binning};
    use rand_distr::{Distribution, Exp1};

    /// Inverse-CDF sampling of ρ(x) ∝ x^{-a} on [1, ∞).
    fn pareto_samples(a: f64, n: usize, seed: u64) -> Vec<f64> {
        let mut r = rng::stream(seed, 0);
        (0..n).map(|_| (1.0 - r.random::<f64>()).powf(-1.0 / (a - 1.0))).collect()
    }

    #[test]
    fn recovers_synthetic_exponents() {
        for a in [2.0, 3.0, 4.0] {
            let xs = pareto_samples(a, 200_000, a as u64);
            let est = density(&xs, &Binning::per_decade(10)).unwrap();
            let fit = powerlaw_fit(&est, (1.0, 30.0)).unwrap();
            assert!((fit.exponent + a).abs() < 0.2, "a = {a}: {}", fit.exponent);
            assert!(fit.stderr < 0.2);
            assert!(!fit.poor, "reduced chi2 {}", fit.reduced_chi2);
        }
    }

    #[test]
    fn exponential_tail_is_flagged_poor() {
        let mut r = rng::stream(8, 0);
        let xs: Vec<f64> = (0..200_000).map(|_| Exp1.sample(&mut r)).collect();
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        let fit = powerlaw_fit(&est, (0.05, 8.0)).unwrap();
        assert!(fit.poor, "reduced chi2 {}", fit.reduced_chi2);
    }

    #[test]
    fn too_few_bins_is_an_error() {
        let xs = pareto_samples(3.0, 1000, 1);
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        assert!(matches!(powerlaw_fit(&est, (1.0, 1.5)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn tail_window_scales_with_sigma() {
        let xs = pareto_samples(3.5, 100_000, 5);
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        let t = tail_fit(&xs, &est).unwrap();
        assert_eq!(t.range, (2.0 * t.sigma, 10.0 * t.sigma));
        assert!((t.fit.exponent + 3.5).abs() < 0.3, "{}", t.fit.exponent);
        assert!(tail_fit(&[1.0; 10], &est).is_err());
    }

    #[test]
    fn fit_is_deterministic() {
        let xs = pareto_samples(3.0, 10_000, 2);
        let est = density(&xs, &Binning::per_decade(10)).unwrap();
        assert_eq!(powerlaw_fit(&est, (1.0, 20.0)), powerlaw_fit(&est, (1.0, 20.0)));
    }
}
