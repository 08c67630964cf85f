//! Return-to-zero (bull/bear duration) statistics of a magnetization series.

use serde::{Deserialize, Serialize};

use super::{linear_fit, Binning, DensityEstimate};
use crate::error::{Error, Result};

pub const ZERO_CROSSING_CONVENTION: &str = "crossing at step t when m(t) = 0 and m(t-1) != 0, \
     or when m(t-1), m(t) are nonzero with opposite signs; durations are differences of \
     consecutive crossing steps";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnToZeroOptions {
    pub bins_per_decade: usize,
    /// Duration range used for the power-law fits.
    pub fit_range: (f64, f64),
    /// The cutoff is where the density drops below this fraction of the
    /// power-law extrapolation.
    pub cutoff_fraction: f64,
    /// Sparse histogram bins are merged until they hold this many durations.
    pub min_bin_count: u64,
    /// Fewer durations than this mark the cutoff unreliable.
    pub min_durations: usize,
}

impl Default for ReturnToZeroOptions {
    fn default() -> Self {
        ReturnToZeroOptions {
            bins_per_decade: 10,
            fit_range: (2.0, 64.0),
            cutoff_fraction: 0.1,
            min_bin_count: 5,
            min_durations: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCrossingStats {
    /// Sorted durations between consecutive crossings.
    pub durations: Vec<u64>,
    pub crossings: usize,
    /// Duration density, sparse bins merged.
    pub histogram: DensityEstimate,
    /// Decay exponent γ of the duration density, ρ(τ) ∝ τ^{-γ}.
    pub density_exponent: Option<f64>,
    /// Decay exponent of the survival function P(τ' ≥ τ).
    pub survival_exponent: Option<f64>,
    /// Prefactor of the density power law (natural units).
    pub density_prefactor: Option<f64>,
    pub t_cutoff: Option<f64>,
    pub reliable: bool,
    pub convention: String,
    pub options: ReturnToZeroOptions,
}

/// Steps at which m(t) crosses or hits zero, per [`ZERO_CROSSING_CONVENTION`].
pub fn zero_crossing_times(m: &[f64]) -> Vec<usize> {
    let sign = |x: f64| {
        if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut times = Vec::new();
    for t in 1..m.len() {
        let (prev, cur) = (sign(m[t - 1]), sign(m[t]));
        if prev != 0 && (cur == 0 || cur != prev) {
            times.push(t);
        }
    }
    times
}

pub fn return_to_zero(m: &[f64], options: &ReturnToZeroOptions) -> Result<ZeroCrossingStats> {
    let times = zero_crossing_times(m);
    if times.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "return-to-zero statistics need at least 2 crossings, found {}",
            times.len()
        )));
    }
    let mut durations: Vec<u64> = times.windows(2).map(|w| (w[1] - w[0]) as u64).collect();
    durations.sort_unstable();

    let values: Vec<f64> = durations.iter().map(|&d| d as f64).collect();
    let binning = Binning::per_decade(options.bins_per_decade).with_quantum(1.0);
    let raw = super::density(&values, &binning)?;
    let histogram = raw.merge_sparse(options.min_bin_count);

    let (lo, hi) = options.fit_range;
    let centers = histogram.centers();
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for ((&c, &d), &x) in histogram.counts.iter().zip(&histogram.density).zip(&centers) {
        if c > 0 && x >= lo && x <= hi {
            lx.push(x.ln());
            ly.push(d.ln());
        }
    }
    let density_fit = (lx.len() >= 3).then(|| linear_fit(&lx, &ly));
    let density_exponent = density_fit.map(|(_, s)| -s);
    let density_prefactor = density_fit.map(|(a, _)| a.exp());

    let survival_exponent = survival_exponent(&durations, lo, hi);

    let t_cutoff = density_fit.and_then(|(a, s)| {
        let ratio = |i: usize| histogram.density[i] / (a + s * centers[i].ln()).exp();
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..centers.len() {
            if centers[i] <= hi {
                continue;
            }
            let r = ratio(i);
            if r < options.cutoff_fraction {
                // Interpolate the crossing in log-log space from the last bin
                // still above the threshold.
                return Some(match prev {
                    Some((x0, r0)) if r0 > options.cutoff_fraction && r > 0.0 => {
                        let (lx0, lx1) = (x0.ln(), centers[i].ln());
                        let (lr0, lr1) = (r0.ln(), r.ln());
                        let f = (options.cutoff_fraction.ln() - lr0) / (lr1 - lr0);
                        (lx0 + f * (lx1 - lx0)).exp()
                    }
                    _ => centers[i],
                });
            }
            prev = Some((centers[i], r));
        }
        None
    });

    Ok(ZeroCrossingStats {
        crossings: times.len(),
        reliable: durations.len() >= options.min_durations && t_cutoff.is_some(),
        durations,
        histogram,
        density_exponent,
        survival_exponent,
        density_prefactor,
        t_cutoff,
        convention: ZERO_CROSSING_CONVENTION.to_string(),
        options: *options,
    })
}

/// Slope of log P(τ' ≥ τ) against log τ at log-spaced τ in [lo, hi].
fn survival_exponent(sorted: &[u64], lo: f64, hi: f64) -> Option<f64> {
    let n = sorted.len() as f64;
    let points = 20;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=points {
        let tau = lo * (hi / lo).powf(i as f64 / points as f64);
        let below = sorted.partition_point(|&d| (d as f64) < tau);
        let surviving = sorted.len() - below;
        if surviving > 0 {
            xs.push(tau.ln());
            ys.push((surviving as f64 / n).ln());
        }
    }
    (xs.len() >= 3).then(|| -linear_fit(&xs, &ys).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPoint {
    pub side: usize,
    pub alpha: f64,
    pub t_cutoff: f64,
}

impl CutoffPoint {
    /// Expected time scale L³/α².
    pub fn time_scale(&self) -> f64 {
        (self.side as f64).powi(3) / (self.alpha * self.alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffScalingReport {
    pub points: Vec<CutoffPoint>,
    /// Slope of log T_cutoff against log(L³/α²); 1 under the expected law.
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub tolerance: f64,
    pub consistent: bool,
}

/// Regresses log T_cutoff on log(L³/α²).
pub fn cutoff_scaling_check(points: &[CutoffPoint], tolerance: f64) -> Result<CutoffScalingReport> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "cutoff scaling needs at least 3 (L, alpha) pairs, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.time_scale().ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.t_cutoff.ln()).collect();
    let (intercept, slope) = linear_fit(&xs, &ys);
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    Ok(CutoffScalingReport {
        points: points.to_vec(),
        slope,
        intercept,
        residual_rms,
        tolerance,
        consistent: (slope - 1.0).abs() <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn crossing_convention() {
        // + + - - 0 0 + 0 +  → crossings at 2 (sign change), 4 (hits zero),
        // 7 (hits zero again). Leaving zero is not a crossing.
        let m = [1.0, 2.0, -1.0, -3.0, 0.0, 0.0, 1.0, 0.0, 2.0];
        assert_eq!(zero_crossing_times(&m), vec![2, 4, 7]);
    }

    #[test]
    fn durations_count_is_crossings_minus_one() {
        let mut r = rng::stream(12, 0);
        let mut m = 0.0;
        let series: Vec<f64> = (0..5000)
            .map(|_| {
                m += r.random::<f64>() - 0.5;
                m
            })
            .collect();
        let stats = return_to_zero(&series, &ReturnToZeroOptions::default()).unwrap();
        assert_eq!(stats.durations.len(), stats.crossings - 1);
        assert!(stats.durations.iter().all(|&d| d > 0));
        assert!(stats.durations.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn needs_two_crossings() {
        assert!(return_to_zero(&[1.0, 2.0, -1.0, -2.0], &ReturnToZeroOptions::default()).is_err());
    }

    #[test]
    fn coin_flip_walk_survival_exponent_is_one_half() {
        let mut r = rng::stream(13, 0);
        let mut m = 0i64;
        let series: Vec<f64> = (0..1_000_000)
            .map(|_| {
                m += if r.random::<bool>() { 1 } else { -1 };
                m as f64
            })
            .collect();
        let opts = ReturnToZeroOptions { fit_range: (10.0, 10_000.0), ..Default::default() };
        let stats = return_to_zero(&series, &opts).unwrap();
        let s = stats.survival_exponent.unwrap();
        assert!((s - 0.5).abs() < 0.1, "survival exponent {s}");
        let d = stats.density_exponent.unwrap();
        assert!((d - 1.5).abs() < 0.15, "density exponent {d}");
    }

    #[test]
    fn exponential_cutoff_is_located() {
        // Durations drawn from τ^{-3/2} e^{-τ/T0} on the integers by
        // rejection; the 10% departure point sits at T0 ln 10.
        let t0 = 500.0;
        let mut r = rng::stream(14, 0);
        let mut durations = Vec::new();
        while durations.len() < 200_000 {
            let u: f64 = 1.0 - r.random::<f64>();
            let tau = (u.powf(-2.0)).floor(); // P(τ ≥ x) ∝ x^{-1/2}
            if tau >= 1.0 && r.random::<f64>() < (-tau / t0).exp() {
                durations.push(tau as u64);
            }
        }
        // Rebuild a series with exactly these durations.
        let mut series = Vec::new();
        let mut sign = 1.0;
        series.push(-1.0);
        for &d in &durations {
            for _ in 0..d {
                series.push(sign);
            }
            sign = -sign;
        }
        let stats = return_to_zero(&series, &ReturnToZeroOptions::default()).unwrap();
        let cut = stats.t_cutoff.unwrap();
        let expected = t0 * 10f64.ln();
        assert!((cut / expected).ln().abs() < 0.25f64.ln_1p(), "cutoff {cut} vs {expected}");
        assert!(stats.reliable);
    }

    #[test]
    fn scaling_check_examples() {
        let exact: Vec<CutoffPoint> = [(32, 10.0), (128, 10.0), (128, 20.0), (512, 80.0)]
            .iter()
            .map(|&(side, alpha)| CutoffPoint {
                side,
                alpha,
                t_cutoff: (side as f64).powi(3) / (alpha * alpha),
            })
            .collect();
        let rep = cutoff_scaling_check(&exact, 0.15).unwrap();
        assert!((rep.slope - 1.0).abs() < 1e-12 && rep.residual_rms < 1e-12);

        let flat: Vec<CutoffPoint> = exact.iter().map(|p| CutoffPoint { t_cutoff: 100.0, ..*p }).collect();
        let rep = cutoff_scaling_check(&flat, 0.15).unwrap();
        assert!(rep.slope.abs() < 1e-12);
        assert!(!rep.consistent);

        assert!(cutoff_scaling_check(&exact[..2], 0.15).is_err());
    }
}
