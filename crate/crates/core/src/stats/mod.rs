//! Time-series analytics shared by microscopic and macroscopic runs.
//!
//! Every function here is a pure function of its input series.

mod density;
mod powerlaw;
mod zero_crossing;

pub use density::{density, Binning, DensityEstimate, RETURN_BINS_PER_DECADE};
pub use powerlaw::{powerlaw_fit, tail_fit, PowerLawFit, TailFit, POOR_FIT_REDUCED_CHI2, TAIL_RANGE_IN_SIGMAS};
pub use zero_crossing::{
    cutoff_scaling_check, return_to_zero, zero_crossing_times, CutoffPoint, CutoffScalingReport,
    ReturnToZeroOptions, ZeroCrossingStats, ZERO_CROSSING_CONVENTION,
};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median, NaN for an empty slice.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    central_moment(xs, 2).sqrt()
}

pub fn central_moment(xs: &[f64], order: i32) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(order)).sum::<f64>() / xs.len() as f64
}

/// Kurtosis m₄/m₂² (3 for a Gaussian).
pub fn kurtosis(xs: &[f64]) -> f64 {
    let m2 = central_moment(xs, 2);
    central_moment(xs, 4) / (m2 * m2)
}

/// Sample skewness m₃/m₂^{3/2}.
pub fn skewness(xs: &[f64]) -> f64 {
    central_moment(xs, 3) / central_moment(xs, 2).powf(1.5)
}

/// Normalized autocorrelation for lags 0..=max_lag.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if xs.len() <= 10 * max_lag || xs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "autocorrelation to lag {max_lag} needs more than {} samples, got {}",
            10 * max_lag.max(1),
            xs.len()
        )));
    }
    let mu = mean(xs);
    let centered: Vec<f64> = xs.iter().map(|x| x - mu).collect();
    let var: f64 = centered.iter().map(|x| x * x).sum();
    if var == 0.0 {
        return Err(Error::InsufficientData("constant series has no autocorrelation".into()));
    }
    Ok((0..=max_lag)
        .map(|lag| centered.iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / var)
        .collect())
}

/// Lag-1 autocorrelation, NaN when undefined.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    autocorrelation(xs, 1).map(|r| r[1]).unwrap_or(f64::NAN)
}

/// Ordinary least squares y = a + b·x; returns (intercept, slope).
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Weighted least squares y = a + b·x; returns (intercept, slope).
pub(crate) fn weighted_linear_fit(xs: &[f64], ys: &[f64], ws: &[f64]) -> (f64, f64) {
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        sxy += w * (x - mx) * (y - my);
        sxx += w * (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
