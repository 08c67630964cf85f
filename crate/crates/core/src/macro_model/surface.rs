use serde::{Deserialize, Serialize};

use super::{SurfaceQuery, VolatilityModel};
use crate::error::{Error, Result};
use crate::frozen::SweepResult;

/// Cells with mean l_b / L² above this are classified as disordered.
/// Ordered configurations have l_b of a few L, disordered ones a sizable
/// fraction of the 2L² bonds.
pub const DISORDERED_BORDER_DENSITY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    /// σ ∝ L^{-ordered} below h_crit.
    pub ordered: f64,
    /// σ ∝ L^{-disordered} above h_crit.
    pub disordered: f64,
}

impl Default for ScalingExponents {
    fn default() -> Self {
        ScalingExponents { ordered: 1.5, disordered: 1.0 }
    }
}

/// Tabulated σ(h) for one lattice size, monotone in h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCurve {
    #[serde(rename = "L")]
    pub side: usize,
    pub h: Vec<f64>,
    pub sigma: Vec<f64>,
    pub h_crit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData {
    #[serde(rename = "L_values")]
    pub l_values: Vec<usize>,
    pub curves: Vec<SurfaceCurve>,
    pub h_crit: f64,
    pub exponents: ScalingExponents,
}

/// σ(L, h) built from frozen-field sweeps.
///
/// Per L, ln σ is made non-decreasing in h by pooling adjacent violators and
/// then interpolated with a monotone piecewise cubic. Other sizes are
/// rescaled from the nearest tabulated L with the ordered or disordered
/// exponent depending on which side of that curve's h_crit the query lies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SurfaceData", into = "SurfaceData")]
pub struct VolatilitySurface {
    data: SurfaceData,
    interps: Vec<Pchip>,
}

impl TryFrom<SurfaceData> for VolatilitySurface {
    type Error = Error;

    fn try_from(mut data: SurfaceData) -> Result<Self> {
        if data.curves.is_empty() {
            return Err(Error::InvalidParameter("surface has no curves".into()));
        }
        data.curves.sort_by_key(|c| c.side);
        let mut interps = Vec::with_capacity(data.curves.len());
        for c in &data.curves {
            if c.h.len() != c.sigma.len() || c.h.len() < 2 {
                return Err(Error::InvalidParameter(format!(
                    "curve for L = {} needs at least 2 matching (h, sigma) points",
                    c.side
                )));
            }
            if c.h.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter(format!("h grid for L = {} is not increasing", c.side)));
            }
            if c.sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
                return Err(Error::InvalidParameter(format!("non-positive sigma in curve L = {}", c.side)));
            }
            if c.sigma.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParameter(format!("sigma for L = {} is not monotone", c.side)));
            }
            let ln: Vec<f64> = c.sigma.iter().map(|s| s.ln()).collect();
            interps.push(Pchip::new(c.h.clone(), ln));
        }
        data.l_values = data.curves.iter().map(|c| c.side).collect();
        Ok(VolatilitySurface { data, interps })
    }
}

impl From<VolatilitySurface> for SurfaceData {
    fn from(s: VolatilitySurface) -> Self {
        s.data
    }
}

/// Builds the surface from every L of the sweep that covers both phases.
pub fn fit_surface(sweep: &SweepResult) -> Result<VolatilitySurface> {
    let mut curves = Vec::new();
    let (mut any_ordered, mut any_disordered) = (false, false);
    for side in sweep.sides() {
        let mut points: Vec<(f64, f64, bool)> = sweep
            .summaries()
            .filter(|s| s.side == side && s.sigma > 0.0)
            .map(|s| {
                let disordered = s.mean_lb / (side * side) as f64 > DISORDERED_BORDER_DENSITY;
                (s.h0, s.sigma, disordered)
            })
            .collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(first_dis) = points.iter().position(|p| p.2) else {
            any_ordered |= !points.is_empty();
            continue;
        };
        any_disordered = true;
        if first_dis == 0 {
            continue;
        }
        any_ordered = true;
        let h_crit = 0.5 * (points[first_dis - 1].0 + points[first_dis].0);
        let h: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ln: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
        // Points PAVA leaves alone keep their measured value bit for bit.
        let sigma = isotonic_increasing(&ln)
            .into_iter()
            .zip(&points)
            .map(|(fit, p)| if fit == p.1.ln() { p.1 } else { fit.exp() })
            .collect();
        curves.push(SurfaceCurve { side, h, sigma, h_crit });
    }
    if curves.is_empty() {
        return Err(match (any_ordered, any_disordered) {
            (false, _) => Error::MissingPhase("ordered"),
            (_, false) => Error::MissingPhase("disordered"),
            _ => Error::InsufficientData("no single L covers both phases".into()),
        });
    }
    let h_crit = curves.last().unwrap().h_crit;
    VolatilitySurface::try_from(SurfaceData {
        l_values: Vec::new(),
        curves,
        h_crit,
        exponents: ScalingExponents::default(),
    })
}

impl VolatilitySurface {
    pub fn data(&self) -> &SurfaceData {
        &self.data
    }

    pub fn curves(&self) -> &[SurfaceCurve] {
        &self.data.curves
    }

    /// Transition field of the largest tabulated L.
    pub fn h_crit(&self) -> f64 {
        self.data.h_crit
    }

    pub fn exponents(&self) -> ScalingExponents {
        self.data.exponents
    }

    /// h_crit of the curve used for queries at `side`.
    pub fn h_crit_for(&self, side: usize) -> f64 {
        self.data.curves[self.nearest(side)].h_crit
    }

    /// Tabulated h range of the curve used at `side`.
    pub fn h_range(&self, side: usize) -> (f64, f64) {
        let c = &self.data.curves[self.nearest(side)];
        (c.h[0], *c.h.last().unwrap())
    }

    fn nearest(&self, side: usize) -> usize {
        let target = (side.max(1) as f64).ln();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, c) in self.data.curves.iter().enumerate() {
            let d = ((c.side as f64).ln() - target).abs();
            // Ties go to the larger L.
            if d <= best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

impl VolatilityModel for VolatilitySurface {
    fn query(&self, side: usize, h: f64) -> SurfaceQuery {
        let i = self.nearest(side);
        let curve = &self.data.curves[i];
        let h = h.abs();
        let (lo, hi) = (curve.h[0], *curve.h.last().unwrap());
        let clamped = !(lo..=hi).contains(&h);
        let hq = h.clamp(lo, hi);
        let base = match curve.h.iter().position(|&x| x == hq) {
            Some(k) => curve.sigma[k],
            None => self.interps[i].eval(hq).exp(),
        };
        let sigma = if curve.side == side {
            base
        } else {
            let e = if hq < curve.h_crit { self.data.exponents.ordered } else { self.data.exponents.disordered };
            base * (curve.side as f64 / side as f64).powf(e)
        };
        SurfaceQuery { sigma, clamped, source_side: curve.side }
    }
}

/// Least-squares non-decreasing fit (pool adjacent violators, unit weights).
pub fn isotonic_increasing(ys: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() >= 2 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s0 / n0 as f64 <= s1 / n1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s0 + s1, n0 + n1);
        }
    }
    blocks.into_iter().flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n)).collect()
}

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Butland slopes).
#[derive(Debug, Clone, PartialEq)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Pchip { x, y, d }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// Three-point end slope, limited to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
