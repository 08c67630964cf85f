//! Constant-field experiments.
//!
//! With the global field frozen at h₀ the lattice settles into an
//! equilibrium whose magnetization increments have a well defined spread
//! σ(L, h₀). Sweeping (L, h₀) maps out the volatility surface used by the
//! macroscopic model.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FieldMode, InitState, ModelParams, SeriesRecord, Simulation, UpdaterKind};
use crate::rng;
use crate::stats;

pub const DEFAULT_EQUILIBRATION_STEPS: usize = 1000;
pub const DEFAULT_MEASUREMENT_STEPS: usize = 10_000;
pub const MIN_MEASUREMENT_STEPS: usize = 100;

/// Relative spread (max − min)/mean below which a collapse holds.
pub const DEFAULT_COLLAPSE_TOLERANCE: f64 = 0.15;

/// A rise of ln σ steeper than this per unit h counts as the jump.
pub const TRANSITION_LOG_SLOPE_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenRunConfig {
    pub params: ModelParams,
    pub equilibration_steps: usize,
    pub measurement_steps: usize,
}

impl FrozenRunConfig {
    /// Stripe start with pinned columns and the default step counts.
    pub fn new(side: usize, h0: f64) -> Self {
        FrozenRunConfig {
            params: ModelParams::new(side)
                .frozen(h0)
                .with_pinning(true)
                .with_init(InitState::Stripes),
            equilibration_steps: DEFAULT_EQUILIBRATION_STEPS,
            measurement_steps: DEFAULT_MEASUREMENT_STEPS,
        }
    }

    pub fn with_steps(mut self, equilibration: usize, measurement: usize) -> Self {
        self.equilibration_steps = equilibration;
        self.measurement_steps = measurement;
        self
    }

    pub fn with_updater(mut self, updater: UpdaterKind) -> Self {
        self.params.updater = updater;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.params.seed = seed;
        self
    }

    pub fn h0(&self) -> Result<f64> {
        match self.params.field {
            FieldMode::Frozen(h0) => Ok(h0),
            FieldMode::Dynamic => {
                Err(Error::InvalidParameter("frozen run needs a frozen field".into()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let h0 = self.h0()?;
        if h0 < 0.0 {
            return Err(Error::InvalidParameter(format!("h0 = {h0} must be non-negative")));
        }
        if self.measurement_steps < MIN_MEASUREMENT_STEPS {
            return Err(Error::InvalidParameter(format!(
                "measurement_steps = {} is below {MIN_MEASUREMENT_STEPS}",
                self.measurement_steps
            )));
        }
        Ok(())
    }

    /// Same protocol at another grid point.
    pub fn for_cell(&self, side: usize, h0: f64, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.params.side = side;
        cfg.params.field = FieldMode::Frozen(h0);
        cfg.params.seed = seed;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenSummary {
    pub side: usize,
    pub h0: f64,
    pub seed: u64,
    pub steps: usize,
    /// Population standard deviation of Δm.
    pub sigma: f64,
    /// Large-sample standard error of σ, σ·√((κ − 1)/(4n)).
    pub sigma_stderr: f64,
    pub mean_m: f64,
    pub mean_lb: f64,
    /// Kurtosis of Δm (3 for a Gaussian).
    pub kurtosis: f64,
    /// Lag-1 autocorrelation of Δm.
    pub ac1: f64,
    /// |m| = 1 for the whole window on an unpinned lattice.
    pub saturated: bool,
}

impl FrozenSummary {
    pub fn from_records(config: &FrozenRunConfig, records: &[SeriesRecord]) -> Result<Self> {
        let h0 = config.h0()?;
        if records.is_empty() {
            return Err(Error::InsufficientData("no measurement steps recorded".into()));
        }
        let dm: Vec<f64> = records.iter().map(|r| r.dm).collect();
        let n = dm.len() as f64;
        let sigma = stats::std_dev(&dm);
        let kurtosis = stats::kurtosis(&dm);
        let sigma_stderr = if sigma > 0.0 { sigma * ((kurtosis - 1.0) / (4.0 * n)).sqrt() } else { 0.0 };
        let mean_lb = records.iter().map(|r| r.lb.unwrap_or(0) as f64).sum::<f64>() / n;
        Ok(FrozenSummary {
            side: config.params.side,
            h0,
            seed: config.params.seed,
            steps: records.len(),
            sigma,
            sigma_stderr,
            mean_m: records.iter().map(|r| r.m).sum::<f64>() / n,
            mean_lb,
            kurtosis,
            ac1: stats::lag1_autocorrelation(&dm),
            saturated: !config.params.pin_columns && records.iter().all(|r| r.m.abs() == 1.0),
        })
    }

    /// c in σ² ≈ c·l_b/L⁴.
    pub fn border_constant(&self) -> f64 {
        self.sigma * self.sigma * (self.side as f64).powi(4) / self.mean_lb
    }
}

/// Equilibrates, then records `measurement_steps` sweeps.
pub fn run_frozen(config: &FrozenRunConfig) -> Result<(Vec<SeriesRecord>, FrozenSummary)> {
    config.validate()?;
    let mut sim = Simulation::new(config.params.clone())?;
    sim.skip(config.equilibration_steps);
    let records = sim.run(config.measurement_steps);
    let summary = FrozenSummary::from_records(config, &records)?;
    Ok((records, summary))
}

/// One (L, h) grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    pub side: usize,
    pub h: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub side: usize,
    pub h: f64,
    pub seed: u64,
    pub summary: Option<FrozenSummary>,
    pub error: Option<String>,
}

impl SweepCell {
    pub fn sigma(&self) -> Option<f64> {
        self.summary.as_ref().map(|s| s.sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base_seed: u64,
    pub beta: f64,
    pub updater: UpdaterKind,
    pub pin_columns: bool,
    pub equilibration_steps: usize,
    pub measurement_steps: usize,
    pub rng: String,
    /// Ordered by (L, h).
    pub cells: Vec<SweepCell>,
}

/// Grid points with seeds derived from `base_seed`, L and the bits of h.
pub fn plan(sides: &[usize], hs: &[f64], base_seed: u64) -> Result<Vec<CellSpec>> {
    if sides.is_empty() || hs.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one L and one h".into()));
    }
    let mut cells = Vec::with_capacity(sides.len() * hs.len());
    for &side in sides {
        for &h in hs {
            let seed = rng::derive_seed(base_seed, &[side as u64, h.to_bits()]);
            cells.push(CellSpec { side, h, seed });
        }
    }
    Ok(cells)
}

/// Runs one cell, capturing failure instead of propagating it.
pub fn run_cell(spec: &CellSpec, template: &FrozenRunConfig) -> SweepCell {
    let cfg = template.for_cell(spec.side, spec.h, spec.seed);
    let outcome = run_frozen(&cfg).and_then(|(_, summary)| {
        if summary.sigma > 0.0 {
            Ok(summary)
        } else {
            Err(Error::InsufficientData("no magnetization change in the measurement window".into()))
        }
    });
    let (summary, error) = match outcome {
        Ok(s) => (Some(s), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepCell { side: spec.side, h: spec.h, seed: spec.seed, summary, error }
}

/// Runs every (L, h) cell on the current rayon pool.
pub fn sweep(sides: &[usize], hs: &[f64], template: &FrozenRunConfig) -> Result<SweepResult> {
    let specs = plan(sides, hs, template.params.seed)?;
    let cells: Vec<SweepCell> = specs.par_iter().map(|s| run_cell(s, template)).collect();
    Ok(SweepResult::assemble(template, cells))
}

impl SweepResult {
    pub fn assemble(template: &FrozenRunConfig, mut cells: Vec<SweepCell>) -> Self {
        cells.sort_by(|a, b| a.side.cmp(&b.side).then(a.h.total_cmp(&b.h)));
        SweepResult {
            base_seed: template.params.seed,
            beta: template.params.beta,
            updater: template.params.updater,
            pin_columns: template.params.pin_columns,
            equilibration_steps: template.equilibration_steps,
            measurement_steps: template.measurement_steps,
            rng: rng::RNG_ALGORITHM.to_string(),
            cells,
        }
    }

    pub fn sides(&self) -> Vec<usize> {
        let mut sides: Vec<usize> = self.cells.iter().map(|c| c.side).collect();
        sides.dedup();
        sides
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(|c| c.summary.is_none())
    }

    /// Completed (h, σ) points for one L, ascending in h.
    pub fn curve(&self, side: usize) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.side == side)
            .filter_map(|c| c.sigma().map(|s| (c.h, s)))
            .collect()
    }

    pub fn summaries(&self) -> impl Iterator<Item = &FrozenSummary> {
        self.cells.iter().filter_map(|c| c.summary.as_ref())
    }
}

fn h_key(h: f64) -> i64 {
    (h * 1e6).round() as i64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub h: f64,
    /// (L, σ·(L/L_ref)^exponent)
    pub scaled: Vec<(usize, f64)>,
    /// (max − min)/mean of the scaled values.
    pub spread: f64,
    /// max/min of the scaled values.
    pub ratio: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub exponent: f64,
    pub l_ref: usize,
    pub tolerance: f64,
    pub rows: Vec<CollapseRow>,
}

impl CollapseReport {
    pub fn rows_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = &CollapseRow> {
        self.rows.iter().filter(move |r| r.h >= lo - 1e-9 && r.h <= hi + 1e-9)
    }

    /// True if [lo, hi] contains at least one row and every such row holds.
    pub fn holds_on(&self, lo: f64, hi: f64) -> bool {
        let mut any = false;
        for r in self.rows_in(lo, hi) {
            if !r.holds {
                return false;
            }
            any = true;
        }
        any
    }

    pub fn max_spread_on(&self, lo: f64, hi: f64) -> f64 {
        self.rows_in(lo, hi).map(|r| r.spread).fold(f64::NAN, f64::max)
    }
}

/// Rescales σ by (L/L_ref)^exponent and measures the spread across L at
/// every h present for at least two sizes.
pub fn scaling_collapse(
    result: &SweepResult,
    exponent: f64,
    l_ref: usize,
    tolerance: f64,
) -> Result<CollapseReport> {
    let sides = result.sides();
    if sides.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "scaling collapse needs at least 2 lattice sizes, got {}",
            sides.len()
        )));
    }
    let mut by_h: BTreeMap<i64, (f64, Vec<(usize, f64)>)> = BTreeMap::new();
    for cell in &result.cells {
        if let Some(sigma) = cell.sigma() {
            let scaled = sigma * (cell.side as f64 / l_ref as f64).powf(exponent);
            by_h.entry(h_key(cell.h)).or_insert_with(|| (cell.h, Vec::new())).1.push((cell.side, scaled));
        }
    }
    let rows = by_h
        .into_values()
        .filter(|(_, v)| v.len() >= 2)
        .map(|(h, scaled)| {
            let values: Vec<f64> = scaled.iter().map(|&(_, s)| s).collect();
            let max = values.iter().copied().fold(f64::MIN, f64::max);
            let min = values.iter().copied().fold(f64::MAX, f64::min);
            let spread = (max - min) / stats::mean(&values);
            CollapseRow { h, scaled, spread, ratio: max / min, holds: spread < tolerance }
        })
        .collect();
    Ok(CollapseReport { exponent, l_ref, tolerance, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Transition {
    Found {
        h_crit: f64,
        /// Grid spacing around the jump.
        uncertainty: f64,
        /// Largest d ln σ / dh, a measure of how sharp the jump is.
        log_slope: f64,
    },
    NoTransitionInRange {
        max_log_slope: f64,
    },
}

impl Transition {
    pub fn h_crit(&self) -> Option<f64> {
        match self {
            Transition::Found { h_crit, .. } => Some(*h_crit),
            Transition::NoTransitionInRange { .. } => None,
        }
    }

    pub fn log_slope(&self) -> f64 {
        match self {
            Transition::Found { log_slope, .. } => *log_slope,
            Transition::NoTransitionInRange { max_log_slope } => *max_log_slope,
        }
    }
}

/// Midpoint of the steepest rise of ln σ between adjacent grid points.
pub fn locate_transition_in(curve: &[(f64, f64)], threshold: f64) -> Result<Transition> {
    if curve.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "transition search needs at least 2 points, got {}",
            curve.len()
        )));
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for w in curve.windows(2) {
        let ((h0, s0), (h1, s1)) = (w[0], w[1]);
        if s0 <= 0.0 || s1 <= 0.0 || h1 <= h0 {
            continue;
        }
        let slope = (s1.ln() - s0.ln()) / (h1 - h0);
        if best.is_none_or(|b| slope > b.0) {
            best = Some((slope, 0.5 * (h0 + h1), h1 - h0));
        }
    }
    let Some((slope, mid, spacing)) = best else {
        return Err(Error::InsufficientData("no positive σ values to search".into()));
    };
    Ok(if slope >= threshold {
        Transition::Found { h_crit: mid, uncertainty: spacing, log_slope: slope }
    } else {
        Transition::NoTransitionInRange { max_log_slope: slope }
    })
}

pub fn locate_transition(result: &SweepResult, side: usize) -> Result<Transition> {
    locate_transition_in(&result.curve(side), TRANSITION_LOG_SLOPE_THRESHOLD)
}
