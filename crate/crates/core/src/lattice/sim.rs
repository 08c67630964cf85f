use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{ActiveSetUpdater, FieldMode, ModelParams, NaiveUpdater, SpinLattice, UpdaterKind};
use crate::error::Result;
use crate::rng::{self, SimRng};

/// Trailing window, in sweeps, used for the smoothed field and rolling
/// volatility.
pub const SMOOTHING_WINDOW: usize = 30;

/// Observables after one completed sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub t: u64,
    pub m: f64,
    pub dm: f64,
    /// Border length; absent for macroscopic runs.
    pub lb: Option<u64>,
    /// Smoothed field: α·m̄ over the trailing window in dynamic mode, h₀ in
    /// frozen mode.
    pub h_smoothed: f64,
}

#[derive(Debug, Clone)]
pub enum Updater {
    Naive(NaiveUpdater),
    ActiveSet(ActiveSetUpdater),
}

impl Updater {
    pub fn new(kind: UpdaterKind, beta: f64) -> Self {
        match kind {
            UpdaterKind::Naive => Updater::Naive(NaiveUpdater::new(beta)),
            UpdaterKind::ActiveSet => Updater::ActiveSet(ActiveSetUpdater::new(beta)),
        }
    }

    /// One time step: N attempted single-site updates (or the active-set
    /// equivalent).
    pub fn sweep(&mut self, lattice: &mut SpinLattice, field: FieldMode, alpha: f64, rng: &mut SimRng) {
        match self {
            Updater::Naive(u) => u.sweep(lattice, field, alpha, rng),
            Updater::ActiveSet(u) => u.sweep(lattice, field, alpha, rng),
        }
    }
}

/// Trailing mean over a fixed window (shorter at the start of a series).
#[derive(Debug, Clone)]
pub struct TrailingMean {
    window: usize,
    values: VecDeque<f64>,
}

impl TrailingMean {
    pub fn new(window: usize) -> Self {
        assert!(window > 0);
        TrailingMean { window, values: VecDeque::with_capacity(window) }
    }

    pub fn push(&mut self, x: f64) -> f64 {
        if self.values.len() == self.window {
            self.values.pop_front();
        }
        self.values.push_back(x);
        self.mean()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// A microscopic run: lattice, updater and random stream.
pub struct Simulation {
    params: ModelParams,
    lattice: SpinLattice,
    updater: Updater,
    rng: SimRng,
    time: u64,
    smoother: TrailingMean,
}

impl Simulation {
    /// Builds the initial lattice from `params.init` (pinning columns if
    /// requested) using stream 0 of `params.seed`.
    pub fn new(params: ModelParams) -> Result<Self> {
        params.validate()?;
        let mut rng = rng::stream(params.seed, 0);
        let mut lattice = SpinLattice::new(params.side, params.init, &mut rng)?;
        if params.pin_columns {
            lattice.pin_columns()?;
        }
        Ok(Self::assemble(params, lattice, rng))
    }

    /// Runs from a caller-supplied lattice.
    pub fn with_lattice(params: ModelParams, lattice: SpinLattice) -> Result<Self> {
        params.validate()?;
        if lattice.side() != params.side {
            return Err(crate::Error::InvalidParameter(format!(
                "lattice side {} differs from L = {}",
                lattice.side(),
                params.side
            )));
        }
        let rng = rng::stream(params.seed, 0);
        Ok(Self::assemble(params, lattice, rng))
    }

    fn assemble(params: ModelParams, lattice: SpinLattice, rng: SimRng) -> Self {
        let mut smoother = TrailingMean::new(SMOOTHING_WINDOW);
        smoother.push(lattice.magnetization());
        Simulation {
            updater: Updater::new(params.updater, params.beta),
            params,
            lattice,
            rng,
            time: 0,
            smoother,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn lattice(&self) -> &SpinLattice {
        &self.lattice
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn step(&mut self) -> SeriesRecord {
        let before = self.lattice.spin_sum();
        self.updater.sweep(&mut self.lattice, self.params.field, self.params.alpha, &mut self.rng);
        self.time += 1;
        let n = self.lattice.len() as f64;
        let m = self.lattice.magnetization();
        let m_bar = self.smoother.push(m);
        let h_smoothed = match self.params.field {
            FieldMode::Dynamic => self.params.alpha * m_bar,
            FieldMode::Frozen(h0) => h0,
        };
        SeriesRecord {
            t: self.time,
            m,
            dm: (self.lattice.spin_sum() - before) as f64 / n,
            lb: Some(self.lattice.border_length()),
            h_smoothed,
        }
    }

    pub fn run(&mut self, steps: usize) -> Vec<SeriesRecord> {
        (0..steps).map(|_| self.step()).collect()
    }

    /// Advances without recording.
    pub fn skip(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }
}
