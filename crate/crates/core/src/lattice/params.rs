use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SpinLattice;
use crate::error::{Error, Result};

/// Critical temperature of the square-lattice Ising model with J = 1,
/// T_c = 2 / ln(1 + √2).
pub const ISING_CRITICAL_TEMPERATURE: f64 = 2.269_185_314_213_022;

pub const DEFAULT_TEMPERATURE_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitState {
    /// +1 for x < L/2, −1 otherwise.
    Stripes,
    UniformUp,
    UniformDown,
    /// Independent fair coin per site.
    Random,
}

impl FromStr for InitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stripes" => Ok(InitState::Stripes),
            "up" | "uniform_up" => Ok(InitState::UniformUp),
            "down" | "uniform_down" => Ok(InitState::UniformDown),
            "random" => Ok(InitState::Random),
            other => Err(Error::InvalidParameter(format!("unknown init state '{other}'"))),
        }
    }
}

/// How the global field h entering the minority term is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// h = α·m, refreshed from the cached spin sum before every attempt.
    Dynamic,
    /// h held at a constant h₀.
    Frozen(f64),
}

impl FieldMode {
    /// Current |h| for the given lattice state.
    #[inline]
    pub fn magnitude(&self, lattice: &SpinLattice, alpha: f64) -> f64 {
        match *self {
            FieldMode::Dynamic => (alpha * lattice.spin_sum() as f64 / lattice.len() as f64).abs(),
            FieldMode::Frozen(h0) => h0.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UpdaterKind {
    #[default]
    Naive,
    ActiveSet,
}

impl FromStr for UpdaterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(UpdaterKind::Naive),
            "active" | "active_set" => Ok(UpdaterKind::ActiveSet),
            other => Err(Error::InvalidParameter(format!("unknown updater '{other}'"))),
        }
    }
}

impl fmt::Display for UpdaterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdaterKind::Naive => "naive",
            UpdaterKind::ActiveSet => "active_set",
        })
    }
}

/// Everything needed to reproduce a microscopic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub side: usize,
    /// Coupling of the minority term to |m|.
    pub alpha: f64,
    /// Inverse temperature.
    pub beta: f64,
    pub field: FieldMode,
    pub updater: UpdaterKind,
    pub seed: u64,
    pub pin_columns: bool,
    pub init: InitState,
}

impl ModelParams {
    /// Dynamic-field model at 0.2·T_c, stripe start, naive updater, seed 0.
    pub fn new(side: usize) -> Self {
        ModelParams {
            side,
            alpha: 0.0,
            beta: beta_from_temperature_fraction(DEFAULT_TEMPERATURE_FRACTION),
            field: FieldMode::Dynamic,
            updater: UpdaterKind::Naive,
            seed: 0,
            pin_columns: false,
            init: InitState::Stripes,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_temperature_fraction(mut self, fraction: f64) -> Self {
        self.beta = beta_from_temperature_fraction(fraction);
        self
    }

    pub fn frozen(mut self, h0: f64) -> Self {
        self.field = FieldMode::Frozen(h0);
        self
    }

    pub fn with_updater(mut self, updater: UpdaterKind) -> Self {
        self.updater = updater;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pinning(mut self, pin: bool) -> Self {
        self.pin_columns = pin;
        self
    }

    pub fn with_init(mut self, init: InitState) -> Self {
        self.init = init;
        self
    }

    pub fn sites(&self) -> usize {
        self.side * self.side
    }

    pub fn validate(&self) -> Result<()> {
        if self.side < 2 {
            return Err(Error::InvalidParameter(format!("L = {} must be at least 2", self.side)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta = {} must be positive", self.beta)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        if let FieldMode::Frozen(h0) = self.field {
            if !h0.is_finite() {
                return Err(Error::InvalidParameter("frozen field must be finite".into()));
            }
        }
        if self.pin_columns && !self.side.is_multiple_of(4) {
            return Err(Error::PinningNeedsMultipleOfFour(self.side));
        }
        Ok(())
    }
}

pub fn beta_from_temperature_fraction(fraction: f64) -> f64 {
    1.0 / (fraction * ISING_CRITICAL_TEMPERATURE)
}
