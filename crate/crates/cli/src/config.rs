use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use spinmarket::lattice::{
    beta_from_temperature_fraction, FieldMode, InitState, ModelParams, UpdaterKind,
    DEFAULT_TEMPERATURE_FRACTION,
};

use crate::args::{AnalyzeOptions, CompareOptions, FitSurfaceOptions, MacroOptions, ModelArgs, SweepGrid};
use crate::error::CliError;

/// Persisted form of a command's parameters, one block per concern.
/// Written as config.json next to every output and accepted by --config.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelArgs,
    pub sweep: SweepGrid,
    pub fit_surface: FitSurfaceOptions,
    #[serde(rename = "macro")]
    pub macro_opts: MacroOptions,
    pub analyze: AnalyzeOptions,
    pub compare: CompareOptions,
}

pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Fields set on the command line replace those from the config file.
pub fn overlay<T: Serialize + DeserializeOwned>(base: &T, flags: &T) -> Result<T, CliError> {
    let mut merged = serde_json::to_value(base).map_err(|e| CliError::Runtime(e.to_string()))?;
    let top = serde_json::to_value(flags).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let (Value::Object(m), Value::Object(t)) = (&mut merged, top) {
        m.extend(t);
    }
    serde_json::from_value(merged).map_err(|e| CliError::Usage(e.to_string()))
}

/// Per-command defaults for the model block.
#[derive(Debug, Clone, Copy)]
pub struct ModelDefaults {
    pub side: usize,
    pub alpha: f64,
    pub steps: usize,
    pub equil: usize,
    pub updater: UpdaterKind,
    pub pin_columns: bool,
}

impl ModelDefaults {
    pub const DYNAMIC: ModelDefaults = ModelDefaults {
        side: 128,
        alpha: 20.0,
        steps: 10_000,
        equil: 0,
        updater: UpdaterKind::Naive,
        pin_columns: false,
    };
    pub const FROZEN: ModelDefaults = ModelDefaults {
        side: 128,
        alpha: 0.0,
        steps: 10_000,
        equil: 1000,
        updater: UpdaterKind::Naive,
        pin_columns: true,
    };
    pub const SWEEP: ModelDefaults = ModelDefaults { updater: UpdaterKind::ActiveSet, ..Self::FROZEN };
}

/// Fills every unset model field with its default.
pub fn resolve_model(m: &ModelArgs, d: ModelDefaults) -> ModelArgs {
    let temp_frac = m.temp_frac.unwrap_or(DEFAULT_TEMPERATURE_FRACTION);
    ModelArgs {
        side: Some(m.side.unwrap_or(d.side)),
        alpha: Some(m.alpha.unwrap_or(d.alpha)),
        temp_frac: Some(temp_frac),
        beta: Some(m.beta.unwrap_or_else(|| beta_from_temperature_fraction(temp_frac))),
        steps: Some(m.steps.unwrap_or(d.steps)),
        equil: Some(m.equil.unwrap_or(d.equil)),
        seed: Some(m.seed.unwrap_or(1)),
        threads: m.threads,
        updater: Some(m.updater.unwrap_or(d.updater)),
        pin_columns: Some(m.pin_columns.unwrap_or(d.pin_columns)),
        init: Some(m.init.unwrap_or(InitState::Stripes)),
        h0: m.h0,
    }
}

/// Model parameters from a resolved block. `frozen` selects h = h₀.
pub fn model_params(m: &ModelArgs, frozen: bool) -> Result<ModelParams, CliError> {
    let mut p = ModelParams::new(m.side.unwrap_or(2))
        .with_alpha(m.alpha.unwrap_or(0.0))
        .with_beta(m.beta.unwrap_or_else(|| beta_from_temperature_fraction(DEFAULT_TEMPERATURE_FRACTION)))
        .with_seed(m.seed.unwrap_or(1))
        .with_updater(m.updater.unwrap_or_default())
        .with_pinning(m.pin_columns.unwrap_or(false))
        .with_init(m.init.unwrap_or(InitState::Stripes));
    if frozen {
        let h0 = m.h0.ok_or_else(|| CliError::Usage("--h0 is required for a frozen-field run".into()))?;
        p.field = FieldMode::Frozen(h0);
    }
    p.validate()?;
    Ok(p)
}
