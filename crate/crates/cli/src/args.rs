use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use spinmarket::lattice::{InitState, UpdaterKind};

#[derive(Debug, Parser)]
#[command(name = "spinmarket", version, about = "Spin market simulations and volatility analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dynamic-field run (h = α·m); writes timeseries.csv.
    Simulate(SimulateArgs),
    /// Single frozen-field run; writes timeseries.csv and summary.json.
    Frozen(FrozenArgs),
    /// Frozen-field grid over (L, h); writes sweep.csv, sweep.json and a plot script.
    Sweep(SweepArgs),
    /// Builds the volatility surface from a sweep.
    FitSurface(FitSurfaceArgs),
    /// Macroscopic Langevin run, self-driven or driven by a recorded field.
    Macro(MacroArgs),
    /// Return densities, tail fits, autocorrelations and return-to-zero times.
    Analyze(AnalyzeArgs),
    /// Microscopic volatility against the surface prediction.
    Compare(CompareArgs),
}

/// Output location and optional JSON config. Not part of the persisted
/// config.
#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// JSON config with the same keys as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Model flags shared by the simulation commands.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelArgs {
    /// Lattice side length.
    #[arg(long = "L", value_name = "L")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    /// Coupling α of the minority term to |m|.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Temperature as a fraction of the Ising T_c [default: 0.2].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temp_frac: Option<f64>,
    /// Inverse temperature; overrides --temp-frac.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Recorded time steps (sweeps).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Unrecorded equilibration steps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equil: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads for sweep cells.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// naive | active
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub updater: Option<UpdaterKind>,
    /// Fix the columns x = L/4 (+1) and x = 3L/4 (−1).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pin_columns: Option<bool>,
    /// stripes | up | down | random
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitState>,
    /// Frozen field value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FrozenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Collapse {
    #[default]
    None,
    /// σ·(L/128)^{3/2}
    Ordered,
    /// σ·(L/128)
    Disordered,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    /// Comma-separated lattice sizes.
    #[arg(long = "L-list", value_delimiter = ',', value_name = "L,...")]
    #[serde(rename = "L_list", skip_serializing_if = "Option::is_none")]
    pub l_list: Option<Vec<usize>>,
    /// Comma-separated field values; alternative to --h-min/--h-max/--h-step.
    #[arg(long, value_delimiter = ',', value_name = "H,...")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_step: Option<f64>,
    /// Rescaling applied in the generated plot script.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse: Option<Collapse>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: SweepGrid,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSurfaceOptions {
    /// sweep.csv, sweep.json or a sweep output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitSurfaceArgs {
    #[command(flatten)]
    pub opts: FitSurfaceOptions,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroOptions {
    /// surface.json or a fit-surface output directory.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<PathBuf>,
    /// Drive with the h_smoothed column of a run (directory or timeseries.csv)
    /// instead of the macro state's own field.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driven: Option<PathBuf>,
    /// Initial magnetization of a self-driven run.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MacroArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub opts: MacroOptions,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeOptions {
    /// Run directories or timeseries CSV files (repeatable).
    #[arg(long = "input", value_name = "PATH")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    /// Only the return-to-zero analysis, tabulated across inputs.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtz: Option<bool>,
    /// Surface for the mixture density of returns.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<PathBuf>,
    /// Largest autocorrelation lag.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    /// Multiplier converting Δm into returns [default: 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_scale: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub opts: AnalyzeOptions,
    #[command(flatten)]
    pub io: IoArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareOptions {
    /// Dynamic-field run directory or timeseries.csv.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub opts: CompareOptions,
    #[command(flatten)]
    pub io: IoArgs,
}
