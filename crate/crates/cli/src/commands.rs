use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinmarket::frozen::{self, CellSpec, FrozenRunConfig, SweepCell, SweepResult};
use spinmarket::io;
use spinmarket::lattice::{magnetization_quantum, FieldMode, SeriesRecord, Simulation};
use spinmarket::macro_model::{
    self, density_agreement, fit_surface, mixture_density, DensityAgreement, VolatilityModel, VolatilitySurface,
};
use spinmarket::stats::{self, Binning, CutoffPoint, ReturnToZeroOptions, TailFit};

use crate::args::{
    AnalyzeArgs, CompareArgs, FitSurfaceArgs, FrozenArgs, MacroArgs, ModelArgs, SimulateArgs, SweepArgs,
    SweepGrid,
};
use crate::config::{self, model_params, overlay, resolve_model, ModelDefaults, RunConfig};
use crate::error::CliError;
use crate::output::{runtime, Output, CONFIG};
use crate::plots;

const DEFAULT_MAX_LAG: usize = 100;
const SURFACE_GRID_POINTS: usize = 201;
const CUTOFF_SLOPE_TOLERANCE: f64 = 0.15;
const DENSITY_FACTOR: f64 = 2.0;

fn require(path: &Path, what: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("missing {what}: {}", path.display())))
    }
}

/// A recorded run: its series and the model block of the config.json next
/// to it, if any.
struct RunInput {
    path: PathBuf,
    records: Vec<SeriesRecord>,
    model: ModelArgs,
}

fn load_run(path: &Path) -> Result<RunInput, CliError> {
    let (csv, cfg) = if path.is_dir() {
        (path.join("timeseries.csv"), path.join(CONFIG))
    } else {
        let dir = path.parent().unwrap_or(Path::new("."));
        (path.to_path_buf(), dir.join(CONFIG))
    };
    require(&csv, "time series")?;
    let records = io::read_timeseries(&csv).map_err(runtime)?;
    let model = if cfg.exists() {
        let rc: RunConfig = io::read_json(&cfg).map_err(runtime)?;
        rc.model
    } else {
        ModelArgs::default()
    };
    Ok(RunInput { path: csv, records, model })
}

fn load_surface(path: &Path) -> Result<VolatilitySurface, CliError> {
    let file = if path.is_dir() { path.join("surface.json") } else { path.to_path_buf() };
    require(&file, "volatility surface")?;
    io::read_json(&file).map_err(runtime)
}

fn side_of(model: &ModelArgs, input: &Path) -> Result<usize, CliError> {
    model
        .side
        .ok_or_else(|| CliError::Usage(format!("lattice size of {} unknown; pass --L", input.display())))
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let model = resolve_model(&overlay(&file.model, &a.model)?, ModelDefaults::DYNAMIC);
    let params = model_params(&model, false)?;
    let mut out = Output::create(&a.io.out)?;
    let mut sim = Simulation::new(params)?;
    sim.skip(model.equil.unwrap_or(0));
    let records = sim.run(model.steps.unwrap_or(0));
    out.csv("timeseries.csv", &records)?;
    let seed = model.seed.unwrap_or(1);
    out.finish("simulate", RunConfig { model, ..Default::default() }, vec![seed])?;
    Ok(())
}

pub fn frozen(a: FrozenArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let model = resolve_model(&overlay(&file.model, &a.model)?, ModelDefaults::FROZEN);
    let cfg = FrozenRunConfig {
        params: model_params(&model, true)?,
        equilibration_steps: model.equil.unwrap_or(0),
        measurement_steps: model.steps.unwrap_or(0),
    };
    cfg.validate()?;
    let mut out = Output::create(&a.io.out)?;
    let (records, summary) = frozen::run_frozen(&cfg).map_err(runtime)?;
    out.csv("timeseries.csv", &records)?;
    out.json("summary.json", &summary)?;
    let seed = cfg.params.seed;
    out.finish("frozen", RunConfig { model, ..Default::default() }, vec![seed])?;
    Ok(())
}

fn field_grid(grid: &SweepGrid) -> Result<Vec<f64>, CliError> {
    if let Some(hs) = &grid.h_list {
        if hs.is_empty() {
            return Err(CliError::Usage("--h-list is empty".into()));
        }
        return Ok(hs.clone());
    }
    let (Some(lo), Some(hi), Some(step)) = (grid.h_min, grid.h_max, grid.h_step) else {
        return Err(CliError::Usage("give --h-list or all of --h-min, --h-max, --h-step".into()));
    };
    if !(step > 0.0) || hi < lo {
        return Err(CliError::Usage(format!("bad h range {lo}..{hi} step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect())
}

/// Per-cell record for resuming a sweep. `protocol` identifies everything
/// but (L, h, seed); `checksum` covers protocol and cell.
#[derive(Serialize, Deserialize)]
struct CellFile {
    protocol: String,
    cell: SweepCell,
    checksum: String,
}

fn cell_checksum(protocol: &str, cell: &SweepCell) -> String {
    let body = serde_json::to_vec(&(protocol, cell)).expect("cell serializes");
    hex::encode(Sha256::digest(body))
}

fn cell_name(spec: &CellSpec) -> String {
    format!("cells/L{}_h{:.6}.json", spec.side, spec.h)
}

/// A previously completed cell, if its file is intact and matches.
fn resume_cell(path: &Path, protocol: &str, spec: &CellSpec) -> Option<SweepCell> {
    let file: CellFile = serde_json::from_slice(&fs::read(path).ok()?).ok()?;
    let c = &file.cell;
    let valid = file.protocol == protocol
        && file.checksum == cell_checksum(protocol, c)
        && c.side == spec.side
        && c.h == spec.h
        && c.seed == spec.seed
        && c.summary.is_some();
    valid.then_some(file.cell)
}

fn write_cell(path: &Path, protocol: &str, cell: &SweepCell) -> Result<(), CliError> {
    let file = CellFile { protocol: protocol.to_string(), cell: cell.clone(), checksum: cell_checksum(protocol, cell) };
    let tmp = path.with_extension("json.tmp");
    io::write_json(&tmp, &file).map_err(runtime)?;
    fs::rename(&tmp, path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let mut model = resolve_model(&overlay(&file.model, &a.model)?, ModelDefaults::SWEEP);
    let mut grid = overlay(&file.sweep, &a.grid)?;
    let sides = grid.l_list.clone().unwrap_or_else(|| vec![model.side.unwrap_or(128)]);
    grid.l_list = Some(sides.clone());
    let hs = field_grid(&grid)?;
    let collapse = grid.collapse.unwrap_or_default();

    model.h0 = Some(0.0);
    let template = FrozenRunConfig {
        params: model_params(&model, true)?,
        equilibration_steps: model.equil.unwrap_or(0),
        measurement_steps: model.steps.unwrap_or(0),
    };
    model.h0 = None;
    for &side in &sides {
        template.for_cell(side, 0.0, 0).validate()?;
    }
    let specs = frozen::plan(&sides, &hs, template.params.seed)?;
    let protocol = {
        let mut p = template.for_cell(0, 0.0, template.params.seed);
        p.params.field = FieldMode::Frozen(0.0);
        hex::encode(Sha256::digest(serde_json::to_vec(&p).expect("config serializes")))
    };

    let mut out = Output::create(&a.io.out)?;
    let names: Vec<String> = specs.iter().map(cell_name).collect();
    let paths: Vec<PathBuf> = names.iter().map(|n| out.path(n)).collect::<Result<_, _>>()?;
    let run = || -> Result<Vec<SweepCell>, CliError> {
        specs
            .par_iter()
            .zip(&paths)
            .map(|(spec, path)| {
                if let Some(cell) = resume_cell(path, &protocol, spec) {
                    return Ok(cell);
                }
                let cell = frozen::run_cell(spec, &template);
                write_cell(path, &protocol, &cell)?;
                Ok(cell)
            })
            .collect()
    };
    let cells = match model.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let result = SweepResult::assemble(&template, cells);
    for c in result.failures() {
        eprintln!("cell L={} h={} failed: {}", c.side, c.h, c.error.as_deref().unwrap_or("?"));
    }
    let p = out.path("sweep.csv")?;
    io::write_sweep(&p, &result).map_err(runtime)?;
    out.json("sweep.json", &result)?;
    out.text("sigma.gp", &plots::sweep(&sides, collapse))?;
    let seeds = specs.iter().map(|s| s.seed).collect();
    out.finish("sweep", RunConfig { model, sweep: grid, ..Default::default() }, seeds)?;
    if result.summaries().next().is_none() {
        return Err(CliError::Runtime("every sweep cell failed".into()));
    }
    Ok(())
}

fn load_sweep(path: &Path) -> Result<SweepResult, CliError> {
    let file = if path.is_dir() {
        let json = path.join("sweep.json");
        if json.exists() {
            json
        } else {
            path.join("sweep.csv")
        }
    } else {
        path.to_path_buf()
    };
    require(&file, "sweep results")?;
    if file.extension().is_some_and(|e| e == "csv") {
        io::read_sweep(&file, &FrozenRunConfig::new(4, 0.0)).map_err(runtime)
    } else {
        io::read_json(&file).map_err(runtime)
    }
}

#[derive(Serialize)]
struct GridRow {
    #[serde(rename = "L")]
    side: usize,
    h: f64,
    sigma: f64,
}

pub fn fit_surface_cmd(a: FitSurfaceArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let opts = overlay(&file.fit_surface, &a.opts)?;
    let input = opts.sweep.clone().ok_or_else(|| CliError::Usage("--sweep is required".into()))?;
    let sweep = load_sweep(&input)?;
    let surface = fit_surface(&sweep).map_err(runtime)?;
    let mut out = Output::create(&a.io.out)?;
    out.json("surface.json", &surface)?;
    let mut rows = Vec::new();
    for curve in surface.curves() {
        let (lo, hi) = surface.h_range(curve.side);
        for i in 0..SURFACE_GRID_POINTS {
            let h = lo + (hi - lo) * i as f64 / (SURFACE_GRID_POINTS - 1) as f64;
            rows.push(GridRow { side: curve.side, h, sigma: surface.sigma(curve.side, h) });
        }
    }
    out.csv("surface_grid.csv", &rows)?;
    let sides: Vec<usize> = surface.curves().iter().map(|c| c.side).collect();
    out.text("surface.gp", &plots::surface(&sides, surface.h_crit()))?;
    out.finish("fit-surface", RunConfig { fit_surface: opts, ..Default::default() }, vec![])?;
    Ok(())
}

#[derive(Serialize)]
struct MacroSummary {
    mode: &'static str,
    #[serde(rename = "L")]
    side: usize,
    alpha: Option<f64>,
    steps: usize,
    clamped_queries: usize,
    h_crit: f64,
    final_m: Option<f64>,
}

pub fn macro_cmd(a: MacroArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let opts = overlay(&file.macro_opts, &a.opts)?;
    let flags = overlay(&file.model, &a.model)?;
    let surface_path = opts.surface.clone().ok_or_else(|| CliError::Usage("--surface is required".into()))?;
    let surface = load_surface(&surface_path)?;
    let (run, model, mode) = match &opts.driven {
        Some(path) => {
            let input = load_run(path)?;
            let model = resolve_model(&overlay(&input.model, &flags)?, ModelDefaults::DYNAMIC);
            let side = side_of(&model, &input.path)?;
            let hs: Vec<f64> = input.records.iter().map(|r| r.h_smoothed).collect();
            let run = macro_model::run_driven(&hs, &surface, side, model.seed.unwrap_or(1));
            (run, model, "driven")
        }
        None => {
            let model = resolve_model(&flags, ModelDefaults::DYNAMIC);
            let run = macro_model::run_self_driven(
                &surface,
                model.alpha.unwrap_or(0.0),
                model.side.unwrap_or(128),
                opts.m0.unwrap_or(0.0),
                model.steps.unwrap_or(0),
                model.seed.unwrap_or(1),
            );
            (run, model, "self_driven")
        }
    };
    let side = model.side.unwrap_or(128);
    let mut out = Output::create(&a.io.out)?;
    out.csv("timeseries.csv", &run.records)?;
    out.json(
        "macro.json",
        &MacroSummary {
            mode,
            side,
            alpha: (mode == "self_driven").then(|| model.alpha.unwrap_or(0.0)),
            steps: run.records.len(),
            clamped_queries: run.clamped_queries,
            h_crit: surface.h_crit_for(side),
            final_m: run.records.last().map(|r| r.m),
        },
    )?;
    let seed = model.seed.unwrap_or(1);
    out.finish("macro", RunConfig { model, macro_opts: opts, ..Default::default() }, vec![seed])?;
    Ok(())
}

#[derive(Serialize)]
struct AutocorrRow {
    lag: usize,
    dm: f64,
    abs_dm: f64,
    dm2: f64,
}

#[derive(Serialize)]
struct RtzRow {
    input: String,
    #[serde(rename = "L")]
    side: Option<usize>,
    alpha: Option<f64>,
    steps: usize,
    crossings: usize,
    density_exponent: Option<f64>,
    survival_exponent: Option<f64>,
    t_cutoff: Option<f64>,
    reliable: bool,
}

#[derive(Serialize)]
struct TailReport<'a> {
    input: String,
    samples: usize,
    zero_fraction: f64,
    return_scale: f64,
    #[serde(flatten)]
    tail: &'a TailFit,
}

fn label(input: &RunInput, used: &mut HashSet<String>) -> String {
    let base = match (input.model.side, input.model.alpha) {
        (Some(l), Some(a)) => format!("L{l}_a{a}"),
        _ => input.path.parent().and_then(|p| p.file_name()).map_or("run".into(), |n| n.to_string_lossy().into()),
    };
    let mut name = base.clone();
    let mut k = 2;
    while !used.insert(name.clone()) {
        name = format!("{base}_{k}");
        k += 1;
    }
    name
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let opts = overlay(&file.analyze, &a.opts)?;
    let flags = overlay(&file.model, &a.model)?;
    if opts.inputs.is_empty() {
        return Err(CliError::Usage("at least one --input is required".into()));
    }
    let rtz_only = opts.rtz.unwrap_or(false);
    let scale = opts.return_scale.unwrap_or(1.0);
    let max_lag = opts.max_lag.unwrap_or(DEFAULT_MAX_LAG);
    let surface = opts.surface.as_deref().map(load_surface).transpose()?;

    let mut inputs = Vec::new();
    for path in &opts.inputs {
        let mut input = load_run(path)?;
        input.model = overlay(&input.model, &flags)?;
        inputs.push(input);
    }
    let mut out = Output::create(&a.io.out)?;
    let mut used = HashSet::new();
    let mut table = Vec::new();
    let mut rtz_files = Vec::new();
    let mut cutoffs = Vec::new();
    for input in &inputs {
        let tag = label(input, &mut used);
        let m: Vec<f64> = input.records.iter().map(|r| r.m).collect();
        let rtz = stats::return_to_zero(&m, &ReturnToZeroOptions::default());
        let row = match &rtz {
            Ok(z) => {
                let name = format!("rtz_{tag}.csv");
                out.csv(&name, &io::density_rows(&z.histogram))?;
                rtz_files.push(name);
                if let (Some(side), Some(alpha), Some(t)) = (input.model.side, input.model.alpha, z.t_cutoff) {
                    cutoffs.push(CutoffPoint { side, alpha, t_cutoff: t });
                }
                RtzRow {
                    input: tag.clone(),
                    side: input.model.side,
                    alpha: input.model.alpha,
                    steps: m.len(),
                    crossings: z.crossings,
                    density_exponent: z.density_exponent,
                    survival_exponent: z.survival_exponent,
                    t_cutoff: z.t_cutoff,
                    reliable: z.reliable,
                }
            }
            Err(e) => {
                eprintln!("{}: return-to-zero analysis skipped: {e}", input.path.display());
                RtzRow {
                    input: tag.clone(),
                    side: input.model.side,
                    alpha: input.model.alpha,
                    steps: m.len(),
                    crossings: 0,
                    density_exponent: None,
                    survival_exponent: None,
                    t_cutoff: None,
                    reliable: false,
                }
            }
        };
        table.push(row);
        if rtz_only {
            continue;
        }

        let dm: Vec<f64> = input.records.iter().map(|r| scale * r.dm).collect();
        let lattice_data = input.records.iter().all(|r| r.lb.is_some());
        let quantum = match (lattice_data, input.model.side) {
            (true, Some(side)) => Some(scale.abs() * magnetization_quantum(side)),
            _ => None,
        };
        let est = stats::density(&dm, &Binning::returns(quantum)).map_err(runtime)?;
        let density_name = format!("density_{tag}.csv");
        out.csv(&density_name, &io::density_rows(&est))?;
        let tail = stats::tail_fit(&dm, &est);
        match &tail {
            Ok(t) => out.json(
                &format!("tail_{tag}.json"),
                &TailReport {
                    input: input.path.display().to_string(),
                    samples: dm.len(),
                    zero_fraction: est.zero_fraction(),
                    return_scale: scale,
                    tail: t,
                },
            )?,
            Err(e) => eprintln!("{}: tail fit skipped: {e}", input.path.display()),
        }
        let abs: Vec<f64> = dm.iter().map(|x| x.abs()).collect();
        let sq: Vec<f64> = dm.iter().map(|x| x * x).collect();
        let acf = |xs: &[f64]| stats::autocorrelation(xs, max_lag).map_err(runtime);
        let (c1, c2, c3) = (acf(&dm)?, acf(&abs)?, acf(&sq)?);
        let rows: Vec<AutocorrRow> =
            (0..=max_lag).map(|lag| AutocorrRow { lag, dm: c1[lag], abs_dm: c2[lag], dm2: c3[lag] }).collect();
        out.csv(&format!("autocorr_{tag}.csv"), &rows)?;

        let mut mixture_name = None;
        if let Some(surface) = &surface {
            let side = side_of(&input.model, &input.path)?;
            let sigmas: Vec<f64> = input.records.iter().map(|r| scale.abs() * surface.sigma(side, r.h_smoothed)).collect();
            let mix = mixture_density(&sigmas, &est.edges).map_err(runtime)?;
            let name = format!("mixture_{tag}.csv");
            out.csv(&name, &io::mixture_rows(&mix))?;
            if let Ok(agree) = density_agreement(&dm, &est, &mix, DENSITY_FACTOR) {
                out.json(&format!("agreement_{tag}.json"), &agree)?;
            }
            mixture_name = Some(name);
        }
        let fit = tail.as_ref().ok().map(|t| (t.fit.prefactor, t.fit.exponent));
        let png = format!("density_{tag}.png");
        out.text(&format!("density_{tag}.gp"), &plots::density(&density_name, mixture_name.as_deref(), fit, &png))?;
    }
    out.csv("rtz_table.csv", &table)?;
    if !rtz_files.is_empty() {
        out.text("rtz.gp", &plots::return_to_zero(&rtz_files))?;
    }
    if cutoffs.len() >= 3 {
        let report = stats::cutoff_scaling_check(&cutoffs, CUTOFF_SLOPE_TOLERANCE).map_err(runtime)?;
        out.json("cutoff_scaling.json", &report)?;
    }
    out.finish("analyze", RunConfig { model: flags, analyze: opts, ..Default::default() }, vec![])?;
    Ok(())
}

#[derive(Serialize)]
struct MicroMacroRow {
    t: u64,
    m: f64,
    dm: f64,
    lb: Option<u64>,
    h_smoothed: f64,
    sigma_micro: f64,
    sigma_macro: f64,
    included: bool,
}

#[derive(Serialize)]
struct CompareSummary {
    input: String,
    #[serde(rename = "L")]
    side: usize,
    alpha: f64,
    h_crit: f64,
    m_crit: Option<f64>,
    window: usize,
    used: usize,
    excluded: usize,
    median_abs_log_ratio: f64,
    mean_log_ratio: f64,
    correlation: Option<f64>,
    density: Option<DensityAgreement>,
}

pub fn compare(a: CompareArgs) -> Result<(), CliError> {
    let file = config::load(a.io.config.as_deref())?;
    let opts = overlay(&file.compare, &a.opts)?;
    let flags = overlay(&file.model, &a.model)?;
    let input_path = opts.input.clone().ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let surface_path = opts.surface.clone().ok_or_else(|| CliError::Usage("--surface is required".into()))?;
    let input = load_run(&input_path)?;
    let surface = load_surface(&surface_path)?;
    let model = overlay(&input.model, &flags)?;
    let side = side_of(&model, &input.path)?;
    let alpha = model.alpha.unwrap_or(ModelDefaults::DYNAMIC.alpha);

    let report = macro_model::compare_micro_macro(&input.records, &surface, side).map_err(runtime)?;
    let offset = report.window - 1;
    let rows: Vec<MicroMacroRow> = report
        .points
        .iter()
        .zip(&input.records[offset..])
        .map(|(p, r)| MicroMacroRow {
            t: r.t,
            m: r.m,
            dm: r.dm,
            lb: r.lb,
            h_smoothed: r.h_smoothed,
            sigma_micro: p.sigma_micro,
            sigma_macro: p.sigma_macro,
            included: p.included,
        })
        .collect();
    let m_crit = (alpha > 0.0).then(|| report.h_crit / alpha);

    let mut out = Output::create(&a.io.out)?;
    out.csv("micro_macro.csv", &rows)?;
    out.text("micro_macro.gp", &plots::micro_macro(m_crit.unwrap_or(1.0), side))?;

    let dm: Vec<f64> = input.records.iter().map(|r| r.dm).collect();
    let quantum = input.records.iter().all(|r| r.lb.is_some()).then(|| magnetization_quantum(side));
    let est = stats::density(&dm, &Binning::returns(quantum)).map_err(runtime)?;
    let hs: Vec<f64> = input.records.iter().map(|r| r.h_smoothed).collect();
    let mix = macro_model::return_density(&surface, side, &hs, &est.edges).map_err(runtime)?;
    out.csv("density_micro.csv", &io::density_rows(&est))?;
    out.csv("density_mixture.csv", &io::mixture_rows(&mix))?;
    let fit = stats::tail_fit(&dm, &est).ok().map(|t| (t.fit.prefactor, t.fit.exponent));
    out.text("density.gp", &plots::density("density_micro.csv", Some("density_mixture.csv"), fit, "density.png"))?;
    let density = density_agreement(&dm, &est, &mix, DENSITY_FACTOR).ok();

    out.json(
        "compare.json",
        &CompareSummary {
            input: input.path.display().to_string(),
            side,
            alpha,
            h_crit: report.h_crit,
            m_crit,
            window: report.window,
            used: report.used,
            excluded: report.excluded,
            median_abs_log_ratio: report.median_abs_log_ratio,
            mean_log_ratio: report.mean_log_ratio,
            correlation: report.correlation,
            density,
        },
    )?;
    out.finish("compare", RunConfig { model: flags, compare: opts, ..Default::default() }, vec![])?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_grid_is_inclusive_and_rounded() {
        let g = SweepGrid { h_min: Some(1.0), h_max: Some(2.5), h_step: Some(0.05), ..Default::default() };
        let hs = field_grid(&g).unwrap();
        assert_eq!(hs.len(), 31);
        assert_eq!(hs[17], 1.85);
        assert_eq!(*hs.last().unwrap(), 2.5);
        assert!(field_grid(&SweepGrid::default()).is_err());
    }

    #[test]
    fn cell_checksum_detects_edits() {
        let spec = CellSpec { side: 8, h: 1.0, seed: 3 };
        let cell = SweepCell { side: 8, h: 1.0, seed: 3, summary: None, error: Some("x".into()) };
        let a = cell_checksum("p", &cell);
        assert_ne!(a, cell_checksum("q", &cell));
        assert_eq!(cell_name(&spec), "cells/L8_h1.000000.json");
    }
}
