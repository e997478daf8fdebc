//! One function per subcommand. Each reads an [`ExperimentConfig`], runs the
//! simulation and writes its files into `out_dir`, returning their paths.

use std::path::{Path, PathBuf};

use biwalk_core::disorder::{
    default_presence_window, realization_seed, regime_map, run_ensemble, sigma_vs_kappa,
};
use biwalk_core::evolution::{
    geometric_grid, propagate_series, pump_position_scan, transition_report, PropagateOptions,
};
use biwalk_core::{Averaging, DisorderSpec};
use serde::Serialize;

use crate::config::{unit_axis, DisorderSection, ExperimentConfig, KindName};
use crate::error::CliError;
use crate::exec::RayonExecutor;
use crate::output;

/// Flag values that replace config entries.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if self.seed.is_none() && self.realizations.is_none() {
            return;
        }
        let d = cfg.disorder.get_or_insert_with(DisorderSection::default);
        if let Some(seed) = self.seed {
            d.seed = seed;
        }
        if let Some(r) = self.realizations {
            d.realizations = r;
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn series_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    let grid = cfg.z_grid()?;
    if grid.len() < 2 {
        return Err(CliError::Usage("a z grid needs at least two points".into()));
    }
    Ok(grid)
}

fn write_effective(dir: &Path, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let path = dir.join("effective_config.toml");
    std::fs::write(&path, cfg.to_toml()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// series.csv, distributions.csv, transitions.json
pub fn propagate(
    cfg: &ExperimentConfig,
    exec: &RayonExecutor,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let array = cfg.array_config()?;
    let grid = series_grid(cfg)?;
    let options = PropagateOptions {
        snapshot_indices: cfg.snapshot_indices(grid.len()),
        border_threshold: cfg.border_threshold()?,
    };
    let series = propagate_series(&array, &grid, &options, exec).map_err(CliError::from_core)?;
    let report = transition_report(&series);

    prepare_dir(out_dir)?;
    let paths = [
        out_dir.join("series.csv"),
        out_dir.join("distributions.csv"),
        out_dir.join("transitions.json"),
    ];
    output::write_series(&paths[0], &series)?;
    output::write_distributions(&paths[1], &grid, array.n_guides, &series.distributions)?;
    let pumped: Vec<usize> = array.pump.pumped_guides().collect();
    output::write_transitions(
        &paths[2],
        &report,
        array.n_guides,
        &pumped,
        options.border_threshold,
    )?;
    let mut out = paths.to_vec();
    out.push(write_effective(out_dir, cfg)?);
    Ok(out)
}

#[derive(Serialize)]
struct EnsembleMeta<'a> {
    master_seed: u64,
    /// How per-realization seeds are derived from the master seed.
    seed_derivation: &'static str,
    /// Hex ChaCha20 seeds, one per realization; empty for an ordered run.
    realization_seeds: Vec<String>,
    kappa_c: f64,
    kappa_beta: f64,
    delta_c: f64,
    delta_beta: f64,
    beta_0: f64,
    realizations: usize,
    averaging: &'static str,
    config: &'a ExperimentConfig,
}

const SEED_DERIVATION: &str =
    "sha256(\"biwalk/realization\" || master_seed as u64 LE || index as u64 LE) seeds ChaCha20";

fn averaging_name(a: Averaging) -> &'static str {
    match a {
        Averaging::Sigma => "sigma",
        Averaging::Distribution => "distribution",
    }
}

/// ensemble.csv, meta.json
pub fn ensemble(
    cfg: &ExperimentConfig,
    exec: &RayonExecutor,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let array = cfg.array_config()?;
    let spec = cfg.disorder_spec()?;
    let grid = series_grid(cfg)?;
    let ens = run_ensemble(&array, &spec, &grid, &[], exec).map_err(CliError::from_core)?;

    prepare_dir(out_dir)?;
    let csv = out_dir.join("ensemble.csv");
    output::write_ensemble(&csv, &ens)?;
    let seeds = if spec.is_ordered() {
        Vec::new()
    } else {
        (0..spec.realizations as u64)
            .map(|r| hex::encode(realization_seed(spec.master_seed, r)))
            .collect()
    };
    let meta = EnsembleMeta {
        master_seed: spec.master_seed,
        seed_derivation: SEED_DERIVATION,
        realization_seeds: seeds,
        kappa_c: spec.kappa_c,
        kappa_beta: spec.kappa_beta,
        delta_c: spec.delta_c,
        delta_beta: spec.delta_beta,
        beta_0: spec.beta_0,
        realizations: ens.realizations_used,
        averaging: averaging_name(spec.averaging),
        config: cfg,
    };
    let json = out_dir.join("meta.json");
    output::write_json(&json, &meta)?;
    Ok(vec![csv, json])
}

fn axis(explicit: &Option<Vec<f64>>, steps: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let values = match explicit {
        Some(v) => v.clone(),
        None => unit_axis(steps),
    };
    if values.is_empty() {
        return Err(CliError::Usage(format!("{what} axis is empty")));
    }
    Ok(values)
}

fn base_spec(cfg: &ExperimentConfig) -> Result<DisorderSpec, CliError> {
    // kappas come from the sweep axes; the section only supplies the rest
    let mut section = cfg.disorder.clone().unwrap_or_default();
    section.kappa_c = 0.0;
    section.kappa_beta = 0.0;
    section.to_spec()
}

/// regime_map.csv
pub fn regime(
    cfg: &ExperimentConfig,
    exec: &RayonExecutor,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let array = cfg.array_config()?;
    let spec = base_spec(cfg)?;
    let section = cfg.regime_map.clone().unwrap_or_default();
    let kc = axis(&section.kappa_c, section.steps, "kappa_c")?;
    let kb = axis(&section.kappa_beta, section.steps, "kappa_beta")?;
    let threshold = cfg.border_threshold()?;
    let window = match section.window {
        Some([lo, hi]) => {
            geometric_grid(lo, hi, section.points_per_decade).map_err(CliError::from_core)?
        }
        None => default_presence_window(&array, section.points_per_decade, threshold, exec)
            .map_err(CliError::from_core)?,
    };
    let map = regime_map(&array, &kc, &kb, &spec, &window, exec).map_err(CliError::from_core)?;

    let pumped: Vec<String> = array
        .pump
        .pumped_guides()
        .map(|g| (g + 1).to_string())
        .collect();
    let comments = vec![
        format!("n_guides = {}", array.n_guides),
        format!("pump_guides = {}", pumped.join(" ")),
        format!("realizations = {}", spec.realizations),
        format!("master_seed = {}", spec.master_seed),
        format!("averaging = {}", averaging_name(spec.averaging)),
        format!("delta_c = {}", spec.delta_c),
        format!("delta_beta = {}", spec.delta_beta),
        format!(
            "window = {} {} ({} points)",
            output::num(window[0]),
            output::num(window[window.len() - 1]),
            window.len()
        ),
        "present = 1 when gamma of the mean sigma exceeds 1 somewhere in the window".to_string(),
    ];
    prepare_dir(out_dir)?;
    let path = out_dir.join("regime_map.csv");
    output::write_regime_map(&path, &map, &comments)?;
    Ok(vec![path, write_effective(out_dir, cfg)?])
}

/// kappa_sweep.csv
pub fn kappa_sweep(
    cfg: &ExperimentConfig,
    exec: &RayonExecutor,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let array = cfg.array_config()?;
    let spec = base_spec(cfg)?;
    let section = cfg.sigma_vs_kappa.clone().unwrap_or_default();
    let kappas = axis(&section.kappas, section.steps, "kappa")?;
    if section.z.is_empty() {
        return Err(CliError::Usage("sigma_vs_kappa.z is empty".into()));
    }
    biwalk_core::evolution::check_grid(&section.z).map_err(CliError::from_core)?;
    let mut sweeps = Vec::new();
    for kind in &section.kinds {
        let s = sigma_vs_kappa(&array, &kappas, (*kind).into(), &section.z, &spec, exec)
            .map_err(CliError::from_core)?;
        sweeps.push((s, KindName::as_str(*kind)));
    }
    prepare_dir(out_dir)?;
    let path = out_dir.join("kappa_sweep.csv");
    output::write_kappa_sweeps(&path, &sweeps)?;
    Ok(vec![path, write_effective(out_dir, cfg)?])
}

/// border_scan.csv, border_onsets.csv
pub fn border_scan(
    cfg: &ExperimentConfig,
    exec: &RayonExecutor,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, CliError> {
    let array = cfg.array_config()?;
    let grid = series_grid(cfg)?;
    let options = PropagateOptions {
        snapshot_indices: Vec::new(),
        border_threshold: cfg.border_threshold()?,
    };
    let scan = pump_position_scan(&array, &grid, &options, exec).map_err(CliError::from_core)?;
    prepare_dir(out_dir)?;
    let mut paths = vec![
        out_dir.join("border_scan.csv"),
        out_dir.join("border_onsets.csv"),
    ];
    output::write_border_scan(&paths[0], &scan)?;
    output::write_border_onsets(&paths[1], &scan)?;
    paths.push(write_effective(out_dir, cfg)?);
    Ok(paths)
}
