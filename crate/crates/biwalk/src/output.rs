//! CSV and JSON result files.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64`. Guide indices are 1-based.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use biwalk_core::disorder::{EnsembleResult, KappaSweep, RegimeMap};
use biwalk_core::evolution::{Direction, ExtremumKind, PumpScan, TransitionReport};
use biwalk_core::TransportSeries;
use serde::Serialize;

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes `# ` comment lines, a header and the rows, each newline-terminated.
pub fn write_csv<I>(
    path: &Path,
    comments: &[String],
    header: &[String],
    rows: I,
) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e| CliError::io(path, e);
    let mut file = BufWriter::new(File::create(path).map_err(io)?);
    for c in comments {
        writeln!(file, "# {c}").map_err(io)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    let csv_err = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn headers(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `z, sigma, gamma, n_first, n_last, border_flag`
pub fn write_series(path: &Path, series: &TransportSeries) -> Result<(), CliError> {
    let rows = (0..series.z_grid.len()).map(|i| {
        vec![
            num(series.z_grid[i]),
            num(series.sigma[i]),
            num(series.gamma[i]),
            num(series.corner_populations[i][0]),
            num(series.corner_populations[i][1]),
            u8::from(series.border_flags[i]).to_string(),
        ]
    });
    write_csv(
        path,
        &[],
        &headers(&["z", "sigma", "gamma", "n_first", "n_last", "border_flag"]),
        rows,
    )
}

/// One row per snapshot: `z, n_1, ..., n_N`.
pub fn write_distributions(
    path: &Path,
    z_grid: &[f64],
    n_guides: usize,
    snapshots: &[(usize, Vec<f64>)],
) -> Result<(), CliError> {
    let mut header = vec!["z".to_string()];
    header.extend((1..=n_guides).map(|k| format!("n_{k}")));
    let rows = snapshots.iter().map(|(i, n)| {
        let mut row = vec![num(z_grid[*i])];
        row.extend(n.iter().map(|x| num(*x)));
        row
    });
    write_csv(path, &[], &header, rows)
}

#[derive(Serialize)]
struct CrossingOut {
    z: f64,
    direction: &'static str,
}

#[derive(Serialize)]
struct ExtremumOut {
    z: f64,
    gamma: f64,
    kind: &'static str,
}

#[derive(Serialize)]
struct TransitionsOut {
    n_guides: usize,
    pump_guides: Vec<usize>,
    border_threshold: f64,
    border_onset: Option<f64>,
    crossings: Vec<CrossingOut>,
    extrema: Vec<ExtremumOut>,
}

pub fn write_transitions(
    path: &Path,
    report: &TransitionReport,
    n_guides: usize,
    pump_guides: &[usize],
    border_threshold: f64,
) -> Result<(), CliError> {
    let out = TransitionsOut {
        n_guides,
        pump_guides: pump_guides.iter().map(|g| g + 1).collect(),
        border_threshold,
        border_onset: report.border_onset,
        crossings: report
            .crossings
            .iter()
            .map(|c| CrossingOut {
                z: c.z,
                direction: match c.direction {
                    Direction::Falling => "falling",
                    Direction::Rising => "rising",
                },
            })
            .collect(),
        extrema: report
            .extrema
            .iter()
            .map(|e| ExtremumOut {
                z: e.z,
                gamma: e.gamma,
                kind: match e.kind {
                    ExtremumKind::Maximum => "maximum",
                    ExtremumKind::Minimum => "minimum",
                },
            })
            .collect(),
    };
    write_json(path, &out)
}

/// `z, sigma_mean, sigma_stderr, gamma_of_mean, dsigma_dz`
pub fn write_ensemble(path: &Path, ens: &EnsembleResult) -> Result<(), CliError> {
    let rows = (0..ens.z_grid.len()).map(|i| {
        vec![
            num(ens.z_grid[i]),
            num(ens.sigma_mean[i]),
            num(ens.sigma_stderr[i]),
            num(ens.gamma_of_mean[i]),
            num(ens.dsigma_dz[i]),
        ]
    });
    write_csv(
        path,
        &[],
        &headers(&[
            "z",
            "sigma_mean",
            "sigma_stderr",
            "gamma_of_mean",
            "dsigma_dz",
        ]),
        rows,
    )
}

/// `kappa_c, kappa_beta, present`, kappa_beta varying fastest.
pub fn write_regime_map(path: &Path, map: &RegimeMap, comments: &[String]) -> Result<(), CliError> {
    let rows = map.kappa_c.iter().enumerate().flat_map(|(i, kc)| {
        map.kappa_beta
            .iter()
            .enumerate()
            .map(move |(j, kb)| vec![num(*kc), num(*kb), u8::from(map.present[i][j]).to_string()])
    });
    write_csv(
        path,
        comments,
        &headers(&["kappa_c", "kappa_beta", "present"]),
        rows,
    )
}

/// `kappa, z, sigma_mean, sigma_stderr, disorder_type`
pub fn write_kappa_sweeps(path: &Path, sweeps: &[(KappaSweep, &str)]) -> Result<(), CliError> {
    let rows = sweeps.iter().flat_map(|(s, kind)| {
        s.kappas.iter().enumerate().flat_map(move |(i, k)| {
            s.z_values.iter().enumerate().map(move |(j, z)| {
                vec![
                    num(*k),
                    num(*z),
                    num(s.sigma_mean[i][j]),
                    num(s.sigma_stderr[i][j]),
                    kind.to_string(),
                ]
            })
        })
    });
    write_csv(
        path,
        &[],
        &headers(&["kappa", "z", "sigma_mean", "sigma_stderr", "disorder_type"]),
        rows,
    )
}

/// `pump_index, z, gamma`
pub fn write_border_scan(path: &Path, scan: &PumpScan) -> Result<(), CliError> {
    let rows = scan.gamma.iter().enumerate().flat_map(|(p, row)| {
        scan.z_grid
            .iter()
            .zip(row)
            .map(move |(z, g)| vec![(p + 1).to_string(), num(*z), num(*g)])
    });
    write_csv(path, &[], &headers(&["pump_index", "z", "gamma"]), rows)
}

/// `pump_index, left_onset, right_onset`; empty where the pump sits on that border.
pub fn write_border_onsets(path: &Path, scan: &PumpScan) -> Result<(), CliError> {
    let rows = (0..scan.gamma.len()).map(|p| {
        vec![
            (p + 1).to_string(),
            opt_num(scan.left_onset[p]),
            opt_num(scan.right_onset[p]),
        ]
    });
    write_csv(
        path,
        &[],
        &headers(&["pump_index", "left_onset", "right_onset"]),
        rows,
    )
}
