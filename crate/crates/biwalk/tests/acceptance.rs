//! End-to-end acceptance checks. Each test prints one `ACCEPTANCE [PASS]` or
//! `ACCEPTANCE [FAIL]` line and then asserts. Run with
//! `cargo test -p biwalk --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::time::{Duration, Instant};

use biwalk::validate::{run_suite, SuiteOptions};
use biwalk::RayonExecutor;
use biwalk_core::disorder::{
    default_presence_window, regime_map, run_ensemble, sigma_vs_kappa, DisorderKind, KappaSweep,
};
use biwalk_core::evolution::{
    border_onset, derivative, geometric_grid, local_log_grid, propagate_series, transition_report,
    Direction, ExtremumKind, PropagateOptions, DEFAULT_BORDER_THRESHOLD,
};
use biwalk_core::model::center_guide;
use biwalk_core::{ArrayConfig, DisorderSpec, TransportSeries};

const MASTER_SEED: u64 = 2024;
const REALIZATIONS: usize = 200;

fn exec() -> RayonExecutor {
    RayonExecutor::new(0).unwrap()
}

fn verdict(name: &str, passed: bool, detail: &str, elapsed: Duration) {
    let tag = if passed { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE [{tag}] {name}: {detail} ({:.1} s)",
        elapsed.as_secs_f64()
    );
    assert!(passed, "{name}: {detail}");
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn series(n: usize, pump: usize, grid: &[f64]) -> TransportSeries {
    propagate_series(
        &ArrayConfig::ordered(n, pump),
        grid,
        &PropagateOptions::default(),
        &exec(),
    )
    .unwrap()
}

fn figure_grid() -> Vec<f64> {
    geometric_grid(0.05, 30.0, 400).unwrap()
}

#[test]
fn ordered_center_pump_features() {
    let t = Instant::now();
    let report = transition_report(&series(71, 35, &figure_grid()));
    let max = report
        .extrema
        .iter()
        .find(|e| e.kind == ExtremumKind::Maximum)
        .copied();
    let fall = report
        .crossings
        .iter()
        .find(|c| c.direction == Direction::Falling)
        .copied();
    let elapsed = t.elapsed();
    let (max, fall) = (max.unwrap(), fall.unwrap());
    let ok = within(max.gamma, 1.114, 0.005)
        && within(max.z, 1.203, 0.02)
        && within(fall.z, 2.005, 0.02)
        && elapsed < Duration::from_secs(5);
    verdict(
        "ordered center pump N=71",
        ok,
        &format!(
            "gamma max {:.4} at C0z={:.4} (1.114 at 1.203), falling crossing at {:.4} (2.005)",
            max.gamma, max.z, fall.z
        ),
        elapsed,
    );
}

#[test]
fn ordered_corner_pump_features() {
    let t = Instant::now();
    let report = transition_report(&series(71, 0, &figure_grid()));
    let min = report
        .extrema
        .iter()
        .find(|e| e.kind == ExtremumKind::Minimum)
        .copied()
        .unwrap();
    let rise = report
        .crossings
        .iter()
        .find(|c| c.direction == Direction::Rising)
        .copied()
        .unwrap();
    let max = report
        .extrema
        .iter()
        .find(|e| e.kind == ExtremumKind::Maximum && e.z > rise.z)
        .copied()
        .unwrap();
    let elapsed = t.elapsed();
    let ok = within(min.gamma, 0.943, 0.005)
        && within(min.z, 1.630, 0.02)
        && within(rise.z, 2.404, 0.02)
        && within(max.gamma, 1.063, 0.005)
        && within(max.z, 4.619, 0.05)
        && elapsed < Duration::from_secs(5);
    verdict(
        "ordered corner pump N=71",
        ok,
        &format!(
            "gamma min {:.4} at {:.4} (0.943 at 1.630), rising crossing at {:.4} (2.404), gamma max {:.4} at {:.4} (1.063 at 4.619)",
            min.gamma, min.z, rise.z, max.gamma, max.z
        ),
        elapsed,
    );
}

#[test]
fn large_array_asymptotics() {
    let t = Instant::now();
    let at = |pump: usize, z: f64| {
        let grid = local_log_grid(z, 2, 400).unwrap();
        let s = series(1000, pump, &grid);
        (s.gamma[2], s.border_flags.iter().any(|f| *f))
    };
    let (center, center_border) = at(center_guide(1000), 200.0);
    let (corner, corner_border) = at(0, 400.0);
    let elapsed = t.elapsed();
    let ok = within(center, 0.936, 0.005)
        && within(corner, 1.001, 0.005)
        && !center_border
        && !corner_border
        && elapsed < Duration::from_secs(600);
    verdict(
        "large-array asymptotics N=1000",
        ok,
        &format!(
            "center gamma(200) = {center:.5} (0.936), corner gamma(400) = {corner:.5} (1.001)"
        ),
        elapsed,
    );
}

fn border_grid() -> Vec<f64> {
    geometric_grid(0.05, 40.0, 400).unwrap()
}

#[test]
fn border_onset_window_and_ordering() {
    let t = Instant::now();
    let grid = border_grid();
    let onset = |n: usize| {
        border_onset(&series(n, center_guide(n), &grid), DEFAULT_BORDER_THRESHOLD).unwrap()
    };
    let o71 = onset(71);
    let (o25, o50, o75) = (onset(25), onset(50), onset(75));
    let elapsed = t.elapsed();
    let ok = (12.0..=20.0).contains(&o71) && o25 < o50 && o50 < o75;
    verdict(
        "border onset",
        ok,
        &format!(
            "N=71 onset {o71:.3} in [12, 20]; N=25/50/75 onsets {o25:.3} < {o50:.3} < {o75:.3}"
        ),
        elapsed,
    );
}

#[test]
fn gamma_is_size_independent_before_the_border() {
    let t = Instant::now();
    let grid = border_grid();
    let runs: Vec<TransportSeries> = [25usize, 50, 75]
        .iter()
        .map(|&n| series(n, center_guide(n), &grid))
        .collect();
    let limit = runs
        .iter()
        .map(|s| border_onset(s, DEFAULT_BORDER_THRESHOLD).unwrap())
        .fold(f64::INFINITY, f64::min);
    let mut worst = 0.0f64;
    let mut compared = 0;
    for i in (0..grid.len()).take_while(|&i| grid[i] < limit) {
        for s in &runs[1..] {
            worst = worst.max((s.gamma[i] - runs[0].gamma[i]).abs());
        }
        compared += 1;
    }
    let elapsed = t.elapsed();
    verdict(
        "size independence of gamma",
        worst <= 1e-6 && compared > 100,
        &format!(
            "max |gamma_N - gamma_25| = {worst:.3e} over {compared} points below C0z = {limit:.3}"
        ),
        elapsed,
    );
}

/// First index where `sigma_mean` rises by more than twice the combined
/// standard error between neighbouring kappas, per z.
fn first_significant_rise(sweep: &KappaSweep) -> Option<(f64, f64, f64)> {
    for j in 0..sweep.z_values.len() {
        for i in 0..sweep.kappas.len() - 1 {
            let rise = sweep.sigma_mean[i + 1][j] - sweep.sigma_mean[i][j];
            let se = sweep.sigma_stderr[i][j].hypot(sweep.sigma_stderr[i + 1][j]);
            if rise > 2.0 * se {
                return Some((sweep.z_values[j], sweep.kappas[i + 1], rise / se));
            }
        }
    }
    None
}

fn kappa_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[test]
fn disorder_ensemble_properties() {
    let t = Instant::now();
    let ex = exec();
    let n = 51;
    let center = ArrayConfig::ordered(n, center_guide(n));
    let corner = ArrayConfig::ordered(n, 0);
    let template = DisorderSpec {
        realizations: REALIZATIONS,
        master_seed: MASTER_SEED,
        ..DisorderSpec::default()
    };
    let mut lines = Vec::new();

    // (a)
    let a = sigma_vs_kappa(
        &center,
        &[0.0, 0.25, 0.5, 0.75, 1.0],
        DisorderKind::OffDiagonal,
        &[10.0],
        &template,
        &ex,
    )
    .unwrap();
    let a_rise = first_significant_rise(&a);
    let a_ok = a_rise.is_none();
    let means: Vec<String> = a
        .sigma_mean
        .iter()
        .map(|m| format!("{:.3}", m[0]))
        .collect();
    lines.push(format!(
        "(a) {} sigma_mean(10) over kappa_c = [{}]",
        tag(a_ok),
        means.join(", ")
    ));

    // (b)
    let window = default_presence_window(&center, 100, DEFAULT_BORDER_THRESHOLD, &ex).unwrap();
    let map = regime_map(&center, &[0.0, 1.0], &[0.0, 1.0], &template, &window, &ex).unwrap();
    let b_ok = map.present[0][0] && !map.present[1][1];
    lines.push(format!(
        "(b) {} presence (0,0)={} peak {:.4}, (1,1)={} peak {:.4}, window up to {:.2}",
        tag(b_ok),
        map.present[0][0],
        map.peak_gamma[0][0],
        map.present[1][1],
        map.peak_gamma[1][1],
        window[window.len() - 1]
    ));

    // (c)
    let kappas = kappa_grid();
    let c = sigma_vs_kappa(
        &center,
        &kappas[..2],
        DisorderKind::Diagonal,
        &[5.0, 10.0],
        &template,
        &ex,
    )
    .unwrap();
    let c_ok = (0..2).all(|j| c.sigma_mean[1][j] > c.sigma_mean[0][j]);
    lines.push(format!(
        "(c) {} center diagonal: sigma_mean(kappa={}) - sigma_mean(0) = {:+.4} (se {:.4}) at z=5, {:+.4} (se {:.4}) at z=10",
        tag(c_ok),
        kappas[1],
        c.sigma_mean[1][0] - c.sigma_mean[0][0],
        c.sigma_stderr[1][0],
        c.sigma_mean[1][1] - c.sigma_mean[0][1],
        c.sigma_stderr[1][1]
    ));

    // (d) corner distances doubled
    let mut d_ok = true;
    for kind in [DisorderKind::OffDiagonal, DisorderKind::Diagonal] {
        let d = sigma_vs_kappa(&corner, &kappas, kind, &[10.0, 20.0], &template, &ex).unwrap();
        let rise = first_significant_rise(&d);
        d_ok &= rise.is_none();
        lines.push(format!(
            "(d) {} corner {kind:?}: {}",
            tag(rise.is_none()),
            match rise {
                None => "non-increasing within 2 stderr".to_string(),
                Some((z, k, r)) => format!("rise of {r:.2} stderr at z={z}, kappa={k}"),
            }
        ));
    }
    let elapsed = t.elapsed();
    for l in &lines {
        println!("    {l}");
    }
    verdict(
        "disorder ensemble properties N=51",
        a_ok && b_ok && c_ok && d_ok && elapsed < Duration::from_secs(900),
        &lines.join("; "),
        elapsed,
    );
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

#[test]
fn localization_under_strong_diagonal_disorder() {
    let t = Instant::now();
    let ex = exec();
    let n = 401;
    let base = ArrayConfig::ordered(n, center_guide(n));
    // tail decade of a 1..1e4 grid; only these points enter either check
    let grid = geometric_grid(1e3, 1e4, 20).unwrap();
    let spec = DisorderSpec {
        realizations: REALIZATIONS,
        master_seed: MASTER_SEED,
        ..DisorderSpec::new(0.0, 1.0)
    };
    let ens = run_ensemble(&base, &spec, &grid, &[], &ex).unwrap();
    let ordered_series = series(n, center_guide(n), &grid);
    let ordered_slope = derivative(&grid, &ordered_series.sigma);
    let last = grid.len() - 1;
    let change = (ens.sigma_mean[last] - ens.sigma_mean[0]) / ens.sigma_mean[0];
    let ratio = ens.dsigma_dz[last] / ordered_slope[last];
    let elapsed = t.elapsed();
    let ok = change.abs() < 0.02 && ratio.abs() < 0.05 && elapsed < Duration::from_secs(1200);
    verdict(
        "localization N=401 kappa_beta=1",
        ok,
        &format!(
            "sigma_mean {:.4} -> {:.4} over C0z {}..{} (relative change {:.2}%, limit 2%); dsigma/dz {:.3e} vs ordered {:.3e} (ratio {:.2}%, limit 5%; ordered border flag {})",
            ens.sigma_mean[0],
            ens.sigma_mean[last],
            grid[0],
            grid[last],
            100.0 * change,
            ens.dsigma_dz[last],
            ordered_slope[last],
            100.0 * ratio,
            ordered_series.border_flags[last]
        ),
        elapsed,
    );
}

#[test]
fn oracle_suite() {
    let t = Instant::now();
    let outcomes = run_suite(&SuiteOptions {
        seed: MASTER_SEED,
        ..SuiteOptions::default()
    });
    let elapsed = t.elapsed();
    for o in &outcomes {
        println!("    {o}");
    }
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.name)
        .collect();
    verdict(
        "oracle suite",
        failed.is_empty() && elapsed < Duration::from_secs(60),
        &if failed.is_empty() {
            format!(
                "{} checks passed, 50 RK4 configs, eigensolver N=2..=200",
                outcomes.len()
            )
        } else {
            format!("failed: {}", failed.join(", "))
        },
        elapsed,
    );
}
