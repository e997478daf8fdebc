//! Disordered arrays and seeded ensembles.
//!
//! Realization `r` of an ensemble draws from a ChaCha20 stream whose 256-bit
//! seed is `SHA-256("biwalk/realization" || master_seed_le || r_le)`. The
//! stream therefore depends only on `(master_seed, r)`, never on which worker
//! runs it, and all reductions walk realizations in index order. Results are
//! bit-identical for any executor.
//!
//! Each realization consumes exactly N uniforms for the propagation
//! constants followed by N-1 for the couplings, whether or not that kind of
//! disorder is switched on, so turning one kind on never reshuffles the
//! other.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolution::{self, check_grid, Propagator};
use crate::exec::Executor;
use crate::model::{ArrayConfig, Averaging, DisorderSpec};

const SEED_DOMAIN: &[u8] = b"biwalk/realization";

/// Generator seed for one realization.
pub fn realization_seed(master_seed: u64, realization: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(SEED_DOMAIN);
    h.update(master_seed.to_le_bytes());
    h.update(realization.to_le_bytes());
    h.finalize().into()
}

pub fn realization_rng(master_seed: u64, realization: u64) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(realization_seed(master_seed, realization))
}

/// Draws one disordered array.
///
/// With `kappa_beta > 0` every `beta_j` is replaced by a uniform draw around
/// `beta_0`; with `kappa_c > 0` every `C_j` by a draw around 1 (that is,
/// `C0`). A disorder kind that is switched off leaves the base profile
/// untouched, and with both off the base is returned as is. A phase-matched
/// pump follows the sampled `beta_j`; an explicit `beta~` override is kept.
pub fn sample_array(base: &ArrayConfig, spec: &DisorderSpec, realization: u64) -> ArrayConfig {
    if spec.is_ordered() {
        return base.clone();
    }
    let mut rng = realization_rng(spec.master_seed, realization);
    let mut out = base.clone();
    let half_beta = spec.kappa_beta * spec.delta_beta;
    let half_c = spec.kappa_c * spec.delta_c;
    for b in out.beta_s.iter_mut() {
        let u: f64 = rng.random();
        if spec.kappa_beta > 0.0 {
            *b = uniform(spec.beta_0 - half_beta, spec.beta_0 + half_beta, u);
        }
    }
    for c in out.couplings.iter_mut() {
        let u: f64 = rng.random();
        if spec.kappa_c > 0.0 {
            *c = uniform(1.0 - half_c, 1.0 + half_c, u);
        }
    }
    out
}

#[inline]
fn uniform(lo: f64, hi: f64, u: f64) -> f64 {
    lo + (hi - lo) * u
}

/// Welford accumulator; feeding the same value repeatedly keeps the mean
/// bit-exact and the variance exactly zero.
#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / k;
            *s += d * (v - *m);
        }
    }

    fn stderr(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let k = self.count as f64;
        self.m2
            .iter()
            .map(|s| libm::sqrt((s / (k - 1.0)).max(0.0) / k))
            .collect()
    }
}

struct RealizationOutput {
    sigma: Vec<f64>,
    /// Distributions at the tracked grid indices, in the same order.
    distributions: Vec<Vec<f64>>,
}

fn run_realization(
    config: &ArrayConfig,
    z_grid: &[f64],
    tracked: &[usize],
) -> Result<RealizationOutput> {
    let prop = Propagator::new(config)?;
    let mut sigma = Vec::with_capacity(z_grid.len());
    let mut distributions = Vec::with_capacity(tracked.len());
    for (i, &z) in z_grid.iter().enumerate() {
        let n = prop.distribution(z)?;
        sigma.push(evolution::sigma(&n)?);
        if tracked.contains(&i) {
            distributions.push(n);
        }
    }
    Ok(RealizationOutput {
        sigma,
        distributions,
    })
}

/// Ensemble statistics of `sigma` on a grid, without derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaStats {
    pub sigma_mean: Vec<f64>,
    /// Standard error of the per-realization `sigma`.
    pub sigma_stderr: Vec<f64>,
    /// `(grid index, mean n_k)` for the requested snapshots.
    pub mean_distribution: Vec<(usize, Vec<f64>)>,
}

/// Runs `spec.realizations` disordered copies of `base` on `z_grid`.
///
/// In [`Averaging::Sigma`] mode `sigma_mean` is the mean of the per-realization
/// `sigma(z)`; in [`Averaging::Distribution`] mode it is `sigma` of the
/// realization-averaged distribution. The standard error is always that of
/// the per-realization `sigma`.
pub fn ensemble_sigma<E: Executor>(
    base: &ArrayConfig,
    spec: &DisorderSpec,
    z_grid: &[f64],
    snapshot_indices: &[usize],
    exec: &E,
) -> Result<SigmaStats> {
    base.check()?;
    spec.check()?;
    check_grid(z_grid)?;
    if snapshot_indices.iter().any(|&i| i >= z_grid.len()) {
        return Err(Error::InvalidGrid("snapshot index out of range"));
    }
    let tracked: Vec<usize> = match spec.averaging {
        Averaging::Sigma => snapshot_indices.to_vec(),
        Averaging::Distribution => (0..z_grid.len()).collect(),
    };

    let outputs: Vec<Result<RealizationOutput>> = if spec.is_ordered() {
        // every realization is the base array
        vec![run_realization(base, z_grid, &tracked)]
    } else {
        exec.map_indexed(spec.realizations, |r| {
            run_realization(&sample_array(base, spec, r as u64), z_grid, &tracked)
        })
    };

    let n = base.n_guides;
    let mut sigma_acc = Moments::new(z_grid.len());
    let mut dist_acc: Vec<Moments> = tracked.iter().map(|_| Moments::new(n)).collect();
    let repeats = if spec.is_ordered() {
        spec.realizations
    } else {
        1
    };
    for (index, out) in outputs.into_iter().enumerate() {
        let out = out.map_err(|e| Error::Realization {
            index,
            source: Box::new(e),
        })?;
        for _ in 0..repeats {
            sigma_acc.push(&out.sigma);
            for (acc, d) in dist_acc.iter_mut().zip(&out.distributions) {
                acc.push(d);
            }
        }
    }

    let sigma_stderr = sigma_acc.stderr();
    let sigma_mean = match spec.averaging {
        Averaging::Sigma => sigma_acc.mean,
        Averaging::Distribution => dist_acc
            .iter()
            .map(|acc| evolution::sigma(&acc.mean))
            .collect::<Result<_>>()?,
    };
    let mean_distribution = snapshot_indices
        .iter()
        .map(|&i| {
            let slot = tracked.iter().position(|&t| t == i).expect("tracked");
            (i, dist_acc[slot].mean.clone())
        })
        .collect();
    Ok(SigmaStats {
        sigma_mean,
        sigma_stderr,
        mean_distribution,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub z_grid: Vec<f64>,
    pub sigma_mean: Vec<f64>,
    pub sigma_stderr: Vec<f64>,
    /// `gamma` of `sigma_mean`, not the mean of per-realization `gamma`.
    pub gamma_of_mean: Vec<f64>,
    pub dsigma_dz: Vec<f64>,
    pub mean_distribution: Vec<(usize, Vec<f64>)>,
    pub realizations_used: usize,
    pub master_seed: u64,
    pub averaging: Averaging,
}

pub fn run_ensemble<E: Executor>(
    base: &ArrayConfig,
    spec: &DisorderSpec,
    z_grid: &[f64],
    snapshot_indices: &[usize],
    exec: &E,
) -> Result<EnsembleResult> {
    if z_grid.len() < 2 {
        check_grid(z_grid)?;
        return Err(Error::InvalidGrid(
            "an ensemble series needs at least two grid points",
        ));
    }
    let stats = ensemble_sigma(base, spec, z_grid, snapshot_indices, exec)?;
    let gamma_of_mean = evolution::gamma_series(z_grid, &stats.sigma_mean)?;
    let dsigma_dz = evolution::derivative(z_grid, &stats.sigma_mean);
    Ok(EnsembleResult {
        z_grid: z_grid.to_vec(),
        sigma_mean: stats.sigma_mean,
        sigma_stderr: stats.sigma_stderr,
        gamma_of_mean,
        dsigma_dz,
        mean_distribution: stats.mean_distribution,
        realizations_used: spec.realizations,
        master_seed: spec.master_seed,
        averaging: spec.averaging,
    })
}

/// Upper end of the default superballistic search window.
pub const PRESENCE_WINDOW_MAX: f64 = 8.0;
pub const PRESENCE_WINDOW_MIN: f64 = 0.05;

/// Log grid on `[0.05, min(border onset of the ordered base, 8)]`.
pub fn default_presence_window<E: Executor>(
    base: &ArrayConfig,
    points_per_decade: usize,
    border_threshold: f64,
    exec: &E,
) -> Result<Vec<f64>> {
    let grid =
        evolution::geometric_grid(PRESENCE_WINDOW_MIN, PRESENCE_WINDOW_MAX, points_per_decade)?;
    let opts = evolution::PropagateOptions {
        snapshot_indices: Vec::new(),
        border_threshold,
    };
    let series = evolution::propagate_series(base, &grid, &opts, exec)?;
    let keep = series.border_free_len().max(2).min(grid.len());
    Ok(grid[..keep].to_vec())
}

/// Presence of a superballistic stretch (`gamma_of_mean > 1`) over a grid of
/// disorder strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMap {
    pub kappa_c: Vec<f64>,
    pub kappa_beta: Vec<f64>,
    /// `present[i][j]` for `(kappa_c[i], kappa_beta[j])`.
    pub present: Vec<Vec<bool>>,
    /// Peak `gamma_of_mean` inside the window, per cell.
    pub peak_gamma: Vec<Vec<f64>>,
    pub z_window: Vec<f64>,
}

pub fn regime_map<E: Executor>(
    base: &ArrayConfig,
    kappa_c_grid: &[f64],
    kappa_beta_grid: &[f64],
    spec: &DisorderSpec,
    z_window: &[f64],
    exec: &E,
) -> Result<RegimeMap> {
    let mut present = Vec::with_capacity(kappa_c_grid.len());
    let mut peak_gamma = Vec::with_capacity(kappa_c_grid.len());
    for &kc in kappa_c_grid {
        let mut row = Vec::with_capacity(kappa_beta_grid.len());
        let mut peaks = Vec::with_capacity(kappa_beta_grid.len());
        for &kb in kappa_beta_grid {
            let cell = DisorderSpec {
                kappa_c: kc,
                kappa_beta: kb,
                ..spec.clone()
            };
            let ens = run_ensemble(base, &cell, z_window, &[], exec)?;
            let peak = ens
                .gamma_of_mean
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            row.push(peak > 1.0);
            peaks.push(peak);
        }
        present.push(row);
        peak_gamma.push(peaks);
    }
    Ok(RegimeMap {
        kappa_c: kappa_c_grid.to_vec(),
        kappa_beta: kappa_beta_grid.to_vec(),
        present,
        peak_gamma,
        z_window: z_window.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisorderKind {
    /// Couplings only (`kappa_c`).
    OffDiagonal,
    /// Propagation constants only (`kappa_beta`).
    Diagonal,
}

impl DisorderKind {
    pub fn spec(self, kappa: f64, template: &DisorderSpec) -> DisorderSpec {
        let (kappa_c, kappa_beta) = match self {
            Self::OffDiagonal => (kappa, 0.0),
            Self::Diagonal => (0.0, kappa),
        };
        DisorderSpec {
            kappa_c,
            kappa_beta,
            ..template.clone()
        }
    }
}

/// `sigma_mean` at fixed distances as a function of one disorder strength.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSweep {
    pub kind: DisorderKind,
    pub kappas: Vec<f64>,
    pub z_values: Vec<f64>,
    /// `sigma_mean[i][j]` at `(kappas[i], z_values[j])`.
    pub sigma_mean: Vec<Vec<f64>>,
    pub sigma_stderr: Vec<Vec<f64>>,
}

pub fn sigma_vs_kappa<E: Executor>(
    base: &ArrayConfig,
    kappas: &[f64],
    kind: DisorderKind,
    z_values: &[f64],
    spec: &DisorderSpec,
    exec: &E,
) -> Result<KappaSweep> {
    let mut sweep = KappaSweep {
        kind,
        kappas: kappas.to_vec(),
        z_values: z_values.to_vec(),
        sigma_mean: Vec::with_capacity(kappas.len()),
        sigma_stderr: Vec::with_capacity(kappas.len()),
    };
    for &kappa in kappas {
        let stats = ensemble_sigma(base, &kind.spec(kappa, spec), z_values, &[], exec)?;
        sweep.sigma_mean.push(stats.sigma_mean);
        sweep.sigma_stderr.push(stats.sigma_stderr);
    }
    Ok(sweep)
}
