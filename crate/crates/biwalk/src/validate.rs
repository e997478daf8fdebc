//! Self-check suite behind `biwalk validate`.
//!
//! Every check compares the production path against an independent
//! reference: the eigensolver against the closed-form spectrum of a uniform
//! chain, the closed-form amplitude against RK4 integration, and the
//! photon-number pipeline against invariants it must satisfy exactly.

use biwalk_core::disorder::{realization_rng, sample_array};
use biwalk_core::evolution::{photon_distribution, qtilde, sigma, to_individual, Propagator};
use biwalk_core::model::center_guide;
use biwalk_core::oracle::{integrate_qtilde, naive_transform, required_steps};
use biwalk_core::spectral::{decompose, homogeneous_reference, SupermodeDecomposition};
use biwalk_core::{ArrayConfig, DisorderSpec, PumpSpec};
use rand::Rng;

/// Multiplier on the minimum RK4 step count used by the agreement check.
const RK4_OVERSAMPLING: usize = 40;

/// Deliberate corruption, used to prove the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negates one off-diagonal entry of every eigenvector matrix.
    SignFlip,
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    pub rk4_configs: usize,
    pub max_toeplitz_n: usize,
    pub fault: Option<Fault>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            rk4_configs: 50,
            max_toeplitz_n: 200,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst case found, or the first violating input.
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

struct Ctx {
    fault: Option<Fault>,
}

impl Ctx {
    fn decompose(&self, cfg: &ArrayConfig) -> SupermodeDecomposition {
        let mut dec = decompose(cfg).expect("valid config");
        if self.fault == Some(Fault::SignFlip) && dec.dim() > 1 {
            let v = dec.transform[(0, 1)];
            dec.transform[(0, 1)] = -v;
        }
        dec
    }

    /// `n_k = sum_l |Q_kl|^2`, normalized, through the full two-sided transform.
    fn distribution(&self, cfg: &ArrayConfig, z: f64) -> Vec<f64> {
        let dec = self.decompose(cfg);
        let qt = qtilde(&dec, &cfg.pump, &cfg.beta_tilde(), z).expect("valid pump");
        photon_distribution(&to_individual(&qt, &dec).expect("same dim")).expect("nonzero")
    }
}

fn random_config(rng: &mut impl Rng, max_n: usize, seed: u64, index: u64) -> ArrayConfig {
    let n = rng.random_range(2..=max_n);
    let pump = rng.random_range(0..n);
    let spec = DisorderSpec {
        master_seed: seed,
        ..DisorderSpec::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0))
    };
    sample_array(&ArrayConfig::ordered(n, pump), &spec, index)
}

pub fn run_suite(opts: &SuiteOptions) -> Vec<CheckOutcome> {
    let ctx = Ctx { fault: opts.fault };
    vec![
        toeplitz_check(&ctx, opts),
        orthogonality_check(&ctx, opts),
        rk4_check(&ctx, opts),
        transform_check(&ctx, opts),
        normalization_check(&ctx, opts),
        symmetry_check(&ctx, opts),
        scale_invariance_check(&ctx, opts),
        reflection_check(&ctx),
    ]
}

fn toeplitz_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let mut worst_value = 0.0f64;
    let mut worst_vector = 0.0f64;
    let mut failure = None;
    'outer: for n in 2..=opts.max_toeplitz_n {
        for (beta0, c0) in [(0.0, 1.0), (-2.5, 0.7)] {
            let cfg = ArrayConfig::homogeneous(n, beta0, c0, PumpSpec::single(n, 0));
            let dec = ctx.decompose(&cfg);
            let reference = homogeneous_reference(n, beta0, c0);
            let scale = f64::abs(beta0) + 2.0 * c0;
            let ev = dec
                .eigenvalues
                .iter()
                .zip(&reference.eigenvalues)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / scale;
            let vec_err = dec
                .transform
                .as_slice()
                .iter()
                .zip(reference.transform.as_slice())
                .fold(0.0f64, |m, (a, b)| m.max((a.abs() - b.abs()).abs()));
            worst_value = worst_value.max(ev);
            worst_vector = worst_vector.max(vec_err);
            if ev > 1e-10 || vec_err > 1e-8 {
                failure = Some(format!(
                    "N={n} beta0={beta0} C0={c0}: eigenvalue error {ev:.3e}, vector error {vec_err:.3e}"
                ));
                break 'outer;
            }
        }
    }
    CheckOutcome {
        name: "eigensolver vs uniform-chain closed form",
        passed: failure.is_none(),
        detail: failure.unwrap_or_else(|| {
            format!(
                "N=2..={}: max eigenvalue error {worst_value:.3e} (relative), max |vector| error {worst_vector:.3e}",
                opts.max_toeplitz_n
            )
        }),
    }
}

fn orthogonality_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let mut rng = realization_rng(opts.seed, 1);
    let mut worst_orth = 0.0f64;
    let mut worst_res = 0.0f64;
    for trial in 0..40u64 {
        let cfg = random_config(&mut rng, 60, opts.seed, trial);
        let dec = ctx.decompose(&cfg);
        let orth = dec.orthogonality_error();
        let res = dec.residual(&cfg.beta_s, &cfg.couplings);
        worst_orth = worst_orth.max(orth);
        worst_res = worst_res.max(res);
        if orth > 1e-10 || res > 1e-9 {
            return CheckOutcome {
                name: "eigenvector orthonormality and residual",
                passed: false,
                detail: format!(
                    "trial {trial}, N={}, pump guide {}: |S S^T - I| = {orth:.3e}, |Omega S^T - S^T Lambda| = {res:.3e}",
                    cfg.n_guides,
                    cfg.pump.pumped_guides().next().unwrap_or(0) + 1
                ),
            };
        }
    }
    CheckOutcome {
        name: "eigenvector orthonormality and residual",
        passed: true,
        detail: format!("40 disordered arrays: max {worst_orth:.3e} / {worst_res:.3e}"),
    }
}

fn rk4_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let name = "closed-form amplitude vs RK4";
    let mut rng = realization_rng(opts.seed, 2);
    let mut worst = 0.0f64;
    for trial in 0..opts.rk4_configs as u64 {
        let cfg = random_config(&mut rng, 10, opts.seed, trial);
        let z = rng.random_range(0.1..=10.0);
        let dec = ctx.decompose(&cfg);
        let bt = cfg.beta_tilde();
        let steps = required_steps(&dec, &cfg.pump, &bt, z).max(1) * RK4_OVERSAMPLING;
        let closed = qtilde(&dec, &cfg.pump, &bt, z).expect("valid pump");
        let rk4 = integrate_qtilde(&dec, &cfg.pump, &bt, z, steps).expect("resolved");
        let err = closed.matrix.max_abs_diff(&rk4.matrix);
        worst = worst.max(err);
        if err > 1e-8 {
            return CheckOutcome {
                name,
                passed: false,
                detail: format!(
                    "trial {trial}, N={}, z={z}: max entry error {err:.3e}",
                    cfg.n_guides
                ),
            };
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: format!(
            "{} disordered arrays, max entry error {worst:.3e}",
            opts.rk4_configs
        ),
    }
}

fn transform_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let name = "basis change vs explicit summation";
    let mut rng = realization_rng(opts.seed, 3);
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let cfg = random_config(&mut rng, 12, opts.seed, trial);
        let dec = ctx.decompose(&cfg);
        let qt = qtilde(
            &dec,
            &cfg.pump,
            &cfg.beta_tilde(),
            rng.random_range(0.1..10.0),
        )
        .expect("valid pump");
        let fast = to_individual(&qt, &dec).expect("same dim");
        let slow = naive_transform(&qt.matrix, &dec.transform).expect("same dim");
        let err = fast.matrix.max_abs_diff(&slow);
        let norm = (fast.matrix.frobenius_norm() - qt.matrix.frobenius_norm()).abs();
        worst = worst.max(err).max(norm);
        if err > 1e-12 || norm > 1e-12 * qt.matrix.frobenius_norm().max(1.0) {
            return CheckOutcome {
                name,
                passed: false,
                detail: format!(
                    "trial {trial}, N={}: entry error {err:.3e}, Frobenius norm change {norm:.3e}",
                    cfg.n_guides
                ),
            };
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: format!("20 arrays, max deviation {worst:.3e}"),
    }
}

fn normalization_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let name = "photon-number normalization";
    let mut rng = realization_rng(opts.seed, 4);
    for trial in 0..30u64 {
        let cfg = random_config(&mut rng, 40, opts.seed, trial);
        let z = rng.random_range(0.05..40.0);
        let n = ctx.distribution(&cfg, z);
        let total: f64 = n.iter().sum();
        let s = sigma(&n).unwrap_or(f64::NAN);
        let bound = (cfg.n_guides as f64 - 1.0) / 2.0;
        // the full transform is compared against the S-orthogonality shortcut
        let fast = Propagator::new(&cfg)
            .and_then(|p| p.distribution(z))
            .expect("valid");
        let diff = n
            .iter()
            .zip(&fast)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if (total - 1.0).abs() > 1e-12
            || n.iter().any(|x| *x < 0.0)
            || !(0.0..=bound + 1e-12).contains(&s)
            || diff > 1e-12
        {
            return CheckOutcome {
                name,
                passed: false,
                detail: format!(
                    "trial {trial}, N={}, z={z}: sum n_k - 1 = {:.3e}, sigma = {s}, deviation from column-norm shortcut {diff:.3e}",
                    cfg.n_guides,
                    total - 1.0
                ),
            };
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: "30 arrays: sum n_k = 1 within 1e-12, 0 <= sigma <= (N-1)/2".into(),
    }
}

fn symmetry_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let name = "amplitude symmetry Q = Q^T";
    let mut rng = realization_rng(opts.seed, 5);
    for trial in 0..20u64 {
        let cfg = random_config(&mut rng, 20, opts.seed, trial);
        let dec = ctx.decompose(&cfg);
        let qt = qtilde(
            &dec,
            &cfg.pump,
            &cfg.beta_tilde(),
            rng.random_range(0.1..20.0),
        )
        .expect("valid");
        let q = to_individual(&qt, &dec).expect("same dim").matrix;
        let err = q.max_abs_diff(&q.transpose());
        if err > 1e-13 {
            return CheckOutcome {
                name,
                passed: false,
                detail: format!("trial {trial}, N={}: |Q - Q^T| = {err:.3e}", cfg.n_guides),
            };
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: "20 arrays within 1e-13".into(),
    }
}

fn scale_invariance_check(ctx: &Ctx, opts: &SuiteOptions) -> CheckOutcome {
    let name = "pump strength, pump phase and C0 z scaling";
    let mut rng = realization_rng(opts.seed, 6);
    for trial in 0..20u64 {
        let cfg = random_config(&mut rng, 20, opts.seed, trial);
        let z = rng.random_range(0.1..15.0);
        let base = ctx.distribution(&cfg, z);
        let mut scaled = cfg.clone();
        scaled.pump = scaled
            .pump
            .clone()
            .with_strength(rng.random_range(0.01..100.0))
            .with_phase(rng.random_range(-3.0..3.0));
        let other = ctx.distribution(&scaled, z);
        // doubling every rate and halving z leaves the state unchanged
        let mut doubled = cfg.clone();
        doubled.beta_s.iter_mut().for_each(|b| *b *= 2.0);
        doubled.couplings.iter_mut().for_each(|c| *c *= 2.0);
        let rescaled = ctx.distribution(&doubled, z / 2.0);
        let d1 = base
            .iter()
            .zip(&other)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let d2 = base
            .iter()
            .zip(&rescaled)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if d1 > 1e-12 || d2 > 1e-12 {
            return CheckOutcome {
                name,
                passed: false,
                detail: format!(
                    "trial {trial}, N={}, z={z}: strength/phase change {d1:.3e}, rate scaling change {d2:.3e}",
                    cfg.n_guides
                ),
            };
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: "20 arrays within 1e-12".into(),
    }
}

fn reflection_check(ctx: &Ctx) -> CheckOutcome {
    let name = "mirror symmetry of a center-pumped uniform array";
    for n in [5usize, 21, 71] {
        let cfg = ArrayConfig::ordered(n, center_guide(n));
        for z in [0.3, 2.0, 11.0] {
            let d = ctx.distribution(&cfg, z);
            let err = (0..n).fold(0.0f64, |m, k| m.max((d[k] - d[n - 1 - k]).abs()));
            if err > 1e-12 {
                return CheckOutcome {
                    name,
                    passed: false,
                    detail: format!("N={n}, z={z}: |n_k - n_(N+1-k)| = {err:.3e}"),
                };
            }
        }
    }
    CheckOutcome {
        name,
        passed: true,
        detail: "N in {5, 21, 71} within 1e-12".into(),
    }
}
