use biwalk_core::disorder::{realization_rng, sample_array};
use biwalk_core::evolution::{photon_distribution, sigma, Propagator};
use biwalk_core::model::center_guide;
use biwalk_core::spectral::{decompose, homogeneous_reference, tridiagonal_eigen};
use biwalk_core::{ArrayConfig, DisorderSpec, PumpSpec};
use proptest::prelude::*;
use rand::Rng;

fn arb_array(max_n: usize) -> impl Strategy<Value = ArrayConfig> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(0.1..1.9f64, n - 1),
            0..n,
            -3.0..3.0f64,
        )
            .prop_map(move |(beta, c, p, phase)| ArrayConfig {
                n_guides: n,
                beta_s: beta,
                couplings: c,
                pump: PumpSpec::single(n, p).with_phase(phase),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distribution_is_normalized(cfg in arb_array(24), z in 0.01..40.0f64) {
        let n = Propagator::new(&cfg).unwrap().distribution(z).unwrap();
        prop_assert!((n.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(n.iter().all(|p| *p >= 0.0));
        let s = sigma(&n).unwrap();
        prop_assert!(s >= 0.0 && s <= (cfg.n_guides as f64 - 1.0) / 2.0 + 1e-12);
    }

    #[test]
    fn amplitude_is_symmetric(cfg in arb_array(12), z in 0.01..20.0f64) {
        let prop = Propagator::new(&cfg).unwrap();
        let q = prop.amplitude(z).matrix;
        prop_assert!(q.max_abs_diff(&q.transpose()) <= 1e-13);
        let qt = prop.qtilde(z).matrix;
        prop_assert_eq!(qt.clone(), qt.transpose());
        prop_assert!((q.frobenius_norm() - qt.frobenius_norm()).abs() <= 1e-12 * qt.frobenius_norm().max(1.0));
    }

    #[test]
    fn strength_and_phase_do_not_matter(cfg in arb_array(20), z in 0.05..20.0f64, scale in 0.01..100.0f64, phase in -3.0..3.0f64) {
        let base = Propagator::new(&cfg).unwrap().distribution(z).unwrap();
        let mut other = cfg.clone();
        other.pump = other.pump.clone().with_strength(scale).with_phase(phase);
        let scaled = Propagator::new(&other).unwrap().distribution(z).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
        prop_assert!((sigma(&base).unwrap() - sigma(&scaled).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn global_beta_shift_is_a_phase(cfg in arb_array(16), z in 0.05..15.0f64, shift in -50.0..50.0f64) {
        let base = Propagator::new(&cfg).unwrap().distribution(z).unwrap();
        let mut other = cfg.clone();
        for b in other.beta_s.iter_mut() {
            *b += shift;
        }
        let shifted = Propagator::new(&other).unwrap().distribution(z).unwrap();
        for (a, b) in base.iter().zip(&shifted) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn spectrum_within_gershgorin_and_orthonormal(cfg in arb_array(40)) {
        let dec = decompose(&cfg).unwrap();
        let bmin = cfg.beta_s.iter().copied().fold(f64::INFINITY, f64::min);
        let bmax = cfg.beta_s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cmax = cfg.couplings.iter().copied().fold(0.0, f64::max);
        prop_assert!(dec.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for l in &dec.eigenvalues {
            prop_assert!(*l >= bmin - 2.0 * cmax - 1e-12 && *l <= bmax + 2.0 * cmax + 1e-12);
        }
        prop_assert!(dec.orthogonality_error() <= 1e-10);
        let norm = bmax.abs().max(bmin.abs()) + 2.0 * cmax;
        prop_assert!(dec.residual(&cfg.beta_s, &cfg.couplings) <= 1e-10 * norm.max(1.0));
    }

    #[test]
    fn spectrum_shift_covariance(cfg in arb_array(30), shift in -10.0..10.0f64) {
        let a = decompose(&cfg).unwrap();
        let shifted: Vec<f64> = cfg.beta_s.iter().map(|b| b + shift).collect();
        let b = tridiagonal_eigen(&shifted, &cfg.couplings).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x + shift - y).abs() <= 1e-10 * (1.0 + shift.abs()));
        }
        prop_assert!(a.transform.max_abs_diff(&b.transform) <= 1e-8);
    }
}

#[test]
fn eigensolver_matches_toeplitz_closed_form_up_to_200() {
    for n in 2..=200usize {
        for (beta0, c0) in [(0.0, 1.0), (-2.5, 0.7)] {
            let cfg = ArrayConfig::homogeneous(n, beta0, c0, PumpSpec::single(n, 0));
            let dec = decompose(&cfg).unwrap();
            let reference = homogeneous_reference(n, beta0, c0);
            let tol = 1e-10 * (f64::abs(beta0) + 2.0 * c0);
            for (a, b) in dec.eigenvalues.iter().zip(&reference.eigenvalues) {
                assert!((a - b).abs() <= tol, "n={n}");
            }
            let mut worst = 0.0f64;
            for (a, b) in dec
                .transform
                .as_slice()
                .iter()
                .zip(reference.transform.as_slice())
            {
                worst = worst.max((a.abs() - b.abs()).abs());
            }
            assert!(worst <= 1e-8, "n={n} vector mismatch {worst:e}");
        }
    }
}

#[test]
fn reflection_symmetry_center_pump() {
    for n in [5usize, 21, 71] {
        let prop = Propagator::new(&ArrayConfig::ordered(n, center_guide(n))).unwrap();
        for z in [0.3, 2.0, 11.0, 40.0] {
            let d = prop.distribution(z).unwrap();
            for k in 0..n {
                assert!((d[k] - d[n - 1 - k]).abs() <= 1e-12, "n={n} z={z} k={k}");
            }
        }
    }
}

#[test]
fn coupling_and_distance_enter_as_product() {
    let n = 31;
    let one = Propagator::new(&ArrayConfig::homogeneous(
        n,
        0.0,
        1.0,
        PumpSpec::single(n, 15),
    ))
    .unwrap();
    let two = Propagator::new(&ArrayConfig::homogeneous(
        n,
        0.0,
        2.0,
        PumpSpec::single(n, 15),
    ))
    .unwrap();
    for z in [0.5, 3.0, 9.0] {
        let a = one.distribution(z).unwrap();
        let b = two.distribution(z / 2.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn full_and_fast_paths_agree_on_random_arrays() {
    let mut rng = realization_rng(99, 0);
    for trial in 0..10u64 {
        let n = rng.random_range(2..30usize);
        let spec = DisorderSpec {
            master_seed: trial,
            ..DisorderSpec::new(0.8, 0.8)
        };
        let cfg = sample_array(
            &ArrayConfig::ordered(n, rng.random_range(0..n)),
            &spec,
            trial,
        );
        let prop = Propagator::new(&cfg).unwrap();
        let z = rng.random_range(0.1..30.0);
        let slow = photon_distribution(&prop.amplitude(z)).unwrap();
        let fast = prop.distribution(z).unwrap();
        for (a, b) in slow.iter().zip(&fast) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn sampling_marginals() {
    // 1e5 draws of each kind, pooled over realizations
    let n = 1000;
    let base = ArrayConfig::ordered(n, 0);
    let spec = DisorderSpec {
        master_seed: 2024,
        ..DisorderSpec::new(1.0, 1.0)
    };
    let mut betas = Vec::new();
    let mut cs = Vec::new();
    for r in 0..101 {
        let s = sample_array(&base, &spec, r);
        betas.extend(s.beta_s);
        cs.extend(s.couplings);
    }
    assert!(betas.len() >= 100_000 && cs.len() >= 100_000);
    let check = |xs: &[f64], lo: f64, hi: f64, mean: f64| {
        assert!(xs.iter().all(|x| (lo..=hi).contains(x)));
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (hi - lo) / 12f64.sqrt();
        let se = sd / (xs.len() as f64).sqrt();
        assert!((m - mean).abs() <= 3.0 * se, "mean {m} vs {mean}, se {se}");
    };
    check(&betas, -3.0, 3.0, 0.0);
    check(&cs, 0.1, 1.9, 1.0);
}
