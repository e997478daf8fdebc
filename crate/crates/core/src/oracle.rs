//! Brute-force references for the closed-form amplitude.
//!
//! [`integrate_qtilde`] never touches the sinc formula: it integrates the
//! supermode-basis equation of motion
//!
//! ```text
//! dQ~_nm/dz = i (l_n + l_m) Q~_nm + i g||alpha|| sum_j eta_j S_nj S_mj exp(i b~_j z)
//! ```
//!
//! from `Q~(0) = 0` with classical RK4. Its exact solution is
//! `exp(i (l_n + l_m) z)` times the integral of the interaction-picture
//! source term, which is what the closed form evaluates analytically.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{Basis, BiphotonAmplitude};
use crate::linalg::{ComplexMatrix, Matrix};
use crate::model::PumpSpec;
use crate::spectral::SupermodeDecomposition;

/// Minimum RK4 steps per period of the fastest phase.
pub const STEPS_PER_PERIOD: f64 = 20.0;

/// Smallest step count satisfying the resolution requirement.
pub fn required_steps(
    dec: &SupermodeDecomposition,
    pump: &PumpSpec,
    beta_tilde: &[f64],
    z_max: f64,
) -> usize {
    let lmax = dec.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let mut rate = 2.0 * lmax;
    for j in pump.pumped_guides() {
        rate = rate
            .max(beta_tilde[j].abs())
            .max(2.0 * lmax + beta_tilde[j].abs());
    }
    libm::ceil(STEPS_PER_PERIOD * rate * z_max / (2.0 * PI)) as usize
}

/// RK4 integration of `Q~` from 0 to `z_max` in `steps` equal steps.
pub fn integrate_qtilde(
    dec: &SupermodeDecomposition,
    pump: &PumpSpec,
    beta_tilde: &[f64],
    z_max: f64,
    steps: usize,
) -> Result<BiphotonAmplitude> {
    let n = dec.dim();
    if pump.amplitudes.len() != n || beta_tilde.len() != n {
        return Err(Error::DimensionMismatch {
            what: "pump",
            expected: n,
            found: pump.amplitudes.len().min(beta_tilde.len()),
        });
    }
    if !(z_max.is_finite() && z_max >= 0.0) {
        return Err(Error::InvalidGrid("z_max must be finite and nonnegative"));
    }
    let mut out = ComplexMatrix::zeros(n);
    if z_max == 0.0 {
        return Ok(BiphotonAmplitude {
            basis: Basis::Supermode,
            matrix: out,
            z: 0.0,
        });
    }
    let required = required_steps(dec, pump, beta_tilde, z_max).max(1);
    if steps < required {
        return Err(Error::UnderResolved { steps, required });
    }

    let h = z_max / steps as f64;
    let pumped: Vec<usize> = pump.pumped_guides().collect();
    let s = &dec.transform;
    for a in 0..n {
        for b in a..n {
            let omega = dec.eigenvalues[a] + dec.eigenvalues[b];
            // source(z) = i g||alpha|| sum_j c_j exp(i b~_j z)
            let terms: Vec<(Complex64, f64)> = pumped
                .iter()
                .map(|&j| {
                    let c = pump.amplitudes[j] * (pump.strength * s[(a, j)] * s[(b, j)]);
                    (Complex64::new(0.0, 1.0) * c, beta_tilde[j])
                })
                .collect();
            let v = integrate_entry(omega, &terms, h, steps);
            out.set(a, b, v);
            out.set(b, a, v);
        }
    }
    Ok(BiphotonAmplitude {
        basis: Basis::Supermode,
        matrix: out,
        z: z_max,
    })
}

fn integrate_entry(omega: f64, terms: &[(Complex64, f64)], h: f64, steps: usize) -> Complex64 {
    let i_omega = Complex64::new(0.0, omega);
    let source = |z: f64| -> Complex64 {
        terms
            .iter()
            .map(|(c, bt)| c * Complex64::from_polar(1.0, bt * z))
            .sum()
    };
    let rhs = |z: f64, y: Complex64| i_omega * y + source(z);
    let mut y = Complex64::new(0.0, 0.0);
    for k in 0..steps {
        let z = k as f64 * h;
        let k1 = rhs(z, y);
        let k2 = rhs(z + 0.5 * h, y + k1 * (0.5 * h));
        let k3 = rhs(z + 0.5 * h, y + k2 * (0.5 * h));
        let k4 = rhs(z + h, y + k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

/// `Q_jk = sum_nm S_nj Q~_nm S_mk` as an explicit quadruple loop.
pub fn naive_transform(qtilde: &ComplexMatrix, s: &Matrix) -> Result<ComplexMatrix> {
    let n = qtilde.dim();
    if s.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "transform",
            expected: n,
            found: s.dim(),
        });
    }
    Ok(ComplexMatrix::from_fn(n, |j, k| {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc += qtilde.get(a, b) * (s[(a, j)] * s[(b, k)]);
            }
        }
        acc
    }))
}
