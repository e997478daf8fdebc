//! Supermode basis of the linear coupling matrix.
//!
//! `Omega` is the real symmetric tridiagonal matrix with the propagation
//! constants on the diagonal and the couplings on the off-diagonals. Its
//! eigenvalues `lambda_1 >= ... >= lambda_N` are the supermode propagation
//! constants and the rows of `S` are the matching eigenvectors, so that the
//! supermode operators are `b = S A`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::ArrayConfig;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Components below this magnitude are skipped when fixing eigenvector signs.
const SIGN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SupermodeDecomposition {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Row k is the unit eigenvector for `eigenvalues[k]`.
    pub transform: Matrix,
}

impl SupermodeDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |S S^T - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let s = &self.transform;
        s.matmul(&s.transpose())
            .max_abs_diff(&Matrix::identity(self.dim()))
    }

    /// `max_k ||Omega v_k - lambda_k v_k||` for the given tridiagonal matrix.
    pub fn residual(&self, diagonal: &[f64], off_diagonal: &[f64]) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            let v = self.transform.row(k);
            let mut sq = 0.0;
            for j in 0..n {
                let mut w = diagonal[j] * v[j];
                if j > 0 {
                    w += off_diagonal[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    w += off_diagonal[j] * v[j + 1];
                }
                let r = w - self.eigenvalues[k] * v[j];
                sq += r * r;
            }
            worst = worst.max(libm::sqrt(sq));
        }
        worst
    }
}

/// Eigendecomposition of the array's coupling matrix.
pub fn decompose(config: &ArrayConfig) -> Result<SupermodeDecomposition> {
    tridiagonal_eigen(&config.beta_s, &config.couplings)
}

/// Eigenpairs of the symmetric tridiagonal matrix with the given diagonal and
/// off-diagonal, by implicit-shift QL iteration.
pub fn tridiagonal_eigen(diagonal: &[f64], off_diagonal: &[f64]) -> Result<SupermodeDecomposition> {
    let n = diagonal.len();
    if n == 0 {
        return Err(Error::EmptyArray);
    }
    if off_diagonal.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            what: "off-diagonal",
            expected: n - 1,
            found: off_diagonal.len(),
        });
    }

    let mut d = diagonal.to_vec();
    let mut e = off_diagonal.to_vec();
    e.push(0.0);
    // vectors[i] holds the eigenvector that ends up paired with d[i]
    let mut vectors = Matrix::identity(n);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence { index: l });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate_rows(&mut vectors, i, s, c);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    Ok(ordered(d, vectors))
}

/// Applies the plane rotation of one QL step to eigenvector rows `i` and `i + 1`.
fn rotate_rows(vectors: &mut Matrix, i: usize, s: f64, c: f64) {
    let n = vectors.dim();
    for k in 0..n {
        let f = vectors[(i + 1, k)];
        let v = vectors[(i, k)];
        vectors[(i + 1, k)] = s * v + c * f;
        vectors[(i, k)] = c * v - s * f;
    }
}

/// Closed-form eigenpairs of the homogeneous array (`beta_j = beta_0`,
/// `C_j = c_0`): `lambda_k = beta_0 + 2 c_0 cos(k pi / (N + 1))` and
/// `v_k(j) = sqrt(2 / (N + 1)) sin(j k pi / (N + 1))`.
pub fn homogeneous_reference(n_guides: usize, beta_0: f64, c_0: f64) -> SupermodeDecomposition {
    let n = n_guides;
    let h = PI / (n as f64 + 1.0);
    let scale = libm::sqrt(2.0 / (n as f64 + 1.0));
    let eigenvalues = (1..=n)
        .map(|k| beta_0 + 2.0 * c_0 * libm::cos(k as f64 * h))
        .collect();
    let vectors = Matrix::from_fn(n, |k, j| scale * libm::sin(((j + 1) * (k + 1)) as f64 * h));
    ordered(eigenvalues, vectors)
}

/// Sorts eigenpairs by descending eigenvalue and makes the first significant
/// component of each eigenvector positive.
fn ordered(values: Vec<f64>, vectors: Matrix) -> SupermodeDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let mut transform = Matrix::zeros(n);
    for (k, &src) in order.iter().enumerate() {
        let row = vectors.row(src);
        let sign = row
            .iter()
            .find(|x| x.abs() > SIGN_THRESHOLD)
            .map_or(1.0, |x| x.signum());
        for j in 0..n {
            transform[(k, j)] = sign * row[j];
        }
    }
    SupermodeDecomposition {
        eigenvalues,
        transform,
    }
}
