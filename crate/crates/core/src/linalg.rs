//! Dense square matrices and the handful of products the propagator needs.
//!
//! Complex matrices are stored as separate real and imaginary planes so every
//! complex-by-real product reduces to two real GEMM calls.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

/// Row-major real square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Panics if `data.len() != n * n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data length");
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.n);
        gemm(self.n, &self.data, false, &rhs.data, false, &mut out.data);
        out
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Row-major complex square matrix in split (re, im) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.n + j;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.n + j;
        self.re[k] = v.re;
        self.im[k] = v.im;
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(&self.im).all(|&x| x == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.re.iter().chain(&self.im).map(|x| x * x).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..self.re.len() {
            let d = Complex64::new(self.re[k] - other.re[k], self.im[k] - other.im[k]);
            worst = worst.max(d.norm());
        }
        worst
    }

    /// `self * rhs` for a real right factor.
    pub fn mul_real(&self, rhs: &Matrix) -> Self {
        let mut out = Self::zeros(self.n);
        gemm(self.n, &self.re, false, rhs.as_slice(), false, &mut out.re);
        gemm(self.n, &self.im, false, rhs.as_slice(), false, &mut out.im);
        out
    }

    /// `lhs^T * self` for a real left factor, without materialising `lhs^T`.
    pub fn real_transpose_mul(lhs: &Matrix, rhs: &Self) -> Self {
        let mut out = Self::zeros(rhs.n);
        gemm(rhs.n, lhs.as_slice(), true, &rhs.re, false, &mut out.re);
        gemm(rhs.n, lhs.as_slice(), true, &rhs.im, false, &mut out.im);
        out
    }

    /// Squared Euclidean norm of every column.
    pub fn column_norms_sqr(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = i * self.n;
            for (j, acc) in out.iter_mut().enumerate() {
                let (a, b) = (self.re[row + j], self.im[row + j]);
                *acc += a * a + b * b;
            }
        }
        out
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `c = op(a) * b` for n x n row-major operands.
fn gemm(n: usize, a: &[f64], transpose_a: bool, b: &[f64], transpose_b: bool, c: &mut [f64]) {
    debug_assert!(a.len() == n * n && b.len() == n * n && c.len() == n * n);
    if n == 0 {
        return;
    }
    let ni = n as isize;
    let (rsa, csa) = if transpose_a { (1, ni) } else { (ni, 1) };
    let (rsb, csb) = if transpose_b { (1, ni) } else { (ni, 1) };
    // SAFETY: all three buffers hold n*n elements and the strides address
    // exactly that range; `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            n,
            n,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            ni,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &Matrix, b: &Matrix) -> Matrix {
        let n = a.dim();
        Matrix::from_fn(n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum())
    }

    #[test]
    fn gemm_matches_triple_loop() {
        let n = 7;
        let a = Matrix::from_fn(n, |i, j| ((i * 3 + j * 7) % 11) as f64 - 5.0);
        let b = Matrix::from_fn(n, |i, j| ((i * 5 + j) % 13) as f64 * 0.25);
        assert!(a.matmul(&b).max_abs_diff(&naive(&a, &b)) < 1e-12);
        let at_b = ComplexMatrix::real_transpose_mul(
            &a,
            &ComplexMatrix::from_fn(n, |i, j| Complex64::new(b[(i, j)], -b[(j, i)])),
        );
        let expect_re = naive(&a.transpose(), &b);
        let expect_im = naive(&a.transpose(), &b.transpose());
        for i in 0..n {
            for j in 0..n {
                assert!((at_b.get(i, j).re - expect_re[(i, j)]).abs() < 1e-12);
                assert!((at_b.get(i, j).im + expect_im[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_matrices() {
        let z = ComplexMatrix::zeros(0);
        assert!(z.mul_real(&Matrix::zeros(0)).is_zero());
        assert!(z.column_norms_sqr().is_empty());
    }
}
