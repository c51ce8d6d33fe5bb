//! The complex-to-real embeddings Γ and γ:
//! `Γ(A) = [[Re A, −Im A], [Im A, Re A]]`, `γ(b) = [Re b; Im b]`.
//!
//! They turn complex quadratic objectives into real ones:
//! `γ(Ab) = Γ(A)γ(b)`, `‖γ(b)‖₂ = ‖b‖₂`, and Γ is linear and invertible.

use num_complex::Complex64;

use crate::linalg::CMatrix;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "vector length differs from column count");
        self.data.chunks(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `AᵀA`.
    pub fn gram(&self) -> RMatrix {
        let mut g = RMatrix::zeros(self.cols, self.cols);
        for row in self.data.chunks(self.cols) {
            for i in 0..self.cols {
                if row[i] == 0.0 {
                    continue;
                }
                for j in 0..self.cols {
                    g.data[i * self.cols + j] += row[i] * row[j];
                }
            }
        }
        g
    }

    /// `Aᵀx`.
    pub fn tmul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "vector length differs from row count");
        let mut out = vec![0.0; self.cols];
        for (row, xi) in self.data.chunks(self.cols).zip(x) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
        out
    }
}

/// Γ(A), a `2p × 2q` real matrix.
pub fn realify_matrix(a: &CMatrix) -> RMatrix {
    let (p, q) = (a.rows(), a.cols());
    let mut out = RMatrix::zeros(2 * p, 2 * q);
    let w = 2 * q;
    for i in 0..p {
        for j in 0..q {
            let v = a[(i, j)];
            out.data[i * w + j] = v.re;
            out.data[i * w + q + j] = -v.im;
            out.data[(p + i) * w + j] = v.im;
            out.data[(p + i) * w + q + j] = v.re;
        }
    }
    out
}

/// γ(b) = [Re b; Im b].
pub fn realify_vector(b: &[Complex64]) -> Vec<f64> {
    b.iter().map(|v| v.re).chain(b.iter().map(|v| v.im)).collect()
}

/// Inverse of γ.
pub fn complexify_vector(x: &[f64]) -> Vec<Complex64> {
    assert!(x.len() % 2 == 0, "realified vectors have even length");
    let p = x.len() / 2;
    (0..p).map(|i| Complex64::new(x[i], x[p + i])).collect()
}

/// Inverse of Γ.
pub fn complexify_matrix(a: &RMatrix) -> CMatrix {
    assert!(a.rows % 2 == 0 && a.cols % 2 == 0, "realified matrices have even dimensions");
    let (p, q) = (a.rows / 2, a.cols / 2);
    CMatrix::from_fn(p, q, |i, j| Complex64::new(a.get(i, j), a.get(p + i, j)))
}
