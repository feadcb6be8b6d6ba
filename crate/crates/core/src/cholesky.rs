//! Dense complex matrices and regularized Hermitian Cholesky factorization.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Regularization schedule: start, growth factor and cap of the diagonal
/// loading applied to numerically non-positive-definite matrices.
const EPS_START: f64 = 1e-12;
const EPS_GROW: f64 = 10.0;
const EPS_CAP: f64 = 1e-3;

/// Frobenius tolerance on the reconstruction `C^H C` of the regularized
/// input; a factorization is only accepted once it meets this.
const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Row-major dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = ComplexMatrix::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `self^H * self`.
    pub fn adjoint_times_self(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for m in 0..n {
                    acc += self[(m, i)].conj() * self[(m, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `self^H * v` for a column vector (used by the per-bin mixing).
    pub fn adjoint_mul_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::ZERO;
            for m in 0..n {
                acc += self[(m, i)].conj() * v[m];
            }
            *o = acc;
        }
    }

    pub fn frobenius_distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        for i in 0..self.dim {
            for j in 0..=i {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Result of a (possibly regularized) factorization.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    /// Upper-triangular `C` with real positive diagonal, `C^H C = Γ_reg`.
    pub upper: ComplexMatrix,
    /// Diagonal loading that was needed; 0 when the raw matrix factorized.
    pub regularization: f64,
}

/// Diagonal-renormalized loading: `(m + eps I) / (1 + eps)`, which keeps a
/// unit diagonal intact.
pub fn regularize(matrix: &ComplexMatrix, eps: f64) -> ComplexMatrix {
    let n = matrix.dim();
    let mut out = matrix.clone();
    let scale = 1.0 / (1.0 + eps);
    for i in 0..n {
        for j in 0..n {
            let loaded = if i == j {
                out[(i, j)] + Complex64::new(eps, 0.0)
            } else {
                out[(i, j)]
            };
            out[(i, j)] = loaded * scale;
        }
    }
    out
}

/// Upper-triangular Cholesky factorization `Γ = C^H C` of a Hermitian
/// matrix, with automatic regularization.
///
/// The factorization is attempted with the requested loading first (0 for
/// the raw matrix); if it fails positive-definiteness or the reconstruction
/// tolerance, the loading grows geometrically from 1e-12 by 10x until it
/// succeeds. Loads beyond 1e-3 are treated as a model error (the scene is
/// numerically unusable, e.g. a very large fully-coherent array). The
/// algorithm is deterministic, so equal inputs produce bit-identical
/// factors.
pub fn cholesky_upper(matrix: &ComplexMatrix, regularization: f64) -> Result<CholeskyFactor> {
    if regularization < 0.0 || !regularization.is_finite() {
        return Err(Error::argument("regularization must be finite and >= 0"));
    }
    if !matrix.is_hermitian(1e-9) {
        return Err(Error::argument("cholesky input must be Hermitian"));
    }

    let mut eps = regularization;
    loop {
        let reg = regularize(matrix, eps);
        if let Some(upper) = try_factor(&reg) {
            if upper.adjoint_times_self().frobenius_distance(&reg) <= RECONSTRUCTION_TOL {
                return Ok(CholeskyFactor {
                    upper,
                    regularization: eps,
                });
            }
        }
        if eps >= EPS_CAP {
            return Err(Error::model(format!(
                "matrix is not positive definite even with diagonal load {EPS_CAP}"
            )));
        }
        eps = if eps == 0.0 {
            EPS_START
        } else {
            (eps * EPS_GROW).min(EPS_CAP)
        };
    }
}

/// One factorization attempt; `None` when a pivot is not safely positive.
fn try_factor(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = m.dim();
    let pivot_floor = 16.0 * f64::EPSILON
        * (0..n)
            .map(|i| m[(i, i)].re.abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
    let mut u = ComplexMatrix::zeros(n);
    for i in 0..n {
        let mut radicand = m[(i, i)].re;
        for k in 0..i {
            radicand -= u[(k, i)].norm_sqr();
        }
        if !(radicand > pivot_floor) || !radicand.is_finite() {
            return None;
        }
        let diag = radicand.sqrt();
        u[(i, i)] = Complex64::new(diag, 0.0);
        for j in i + 1..n {
            let mut acc = m[(i, j)];
            for k in 0..i {
                acc -= u[(k, i)].conj() * u[(k, j)];
            }
            u[(i, j)] = acc / diag;
        }
    }
    Some(u)
}
