//! Small dense complex linear algebra for low-dimensional quantum states.
//!
//! Everything here operates on d x d matrices with d <= 16 conceivable and
//! d <= 4 in practice, so dense storage and direct algorithms are used
//! throughout. All values are immutable after construction.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Tolerance for the hermiticity of a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance for the unit trace of a density matrix.
pub const TRACE_TOL: f64 = 1e-12;
/// How far below zero the smallest eigenvalue of a density matrix may sit.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not hermitian within tolerance")]
    NonHermitianInput,
    #[error("dimension {dim} requires {expected} entries, got {got}")]
    BadEntryCount {
        dim: usize,
        expected: usize,
        got: usize,
    },
    #[error("matrix entries must be finite")]
    NonFiniteEntry,
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A d x d complex matrix, stored dense.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, MatrixError> {
        if entries.len() != dim * dim {
            return Err(MatrixError::BadEntryCount {
                dim,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFiniteEntry);
        }
        Ok(Self {
            data: DMatrix::from_row_iterator(dim, dim, entries),
        })
    }

    /// Builds a matrix from row-major real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, MatrixError> {
        Self::new(dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            data: DMatrix::from_fn(dim, dim, |i, j| f(i, j)),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            data: &self.data * &other.data,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            data: &self.data + &other.data,
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            data: &self.data * s,
        }
    }

    /// Kronecker product; `self` acts on the slow (leftmost) index.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            data: self.data.kronecker(&other.data),
        }
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// True iff max entrywise |M - M^dagger| <= tol.
    pub fn hermitian_check(&self, tol: f64) -> bool {
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                if (self.data[(i, j)] - self.data[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn determinant(&self) -> C64 {
        self.data.clone().determinant()
    }

    /// Real eigenvalues of a hermitian matrix, ascending.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>, MatrixError> {
        if !self.hermitian_check(1e-10) {
            return Err(MatrixError::NonHermitianInput);
        }
        // Symmetrize before handing off so tiny asymmetries cannot leak
        // imaginary parts into the eigenvalues.
        let sym = (&self.data + self.data.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        Ok(ev)
    }

    /// Smallest eigenvalue of a hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64, MatrixError> {
        Ok(self.eigenvalues_hermitian()?[0])
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }
}

/// A physical quantum state: hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn try_new(matrix: ComplexMatrix) -> Result<Self, MatrixError> {
        if !matrix.hermitian_check(HERMITIAN_TOL) {
            return Err(MatrixError::InvalidDensity("not hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(MatrixError::InvalidDensity(format!(
                "trace {} != 1",
                tr.re
            )));
        }
        let min_ev = matrix.min_eigenvalue()?;
        if min_ev < EIGENVALUE_FLOOR {
            return Err(MatrixError::InvalidDensity(format!(
                "smallest eigenvalue {min_ev} is negative"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bb84::sigma_matrix;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_is_hermitian() {
        assert!(ComplexMatrix::identity(4).hermitian_check(1e-12));
    }

    #[test]
    fn antihermitian_off_diagonal_rejected() {
        let m = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        assert!(!m.hermitian_check(1e-12));
    }

    #[test]
    fn sigma_is_hermitian() {
        assert!(sigma_matrix().hermitian_check(1e-12));
    }

    #[test]
    fn determinant_of_identity() {
        let det = ComplexMatrix::identity(4).determinant();
        assert_abs_diff_eq!(det.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn determinant_of_diagonal_family() {
        // diag(1/4 + q/4, 1/4 + q/4, 1/4 - q/4, 1/4 - q/4) at q = 1/2
        let q = 0.5;
        let m = ComplexMatrix::from_fn(4, |i, j| {
            if i != j {
                c(0.0, 0.0)
            } else if i < 2 {
                c(0.25 + q / 4.0, 0.0)
            } else {
                c(0.25 - q / 4.0, 0.0)
            }
        });
        assert_abs_diff_eq!(m.determinant().re, 9.0 / 4096.0, epsilon = 1e-15);
    }

    /// Cofactor expansion, used as an independent determinant oracle.
    fn det_cofactor(m: &ComplexMatrix) -> C64 {
        fn go(d: usize, e: &[C64]) -> C64 {
            if d == 1 {
                return e[0];
            }
            let mut acc = C64::new(0.0, 0.0);
            for col in 0..d {
                let minor: Vec<C64> = (1..d)
                    .flat_map(|i| (0..d).filter(|&j| j != col).map(move |j| (i, j)))
                    .map(|(i, j)| e[i * d + j])
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                acc += e[col] * go(d - 1, &minor) * C64::new(sign, 0.0);
            }
            acc
        }
        let d = m.dim();
        let entries: Vec<C64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j))
            .collect();
        go(d, &entries)
    }

    #[test]
    fn determinant_of_sigma_matches_cofactor_oracle() {
        let sigma = sigma_matrix();
        let oracle = det_cofactor(&sigma);
        assert_abs_diff_eq!(oracle.re, 1.0, epsilon = 1e-14);
        let det = sigma.determinant();
        assert_abs_diff_eq!(det.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn determinant_hermitian_imaginary_part_small() {
        let m = ComplexMatrix::new(
            2,
            vec![c(2.0, 0.0), c(0.3, -0.7), c(0.3, 0.7), c(1.0, 0.0)],
        )
        .unwrap();
        let det = m.determinant();
        assert!(det.im.abs() <= 1e-12 * (1.0 + det.norm()));
        assert_abs_diff_eq!(det.re, det_cofactor(&m).re, epsilon = 1e-12);
    }

    #[test]
    fn min_eigenvalue_basics() {
        let half = ComplexMatrix::identity(2).scale(c(0.5, 0.0));
        assert_abs_diff_eq!(half.min_eigenvalue().unwrap(), 0.5, epsilon = 1e-12);

        let proj = ComplexMatrix::from_real(4, &{
            let mut e = [0.0; 16];
            e[0] = 1.0;
            e
        })
        .unwrap();
        assert_abs_diff_eq!(proj.min_eigenvalue().unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn min_eigenvalue_of_sigma() {
        // Sigma decomposes into two 2x2 off-diagonal blocks with eigenvalues +-1.
        assert_abs_diff_eq!(sigma_matrix().min_eigenvalue().unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn min_eigenvalue_rejects_non_hermitian() {
        let m = ComplexMatrix::new(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])
            .unwrap();
        assert_eq!(m.min_eigenvalue(), Err(MatrixError::NonHermitianInput));
    }

    #[test]
    fn determinant_equals_eigenvalue_product_for_random_hermitian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let d = rng.random_range(2..=4);
            let raw = ComplexMatrix::from_fn(d, |_, _| {
                c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let herm = raw.add(&raw.dagger()).scale(c(0.5, 0.0));
            let det = herm.determinant().re;
            let prod: f64 = herm.eigenvalues_hermitian().unwrap().iter().product();
            let scale = det.abs().max(prod.abs()).max(1e-12);
            assert!((det - prod).abs() / scale < 1e-8, "det {det} vs prod {prod}");
        }
    }
}
