//! Generalized Mahalanobis inner products `<x, y>_A = y^T A x` in coordinates.
//!
//! A [`MahalanobisForm`] wraps a symmetric positive definite matrix. Symmetry
//! is structural: the lower triangle is always a mirror of the upper one.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Smallest eigenvalue kept by [`psd_project`]; forms are positive definite,
/// not merely semidefinite.
pub const EIG_FLOOR: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-8;
const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisForm {
    matrix: DMatrix<f64>,
}

impl MahalanobisForm {
    /// Validates symmetry (to 1e-8, relative to the largest entry) and
    /// positive definiteness (smallest eigenvalue at least [`EIG_FLOOR`]).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let form = Self::from_symmetric(matrix)?;
        let min = form.min_eigenvalue()?;
        if min < EIG_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "matrix is not positive definite (min eigenvalue {min:e})"
            )));
        }
        Ok(form)
    }

    pub fn identity(dim: usize) -> Self {
        MahalanobisForm {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    /// Row-major constructor, the layout used in model files.
    pub fn from_row_major(dim: usize, values: &[f64]) -> Result<Self> {
        check_dim(dim * dim, values.len())?;
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    /// Mirrors the upper triangle of a validated square symmetric matrix.
    fn from_symmetric(mut matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix)?;
        mirror_upper(&mut matrix);
        Ok(MahalanobisForm { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.matrix.transpose().as_slice().to_vec()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = symmetric_eigen(&self.matrix)?;
        Ok(eig.eigenvalues.min())
    }

    /// `y^T A x`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(self.inner_unchecked(x, y))
    }

    /// `x^T A x`.
    pub fn norm_sq(&self, x: &DVector<f64>) -> Result<f64> {
        self.inner(x, x)
    }

    pub(crate) fn inner_unchecked(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        // Each term pairs x and y symmetrically, so swapping them gives the
        // same floating-point result, not just the same real number.
        let n = self.dim();
        let mut total = 0.0;
        for i in 0..n {
            let mut row = self.matrix[(i, i)] * (x[i] * y[i]);
            for j in (i + 1)..n {
                row += self.matrix[(i, j)] * (x[i] * y[j] + x[j] * y[i]);
            }
            total += row;
        }
        total
    }

    pub(crate) fn norm_sq_unchecked(&self, x: &DVector<f64>) -> f64 {
        self.inner_unchecked(x, x)
    }

    /// `c * A` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {c}"
            )));
        }
        Ok(MahalanobisForm {
            matrix: &self.matrix * c,
        })
    }
}

/// Square, nonempty, finite, and symmetric to 1e-8 relative to the largest entry.
fn check_symmetric(matrix: &DMatrix<f64>) -> Result<()> {
    if !matrix.is_square() {
        return Err(Error::DimensionMismatch {
            expected: matrix.nrows(),
            found: matrix.ncols(),
        });
    }
    if matrix.nrows() == 0 {
        return Err(Error::EmptyInput("form dimension must be >= 1"));
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let scale = matrix.amax().max(1.0);
    let n = matrix.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

fn mirror_upper(matrix: &mut DMatrix<f64>) {
    let n = matrix.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            matrix[(j, i)] = matrix[(i, j)];
        }
    }
}

fn symmetric_eigen(matrix: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))
}

/// Nearest (Frobenius) matrix whose eigenvalues are all at least [`EIG_FLOOR`].
///
/// The input is symmetrized as `(M + M^T) / 2` first and must be symmetric to
/// within 1e-8 relative to its largest entry.
pub fn psd_project(matrix: &DMatrix<f64>) -> Result<MahalanobisForm> {
    check_symmetric(matrix)?;
    let sym = (matrix + matrix.transpose()) * 0.5;
    let eig = symmetric_eigen(&sym)?;
    // Reassembling V diag(lambda) V^T perturbs eigenvalues by a few ulps of
    // the largest one; the guard keeps the result above the floor anyway.
    let n = sym.nrows().max(1) as f64;
    let guard = 8.0 * n * f64::EPSILON * eig.eigenvalues.amax();
    let clamped = eig.eigenvalues.map(|v| v.max(EIG_FLOOR + guard));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&clamped) * v.transpose();
    mirror_upper(&mut out);
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "projection produced non-finite entries".into(),
        ));
    }
    Ok(MahalanobisForm { matrix: out })
}

/// Checks that the columns of `q` (a `D x m` matrix) are Euclidean-orthonormal.
pub fn check_orthonormal(q: &DMatrix<f64>) -> Result<()> {
    if q.ncols() > q.nrows() {
        return Err(Error::InvalidParameter(format!(
            "subspace basis has {} vectors in dimension {}",
            q.ncols(),
            q.nrows()
        )));
    }
    let gram = q.transpose() * q;
    let dev = (gram - DMatrix::<f64>::identity(q.ncols(), q.ncols())).amax();
    if dev > ORTHONORMAL_TOL {
        return Err(Error::InvalidParameter(format!(
            "subspace basis is not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(())
}

/// `B = Q A Q^T + (I - Q Q^T)`: acts as `A` on `span(Q)` and as the identity
/// on its Euclidean orthogonal complement.
pub fn extend_ambient(form: &MahalanobisForm, q: &DMatrix<f64>) -> Result<MahalanobisForm> {
    check_dim(form.dim(), q.ncols())?;
    check_orthonormal(q)?;
    let d = q.nrows();
    let qqt = q * q.transpose();
    let mut b = q * form.matrix() * q.transpose() + DMatrix::identity(d, d) - qqt;
    mirror_upper(&mut b);
    Ok(MahalanobisForm { matrix: b })
}

/// `A = Q^T B Q`: the inner product of `B` read in the coordinates of `span(Q)`.
pub fn restrict(ambient: &MahalanobisForm, q: &DMatrix<f64>) -> Result<MahalanobisForm> {
    check_dim(ambient.dim(), q.nrows())?;
    check_orthonormal(q)?;
    let mut a = q.transpose() * ambient.matrix() * q;
    mirror_upper(&mut a);
    Ok(MahalanobisForm { matrix: a })
}

/// Model-file representation: `dim` plus a dense row-major array.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormRecord {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl From<&MahalanobisForm> for FormRecord {
    fn from(form: &MahalanobisForm) -> Self {
        FormRecord {
            dim: form.dim(),
            values: form.to_row_major(),
        }
    }
}

impl TryFrom<FormRecord> for MahalanobisForm {
    type Error = Error;

    fn try_from(record: FormRecord) -> Result<Self> {
        MahalanobisForm::from_row_major(record.dim, &record.values)
    }
}
