//! Orthonormal coordinates on the span of kernel features.
//!
//! For items `s_1..s_m` with features `x_i = k(s_i, .)`, Gram-Schmidt on
//! `x_1..x_m` produces an orthonormal basis `e_1..e_m` of
//! `V = span{x_1..x_m}`. The coordinate vector of a feature `x` in that basis
//! is `alpha_x = L^{-1} k_x`, where `K = L L^T` is the Cholesky factorization
//! of the Gram matrix and `k_x = (k(s, s_i))_i`. Cholesky is the iterative
//! Gram-Schmidt process carried out on inner products only.
//!
//! Points outside `V` are projected: `alpha_x` only describes the component of
//! `x` lying in `V`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::kernels::KernelSpec;

/// Relative pivot threshold: a squared Cholesky pivot at or below
/// `DEPENDENCE_RTOL * max(diag K)` marks the item as linearly dependent.
pub const DEPENDENCE_RTOL: f64 = 1e-10;

/// Largest basis size accepted by [`GramBasis::embed_determinant_oracle`].
pub const DETERMINANT_ORACLE_MAX: usize = 8;

#[derive(Debug, Clone)]
pub struct GramBasis {
    items: Vec<Vec<f64>>,
    spec: KernelSpec,
    gram: DMatrix<f64>,
    chol: DMatrix<f64>,
    pivots: Vec<f64>,
}

impl GramBasis {
    /// Factorizes the Gram matrix of `items`.
    ///
    /// Fails with [`Error::LinearDependence`] naming the first item (1-based)
    /// whose feature lies in the span of the preceding ones. Duplicated items
    /// are reported the same way; nothing is deduplicated. Kernel values that
    /// overflow are a [`Error::Numerical`] failure.
    pub fn build(spec: KernelSpec, items: Vec<Vec<f64>>) -> Result<Self> {
        let gram = spec.gram(&items)?;
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "kernel matrix has non-finite entries".into(),
            ));
        }
        let (chol, pivots) = cholesky(&gram)?;
        Ok(GramBasis {
            items,
            spec,
            gram,
            chol,
            pivots,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Input dimension `d` of the items.
    pub fn item_dim(&self) -> usize {
        self.items[0].len()
    }

    pub fn items(&self) -> &[Vec<f64>] {
        &self.items
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Lower-triangular `L` with `K = L L^T`. Row `j` holds the coordinates
    /// of item `j`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Diagonal of `L`.
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Coordinates of training item `index`, i.e. row `index` of `L`.
    pub fn item_coords(&self, index: usize) -> Result<DVector<f64>> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(self.chol.row(index).transpose())
    }

    /// All training coordinates as rows of an `m x m` matrix (this is `L`).
    pub fn coords(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// `alpha_s = L^{-1} k_s` by forward substitution.
    pub fn embed(&self, s: &[f64]) -> Result<DVector<f64>> {
        let k = self.spec.cross(&self.items, s)?;
        Ok(forward_substitute(&self.chol, &k))
    }

    /// Coordinates by the bordered-determinant formula
    ///
    /// `alpha_i = det(G_i(s)) / sqrt(D_{i-1} D_i)`, with `D_0 = 1`,
    ///
    /// where `D_i` is the leading `i x i` minor of `K` and `G_i(s)` is that
    /// minor with its last row replaced by `(k(s, s_1), ..., k(s, s_i))`.
    /// Raw determinants lose precision quickly, so this is only meant as an
    /// independent check of [`GramBasis::embed`] for small bases.
    pub fn embed_determinant_oracle(&self, s: &[f64]) -> Result<DVector<f64>> {
        let m = self.len();
        if m > DETERMINANT_ORACLE_MAX {
            return Err(Error::UnsupportedSize {
                size: m,
                max: DETERMINANT_ORACLE_MAX,
            });
        }
        let k_s = self.spec.cross(&self.items, s)?;
        let mut alpha = DVector::zeros(m);
        let mut d_prev = 1.0;
        for i in 1..=m {
            let leading = self.gram.view((0, 0), (i, i)).into_owned();
            let d_i = leading.determinant();
            let mut bordered = leading;
            for j in 0..i {
                bordered[(i - 1, j)] = k_s[j];
            }
            alpha[i - 1] = bordered.determinant() / (d_prev * d_i).sqrt();
            d_prev = d_i;
        }
        Ok(alpha)
    }

    /// Kernel coefficients `a = L^{-T} A L^{-1}` of a form given in
    /// orthonormal coordinates, so that `A = sum_ij a_ij k(., s_i) (x) k(., s_j)`.
    pub fn form_expansion(&self, form: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let m = self.len();
        check_dim(m, form.nrows())?;
        check_dim(m, form.ncols())?;
        let mut left = DMatrix::zeros(m, m);
        for (j, col) in form.column_iter().enumerate() {
            left.set_column(j, &back_substitute_transpose(&self.chol, &col.into_owned()));
        }
        // (L^{-T} A) L^{-1} = (L^{-T} (L^{-T} A)^T)^T
        let left_t = left.transpose();
        let mut out = DMatrix::zeros(m, m);
        for (j, col) in left_t.column_iter().enumerate() {
            out.set_column(j, &back_substitute_transpose(&self.chol, &col.into_owned()));
        }
        let mut out = out.transpose();
        for i in 0..m {
            for j in (i + 1)..m {
                out[(j, i)] = out[(i, j)];
            }
        }
        Ok(out)
    }

    /// Inverse of [`GramBasis::form_expansion`]: `A = L^T a L`.
    pub fn form_from_expansion(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_dim(self.len(), a.nrows())?;
        check_dim(self.len(), a.ncols())?;
        Ok(self.chol.transpose() * a * &self.chol)
    }

    /// Kernel coefficients `b = L^{-T} u` of a point given in orthonormal
    /// coordinates, so that `u = sum_i b_i k(., s_i)`.
    pub fn point_expansion(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.len(), u.len())?;
        Ok(back_substitute_transpose(&self.chol, u))
    }

    /// Inverse of [`GramBasis::point_expansion`]: `u = L^T b`.
    pub fn point_from_expansion(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.len(), b.len())?;
        Ok(self.chol.transpose() * b)
    }
}

/// Cholesky factorization with a relative pivot threshold. Returns `L` and
/// its diagonal.
fn cholesky(k: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = k.nrows();
    let scale = k.diagonal().iter().cloned().fold(0.0_f64, f64::max);
    let tolerance = DEPENDENCE_RTOL * scale;
    let mut l = DMatrix::zeros(m, m);
    let mut pivots = Vec::with_capacity(m);
    for j in 0..m {
        let mut pivot = k[(j, j)];
        for p in 0..j {
            pivot -= l[(j, p)] * l[(j, p)];
        }
        if pivot.is_nan() || pivot <= tolerance {
            return Err(Error::LinearDependence {
                index: j + 1,
                pivot,
                tolerance,
            });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        pivots.push(ljj);
        for i in (j + 1)..m {
            let mut v = k[(i, j)];
            for p in 0..j {
                v -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = v / ljj;
        }
    }
    Ok((l, pivots))
}

pub(crate) fn forward_substitute(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = l.nrows();
    let mut x = DVector::zeros(m);
    for i in 0..m {
        let mut v = b[i];
        for p in 0..i {
            v -= l[(i, p)] * x[p];
        }
        x[i] = v / l[(i, i)];
    }
    x
}

/// Solves `L^T x = b` for lower-triangular `L`.
pub(crate) fn back_substitute_transpose(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = l.nrows();
    let mut x = DVector::zeros(m);
    for i in (0..m).rev() {
        let mut v = b[i];
        for p in (i + 1)..m {
            v -= l[(p, i)] * x[p];
        }
        x[i] = v / l[(i, i)];
    }
    x
}
