//! Positive definite kernels on `R^d`.
//!
//! The supported set is fixed to linear, RBF and polynomial kernels. Adding a
//! kernel means adding a variant, its formula in [`KernelSpec::eval`] and its
//! parameter checks in [`KernelSpec::validate`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

fn default_gamma() -> f64 {
    1.0
}

fn default_degree() -> u32 {
    2
}

fn default_coef0() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// `k(s, t) = <s, t>`
    Linear,
    /// `k(s, t) = exp(-gamma * |s - t|^2)`
    Rbf {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    /// `k(s, t) = (<s, t> + coef0)^degree`
    Polynomial {
        #[serde(default = "default_degree")]
        degree: u32,
        #[serde(default = "default_coef0")]
        coef0: f64,
    },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Rbf {
            gamma: default_gamma(),
        }
    }
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        let spec = KernelSpec::Rbf { gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Result<Self> {
        let spec = KernelSpec::Polynomial { degree, coef0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } => {
                if gamma.is_finite() && gamma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "rbf gamma must be positive, got {gamma}"
                    )))
                }
            }
            KernelSpec::Polynomial { degree, coef0 } => {
                if degree < 1 {
                    return Err(Error::InvalidParameter(
                        "polynomial degree must be at least 1".into(),
                    ));
                }
                if !(coef0.is_finite() && coef0 >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "polynomial coef0 must be non-negative, got {coef0}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, s: &[f64], t: &[f64]) -> Result<f64> {
        check_dim(s.len(), t.len())?;
        if s.is_empty() {
            return Err(Error::EmptyInput(
                "kernel arguments must have dimension >= 1",
            ));
        }
        Ok(self.eval_unchecked(s, t))
    }

    fn eval_unchecked(&self, s: &[f64], t: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(s, t),
            KernelSpec::Rbf { gamma } => {
                let sq: f64 = s.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * sq).exp()
            }
            KernelSpec::Polynomial { degree, coef0 } => (dot(s, t) + coef0).powi(degree as i32),
        }
    }

    /// Gram matrix `K_ij = k(s_i, s_j)`. Only the upper triangle is evaluated;
    /// the lower triangle is a mirror, so the result is exactly symmetric.
    pub fn gram<T: AsRef<[f64]>>(&self, items: &[T]) -> Result<DMatrix<f64>> {
        self.validate()?;
        common_dim(items)?;
        let m = items.len();
        let mut k = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = self.eval_unchecked(items[i].as_ref(), items[j].as_ref());
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(k)
    }

    /// Cross-kernel vector `(k(s, s_1), ..., k(s, s_m))`.
    pub fn cross<T: AsRef<[f64]>>(&self, items: &[T], s: &[f64]) -> Result<DVector<f64>> {
        let d = common_dim(items)?;
        check_dim(d, s.len())?;
        Ok(DVector::from_iterator(
            items.len(),
            items.iter().map(|t| self.eval_unchecked(s, t.as_ref())),
        ))
    }
}

fn dot(s: &[f64], t: &[f64]) -> f64 {
    s.iter().zip(t).map(|(a, b)| a * b).sum()
}

/// Shared dimension of a nonempty item list.
pub(crate) fn common_dim<T: AsRef<[f64]>>(items: &[T]) -> Result<usize> {
    let first = items
        .first()
        .ok_or(Error::EmptyInput("item list is empty"))?;
    let d = first.as_ref().len();
    if d == 0 {
        return Err(Error::EmptyInput("items must have dimension >= 1"));
    }
    for item in items {
        check_dim(d, item.as_ref().len())?;
    }
    Ok(d)
}
