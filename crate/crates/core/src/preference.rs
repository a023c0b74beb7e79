//! Simultaneous metric and ideal-point learning from paired comparisons.
//!
//! A pair `(z1, z2, y)` says `y = sgn(d_A(z1, u) - d_A(z2, u))`: with
//! `y = +1` the first item is farther from the ideal point `u`. In orthonormal
//! coordinates the problem is
//!
//! ```text
//! min_{A PD, u}  sum_i loss(|a1_i - u|_A^2 - |a2_i - u|_A^2, y_i) + lambda |u|_A^2
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::GramBasis;
use crate::error::{check_dim, Error, Result};
use crate::losses::{Label, LossSpec};
use crate::mahalanobis::MahalanobisForm;
use crate::optim::{projected_descent, FitTrace, Objective, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedSample {
    pub first: usize,
    pub second: usize,
    pub y: Label,
}

impl PairedSample {
    pub fn new(first: usize, second: usize, y: Label) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidParameter(format!(
                "paired sample compares item {first} with itself"
            )));
        }
        Ok(PairedSample { first, second, y })
    }

    pub fn flipped(&self) -> Self {
        PairedSample {
            y: self.y.flipped(),
            ..*self
        }
    }
}

/// `|a1 - u|_A^2 - |a2 - u|_A^2`.
pub fn delta_pair(
    form: &MahalanobisForm,
    u: &DVector<f64>,
    a1: &DVector<f64>,
    a2: &DVector<f64>,
) -> Result<f64> {
    for v in [u, a1, a2] {
        check_dim(form.dim(), v.len())?;
    }
    Ok(form.norm_sq_unchecked(&(a1 - u)) - form.norm_sq_unchecked(&(a2 - u)))
}

/// The paired objective over a fixed set of item coordinates.
///
/// Coordinates need not come from a [`GramBasis`]; any point set of common
/// dimension works, which is how ambient and subspace objectives are compared.
#[derive(Debug, Clone)]
pub struct PreferenceProblem<'a> {
    points: Vec<DVector<f64>>,
    samples: &'a [PairedSample],
    loss: LossSpec,
    lambda: f64,
}

impl<'a> PreferenceProblem<'a> {
    /// `coords` holds one item per row.
    pub fn new(
        coords: &DMatrix<f64>,
        samples: &'a [PairedSample],
        loss: LossSpec,
        lambda: f64,
    ) -> Result<Self> {
        loss.validate()?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        let len = coords.nrows();
        for s in samples {
            for index in [s.first, s.second] {
                if index >= len {
                    return Err(Error::IndexOutOfRange { index, len });
                }
            }
        }
        let points = coords.row_iter().map(|r| r.transpose()).collect();
        Ok(PreferenceProblem {
            points,
            samples,
            loss,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    fn check(&self, form: &MahalanobisForm, u: &DVector<f64>) -> Result<()> {
        check_dim(self.dim(), form.dim())?;
        check_dim(self.dim(), u.len())
    }

    fn delta_of(&self, form: &MahalanobisForm, u: &DVector<f64>, s: &PairedSample) -> f64 {
        form.norm_sq_unchecked(&(&self.points[s.first] - u))
            - form.norm_sq_unchecked(&(&self.points[s.second] - u))
    }

    pub fn deltas(&self, form: &MahalanobisForm, u: &DVector<f64>) -> Result<Vec<f64>> {
        self.check(form, u)?;
        Ok(self
            .samples
            .iter()
            .map(|s| self.delta_of(form, u, s))
            .collect())
    }

    /// Sum of sample losses, in sample order.
    pub fn data_term(&self, form: &MahalanobisForm, u: &DVector<f64>) -> Result<f64> {
        self.check(form, u)?;
        Ok(self
            .samples
            .iter()
            .map(|s| self.loss.value(self.delta_of(form, u, s), s.y))
            .sum())
    }

    pub fn objective(&self, form: &MahalanobisForm, u: &DVector<f64>) -> Result<f64> {
        Ok(self.data_term(form, u)? + self.lambda * form.norm_sq_unchecked(u))
    }

    /// Fraction of samples whose sign prediction disagrees with the label
    /// (ties count as errors). Zero for an empty sample list.
    pub fn zero_one_error(&self, form: &MahalanobisForm, u: &DVector<f64>) -> Result<f64> {
        self.check(form, u)?;
        if self.samples.is_empty() {
            return Ok(0.0);
        }
        let errors: f64 = self
            .samples
            .iter()
            .map(|s| LossSpec::ZeroOne.value(self.delta_of(form, u, s), s.y))
            .sum();
        Ok(errors / self.samples.len() as f64)
    }

    /// `(dF/dA, dF/du)`; the matrix gradient is symmetric.
    pub fn gradients(
        &self,
        form: &MahalanobisForm,
        u: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        self.loss.require_differentiable()?;
        self.check(form, u)?;
        let n = self.dim();
        let a = form.matrix();
        let mut grad_a = DMatrix::zeros(n, n);
        let mut grad_u = DVector::zeros(n);
        for s in self.samples {
            let r1 = &self.points[s.first] - u;
            let r2 = &self.points[s.second] - u;
            let delta = form.norm_sq_unchecked(&r1) - form.norm_sq_unchecked(&r2);
            let g = self.loss.grad_wrt_delta(delta, s.y)?;
            if g == 0.0 {
                continue;
            }
            grad_a.ger(g, &r1, &r1, 1.0);
            grad_a.ger(-g, &r2, &r2, 1.0);
            grad_u += (a * (&r2 - &r1)) * (2.0 * g);
        }
        grad_a.ger(self.lambda, u, u, 1.0);
        grad_u += (a * u) * (2.0 * self.lambda);
        let grad_a = (&grad_a + grad_a.transpose()) * 0.5;
        Ok((grad_a, grad_u))
    }
}

impl Objective for PreferenceProblem<'_> {
    fn value(&self, form: &MahalanobisForm, ideal: &DVector<f64>) -> Result<f64> {
        self.objective(form, ideal)
    }

    fn gradients(
        &self,
        form: &MahalanobisForm,
        ideal: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        PreferenceProblem::gradients(self, form, ideal)
    }
}

/// A learned form and ideal point, both in the orthonormal coordinates of
/// `basis`, together with their kernel expansions
/// `A = sum_ij a_ij k(., s_i) (x) k(., s_j)` and `u = sum_i b_i k(., s_i)`.
#[derive(Debug, Clone)]
pub struct PreferenceModel {
    basis: GramBasis,
    form: MahalanobisForm,
    ideal: DVector<f64>,
    lambda: f64,
    form_coefficients: DMatrix<f64>,
    ideal_coefficients: DVector<f64>,
}

impl PreferenceModel {
    pub fn new(
        basis: GramBasis,
        form: MahalanobisForm,
        ideal: DVector<f64>,
        lambda: f64,
    ) -> Result<Self> {
        check_dim(basis.len(), form.dim())?;
        check_dim(basis.len(), ideal.len())?;
        let form_coefficients = basis.form_expansion(form.matrix())?;
        let ideal_coefficients = basis.point_expansion(&ideal)?;
        Ok(PreferenceModel {
            basis,
            form,
            ideal,
            lambda,
            form_coefficients,
            ideal_coefficients,
        })
    }

    pub fn basis(&self) -> &GramBasis {
        &self.basis
    }

    pub fn form(&self) -> &MahalanobisForm {
        &self.form
    }

    pub fn ideal(&self) -> &DVector<f64> {
        &self.ideal
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `a_ij`.
    pub fn form_coefficients(&self) -> &DMatrix<f64> {
        &self.form_coefficients
    }

    /// `b_i`.
    pub fn ideal_coefficients(&self) -> &DVector<f64> {
        &self.ideal_coefficients
    }

    pub fn problem<'a>(
        &self,
        data: &'a [PairedSample],
        loss: LossSpec,
    ) -> Result<PreferenceProblem<'a>> {
        PreferenceProblem::new(self.basis.coords(), data, loss, self.lambda)
    }

    pub fn objective(&self, data: &[PairedSample], loss: LossSpec) -> Result<f64> {
        self.problem(data, loss)?.objective(&self.form, &self.ideal)
    }

    pub fn gradients(
        &self,
        data: &[PairedSample],
        loss: LossSpec,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        self.problem(data, loss)?.gradients(&self.form, &self.ideal)
    }

    pub fn zero_one_error(&self, data: &[PairedSample]) -> Result<f64> {
        self.problem(data, LossSpec::ZeroOne)?
            .zero_one_error(&self.form, &self.ideal)
    }

    /// Difference for two raw inputs, embedded (and projected) first.
    pub fn delta_points(&self, s1: &[f64], s2: &[f64]) -> Result<f64> {
        let a1 = self.basis.embed(s1)?;
        let a2 = self.basis.embed(s2)?;
        delta_pair(&self.form, &self.ideal, &a1, &a2)
    }

    pub fn delta_items(&self, first: usize, second: usize) -> Result<f64> {
        let a1 = self.basis.item_coords(first)?;
        let a2 = self.basis.item_coords(second)?;
        delta_pair(&self.form, &self.ideal, &a1, &a2)
    }
}

#[derive(Debug, Clone)]
pub struct PreferenceFit {
    pub model: PreferenceModel,
    pub trace: FitTrace,
}

/// Projected gradient descent on `(A, u)` from `cfg.init`.
pub fn fit_preference(
    basis: GramBasis,
    data: &[PairedSample],
    loss: LossSpec,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<PreferenceFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput("no paired samples"));
    }
    loss.require_differentiable()?;
    let problem = PreferenceProblem::new(basis.coords(), data, loss, lambda)?;
    let init = cfg.initial_point(basis.len(), true)?;
    let (solution, trace) = projected_descent(&problem, init, cfg)?;
    let model = PreferenceModel::new(basis, solution.form, solution.ideal, lambda)?;
    Ok(PreferenceFit { model, trace })
}
