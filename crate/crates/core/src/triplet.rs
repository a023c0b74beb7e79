//! Metric learning from triplet comparisons.
//!
//! A triplet `(z1, z2, z3, y)` says `y = sgn(d_A(z1, z2) - d_A(z1, z3))`.
//! The objective uses squared distances, which have the same sign as the
//! unsquared ones and are linear in `A`:
//!
//! ```text
//! min_{A PD}  sum_i loss(|a1_i - a2_i|_A^2 - |a1_i - a3_i|_A^2, y_i) + mu tr(A)
//! ```
//!
//! `mu` defaults to 0.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::GramBasis;
use crate::error::{check_dim, Error, Result};
use crate::losses::{Label, LossSpec};
use crate::mahalanobis::MahalanobisForm;
use crate::optim::{projected_descent, FitTrace, Objective, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletSample {
    pub anchor: usize,
    pub second: usize,
    pub third: usize,
    pub y: Label,
}

impl TripletSample {
    /// The anchor may coincide with one of the compared items; the two
    /// compared items must differ.
    pub fn new(anchor: usize, second: usize, third: usize, y: Label) -> Result<Self> {
        if second == third {
            return Err(Error::InvalidParameter(format!(
                "triplet compares item {second} with itself"
            )));
        }
        Ok(TripletSample {
            anchor,
            second,
            third,
            y,
        })
    }

    pub fn flipped(&self) -> Self {
        TripletSample {
            y: self.y.flipped(),
            ..*self
        }
    }

    /// Same comparison with the compared items exchanged and the label kept.
    pub fn swapped(&self) -> Self {
        TripletSample {
            second: self.third,
            third: self.second,
            ..*self
        }
    }
}

/// `|a1 - a2|_A^2 - |a1 - a3|_A^2`.
pub fn delta_triplet(
    form: &MahalanobisForm,
    a1: &DVector<f64>,
    a2: &DVector<f64>,
    a3: &DVector<f64>,
) -> Result<f64> {
    for v in [a1, a2, a3] {
        check_dim(form.dim(), v.len())?;
    }
    Ok(form.norm_sq_unchecked(&(a1 - a2)) - form.norm_sq_unchecked(&(a1 - a3)))
}

#[derive(Debug, Clone)]
pub struct TripletProblem<'a> {
    points: Vec<DVector<f64>>,
    samples: &'a [TripletSample],
    loss: LossSpec,
    trace_weight: f64,
}

impl<'a> TripletProblem<'a> {
    /// `coords` holds one item per row; `trace_weight` is `mu`.
    pub fn new(
        coords: &DMatrix<f64>,
        samples: &'a [TripletSample],
        loss: LossSpec,
        trace_weight: f64,
    ) -> Result<Self> {
        loss.validate()?;
        if !(trace_weight.is_finite() && trace_weight >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "trace weight must be non-negative, got {trace_weight}"
            )));
        }
        let len = coords.nrows();
        for s in samples {
            for index in [s.anchor, s.second, s.third] {
                if index >= len {
                    return Err(Error::IndexOutOfRange { index, len });
                }
            }
        }
        Ok(TripletProblem {
            points: coords.row_iter().map(|r| r.transpose()).collect(),
            samples,
            loss,
            trace_weight,
        })
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    fn diffs(&self, s: &TripletSample) -> (DVector<f64>, DVector<f64>) {
        let anchor = &self.points[s.anchor];
        (
            anchor - &self.points[s.second],
            anchor - &self.points[s.third],
        )
    }

    fn delta_of(&self, form: &MahalanobisForm, s: &TripletSample) -> f64 {
        let (d2, d3) = self.diffs(s);
        form.norm_sq_unchecked(&d2) - form.norm_sq_unchecked(&d3)
    }

    pub fn deltas(&self, form: &MahalanobisForm) -> Result<Vec<f64>> {
        check_dim(self.dim(), form.dim())?;
        Ok(self
            .samples
            .iter()
            .map(|s| self.delta_of(form, s))
            .collect())
    }

    pub fn data_term(&self, form: &MahalanobisForm) -> Result<f64> {
        check_dim(self.dim(), form.dim())?;
        Ok(self
            .samples
            .iter()
            .map(|s| self.loss.value(self.delta_of(form, s), s.y))
            .sum())
    }

    pub fn objective(&self, form: &MahalanobisForm) -> Result<f64> {
        Ok(self.data_term(form)? + self.trace_weight * form.matrix().trace())
    }

    pub fn zero_one_error(&self, form: &MahalanobisForm) -> Result<f64> {
        check_dim(self.dim(), form.dim())?;
        if self.samples.is_empty() {
            return Ok(0.0);
        }
        let errors: f64 = self
            .samples
            .iter()
            .map(|s| LossSpec::ZeroOne.value(self.delta_of(form, s), s.y))
            .sum();
        Ok(errors / self.samples.len() as f64)
    }

    pub fn gradient(&self, form: &MahalanobisForm) -> Result<DMatrix<f64>> {
        self.loss.require_differentiable()?;
        check_dim(self.dim(), form.dim())?;
        let n = self.dim();
        let mut grad = DMatrix::identity(n, n) * self.trace_weight;
        for s in self.samples {
            let (d2, d3) = self.diffs(s);
            let delta = form.norm_sq_unchecked(&d2) - form.norm_sq_unchecked(&d3);
            let g = self.loss.grad_wrt_delta(delta, s.y)?;
            if g == 0.0 {
                continue;
            }
            grad.ger(g, &d2, &d2, 1.0);
            grad.ger(-g, &d3, &d3, 1.0);
        }
        Ok((&grad + grad.transpose()) * 0.5)
    }
}

impl Objective for TripletProblem<'_> {
    fn value(&self, form: &MahalanobisForm, _ideal: &DVector<f64>) -> Result<f64> {
        self.objective(form)
    }

    fn gradients(
        &self,
        form: &MahalanobisForm,
        _ideal: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        Ok((self.gradient(form)?, DVector::zeros(0)))
    }
}

/// A learned form in the orthonormal coordinates of `basis`, with its kernel
/// expansion `a_ij`.
#[derive(Debug, Clone)]
pub struct TripletModel {
    basis: GramBasis,
    form: MahalanobisForm,
    form_coefficients: DMatrix<f64>,
}

impl TripletModel {
    pub fn new(basis: GramBasis, form: MahalanobisForm) -> Result<Self> {
        check_dim(basis.len(), form.dim())?;
        let form_coefficients = basis.form_expansion(form.matrix())?;
        Ok(TripletModel {
            basis,
            form,
            form_coefficients,
        })
    }

    pub fn basis(&self) -> &GramBasis {
        &self.basis
    }

    pub fn form(&self) -> &MahalanobisForm {
        &self.form
    }

    pub fn form_coefficients(&self) -> &DMatrix<f64> {
        &self.form_coefficients
    }

    pub fn zero_one_error(&self, data: &[TripletSample]) -> Result<f64> {
        TripletProblem::new(self.basis.coords(), data, LossSpec::ZeroOne, 0.0)?
            .zero_one_error(&self.form)
    }

    pub fn delta_points(&self, s1: &[f64], s2: &[f64], s3: &[f64]) -> Result<f64> {
        let a1 = self.basis.embed(s1)?;
        let a2 = self.basis.embed(s2)?;
        let a3 = self.basis.embed(s3)?;
        delta_triplet(&self.form, &a1, &a2, &a3)
    }

    pub fn delta_items(&self, anchor: usize, second: usize, third: usize) -> Result<f64> {
        let a1 = self.basis.item_coords(anchor)?;
        let a2 = self.basis.item_coords(second)?;
        let a3 = self.basis.item_coords(third)?;
        delta_triplet(&self.form, &a1, &a2, &a3)
    }
}

#[derive(Debug, Clone)]
pub struct TripletFit {
    pub model: TripletModel,
    pub trace: FitTrace,
}

/// Projected gradient descent on `A` alone; `trace_weight` is `mu`.
pub fn fit_triplet(
    basis: GramBasis,
    data: &[TripletSample],
    loss: LossSpec,
    trace_weight: f64,
    cfg: &SolverConfig,
) -> Result<TripletFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput("no triplet samples"));
    }
    loss.require_differentiable()?;
    let problem = TripletProblem::new(basis.coords(), data, loss, trace_weight)?;
    let init = cfg.initial_point(basis.len(), false)?;
    let (solution, trace) = projected_descent(&problem, init, cfg)?;
    let model = TripletModel::new(basis, solution.form)?;
    Ok(TripletFit { model, trace })
}
