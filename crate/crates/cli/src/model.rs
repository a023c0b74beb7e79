//! JSON model files.
//!
//! Matrices are stored as arrays of rows. Files hold no timestamps or other
//! run-dependent fields, so the same configuration always produces the same
//! bytes. Items are stored in full: the basis, and with it every prediction,
//! is rebuilt from them on load.

use nalgebra::{DMatrix, DVector};
use reprmetric::preference::PreferenceFit;
use reprmetric::triplet::TripletFit;
use reprmetric::{GramBasis, KernelSpec, LossSpec, MahalanobisForm, PreferenceModel, TripletModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferenceRecord {
    pub m: usize,
    pub item_ids: Vec<String>,
    pub items: Vec<Vec<f64>>,
    pub kernel: KernelSpec,
    pub loss: LossSpec,
    #[serde(rename = "A")]
    pub form: Vec<Vec<f64>>,
    pub u: Vec<f64>,
    pub lambda: f64,
    pub a_ij: Vec<Vec<f64>>,
    pub b_i: Vec<f64>,
    pub objective_trace_last: f64,
    pub zero_one_train_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripletRecord {
    pub m: usize,
    pub item_ids: Vec<String>,
    pub items: Vec<Vec<f64>>,
    pub kernel: KernelSpec,
    pub loss: LossSpec,
    #[serde(rename = "A")]
    pub form: Vec<Vec<f64>>,
    pub mu: f64,
    pub a_ij: Vec<Vec<f64>>,
    pub objective_trace_last: f64,
    pub zero_one_train_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Preference(PreferenceRecord),
    Triplet(TripletRecord),
}

/// A model ready for prediction.
#[derive(Debug, Clone)]
pub enum LoadedModel {
    Preference(PreferenceModel),
    Triplet(TripletModel),
}

impl LoadedModel {
    pub fn basis(&self) -> &GramBasis {
        match self {
            LoadedModel::Preference(m) => m.basis(),
            LoadedModel::Triplet(m) => m.basis(),
        }
    }

    /// Number of points one query compares.
    pub fn arity(&self) -> usize {
        match self {
            LoadedModel::Preference(_) => 2,
            LoadedModel::Triplet(_) => 3,
        }
    }

    pub fn delta(&self, points: &[&[f64]]) -> reprmetric::Result<f64> {
        match (self, points) {
            (LoadedModel::Preference(m), [a, b]) => m.delta_points(a, b),
            (LoadedModel::Triplet(m), [a, b, c]) => m.delta_points(a, b, c),
            _ => Err(reprmetric::Error::DimensionMismatch {
                expected: self.arity(),
                found: points.len(),
            }),
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>, String> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(format!("`{what}` must be a {n} x {n} matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ModelFile {
    pub fn from_preference(
        fit: &PreferenceFit,
        item_ids: &[String],
        loss: LossSpec,
        train_error: f64,
    ) -> Self {
        let model = &fit.model;
        let basis = model.basis();
        ModelFile::Preference(PreferenceRecord {
            m: basis.len(),
            item_ids: item_ids.to_vec(),
            items: basis.items().to_vec(),
            kernel: basis.spec(),
            loss,
            form: rows(model.form().matrix()),
            u: model.ideal().iter().copied().collect(),
            lambda: model.lambda(),
            a_ij: rows(model.form_coefficients()),
            b_i: model.ideal_coefficients().iter().copied().collect(),
            objective_trace_last: fit.trace.last(),
            zero_one_train_error: train_error,
            iterations: fit.trace.iterations,
            converged: fit.trace.converged,
        })
    }

    pub fn from_triplet(
        fit: &TripletFit,
        item_ids: &[String],
        loss: LossSpec,
        mu: f64,
        train_error: f64,
    ) -> Self {
        let model = &fit.model;
        let basis = model.basis();
        ModelFile::Triplet(TripletRecord {
            m: basis.len(),
            item_ids: item_ids.to_vec(),
            items: basis.items().to_vec(),
            kernel: basis.spec(),
            loss,
            form: rows(model.form().matrix()),
            mu,
            a_ij: rows(model.form_coefficients()),
            objective_trace_last: fit.trace.last(),
            zero_one_train_error: train_error,
            iterations: fit.trace.iterations,
            converged: fit.trace.converged,
        })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("model records serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Rebuilds the basis from the stored items and checks the stored form
    /// and ideal point. Expansion coefficients are derived data and are
    /// recomputed rather than trusted.
    pub fn load(&self) -> Result<LoadedModel, LoadError> {
        let (m, items, kernel, form) = match self {
            ModelFile::Preference(r) => (r.m, &r.items, r.kernel, &r.form),
            ModelFile::Triplet(r) => (r.m, &r.items, r.kernel, &r.form),
        };
        if items.len() != m {
            return Err(LoadError::Format(format!(
                "`m` is {m} but {} items are stored",
                items.len()
            )));
        }
        let basis = GramBasis::build(kernel, items.clone()).map_err(LoadError::Core)?;
        let form = MahalanobisForm::new(from_rows(form, m, "A").map_err(LoadError::Format)?)
            .map_err(LoadError::Core)?;
        match self {
            ModelFile::Preference(r) => {
                if r.u.len() != m {
                    return Err(LoadError::Format(format!("`u` must have {m} entries")));
                }
                let model =
                    PreferenceModel::new(basis, form, DVector::from_vec(r.u.clone()), r.lambda)
                        .map_err(LoadError::Core)?;
                Ok(LoadedModel::Preference(model))
            }
            ModelFile::Triplet(_) => Ok(LoadedModel::Triplet(
                TripletModel::new(basis, form).map_err(LoadError::Core)?,
            )),
        }
    }
}

#[derive(Debug)]
pub enum LoadError {
    Format(String),
    Core(reprmetric::Error),
}
