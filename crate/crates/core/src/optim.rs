//! Projected gradient descent over positive definite forms (and, optionally,
//! an ideal point), shared by the preference and triplet solvers.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mahalanobis::{psd_project, MahalanobisForm};

/// Halvings tried before an iteration is declared stalled.
pub const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Init {
    /// `A = I`, `u = 0`.
    IdentityZero,
    /// `A = proj(I + scale * S)` for a symmetric Gaussian `S`, `u ~ scale * N(0, I)`.
    Random { scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_size: f64,
    pub tol_grad: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            step_size: 1e-2,
            tol_grad: 1e-6,
            seed: 0,
            init: Init::IdentityZero,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        for (name, v) in [("step_size", self.step_size), ("tol_grad", self.tol_grad)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if let Init::Random { scale } = self.init {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "init scale must be positive, got {scale}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn initial_point(&self, dim: usize, with_ideal: bool) -> Result<Iterate> {
        let ideal_dim = if with_ideal { dim } else { 0 };
        match self.init {
            Init::IdentityZero => Ok(Iterate {
                form: MahalanobisForm::identity(dim),
                ideal: DVector::zeros(ideal_dim),
            }),
            Init::Random { scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
                let g = DMatrix::from_fn(dim, dim, |_, _| gauss());
                let sym = DMatrix::identity(dim, dim) + (&g + g.transpose()) * (0.5 * scale);
                let form = psd_project(&sym)?;
                let ideal = DVector::from_fn(ideal_dim, |_, _| scale * gauss());
                Ok(Iterate { form, ideal })
            }
        }
    }
}

/// Objective trace and stopping information of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    /// Objective at the initial point followed by one entry per accepted step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    /// Projected-gradient norm fell below `tol_grad`.
    pub converged: bool,
    pub final_grad_norm: f64,
}

impl FitTrace {
    pub fn last(&self) -> f64 {
        *self
            .objective
            .last()
            .expect("trace holds the initial objective")
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Iterate {
    pub form: MahalanobisForm,
    /// Empty when the problem has no ideal point.
    pub ideal: DVector<f64>,
}

pub(crate) trait Objective {
    fn value(&self, form: &MahalanobisForm, ideal: &DVector<f64>) -> Result<f64>;

    fn gradients(
        &self,
        form: &MahalanobisForm,
        ideal: &DVector<f64>,
    ) -> Result<(DMatrix<f64>, DVector<f64>)>;
}

/// Joint gradient step on `(A, u)`, projection of `A` onto the cone, and
/// backtracking that halves the step until the objective decreases.
pub(crate) fn projected_descent<O: Objective>(
    objective: &O,
    init: Iterate,
    cfg: &SolverConfig,
) -> Result<(Iterate, FitTrace)> {
    cfg.validate()?;
    let mut current = init;
    let mut f = objective.value(&current.form, &current.ideal)?;
    if !f.is_finite() {
        return Err(Error::NonFinite { iteration: 0 });
    }
    let mut trace = FitTrace {
        objective: vec![f],
        iterations: 0,
        converged: false,
        final_grad_norm: f64::INFINITY,
    };

    for iteration in 1..=cfg.max_iters {
        let (grad_a, grad_u) = objective.gradients(&current.form, &current.ideal)?;
        if grad_a.iter().chain(grad_u.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { iteration });
        }

        let unit = psd_project(&(current.form.matrix() - &grad_a))?;
        let pg =
            ((current.form.matrix() - unit.matrix()).norm_squared() + grad_u.norm_squared()).sqrt();
        trace.final_grad_norm = pg;
        if pg <= cfg.tol_grad {
            trace.converged = true;
            break;
        }

        let mut step = cfg.step_size;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let form = psd_project(&(current.form.matrix() - &grad_a * step))?;
            let ideal = &current.ideal - &grad_u * step;
            let f_new = objective.value(&form, &ideal)?;
            if f_new.is_finite() && f_new < f {
                accepted = Some((Iterate { form, ideal }, f_new));
                break;
            }
            step *= 0.5;
        }

        match accepted {
            Some((next, f_new)) => {
                current = next;
                f = f_new;
                trace.objective.push(f);
                trace.iterations = iteration;
            }
            // No decrease at any step size tried: stationary to working precision.
            None => break,
        }
    }
    Ok((current, trace))
}
