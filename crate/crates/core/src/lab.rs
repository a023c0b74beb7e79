//! Randomized verification of the subspace reduction.
//!
//! Items live in an ambient `R^D` and span a subspace `V` with orthonormal
//! basis `Q` (`D x m`). The checks here confirm, instance by instance, that
//!
//! - moving the ideal point to its `B`-orthogonal projection onto `V` leaves
//!   every paired difference unchanged and does not increase `|u|_B^2`;
//! - a form on `V` and its extension `A (+) id` to `R^D` induce the same inner
//!   products on `V`, and restriction undoes extension;
//! - paired and triplet objectives written in `V`-coordinates take the same
//!   value as their ambient counterparts.
//!
//! Each check returns a [`CheckReport`]; failures are reported, not raised.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embedding::{forward_substitute, GramBasis};
use crate::error::{check_dim, Error, Result};
use crate::kernels::KernelSpec;
use crate::losses::{Label, LossSpec};
use crate::mahalanobis::{check_orthonormal, extend_ambient, restrict, MahalanobisForm};
use crate::preference::{delta_pair, PairedSample, PreferenceProblem};
use crate::triplet::{TripletProblem, TripletSample};

/// Tolerance for value equalities, scaled by `1 + magnitude`.
pub const VALUE_RTOL: f64 = 1e-9;
/// Restriction identity `x^T A y = (Qx)^T B (Qy)`.
pub const RESTRICTION_TOL: f64 = 1e-10;
/// `restrict(extend(A)) = A`, entrywise.
pub const ROUND_TRIP_TOL: f64 = 1e-12;
/// Worked-example identities, absolute.
pub const FIXTURE_TOL: f64 = 1e-12;
/// Slack allowed when a quantity must not increase.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Largest ambient dimension accepted by [`verify_restriction_extension`].
pub const MAX_AMBIENT_DIM: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub instances: usize,
    pub max_abs_error: f64,
    pub pass: bool,
}

impl CheckReport {
    fn new(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            instances: 0,
            max_abs_error: 0.0,
            pass: true,
        }
    }

    fn failed(check: &str) -> Self {
        CheckReport {
            check: check.to_string(),
            instances: 1,
            max_abs_error: f64::INFINITY,
            pass: false,
        }
    }

    /// Records one comparison; `ok` is decided by the caller's tolerance.
    fn record(&mut self, abs_error: f64, ok: bool) {
        if abs_error.is_nan() {
            self.max_abs_error = f64::INFINITY;
            self.pass = false;
            return;
        }
        self.max_abs_error = self.max_abs_error.max(abs_error);
        self.pass &= ok;
    }

    fn record_close(&mut self, a: f64, b: f64, rtol: f64) {
        let err = (a - b).abs();
        self.record(err, err <= rtol * (1.0 + a.abs().max(b.abs())));
    }

    /// Folds another report of the same check into this one.
    pub fn merge(&mut self, other: &CheckReport) {
        self.instances += other.instances;
        self.max_abs_error = self.max_abs_error.max(other.max_abs_error);
        self.pass &= other.pass;
    }

    fn finish(mut self, outcome: Result<()>) -> Self {
        if self.instances == 0 {
            self.instances = 1;
        }
        if outcome.is_err() {
            self.max_abs_error = f64::INFINITY;
            self.pass = false;
        }
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:>5} instances  max_abs_error {:>10.3e}  {}",
            self.check,
            self.instances,
            self.max_abs_error,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Items in `R^D` (one per row of `items`) spanning `V`, an ambient form, and
/// comparisons over the items.
#[derive(Debug, Clone)]
pub struct AmbientInstance {
    items: DMatrix<f64>,
    q: DMatrix<f64>,
    ambient_form: MahalanobisForm,
    pub pairs: Vec<PairedSample>,
    pub triplets: Vec<TripletSample>,
    pub ideal: Option<DVector<f64>>,
}

impl AmbientInstance {
    /// Orthonormalizes the items through their linear-kernel [`GramBasis`].
    pub fn new(
        items: DMatrix<f64>,
        ambient_form: MahalanobisForm,
        pairs: Vec<PairedSample>,
        triplets: Vec<TripletSample>,
        ideal: Option<DVector<f64>>,
    ) -> Result<Self> {
        let d = items.ncols();
        check_dim(d, ambient_form.dim())?;
        if let Some(u) = &ideal {
            check_dim(d, u.len())?;
        }
        let q = orthonormal_basis(&items)?;
        // Keeps PreferenceProblem/TripletProblem index validation in one place.
        PreferenceProblem::new(&items, &pairs, LossSpec::default(), 0.0)?;
        TripletProblem::new(&items, &triplets, LossSpec::default(), 0.0)?;
        Ok(AmbientInstance {
            items,
            q,
            ambient_form,
            pairs,
            triplets,
            ideal,
        })
    }

    /// Instance with an explicit orthonormal basis of `V`. The items only need
    /// to lie in `span(Q)`, so dependent (e.g. collinear) items are allowed.
    pub fn with_basis(
        items: DMatrix<f64>,
        q: DMatrix<f64>,
        ambient_form: MahalanobisForm,
        pairs: Vec<PairedSample>,
        triplets: Vec<TripletSample>,
        ideal: Option<DVector<f64>>,
    ) -> Result<Self> {
        let d = items.ncols();
        check_dim(d, ambient_form.dim())?;
        check_dim(d, q.nrows())?;
        if let Some(u) = &ideal {
            check_dim(d, u.len())?;
        }
        check_orthonormal(&q)?;
        for row in items.row_iter() {
            let x = row.transpose();
            let residual = (&q * (q.transpose() * &x) - &x).amax();
            if residual > 1e-10 * (1.0 + x.amax()) {
                return Err(Error::InvalidParameter(
                    "items do not lie in the span of the basis".into(),
                ));
            }
        }
        PreferenceProblem::new(&items, &pairs, LossSpec::default(), 0.0)?;
        TripletProblem::new(&items, &triplets, LossSpec::default(), 0.0)?;
        Ok(AmbientInstance {
            items,
            q,
            ambient_form,
            pairs,
            triplets,
            ideal,
        })
    }

    /// Random instance: `m` Gaussian items in `R^D`, a random positive
    /// definite ambient form, a Gaussian ideal point (almost surely outside
    /// `V` when `m < D`) and uniformly drawn comparisons with random labels.
    pub fn random<R: Rng>(
        rng: &mut R,
        ambient_dim: usize,
        m: usize,
        n_pairs: usize,
        n_triplets: usize,
    ) -> Result<Self> {
        if m == 0 || m > ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= m <= D, got m = {m}, D = {ambient_dim}"
            )));
        }
        let items = gaussian_matrix(rng, m, ambient_dim);
        let ambient_form = random_pd(rng, ambient_dim);
        let ideal = gaussian_vector(rng, ambient_dim);
        let label = |rng: &mut R| {
            if rng.random_bool(0.5) {
                Label::Positive
            } else {
                Label::Negative
            }
        };
        let mut pairs = Vec::with_capacity(n_pairs);
        if m >= 2 {
            while pairs.len() < n_pairs {
                let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
                if let Ok(s) = PairedSample::new(i, j, label(rng)) {
                    pairs.push(s);
                }
            }
        }
        let mut triplets = Vec::with_capacity(n_triplets);
        if m >= 2 {
            while triplets.len() < n_triplets {
                let anchor = rng.random_range(0..m);
                let (j, k) = (rng.random_range(0..m), rng.random_range(0..m));
                if let Ok(s) = TripletSample::new(anchor, j, k, label(rng)) {
                    triplets.push(s);
                }
            }
        }
        AmbientInstance::new(items, ambient_form, pairs, triplets, Some(ideal))
    }

    pub fn ambient_dim(&self) -> usize {
        self.items.ncols()
    }

    pub fn subspace_dim(&self) -> usize {
        self.q.ncols()
    }

    /// Items as rows.
    pub fn items(&self) -> &DMatrix<f64> {
        &self.items
    }

    /// Orthonormal basis of `V`, one vector per column.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn ambient_form(&self) -> &MahalanobisForm {
        &self.ambient_form
    }

    /// Item coordinates in `V`: row `j` is `Q^T x_j`.
    pub fn subspace_coords(&self) -> DMatrix<f64> {
        &self.items * &self.q
    }
}

/// Orthonormal basis of the row space of `items` via Cholesky of the linear
/// Gram matrix, applied twice so the columns are orthonormal to working
/// precision even for moderately ill-conditioned items.
pub fn orthonormal_basis(items: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let first = cholesky_qr(&items.transpose())?;
    let q = cholesky_qr(&first)?;
    check_orthonormal(&q)?;
    Ok(q)
}

/// `Q = X L^{-T}` with `X^T X = L L^T`, for `X` holding vectors as columns.
fn cholesky_qr(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let columns: Vec<Vec<f64>> = x
        .column_iter()
        .map(|c| c.iter().cloned().collect())
        .collect();
    let basis = GramBasis::build(KernelSpec::Linear, columns)?;
    let l = basis.chol();
    // Q^T = L^{-1} X^T, one column of X^T at a time.
    let xt = x.transpose();
    let mut qt = DMatrix::zeros(xt.nrows(), xt.ncols());
    for (j, col) in xt.column_iter().enumerate() {
        qt.set_column(j, &forward_substitute(l, &col.into_owned()));
    }
    Ok(qt.transpose())
}

pub type Projector =
    fn(&MahalanobisForm, &DMatrix<f64>, &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)>;

/// Splits `u = u_T + u_perp` with `u_T` in `span(Q)` and `u_perp`
/// orthogonal to `span(Q)` in `<., .>_B`: `u_T = Q c` where
/// `(Q^T B Q) c = Q^T B u`.
pub fn a_orthogonal_project(
    b: &MahalanobisForm,
    q: &DMatrix<f64>,
    u: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(b.dim(), q.nrows())?;
    check_dim(b.dim(), u.len())?;
    let bq = b.matrix() * q;
    let normal = q.transpose() * &bq;
    let rhs = bq.transpose() * u;
    let chol = normal
        .cholesky()
        .ok_or_else(|| Error::Numerical("Q^T B Q is not positive definite".into()))?;
    let c = chol.solve(&rhs);
    let u_t = q * c;
    let u_perp = u - &u_t;
    Ok((u_t, u_perp))
}

/// Euclidean projection `Q Q^T u`, ignoring `B`. Only meaningful as a
/// negative control: it does not preserve paired differences.
pub fn euclidean_project(
    b: &MahalanobisForm,
    q: &DMatrix<f64>,
    u: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    check_dim(b.dim(), q.nrows())?;
    check_dim(b.dim(), u.len())?;
    let u_t = q * (q.transpose() * u);
    let u_perp = u - &u_t;
    Ok((u_t, u_perp))
}

pub fn verify_projection_invariance(inst: &AmbientInstance, loss: LossSpec) -> CheckReport {
    verify_projection_invariance_with(inst, loss, a_orthogonal_project)
}

/// Data term at `(B, u)` versus `(B, u_T)`, plus `|u_T|_B^2 <= |u|_B^2` and
/// `<u_perp, q_j>_B = 0` for every basis vector.
pub fn verify_projection_invariance_with(
    inst: &AmbientInstance,
    loss: LossSpec,
    projector: Projector,
) -> CheckReport {
    let mut report = CheckReport::new("projection_invariance");
    let outcome = (|| -> Result<()> {
        let u = inst
            .ideal
            .as_ref()
            .ok_or(Error::EmptyInput("instance has no ideal point"))?;
        if inst.pairs.is_empty() {
            return Err(Error::EmptyInput("instance has no paired samples"));
        }
        let b = inst.ambient_form();
        let (u_t, u_perp) = projector(b, inst.basis(), u)?;
        let problem = PreferenceProblem::new(inst.items(), &inst.pairs, loss, 0.0)?;
        for (d_full, d_proj) in problem
            .deltas(b, u)?
            .into_iter()
            .zip(problem.deltas(b, &u_t)?)
        {
            report.record_close(d_full, d_proj, VALUE_RTOL);
        }
        report.record_close(
            problem.data_term(b, u)?,
            problem.data_term(b, &u_t)?,
            VALUE_RTOL,
        );

        let (full, proj) = (b.norm_sq(u)?, b.norm_sq(&u_t)?);
        let increase = (proj - full).max(0.0);
        report.record(increase, increase <= MONOTONE_TOL * (1.0 + full));

        for q in inst.basis().column_iter() {
            let residual = b.inner(&u_perp, &q.into_owned())?.abs();
            report.record(residual, residual <= VALUE_RTOL);
        }
        // Pythagoras in <., .>_B
        report.record_close(full, proj + b.norm_sq(&u_perp)?, VALUE_RTOL);
        report.instances = 1;
        Ok(())
    })();
    report.finish(outcome)
}

/// Extension/restriction identities for a random form on a random
/// `m`-dimensional subspace of `R^D`, and the converse for a random ambient
/// form.
pub fn verify_restriction_extension(ambient_dim: usize, m: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("restriction_extension");
    if !(1 <= m && m <= ambient_dim && ambient_dim <= MAX_AMBIENT_DIM) {
        return CheckReport::failed("restriction_extension");
    }
    let outcome = (|| -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_pd(&mut rng, m);
        let q = random_orthonormal(&mut rng, ambient_dim, m);

        let b = extend_ambient(&a, &q)?;
        let floor = a.min_eigenvalue()?.min(1.0);
        let b_min = b.min_eigenvalue()?;
        report.record(
            (floor - b_min).max(0.0),
            b_min > 0.0 && b_min >= floor - 1e-10,
        );
        for _ in 0..4 {
            let (x, y) = (gaussian_vector(&mut rng, m), gaussian_vector(&mut rng, m));
            let err = (a.inner(&x, &y)? - b.inner(&(&q * &x), &(&q * &y))?).abs();
            report.record(err, err <= RESTRICTION_TOL);
        }
        let back = restrict(&b, &q)?;
        let err = (back.matrix() - a.matrix()).amax();
        report.record(err, err <= ROUND_TRIP_TOL);

        // Converse: any ambient form restricts to a positive definite form
        // reproducing its inner products on V.
        let ambient = random_pd(&mut rng, ambient_dim);
        let restricted = restrict(&ambient, &q)?;
        let r_min = restricted.min_eigenvalue()?;
        report.record(0.0, r_min > 0.0);
        for _ in 0..4 {
            let (x, y) = (gaussian_vector(&mut rng, m), gaussian_vector(&mut rng, m));
            let err = (restricted.inner(&x, &y)? - ambient.inner(&(&q * &x), &(&q * &y))?).abs();
            report.record(err, err <= RESTRICTION_TOL);
        }
        report.instances = 1;
        Ok(())
    })();
    report.finish(outcome)
}

/// Paired objective in `V`-coordinates versus the ambient objective of the
/// extension, over `candidates` random `(A_V, u_V)`; and, for the
/// instance's own `(B, u)`, that projecting `u` does not increase the
/// regularized objective and lands on the restricted `V`-problem's value.
pub fn verify_regularized_representer(
    inst: &AmbientInstance,
    loss: LossSpec,
    lambda: f64,
    candidates: usize,
    seed: u64,
) -> CheckReport {
    let mut report = CheckReport::new("regularized_representer");
    let outcome = (|| -> Result<()> {
        if inst.pairs.is_empty() {
            return Err(Error::EmptyInput("instance has no paired samples"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = inst.basis();
        let coords_v = inst.subspace_coords();
        let in_v = PreferenceProblem::new(&coords_v, &inst.pairs, loss, lambda)?;
        let ambient = PreferenceProblem::new(inst.items(), &inst.pairs, loss, lambda)?;
        let m = inst.subspace_dim();

        for _ in 0..candidates {
            let a_v = random_pd(&mut rng, m);
            let u_v = gaussian_vector(&mut rng, m);
            let b = extend_ambient(&a_v, q)?;
            let f_v = in_v.objective(&a_v, &u_v)?;
            let f_amb = ambient.objective(&b, &(q * &u_v))?;
            report.record_close(f_v, f_amb, VALUE_RTOL);
        }

        if let Some(u) = &inst.ideal {
            let b = inst.ambient_form();
            let (u_t, _) = a_orthogonal_project(b, q, u)?;
            let f_full = ambient.objective(b, u)?;
            let f_proj = ambient.objective(b, &u_t)?;
            let increase = (f_proj - f_full).max(0.0);
            report.record(increase, increase <= MONOTONE_TOL * (1.0 + f_full.abs()));

            let restricted = restrict(b, q)?;
            let f_v = in_v.objective(&restricted, &(q.transpose() * &u_t))?;
            report.record_close(f_v, f_proj, VALUE_RTOL);
        }
        report.instances = 1;
        Ok(())
    })();
    report.finish(outcome)
}

/// Triplet objective in `V`-coordinates versus the ambient objective of the
/// extension (and of any ambient form versus its restriction).
pub fn verify_triplet_representer(
    inst: &AmbientInstance,
    loss: LossSpec,
    candidates: usize,
    seed: u64,
) -> CheckReport {
    let mut report = CheckReport::new("triplet_representer");
    let outcome = (|| -> Result<()> {
        if inst.triplets.is_empty() {
            return Err(Error::EmptyInput("instance has no triplet samples"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = inst.basis();
        let coords_v = inst.subspace_coords();
        let in_v = TripletProblem::new(&coords_v, &inst.triplets, loss, 0.0)?;
        let ambient = TripletProblem::new(inst.items(), &inst.triplets, loss, 0.0)?;
        let m = inst.subspace_dim();
        for _ in 0..candidates {
            let a_v = random_pd(&mut rng, m);
            let b = extend_ambient(&a_v, q)?;
            report.record_close(in_v.objective(&a_v)?, ambient.objective(&b)?, VALUE_RTOL);
        }
        let b = inst.ambient_form();
        let restricted = restrict(b, q)?;
        report.record_close(
            in_v.objective(&restricted)?,
            ambient.objective(b)?,
            VALUE_RTOL,
        );
        report.instances = 1;
        Ok(())
    })();
    report.finish(outcome)
}

/// The two-item example in `R^2`: `x1 = e1`, `x2 = -e1`,
/// `A = [[1, 1], [1, 2]]`, `V = span{e1}`. Moving the ideal point along the
/// Euclidean projection line `(0, t)` changes the difference (`-4t`); moving
/// it along the `A`-orthogonal line `(t, u0 - t)` does not (`-4 u0`).
pub fn fixture_section34() -> CheckReport {
    let mut report = CheckReport::new("fixture_section34");
    let outcome = (|| -> Result<()> {
        let a = MahalanobisForm::from_row_major(2, &[1.0, 1.0, 1.0, 2.0])?;
        let x1 = DVector::from_vec(vec![1.0, 0.0]);
        let x2 = DVector::from_vec(vec![-1.0, 0.0]);
        let w = DVector::from_vec(vec![1.0, -1.0]);

        let orth = a.inner(&x1, &w)?.abs();
        report.record(orth, orth <= FIXTURE_TOL);

        let mut ts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for u0 in [0.0, 0.5, 1.0, 2.0] {
            ts.extend((0..=4).map(|i| u0 * i as f64 / 4.0));
            for &t in &ts {
                let euclid = delta_pair(&a, &DVector::from_vec(vec![0.0, t]), &x1, &x2)?;
                let err = (euclid - (-4.0 * t)).abs();
                report.record(err, err <= FIXTURE_TOL);

                let along_w = delta_pair(&a, &DVector::from_vec(vec![t, -t + u0]), &x1, &x2)?;
                let err = (along_w - (-4.0 * u0)).abs();
                report.record(err, err <= FIXTURE_TOL);
                report.instances += 1;
            }
            ts.truncate(11);

            // The A-orthogonal projection of (0, u0) onto span{e1} is (u0, 0).
            let q = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
            let (u_t, u_perp) = a_orthogonal_project(&a, &q, &DVector::from_vec(vec![0.0, u0]))?;
            let err = (u_t - DVector::from_vec(vec![u0, 0.0])).amax();
            report.record(err, err <= FIXTURE_TOL);
            let err = a.inner(&x1, &u_perp)?.abs();
            report.record(err, err <= FIXTURE_TOL);
        }
        Ok(())
    })();
    report.finish(outcome)
}

/// Embedding by Cholesky versus the determinant formula on a random
/// well-conditioned RBF basis with `m` items in `R^2`, at the training items
/// and at held-out points; plus `alpha_i . alpha_j = K_ij`.
pub fn verify_determinant_formula(m: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("determinant_formula");
    let outcome = (|| -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = well_conditioned_rbf_basis(&mut rng, m)?;
        let mut points: Vec<Vec<f64>> = basis.items().to_vec();
        for _ in 0..3 {
            points.push(vec![
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ]);
        }
        for p in &points {
            let fast = basis.embed(p)?;
            let oracle = basis.embed_determinant_oracle(p)?;
            let scale = oracle.amax().max(fast.amax());
            let err = (&fast - &oracle).amax();
            report.record(err, err <= 1e-8 * scale.max(f64::MIN_POSITIVE));
        }
        let k = basis.gram();
        let scale = k.amax();
        for i in 0..m {
            for j in 0..m {
                let ai = basis.embed(&basis.items()[i])?;
                let aj = basis.embed(&basis.items()[j])?;
                let err = (ai.dot(&aj) - k[(i, j)]).abs();
                report.record(err, err <= 1e-8 * scale);
            }
        }
        report.instances = 1;
        Ok(())
    })();
    report.finish(outcome)
}

/// RBF items in `[-2, 2]^2` with a gamma chosen so the Gram matrix stays far
/// from singular; redraws until every squared pivot exceeds 1e-3.
pub fn well_conditioned_rbf_basis<R: Rng>(rng: &mut R, m: usize) -> Result<GramBasis> {
    if m == 0 {
        return Err(Error::EmptyInput("basis size must be >= 1"));
    }
    for _ in 0..1000 {
        let gamma = rng.random_range(0.5..2.0);
        let items: Vec<Vec<f64>> = (0..m)
            .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
            .collect();
        if let Ok(basis) = GramBasis::build(KernelSpec::rbf(gamma)?, items) {
            if basis.pivots().iter().all(|p| p * p > 1e-3) {
                return Ok(basis);
            }
        }
    }
    Err(Error::Numerical(
        "could not draw a well-conditioned basis".into(),
    ))
}

/// Settings for [`run_suite`].
#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub seed: u64,
    pub projection_instances: usize,
    pub restriction_draws: usize,
    pub representer_instances: usize,
    pub determinant_instances: usize,
    pub lambda: f64,
    pub projector: Projector,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            projection_instances: 100,
            restriction_draws: 200,
            representer_instances: 100,
            determinant_instances: 100,
            lambda: 0.1,
            projector: a_orthogonal_project,
        }
    }
}

/// Draws a random instance with `3 <= D <= 6`, `2 <= m <= min(4, D - 1)` and
/// 1 to 20 comparisons of each kind; `m >= 2` so comparisons exist.
pub fn random_small_instance<R: Rng>(rng: &mut R) -> Result<AmbientInstance> {
    let d = rng.random_range(3..=6);
    let m = rng.random_range(2..=4.min(d - 1));
    let n_pairs = rng.random_range(1..=20);
    let n_triplets = rng.random_range(1..=20);
    for _ in 0..100 {
        if let Ok(inst) = AmbientInstance::random(rng, d, m, n_pairs, n_triplets) {
            return Ok(inst);
        }
    }
    Err(Error::Numerical(
        "could not draw an ambient instance".into(),
    ))
}

/// Runs every check over seeded random instances; one aggregated report per
/// check, in a fixed order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let losses = [LossSpec::default(), LossSpec::Logistic, LossSpec::ZeroOne];

    let mut projection = CheckReport::new("projection_invariance");
    let mut projection_rng = ChaCha8Rng::seed_from_u64(rng.random());
    for i in 0..cfg.projection_instances {
        let report = match random_small_instance(&mut projection_rng) {
            Ok(inst) => {
                verify_projection_invariance_with(&inst, losses[i % losses.len()], cfg.projector)
            }
            Err(_) => CheckReport::failed("projection_invariance"),
        };
        projection.merge(&report);
    }

    let mut restriction = CheckReport::new("restriction_extension");
    let mut restriction_rng = ChaCha8Rng::seed_from_u64(rng.random());
    for _ in 0..cfg.restriction_draws {
        let d = restriction_rng.random_range(1..=MAX_AMBIENT_DIM);
        let m = restriction_rng.random_range(1..=d);
        let seed = restriction_rng.random();
        restriction.merge(&verify_restriction_extension(d, m, seed));
    }

    let mut regularized = CheckReport::new("regularized_representer");
    let mut triplet = CheckReport::new("triplet_representer");
    let mut representer_rng = ChaCha8Rng::seed_from_u64(rng.random());
    for i in 0..cfg.representer_instances {
        let loss = losses[i % losses.len()];
        match random_small_instance(&mut representer_rng) {
            Ok(inst) => {
                let seed = representer_rng.random();
                regularized.merge(&verify_regularized_representer(
                    &inst, loss, cfg.lambda, 5, seed,
                ));
                triplet.merge(&verify_triplet_representer(&inst, loss, 5, seed));
            }
            Err(_) => {
                regularized.merge(&CheckReport::failed("regularized_representer"));
                triplet.merge(&CheckReport::failed("triplet_representer"));
            }
        }
    }

    let mut determinant = CheckReport::new("determinant_formula");
    let mut determinant_rng = ChaCha8Rng::seed_from_u64(rng.random());
    for i in 0..cfg.determinant_instances {
        let m = 1 + i % 6;
        determinant.merge(&verify_determinant_formula(m, determinant_rng.random()));
    }

    vec![
        fixture_section34(),
        projection,
        restriction,
        regularized,
        triplet,
        determinant,
    ]
}

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

pub(crate) fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `G G^T / n + 0.2 I` for Gaussian `G`: positive definite with eigenvalues
/// bounded away from zero.
pub fn random_pd<R: Rng>(rng: &mut R, n: usize) -> MahalanobisForm {
    let g = gaussian_matrix(rng, n, n);
    let m = &g * g.transpose() / n as f64 + DMatrix::identity(n, n) * 0.2;
    MahalanobisForm::new(m).expect("G G^T + 0.2 I is positive definite")
}

/// Random `D x m` matrix with orthonormal columns (Householder QR of a
/// Gaussian matrix).
pub fn random_orthonormal<R: Rng>(rng: &mut R, ambient_dim: usize, m: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, ambient_dim, m);
    g.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn section_instance(u0: f64) -> AmbientInstance {
        let items = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        // x1 and x2 are collinear: V = span{e1} is spanned by x1 alone.
        let items_v = items.rows(0, 1).into_owned();
        let q = orthonormal_basis(&items_v).unwrap();
        assert_eq!(q, DMatrix::from_column_slice(2, 1, &[1.0, 0.0]));
        assert!(AmbientInstance::new(
            items.clone(),
            MahalanobisForm::identity(2),
            vec![],
            vec![],
            None
        )
        .is_err());
        AmbientInstance::with_basis(
            items,
            q,
            MahalanobisForm::from_row_major(2, &[1.0, 1.0, 1.0, 2.0]).unwrap(),
            vec![PairedSample::new(0, 1, Label::Negative).unwrap()],
            vec![],
            Some(v(&[0.0, u0])),
        )
        .unwrap()
    }

    #[test]
    fn identity_form_projection_is_euclidean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_orthonormal(&mut rng, 5, 2);
        let u = gaussian_vector(&mut rng, 5);
        let (u_t, _) = a_orthogonal_project(&MahalanobisForm::identity(5), &q, &u).unwrap();
        let expected = &q * (q.transpose() * &u);
        assert!((u_t - expected).amax() < 1e-12);
    }

    #[test]
    fn section_projection() {
        let inst = section_instance(1.0);
        let (u_t, u_perp) = a_orthogonal_project(
            inst.ambient_form(),
            inst.basis(),
            inst.ideal.as_ref().unwrap(),
        )
        .unwrap();
        assert!((u_t - v(&[1.0, 0.0])).amax() < 1e-15);
        assert!((u_perp.clone() - v(&[-1.0, 1.0])).amax() < 1e-15);
        assert_eq!(
            inst.ambient_form().inner(&v(&[1.0, 0.0]), &u_perp).unwrap(),
            0.0
        );

        let report = verify_projection_invariance(&inst, LossSpec::ZeroOne);
        assert!(report.pass, "{report}");
        // Delta at u_T = (u0, 0) is -4 u0 = -4.
        let p = PreferenceProblem::new(inst.items(), &inst.pairs, LossSpec::ZeroOne, 0.0).unwrap();
        assert!((p.deltas(inst.ambient_form(), &v(&[1.0, 0.0])).unwrap()[0] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_projection_breaks_invariance() {
        let inst = section_instance(1.0);
        let report =
            verify_projection_invariance_with(&inst, LossSpec::default(), euclidean_project);
        assert!(!report.pass);
    }

    #[test]
    fn projection_of_point_in_v_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = AmbientInstance::random(&mut rng, 5, 3, 4, 4).unwrap();
        let u = inst.basis() * v(&[0.3, -1.0, 2.0]);
        let (u_t, u_perp) = a_orthogonal_project(inst.ambient_form(), inst.basis(), &u).unwrap();
        assert!(u_perp.amax() < 1e-12);
        assert!((u_t - &u).amax() < 1e-12);

        let mut inst = inst;
        inst.ideal = Some(u);
        assert!(verify_projection_invariance(&inst, LossSpec::Logistic).pass);
        assert!(verify_regularized_representer(&inst, LossSpec::Logistic, 0.5, 3, 1).pass);
    }

    #[test]
    fn projection_is_idempotent_with_pythagoras() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let inst = random_small_instance(&mut rng).unwrap();
            let b = inst.ambient_form();
            let u = inst.ideal.clone().unwrap();
            let (u_t, u_perp) = a_orthogonal_project(b, inst.basis(), &u).unwrap();
            let (again, _) = a_orthogonal_project(b, inst.basis(), &u_t).unwrap();
            assert!((&again - &u_t).amax() < 1e-12);
            let lhs = b.norm_sq(&u).unwrap();
            let rhs = b.norm_sq(&u_t).unwrap() + b.norm_sq(&u_perp).unwrap();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs);
        }
    }

    #[test]
    fn fixture_passes() {
        let report = fixture_section34();
        assert!(report.pass, "{report}");
        assert!(report.max_abs_error <= FIXTURE_TOL);
    }

    #[test]
    fn restriction_extension_edge_cases() {
        assert!(verify_restriction_extension(4, 4, 0).pass);
        assert!(verify_restriction_extension(1, 1, 0).pass);
        assert!(!verify_restriction_extension(3, 4, 0).pass);
        assert!(!verify_restriction_extension(13, 2, 0).pass);
    }

    #[test]
    fn regularized_with_zero_lambda_matches_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inst = random_small_instance(&mut rng).unwrap();
        assert!(verify_regularized_representer(&inst, LossSpec::default(), 0.0, 5, 3).pass);
        assert!(verify_projection_invariance(&inst, LossSpec::default()).pass);
    }

    #[test]
    fn orthonormal_basis_spans_items() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let items = gaussian_matrix(&mut rng, 3, 6);
        let q = orthonormal_basis(&items).unwrap();
        // each item equals its projection onto span(Q)
        for row in items.row_iter() {
            let x = row.transpose();
            let proj = &q * (q.transpose() * &x);
            assert!((proj - x).amax() < 1e-12);
        }
    }

    #[test]
    fn suite_passes_for_seed_zero() {
        let reports = run_suite(&SuiteConfig {
            projection_instances: 20,
            restriction_draws: 20,
            representer_instances: 20,
            determinant_instances: 12,
            ..SuiteConfig::default()
        });
        for r in &reports {
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn report_json_shape() {
        let json = serde_json::to_value(fixture_section34()).unwrap();
        let obj = json.as_object().unwrap();
        for key in ["check", "instances", "max_abs_error", "pass"] {
            assert!(obj.contains_key(key));
        }
    }
}
