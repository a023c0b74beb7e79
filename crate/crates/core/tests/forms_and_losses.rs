use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reprmetric::lab::random_orthonormal;
use reprmetric::mahalanobis::{extend_ambient, psd_project, restrict, EIG_FLOOR};
use reprmetric::{Label, LossSpec, MahalanobisForm};

fn vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-3.0..3.0f64, n).prop_map(DVector::from_vec)
}

/// Symmetric matrix with entries in [-3, 3]; often indefinite.
fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-3.0..3.0f64, n * n).prop_map(move |v| {
        let g = DMatrix::from_vec(n, n, v);
        (&g + g.transpose()) * 0.5
    })
}

fn projected(n: usize) -> impl Strategy<Value = MahalanobisForm> {
    symmetric(n).prop_map(|s| psd_project(&s).unwrap())
}

fn label() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Positive), Just(Label::Negative)]
}

fn surrogate() -> impl Strategy<Value = LossSpec> {
    prop_oneof![
        (0.1..3.0f64).prop_map(|margin| LossSpec::Hinge { margin }),
        Just(LossSpec::Logistic),
    ]
}

proptest! {
    #[test]
    fn inner_is_bilinear(
        form in projected(4),
        (x, y, z) in (vector(4), vector(4), vector(4)),
        (a, b) in (-5.0..5.0f64, -5.0..5.0f64),
    ) {
        let combined = &x * a + &y * b;
        let lhs = form.inner(&combined, &z).unwrap();
        let rhs = a * form.inner(&x, &z).unwrap() + b * form.inner(&y, &z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn inner_is_symmetric(form in projected(5), x in vector(5), y in vector(5)) {
        prop_assert_eq!(form.inner(&x, &y).unwrap(), form.inner(&y, &x).unwrap());
    }

    #[test]
    fn projected_forms_are_positive(s in symmetric(5), x in vector(5)) {
        prop_assume!(x.amax() > 1e-3);
        let form = psd_project(&s).unwrap();
        prop_assert!(form.min_eigenvalue().unwrap() >= EIG_FLOOR - 1e-12);
        prop_assert!(form.norm_sq(&x).unwrap() > 0.0);
    }

    #[test]
    fn projection_is_idempotent(s in symmetric(4)) {
        let once = psd_project(&s).unwrap();
        let twice = psd_project(once.matrix()).unwrap();
        prop_assert!((once.matrix() - twice.matrix()).amax() <= 1e-12 * (1.0 + s.amax()));
    }

    #[test]
    fn restrict_undoes_extend(form in projected(3), d in 3usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthonormal(&mut rng, d, form.dim());
        let ambient = extend_ambient(&form, &q).unwrap();
        let back = restrict(&ambient, &q).unwrap();
        prop_assert!((back.matrix() - form.matrix()).amax() <= 1e-12);
    }

    #[test]
    fn extension_stays_positive(form in projected(3), d in 3usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthonormal(&mut rng, d, form.dim());
        let ambient = extend_ambient(&form, &q).unwrap();
        prop_assert!(ambient.min_eigenvalue().unwrap() >= EIG_FLOOR.min(1.0) - 1e-10);
    }

    #[test]
    fn extension_restricts_to_the_form_on_the_subspace(
        form in projected(3),
        (c1, c2) in (vector(3), vector(3)),
        d in 3usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthonormal(&mut rng, d, 3);
        let ambient = extend_ambient(&form, &q).unwrap();
        let lifted = ambient.inner(&(&q * &c1), &(&q * &c2)).unwrap();
        let direct = form.inner(&c1, &c2).unwrap();
        prop_assert!((lifted - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn losses_are_invariant_under_a_joint_flip(
        spec in prop_oneof![Just(LossSpec::ZeroOne), surrogate()],
        delta in -50.0..50.0f64,
        y in label(),
    ) {
        prop_assert_eq!(spec.value(delta, y).to_bits(), spec.value(-delta, y.flipped()).to_bits());
    }

    #[test]
    fn hinge_dominates_zero_one_on_misclassified_samples(
        margin in 1.0..3.0f64,
        delta in -50.0..50.0f64,
        y in label(),
    ) {
        let hinge = LossSpec::Hinge { margin };
        prop_assert!(hinge.value(delta, y) >= LossSpec::ZeroOne.value(delta, y) - 1e-12);
    }

    #[test]
    fn logistic_dominates_zero_one_once_the_margin_is_clearly_negative(
        delta in -50.0..-0.55f64,
        y in label(),
    ) {
        // With the natural logarithm, log(1 + exp(-m)) >= 1 iff m <= -ln(e - 1).
        let delta = delta * y.value();
        prop_assert!(LossSpec::Logistic.value(delta, y) >= 1.0);
    }

    #[test]
    fn gradients_match_central_differences(
        spec in surrogate(),
        delta in -20.0..20.0f64,
        y in label(),
    ) {
        let h = 1e-6;
        if let LossSpec::Hinge { margin } = spec {
            prop_assume!((y.value() * delta - margin).abs() > 10.0 * h);
        }
        let fd = (spec.value(delta + h, y) - spec.value(delta - h, y)) / (2.0 * h);
        prop_assert!((spec.grad_wrt_delta(delta, y).unwrap() - fd).abs() <= 1e-5);
    }
}

#[test]
fn logistic_does_not_dominate_zero_one_near_the_boundary() {
    // The boundary case: a tie is an error under 0-1 but costs only log 2
    // under the logistic surrogate.
    let at_tie = LossSpec::Logistic.value(0.0, Label::Positive);
    assert!((at_tie - std::f64::consts::LN_2).abs() < 1e-15);
    assert!(at_tie < LossSpec::ZeroOne.value(0.0, Label::Positive));
    let threshold = -(std::f64::consts::E - 1.0).ln();
    assert!((LossSpec::Logistic.value(threshold, Label::Positive) - 1.0).abs() < 1e-12);
}

#[test]
fn zero_one_has_no_gradient() {
    assert!(LossSpec::ZeroOne
        .grad_wrt_delta(1.0, Label::Positive)
        .is_err());
}
