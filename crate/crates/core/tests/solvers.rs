use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reprmetric::lab::random_pd;
use reprmetric::mahalanobis::EIG_FLOOR;
use reprmetric::preference::fit_preference;
use reprmetric::synthetic::{
    planted_preference, planted_triplets, random_items, symmetrize_pairs, symmetrize_triplets,
};
use reprmetric::triplet::{fit_triplet, TripletProblem};
use reprmetric::{
    FitTrace, GramBasis, Init, KernelSpec, Label, LossSpec, MahalanobisForm, SolverConfig,
    TripletSample,
};

fn basis(seed: u64, m: usize) -> GramBasis {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_items(&mut rng, KernelSpec::Rbf { gamma: 0.5 }, m, 2).unwrap()
}

fn learning_config(seed: u64) -> SolverConfig {
    SolverConfig {
        max_iters: 2000,
        step_size: 0.1,
        seed,
        ..SolverConfig::default()
    }
}

fn assert_monotone(trace: &FitTrace) {
    assert_eq!(trace.objective.len(), trace.iterations + 1);
    for w in trace.objective.windows(2) {
        assert!(
            w[1] <= w[0] + 1e-12,
            "objective rose from {} to {}",
            w[0],
            w[1]
        );
    }
}

#[test]
fn preference_descent_is_monotone_for_both_surrogates() {
    for seed in 0..4 {
        let b = basis(seed, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        let data = planted_preference(&mut rng, &b, 80, 0.0).unwrap().samples;
        for loss in [LossSpec::default(), LossSpec::Logistic] {
            let cfg = SolverConfig {
                max_iters: 300,
                ..SolverConfig::default()
            };
            let fit = fit_preference(b.clone(), &data, loss, 0.1, &cfg).unwrap();
            assert_monotone(&fit.trace);
            assert!(fit.trace.last() < fit.trace.objective[0]);
        }
    }
}

#[test]
fn triplet_descent_is_monotone_for_both_surrogates() {
    for seed in 0..4 {
        let b = basis(seed, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 200);
        let data = planted_triplets(&mut rng, &b, 80, 0.0).unwrap().samples;
        for loss in [LossSpec::default(), LossSpec::Logistic] {
            let cfg = SolverConfig {
                max_iters: 300,
                init: Init::Random { scale: 0.3 },
                ..SolverConfig::default()
            };
            let fit = fit_triplet(b.clone(), &data, loss, 0.01, &cfg).unwrap();
            assert_monotone(&fit.trace);
        }
    }
}

/// The solver is deterministic, so a fit capped at `k` iterations is the
/// `k`-th iterate of the uncapped run; checking each cap inspects every
/// iterate.
#[test]
fn every_iterate_stays_in_the_cone() {
    let b = basis(5, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let pairs = planted_preference(&mut rng, &b, 40, 0.0).unwrap().samples;
    let triplets = planted_triplets(&mut rng, &b, 40, 0.0).unwrap().samples;
    for k in 1..=25 {
        let cfg = SolverConfig {
            max_iters: k,
            step_size: 0.5,
            init: Init::Random { scale: 1.0 },
            ..SolverConfig::default()
        };
        let p = fit_preference(b.clone(), &pairs, LossSpec::Logistic, 0.01, &cfg).unwrap();
        assert!(p.model.form().min_eigenvalue().unwrap() >= EIG_FLOOR - 1e-12);
        let t = fit_triplet(b.clone(), &triplets, LossSpec::Logistic, 0.0, &cfg).unwrap();
        assert!(t.model.form().min_eigenvalue().unwrap() >= EIG_FLOOR - 1e-12);
    }
}

#[test]
fn fits_are_reproducible() {
    let b = basis(9, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pairs = planted_preference(&mut rng, &b, 50, 0.0).unwrap().samples;
    let cfg = SolverConfig {
        max_iters: 100,
        init: Init::Random { scale: 0.5 },
        seed: 17,
        ..SolverConfig::default()
    };
    let a = fit_preference(b.clone(), &pairs, LossSpec::default(), 0.1, &cfg).unwrap();
    let c = fit_preference(b, &pairs, LossSpec::default(), 0.1, &cfg).unwrap();
    assert_eq!(a.trace, c.trace);
    assert_eq!(a.model.form(), c.model.form());
    assert_eq!(a.model.ideal(), c.model.ideal());
}

#[test]
fn planted_preferences_are_learned_exactly() {
    for seed in 0..3 {
        let b = basis(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let data = planted_preference(&mut rng, &b, 200, 0.0).unwrap().samples;
        let fit =
            fit_preference(b, &data, LossSpec::Logistic, 1e-3, &learning_config(seed)).unwrap();
        assert_eq!(fit.model.zero_one_error(&data).unwrap(), 0.0, "seed {seed}");
    }
}

#[test]
fn planted_triplets_are_learned_exactly() {
    for seed in 0..3 {
        let b = basis(seed, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let data = planted_triplets(&mut rng, &b, 200, 0.0).unwrap().samples;
        let fit = fit_triplet(b, &data, LossSpec::Logistic, 1e-3, &learning_config(seed)).unwrap();
        assert_eq!(fit.model.zero_one_error(&data).unwrap(), 0.0, "seed {seed}");
    }
}

#[test]
fn symmetrized_preferences_give_half_error() {
    let b = basis(4, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let data = symmetrize_pairs(&planted_preference(&mut rng, &b, 100, 0.0).unwrap().samples);
    let cfg = SolverConfig {
        init: Init::Random { scale: 0.5 },
        ..learning_config(4)
    };
    let fit = fit_preference(b, &data, LossSpec::Logistic, 1e-3, &cfg).unwrap();
    assert_eq!(fit.model.zero_one_error(&data).unwrap(), 0.5);
}

#[test]
fn symmetrized_triplets_give_half_error() {
    let b = basis(4, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let data = symmetrize_triplets(&planted_triplets(&mut rng, &b, 100, 0.0).unwrap().samples);
    let cfg = SolverConfig {
        init: Init::Random { scale: 0.5 },
        ..learning_config(4)
    };
    let fit = fit_triplet(b, &data, LossSpec::Logistic, 1e-3, &cfg).unwrap();
    assert_eq!(fit.model.zero_one_error(&data).unwrap(), 0.5);
}

#[test]
fn triplet_objective_is_midpoint_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = basis(8, 6);
    let data = planted_triplets(&mut rng, &b, 60, 0.0).unwrap().samples;
    for loss in [LossSpec::default(), LossSpec::Logistic] {
        let problem = TripletProblem::new(b.coords(), &data, loss, 0.05).unwrap();
        for _ in 0..100 {
            let a1 = random_pd(&mut rng, 6);
            let a2 = random_pd(&mut rng, 6);
            let mid = MahalanobisForm::new((a1.matrix() + a2.matrix()) * 0.5).unwrap();
            let f_mid = problem.objective(&mid).unwrap();
            let f_avg = 0.5 * (problem.objective(&a1).unwrap() + problem.objective(&a2).unwrap());
            assert!(f_mid <= f_avg + 1e-10, "{f_mid} > {f_avg}");
        }
    }
}

#[test]
fn scaling_the_form_scales_triplet_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let b = basis(12, 5);
    let data = planted_triplets(&mut rng, &b, 40, 0.0).unwrap().samples;
    let problem = TripletProblem::new(b.coords(), &data, LossSpec::ZeroOne, 0.0).unwrap();
    let form = random_pd(&mut rng, 5);
    let base = problem.deltas(&form).unwrap();
    // Powers of two keep the scaling exact in floating point.
    for c in [0.25, 2.0, 1024.0] {
        let scaled = problem.deltas(&form.scaled(c).unwrap()).unwrap();
        for (d, s) in base.iter().zip(&scaled) {
            assert_eq!(*s, c * d);
        }
        assert_eq!(
            problem.zero_one_error(&form.scaled(c).unwrap()).unwrap(),
            problem.zero_one_error(&form).unwrap()
        );
    }
    let c = 3.7;
    for (d, s) in base
        .iter()
        .zip(problem.deltas(&form.scaled(c).unwrap()).unwrap())
    {
        assert!((s - c * d).abs() <= 1e-12 * (1.0 + (c * d).abs()));
    }
}

#[test]
fn contradictory_duplicate_triplets_give_half_error() {
    let b = basis(3, 4);
    let t = TripletSample::new(0, 1, 2, Label::Positive).unwrap();
    let data = vec![t, t.flipped(), t, t.flipped()];
    let cfg = SolverConfig {
        max_iters: 200,
        init: Init::Random { scale: 0.5 },
        ..SolverConfig::default()
    };
    let fit = fit_triplet(b, &data, LossSpec::default(), 0.0, &cfg).unwrap();
    assert_eq!(fit.model.zero_one_error(&data).unwrap(), 0.5);
}

#[test]
fn empty_data_and_zero_one_training_are_rejected() {
    let b = basis(1, 4);
    let cfg = SolverConfig::default();
    assert!(fit_preference(b.clone(), &[], LossSpec::default(), 0.1, &cfg).is_err());
    assert!(fit_triplet(b.clone(), &[], LossSpec::default(), 0.0, &cfg).is_err());
    let t = [TripletSample::new(0, 1, 2, Label::Positive).unwrap()];
    assert!(fit_triplet(b, &t, LossSpec::ZeroOne, 0.0, &cfg).is_err());
}
