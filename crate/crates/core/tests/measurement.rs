use blochsig::bloch::{joint_from_bloch, reduce};
use blochsig::measurement::{conditional_state, outcome_probabilities, projector_from_matrix};
use blochsig::oracle::collapse;
use blochsig::random::stream_rng;
use blochsig::{Bipartite, ProjectiveObservable, Subsystem};
use proptest::prelude::*;

#[test]
fn conditional_states_match_matrix_collapse() {
    for (n1, n2) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let sys = Bipartite::new(n1, n2).unwrap();
        let mut rng = stream_rng(42, (n1 * 10 + n2) as u64);
        for _ in 0..60 {
            let joint = sys.random_state(&mut rng);
            let obs = ProjectiveObservable::random(sys.second(), &mut rng);
            for k in 0..obs.len() {
                let (p, r) = conditional_state(&sys, &joint, &obs, k).unwrap();
                let (po, ro) = collapse(&sys, &joint, &obs, k).unwrap();
                assert!((p - po).abs() <= 1e-12);
                assert!((r.r() - ro.r()).amax() <= 1e-11, "({n1},{n2}) k={k}");
            }
        }
    }
}

#[test]
fn branch_average_recovers_the_local_marginal() {
    for (n1, n2) in [(2, 3), (3, 3)] {
        let sys = Bipartite::new(n1, n2).unwrap();
        let mut rng = stream_rng(7, 0);
        for _ in 0..30 {
            let joint = sys.random_state(&mut rng);
            let obs = ProjectiveObservable::random(sys.second(), &mut rng);
            let mut avg = nalgebra::DVector::zeros(sys.coords().0);
            for k in 0..obs.len() {
                let (p, r) = conditional_state(&sys, &joint, &obs, k).unwrap();
                avg += r.r() * p;
            }
            assert!((avg - &joint.r1).amax() <= 1e-12);
        }
    }
}

#[test]
fn probabilities_sum_to_one_and_match_born_rule() {
    let sys = Bipartite::new(3, 2).unwrap();
    let mut rng = stream_rng(3, 0);
    let joint = sys.random_state(&mut rng);
    let rho = joint_from_bloch(&joint, &sys).unwrap();
    let obs = ProjectiveObservable::random(sys.second(), &mut rng);
    let probs = outcome_probabilities(&obs, &reduce(&joint, Subsystem::Second)).unwrap();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    for (k, m) in obs.matrices(sys.second()).iter().enumerate() {
        let full = blochsig::linalg::kron(&sys.first().identity(), m);
        let born = (rho.matrix() * full).trace().re;
        assert!((born - probs[k]).abs() <= 1e-12);
    }
}

#[test]
fn coarse_grained_measurement_is_accepted() {
    // two outcomes on a qutrit: |0⟩⟨0| and its rank-two complement
    let sys = Bipartite::new(2, 3).unwrap();
    let q = sys.second();
    let mats = ProjectiveObservable::computational(q).matrices(q);
    let coarse = vec![mats[0].clone(), &mats[1] + &mats[2]];
    let obs = ProjectiveObservable::from_projector_matrices(&coarse, q).unwrap();
    assert_eq!(obs.outcomes()[1].rank(), 2);
    let joint = sys.random_state(&mut stream_rng(9, 0));
    for k in 0..2 {
        let (_, r) = conditional_state(&sys, &joint, &obs, k).unwrap();
        let (_, ro) = collapse(&sys, &joint, &obs, k).unwrap();
        assert!((r.r() - ro.r()).amax() <= 1e-11);
    }
}

#[test]
fn invalid_projector_sets_are_rejected() {
    let q = blochsig::Qudit::new(2).unwrap();
    let mats = ProjectiveObservable::computational(&q).matrices(&q);
    assert!(ProjectiveObservable::from_projector_matrices(&mats[..1], &q).is_err());
    let doubled = vec![mats[0].clone(), mats[0].clone()];
    assert!(ProjectiveObservable::from_projector_matrices(&doubled, &q).is_err());
    assert!(projector_from_matrix(&(&mats[0] * blochsig::linalg::c(0.5)), &q).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn singlet_outcomes_are_uniform_for_any_basis(seed in any::<u64>()) {
        let sys = Bipartite::new(2, 2).unwrap();
        let obs = ProjectiveObservable::random(sys.second(), &mut stream_rng(seed, 0));
        let singlet = sys.singlet().unwrap();
        for k in 0..2 {
            let (p, r) = conditional_state(&sys, &singlet, &obs, k).unwrap();
            prop_assert!((p - 0.5).abs() <= 1e-12);
            // the partner collapses onto the antipodal pure state
            let u = &obs.outcomes()[k].u;
            prop_assert!((r.r() + u * 2.0).amax() <= 1e-11);
        }
    }
}
