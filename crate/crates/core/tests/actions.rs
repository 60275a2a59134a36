mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use twocenter::actions::*;
use twocenter::{InvariantPoint, Params};

#[test]
fn eta_action_matches_midpoint_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for p in [Params::unit(2.0, 1.0), Params::new(-1.0, 0.5, 0.7).unwrap()] {
        for _ in 0..8 {
            let f = random_scattering_point(&mut rng, &p, ReferenceChoice::KeplerAtO2);
            let v = action_i_eta(&f, &p).unwrap();
            let o = oracle_i_eta(&f, &p, 200_000).unwrap();
            assert!((v.value - o).abs() < 1e-8, "{f:?}: {} vs {o}", v.value);
        }
    }
}

#[test]
fn xi_mod_action_matches_midpoint_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let p = Params::unit(2.0, 1.0);
    for rf in [ReferenceChoice::KeplerAtO1, ReferenceChoice::KeplerAtO2] {
        for _ in 0..5 {
            let f = random_scattering_point(&mut rng, &p, rf);
            let r = default_cutoff(&f, &p, rf).unwrap();
            let v = action_i_xi_mod(&f, &p, rf, r).unwrap();
            let o = oracle_i_xi_mod(&f, &p, rf, r, 400_000).unwrap();
            assert!((v.value - o).abs() < 1e-7, "{f:?}: {} vs {o}", v.value);
        }
    }
}

#[test]
fn turning_points_match_bisection() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = Params::unit(2.0, 1.0);
    for _ in 0..20 {
        let f = random_scattering_point(&mut rng, &p, ReferenceChoice::KeplerAtO2);
        let iv = eta_interval(&f, p.strengths(), 1.0).unwrap();
        let (lo, hi) = oracle_eta_interval(&f, &p).unwrap();
        assert!((iv.lo - lo).abs() < 1e-10 && (iv.hi - hi).abs() < 1e-10);
        let x = xi_min(&f, p.strengths(), 1.0).unwrap();
        assert!((x - oracle_xi_min(&f, 3.0, 1.0).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn self_reference_xi_action_vanishes_for_any_cutoff() {
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.4, 4.0);
    for r in [20.0, 40.0, 333.0] {
        assert_eq!(action_i_xi_mod(&f, &p, ReferenceChoice::SelfReference, r).unwrap().value, 0.0);
    }
}

#[test]
fn l_derivative_of_xi_mod_action_ignores_cutoff() {
    let p = Params::unit(2.0, 1.0);
    let (h, g, l, e) = (1.0, 3.5, 0.3, 1e-4);
    for rf in [ReferenceChoice::KeplerAtO1, ReferenceChoice::KeplerAtO2] {
        let d = |r: f64| {
            let a = action_i_xi_mod(&InvariantPoint::new(h, l + e, g), &p, rf, r).unwrap().value;
            let b = action_i_xi_mod(&InvariantPoint::new(h, l - e, g), &p, rf, r).unwrap().value;
            (a - b) / (2.0 * e)
        };
        let (d1, d2) = (d(40.0), d(80.0));
        assert!((d1 - d2).abs() < 1e-6, "{d1} vs {d2}");
    }
}

#[test]
fn cutoff_below_turning_point_rejected() {
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.4, 4.0);
    let err = action_i_xi_mod(&f, &p, ReferenceChoice::KeplerAtO2, 1.01).unwrap_err();
    assert!(matches!(err, twocenter::Error::Cutoff { .. }));
}

#[test]
fn eta_l_limits() {
    // mu = (2, 1), h = 1: ranges of g - h split at -1, 1, 3.
    let p = Params::unit(2.0, 1.0);
    let lim = |gh: f64| dl_limit(ActionKind::Eta, 1.0, 1.0 + gh, &p, ReferenceChoice::KeplerAtO2, DL_EPS).unwrap().value;
    assert!(lim(-1.1).abs() < 1e-2);
    assert!((lim(0.0) + 0.5).abs() < 1e-2);
    assert!((lim(2.0) + 1.0).abs() < 1e-2);
    assert!((lim(4.0) + 1.0).abs() < 1e-2);
}
