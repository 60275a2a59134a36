use nalgebra::Vector3;
use proptest::prelude::*;
use twocenter::actions::ReferenceChoice;
use twocenter::kepler::{kepler_solve, KeplerOrbit};
use twocenter::knauf::{knauf_degree_planar, KnaufOptions, Potential, RadialTable};
use twocenter::scattering::*;
use twocenter::*;

#[test]
fn kepler_matches_integrated_single_center() {
    // mu2 = 0 leaves a single center of strength mu1 at o1.
    let p = Params::unit(1.3, 0.0);
    let s0 = PhaseState::new([4.0, 1.0, 2.0], [-1.2, 0.1, -0.4]);
    let orbit = KeplerOrbit::new(1.3, p.o1(), s0).unwrap();
    let tr = integrate(&s0, &p, &StopConditions { r_max: 200.0, ..Default::default() }).unwrap();
    assert_eq!(tr.termination, Termination::RadiusReached);
    for (t, s) in tr.samples.iter().step_by(7) {
        let k = kepler_solve(&orbit, *t).unwrap();
        assert!((k.q - s.q).norm() < 1e-6 * s.q.norm().max(1.0), "t = {t}");
        assert!((k.p - s.p).norm() < 1e-6);
    }
}

#[test]
fn free_flow_asymptotes_are_exact() {
    let p = Params::unit(0.0, 0.0);
    let s0 = PhaseState::new([0.3, -0.2, 0.5], [0.6, 0.8, -0.3]);
    let sc = scatter(&s0, &p, &StopConditions { r_max: 4000.0, ..Default::default() }).unwrap();
    let p0 = s0.p;
    let h2 = p0.norm_squared();
    let q_perp = s0.q - p0 * (s0.q.dot(&p0) / h2);
    for a in [sc.incoming, sc.outgoing] {
        assert!((a.p_hat - p0).norm() < 1e-12);
        assert!((a.q_perp - q_perp).norm() < 1e-9);
    }
}

#[test]
fn pure_kepler_extraction_matches_conic() {
    let p = Params::unit(1.5, 0.0);
    let s0 = PhaseState::new([1.0, 0.5, 0.2], [0.3, 1.4, 0.6]);
    let sc = scatter(&s0, &p, &StopConditions { r_max: 4000.0, ..Default::default() }).unwrap();
    let orbit = KeplerOrbit::new(1.5, p.o1(), s0).unwrap();
    for (a, out) in [(sc.outgoing, true), (sc.incoming, false)] {
        let c = orbit.asymptote(out);
        assert!((a.p_hat - c.p_hat).norm() < 1e-6, "{out}");
        assert!((a.q_perp - c.q_perp).norm() < 1e-6, "{out}");
    }
}

#[test]
fn symmetric_tail_impact_relation() {
    let p = Params::unit(1.0, 1.0);
    let s0 = PhaseState::new([0.3, 0.8, 0.1], [1.9, -1.4, 2.1]);
    let sc = scatter(&s0, &p, &StopConditions { r_max: 4000.0, ..Default::default() }).unwrap();
    let last = sc.trajectory.last();
    let l = last.q.cross(&last.p).norm();
    let a = sc.outgoing;
    assert!((a.q_perp.norm() * a.p_hat.norm() - l).abs() < 1e-6);
}

#[test]
fn asymptotes_conserve_integrals_for_mixed_strengths() {
    // Both ends of a two-center orbit lie on the same fiber.
    for (m1, m2) in [(2.0, 1.0), (2.0, -1.0), (-1.0, -0.5)] {
        let p = Params::unit(m1, m2);
        let s0 = PhaseState::new([0.4, 0.9, 0.3], [1.7, -1.1, 2.0]);
        let f = eval_integrals(&s0, &p).unwrap();
        let sc = scatter(&s0, &p, &StopConditions { r_max: 4000.0, ..Default::default() }).unwrap();
        for a in [sc.incoming, sc.outgoing] {
            let fa = asymptotic_integrals(&a, &p);
            assert!((fa.h - f.h).abs() < 1e-6 && (fa.l - f.l).abs() < 1e-5 && (fa.g - f.g).abs() < 1e-4, "{fa:?} {f:?}");
        }
    }
}

#[test]
fn trapped_orbit_is_reported() {
    let p = Params::unit(2.0, 1.0);
    let s0 = PhaseState::new([2.0, 0.0, 0.0], [0.0, 0.5, 0.1]);
    let err = scatter(&s0, &p, &StopConditions { t_max: 50.0, ..Default::default() }).unwrap_err();
    assert!(matches!(err, Error::Trapped(_) | Error::Collision { .. }));
}

#[test]
fn free_reference_rejected_but_deflection_finite() {
    let p = Params::unit(1.0, 1.0);
    let free = Candidate::free();
    let r = reference_property_check(&free, &p, &default_samples(1.0), &PROPERTY_RADII).unwrap();
    assert!(!r.passes(1e-3));
    let f = InvariantPoint::new(1.0, 0.5, 3.5);
    // With mu1 = mu2 the o1 reference has zero strength, that is free flow.
    let d = deflection_difference(&f, &p, ReferenceChoice::KeplerAtO1, &DEFLECTION_RADII).unwrap();
    assert!(d.total.is_finite() && d.error < 1e-3);
}

#[test]
fn deflection_needs_nonzero_l() {
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.0, 3.5);
    assert!(deflection_difference(&f, &p, ReferenceChoice::KeplerAtO2, &DEFLECTION_RADII).is_err());
}

#[test]
fn deflection_independent_of_radii_within_error() {
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.4, 4.2);
    let a = deflection_difference(&f, &p, ReferenceChoice::KeplerAtO2, &DEFLECTION_RADII).unwrap();
    let b = deflection_difference(&f, &p, ReferenceChoice::KeplerAtO2, &[300.0, 700.0, 1500.0, 3000.0]).unwrap();
    let tol = 3.0 * (a.error + b.error);
    assert!((a.total - b.total).abs() < tol && (a.xi_channel - b.xi_channel).abs() < tol);
}

#[test]
fn separated_pass_matches_cartesian_flow() {
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.4, 4.2);
    let (r, eta0) = (30.0, 0.1);
    let pass = separated_pass(&f, 3.0, 1.0, 1.0, r, eta0).unwrap();
    let pxi2 = twocenter::dynamics::momentum_numerator(&f, 3.0, 1.0).eval(r);
    let peta2 = twocenter::dynamics::momentum_numerator(&f, 1.0, 1.0).eval(eta0);
    let start = ProlateState {
        xi: r,
        eta: eta0,
        phi: 0.0,
        p_xi: -pxi2.sqrt() / (r * r - 1.0),
        p_eta: peta2.sqrt() / (1.0 - eta0 * eta0),
        p_phi: f.l,
    };
    let s0 = prolate_to_cartesian(&start, &p).unwrap();
    let tr = integrate(&s0, &p, &StopConditions { t_max: pass.time, r_max: 1e9, tol: 1e-12 }).unwrap();
    let end = cartesian_to_prolate(tr.last(), &p).unwrap();
    assert!((end.xi - r).abs() < 1e-6, "{}", end.xi);
    let phi = pass.total.rem_euclid(std::f64::consts::TAU);
    let d = (end.phi - phi).abs();
    assert!(d.min(std::f64::consts::TAU - d) < 1e-6);
}

#[test]
fn knauf_degree_direction_independent() {
    let pot = Potential::GaussianBump { v0: 1.0, sigma: 1.0 };
    for h in [0.5, 1.5] {
        let degs: Vec<i64> = [0.0, 1.3, 2.9, 4.4]
            .iter()
            .map(|&d| knauf_degree_planar(&pot, h, &KnaufOptions { samples: 512, direction: d, ..Default::default() }).unwrap().degree)
            .collect();
        assert!(degs.windows(2).all(|w| w[0] == w[1]), "{degs:?}");
    }
}

#[test]
fn knauf_degree_of_tabulated_bump() {
    let r: Vec<f64> = (0..=90).map(|i| i as f64 * 0.1).collect();
    let v: Vec<f64> = r.iter().map(|x| (-x * x / 2.0).exp()).collect();
    let t = RadialTable::new(r, v).unwrap();
    let pot = Potential::Tabulated(t);
    let opts = KnaufOptions { samples: 512, ..Default::default() };
    assert_eq!(knauf_degree_planar(&pot, 0.5, &opts).unwrap().degree, 1);
    assert_eq!(knauf_degree_planar(&pot, 1.5, &opts).unwrap().degree, 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reference_check_stable_under_radius_growth(
        m1 in -2.0..2.0f64, m2 in -2.0..2.0f64, h in 0.3..2.0f64, r in 1e3..1e5f64,
    ) {
        let p = Params::unit(m1, m2);
        let cand = Candidate::reference(ReferenceChoice::KeplerAtO2, &p).unwrap();
        let rep = reference_property_check(&cand, &p, &default_samples(h), &[r, 4.0 * r]).unwrap();
        let tau = 1e-2;
        prop_assume!(rep.by_radius[0].1.iter().all(|&m| m < tau));
        prop_assert!(rep.by_radius[1].1.iter().all(|&m| m < tau));
    }

    #[test]
    fn extracted_asymptotes_satisfy_invariants(
        m1 in -2.0..2.0f64, m2 in -2.0..2.0f64,
        q in prop::array::uniform3(-2.0..2.0f64), dir in prop::array::uniform3(-1.0..1.0f64), e in 0.5..3.0f64,
    ) {
        let p = Params::unit(m1, m2);
        let q = Vector3::from(q);
        let (r1, r2) = p.distances(&q);
        prop_assume!(r1.min(r2) > 0.2);
        let d = Vector3::from(dir);
        prop_assume!(d.norm() > 0.1);
        let k = (2.0 * (e - p.potential(&q))).sqrt();
        prop_assume!(k.is_finite());
        let s0 = PhaseState { q, p: d.normalize() * k };
        if let Ok(sc) = scatter(&s0, &p, &StopConditions { r_max: 4000.0, ..Default::default() }) {
            for a in [sc.incoming, sc.outgoing] {
                prop_assert!(a.p_hat.dot(&a.q_perp).abs() < 1e-9 * (1.0 + a.q_perp.norm()));
                prop_assert!((a.p_hat.norm_squared() - 2.0 * e).abs() < 1e-6 * e.max(1.0));
                prop_assert!(a.error < 1e-3);
            }
        }
    }
}
