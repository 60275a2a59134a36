use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twocenter::dynamics::separated_energies;
use twocenter::*;

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_f64(x).unwrap()
}

/// Newton iteration on exact rationals, started from the float root.
fn sqrt_q(x: &Q) -> Q {
    let mut y = q(x.to_f64().unwrap().sqrt());
    let two = q(2.0);
    for _ in 0..3 {
        y = (&y + x / &y) / &two;
    }
    y
}

fn exact_integrals(s: &PhaseState, p: &Params) -> [f64; 3] {
    let [x, y, z, px, py, pz] = s.to_array().map(q);
    let (m1, m2, a) = (q(p.mu1), q(p.mu2), q(p.a));
    let half = Q::new(BigInt::from(1), BigInt::from(2));
    let r1 = sqrt_q(&(&x * &x + &y * &y + (&z + &a) * (&z + &a)));
    let r2 = sqrt_q(&(&x * &x + &y * &y + (&z - &a) * (&z - &a)));
    let h = &half * (&px * &px + &py * &py + &pz * &pz) - &m1 / &r1 - &m2 / &r2;
    let lx = &y * &pz - &z * &py;
    let ly = &z * &px - &x * &pz;
    let lz = &x * &py - &y * &px;
    let l2 = &lx * &lx + &ly * &ly + &lz * &lz;
    let g = &h + &half * (l2 - &a * &a * (&px * &px + &py * &py)) + &a * (&z + &a) * &m1 / &r1
        - &a * (&z - &a) * &m2 / &r2;
    [h.to_f64().unwrap(), lz.to_f64().unwrap(), g.to_f64().unwrap()]
}

fn random_state(rng: &mut ChaCha8Rng) -> PhaseState {
    let mut c = || rng.gen_range(-3.0..3.0);
    PhaseState::new([c(), c(), c()], [c(), c(), c()])
}

#[test]
fn integrals_match_exact_rational_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let p = Params::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.3..2.0)).unwrap();
        let s = random_state(&mut rng);
        let Ok(f) = eval_integrals(&s, &p) else { continue };
        let e = exact_integrals(&s, &p);
        for (got, want) in f.as_array().iter().zip(e) {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn separated_momentum_exact_value() {
    // (xi^2 - 1)(2h xi^2 + 2(mu1 + mu2) xi - 2g) - l^2 at xi = 2: 3 * 16 - 1/4.
    let p = Params::unit(2.0, 1.0);
    let f = InvariantPoint::new(1.0, 0.5, 2.0);
    let v = separated_momentum_sq(Coord::Xi, 2.0, &f, p.strengths(), 1.0).unwrap();
    assert_eq!(v, 47.75 / 9.0);
}

#[test]
fn force_is_minus_potential_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let p = Params::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(0.3..2.0)).unwrap();
        let s = random_state(&mut rng);
        let Ok(v) = equations_of_motion(&s, &p) else { continue };
        let (r1, r2) = p.distances(&s.q);
        if r1.min(r2) < 0.1 {
            continue;
        }
        assert_eq!(v.dq, s.p);
        let e = 1e-5;
        for i in 0..3 {
            let mut a = s.q;
            let mut b = s.q;
            a[i] += e;
            b[i] -= e;
            let fd = -(p.potential(&a) - p.potential(&b)) / (2.0 * e);
            assert!((v.dp[i] - fd).abs() < 1e-6 * fd.abs().max(1.0), "{} vs {fd}", v.dp[i]);
        }
    }
}

#[test]
fn separation_identity_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 10_000 {
        let a = rng.gen_range(0.3..2.0);
        let p = Params::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), a).unwrap();
        let s = random_state(&mut rng);
        let (Ok(f), Ok(ps)) = (eval_integrals(&s, &p), cartesian_to_prolate(&s, &p)) else { continue };
        let (hx, he) = separated_energies(&ps, &p);
        let c = f.g - (1.0 - a * a) * f.h;
        let scale = f.g.abs() + f.h.abs() * (ps.xi * ps.xi + 1.0) + hx.abs() + 1.0;
        assert!((c - a * a * (ps.xi * ps.xi * f.h - hx)).abs() < 1e-10 * scale);
        assert!((c - a * a * (ps.eta * ps.eta * f.h + he)).abs() < 1e-10 * scale);
        assert!(((hx + he) / (ps.xi * ps.xi - ps.eta * ps.eta) - f.h).abs() < 1e-10 * scale);
        assert!((ps.p_phi - f.l).abs() < 1e-12 * f.l.abs().max(1.0));
        checked += 1;
    }
}

fn params() -> impl Strategy<Value = Params> {
    (-3.0..3.0f64, -3.0..3.0f64, 0.2..3.0f64).prop_map(|(m1, m2, a)| Params::new(m1, m2, a).unwrap())
}

fn state() -> impl Strategy<Value = PhaseState> {
    (prop::array::uniform3(-4.0..4.0f64), prop::array::uniform3(-3.0..3.0f64))
        .prop_map(|(q, p)| PhaseState::new(q, p))
}

proptest! {
    #[test]
    fn prolate_round_trip(p in params(), s in state()) {
        let ps = cartesian_to_prolate(&s, &p);
        prop_assume!(ps.is_ok());
        let ps = ps.unwrap();
        let rho = s.q.x.hypot(s.q.y);
        prop_assume!(rho > 1e-3 && ps.xi > 1.0 + 1e-6);
        let back = prolate_to_cartesian(&ps, &p).unwrap();
        prop_assert!((back.q - s.q).norm() < 1e-9 * (1.0 + s.q.norm()));
        prop_assert!((back.p - s.p).norm() < 1e-7 * (1.0 + s.p.norm()));
    }

    #[test]
    fn integrals_are_rotation_invariant(p in params(), s in state(), ang in 0.0..6.3f64) {
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Vector3::z_axis(), ang);
        let t = PhaseState { q: rot * s.q, p: rot * s.p };
        if let (Ok(f), Ok(g)) = (eval_integrals(&s, &p), eval_integrals(&t, &p)) {
            let (a, b) = (f.as_array(), g.as_array());
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() < 1e-9 * a[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn mirror_swaps_centers(p in params(), s in state()) {
        // z -> -z with mu1 <-> mu2 preserves H and L_z.
        let m = PhaseState::new([s.q.x, s.q.y, -s.q.z], [s.p.x, s.p.y, -s.p.z]);
        if let (Ok(f), Ok(g)) = (eval_integrals(&s, &p), eval_integrals(&m, &p.mirrored())) {
            prop_assert!((f.h - g.h).abs() < 1e-10 * f.h.abs().max(1.0));
            prop_assert!((f.l - g.l).abs() < 1e-10 * f.l.abs().max(1.0));
        }
    }

    #[test]
    fn time_derivatives_of_integrals_vanish(p in params(), s in state()) {
        let (r1, r2) = p.distances(&s.q);
        prop_assume!(r1.min(r2) > 0.05);
        let v = equations_of_motion(&s, &p).unwrap();
        let e = 1e-6;
        let fwd = PhaseState { q: s.q + v.dq * e, p: s.p + v.dp * e };
        let bwd = PhaseState { q: s.q - v.dq * e, p: s.p - v.dp * e };
        let (a, b) = (eval_integrals(&fwd, &p).unwrap(), eval_integrals(&bwd, &p).unwrap());
        let scale = 1.0 + s.q.norm().powi(2) * s.p.norm().powi(2) + 1.0 / r1.min(r2).powi(2);
        prop_assert!(((a.l - b.l) / (2.0 * e)).abs() < 1e-6 * scale);
        prop_assert!(((a.g - b.g) / (2.0 * e)).abs() < 1e-5 * scale);
        prop_assert!(((a.h - b.h) / (2.0 * e)).abs() < 1e-5 * scale);
    }
}
