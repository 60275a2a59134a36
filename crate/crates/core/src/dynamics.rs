//! Problem definition: parameters, phase-space states, the integral map
//! F = (H, L_z, G), prolate ellipsoidal coordinates and the separated
//! momentum functions.
//!
//! Centers sit at `o1 = (0, 0, -a)` and `o2 = (0, 0, a)`. The potential is
//! `V(q) = -mu1/r1 - mu2/r2`, so positive strengths attract.

use crate::error::{Error, Result};
use crate::poly::Poly;
use nalgebra::Vector3;
use std::f64::consts::TAU;

/// Collision threshold in units of `a`.
pub const COLLISION_EPS: f64 = 1e-6;

/// Center strengths and half-separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub mu1: f64,
    pub mu2: f64,
    pub a: f64,
}

impl Params {
    pub fn new(mu1: f64, mu2: f64, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParams(format!("a must be positive, got {a}")));
        }
        if !mu1.is_finite() || !mu2.is_finite() {
            return Err(Error::InvalidParams("strengths must be finite".into()));
        }
        Ok(Self { mu1, mu2, a })
    }

    /// Unit half-separation.
    pub fn unit(mu1: f64, mu2: f64) -> Self {
        Self { mu1, mu2, a: 1.0 }
    }

    pub fn o1(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -self.a)
    }

    pub fn o2(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, self.a)
    }

    /// Distances `(r1, r2)` to the two centers.
    pub fn distances(&self, q: &Vector3<f64>) -> (f64, f64) {
        ((q - self.o1()).norm(), (q - self.o2()).norm())
    }

    /// Strengths entering the separated xi- and eta-equations.
    pub fn strengths(&self) -> Strengths {
        Strengths { xi: self.mu1 + self.mu2, eta: self.mu1 - self.mu2 }
    }

    /// The problem reflected by `z -> -z`, which swaps the centers.
    pub fn mirrored(&self) -> Self {
        Self { mu1: self.mu2, mu2: self.mu1, a: self.a }
    }

    pub fn collision_radius(&self) -> f64 {
        COLLISION_EPS * self.a
    }

    pub fn potential(&self, q: &Vector3<f64>) -> f64 {
        let (r1, r2) = self.distances(q);
        -self.mu1 / r1 - self.mu2 / r2
    }
}

/// Strengths `(s_xi, s_eta)`; for the two-center problem `(mu1 + mu2, mu1 - mu2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strengths {
    pub xi: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: Vector3<f64>,
    pub p: Vector3<f64>,
}

impl PhaseState {
    pub fn new(q: [f64; 3], p: [f64; 3]) -> Self {
        Self { q: Vector3::from(q), p: Vector3::from(p) }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.q.x, self.q.y, self.q.z, self.p.x, self.p.y, self.p.z]
    }

    pub fn from_array(y: &[f64; 6]) -> Self {
        Self::new([y[0], y[1], y[2]], [y[3], y[4], y[5]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlateState {
    pub xi: f64,
    pub eta: f64,
    pub phi: f64,
    pub p_xi: f64,
    pub p_eta: f64,
    pub p_phi: f64,
}

/// A value `(h, l, g)` of the integral map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantPoint {
    pub h: f64,
    pub l: f64,
    pub g: f64,
}

impl InvariantPoint {
    pub fn new(h: f64, l: f64, g: f64) -> Self {
        Self { h, l, g }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.h, self.l, self.g]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    Xi,
    Eta,
}

impl Coord {
    pub fn name(self) -> &'static str {
        match self {
            Coord::Xi => "xi",
            Coord::Eta => "eta",
        }
    }
}

fn check_collision(s: &PhaseState, p: &Params, eps: f64) -> Result<(f64, f64)> {
    let (r1, r2) = p.distances(&s.q);
    let d = r1.min(r2);
    if d < eps {
        return Err(Error::Collision { dist: d, eps });
    }
    Ok((r1, r2))
}

/// `(H, L_z, G)` at `s`, rejecting states closer than `1e-6 a` to a center.
pub fn eval_integrals(s: &PhaseState, p: &Params) -> Result<InvariantPoint> {
    eval_integrals_eps(s, p, p.collision_radius())
}

pub fn eval_integrals_eps(s: &PhaseState, p: &Params, eps: f64) -> Result<InvariantPoint> {
    let (r1, r2) = check_collision(s, p, eps)?;
    Ok(integrals_unchecked(s, p, r1, r2))
}

fn integrals_unchecked(s: &PhaseState, p: &Params, r1: f64, r2: f64) -> InvariantPoint {
    let (q, m) = (&s.q, &s.p);
    let a = p.a;
    let h = 0.5 * m.norm_squared() - p.mu1 / r1 - p.mu2 / r2;
    let l = q.x * m.y - q.y * m.x;
    let ang2 = q.cross(m).norm_squared();
    let g = h + 0.5 * (ang2 - a * a * (m.x * m.x + m.y * m.y)) + a * (q.z + a) * p.mu1 / r1
        - a * (q.z - a) * p.mu2 / r2;
    InvariantPoint { h, l, g }
}

/// Prolate coordinates with canonically conjugate momenta.
pub fn cartesian_to_prolate(s: &PhaseState, p: &Params) -> Result<ProlateState> {
    let a = p.a;
    let (r1, r2) = p.distances(&s.q);
    let xi = ((r1 + r2) / (2.0 * a)).max(1.0);
    let eta = ((r1 - r2) / (2.0 * a)).clamp(-1.0, 1.0);
    let rho = s.q.x.hypot(s.q.y);
    if rho == 0.0 {
        return Err(Error::AxisDegeneracy);
    }
    let phi = s.q.y.atan2(s.q.x).rem_euclid(TAU);
    let p_rho = (s.q.x * s.p.x + s.q.y * s.p.y) / rho;
    let a2 = a * a;
    let drho_dxi = a2 * xi * (1.0 - eta * eta) / rho;
    let drho_deta = -a2 * eta * (xi * xi - 1.0) / rho;
    Ok(ProlateState {
        xi,
        eta,
        phi,
        p_xi: p_rho * drho_dxi + s.p.z * a * eta,
        p_eta: p_rho * drho_deta + s.p.z * a * xi,
        p_phi: s.q.x * s.p.y - s.q.y * s.p.x,
    })
}

/// Inverse of [`cartesian_to_prolate`].
pub fn prolate_to_cartesian(ps: &ProlateState, p: &Params) -> Result<PhaseState> {
    let a = p.a;
    let (xi, eta) = (ps.xi, ps.eta);
    if xi < 1.0 {
        return Err(Error::OutOfRange { coord: "xi", value: xi });
    }
    if eta.abs() > 1.0 {
        return Err(Error::OutOfRange { coord: "eta", value: eta });
    }
    let rho = a * ((xi * xi - 1.0) * (1.0 - eta * eta)).sqrt();
    if rho == 0.0 {
        return Err(Error::AxisDegeneracy);
    }
    let a2 = a * a;
    let drho_dxi = a2 * xi * (1.0 - eta * eta) / rho;
    let drho_deta = -a2 * eta * (xi * xi - 1.0) / rho;
    let (dz_dxi, dz_deta) = (a * eta, a * xi);
    let det = drho_dxi * dz_deta - dz_dxi * drho_deta;
    let p_rho = (ps.p_xi * dz_deta - dz_dxi * ps.p_eta) / det;
    let p_z = (drho_dxi * ps.p_eta - drho_deta * ps.p_xi) / det;
    let (sn, cs) = ps.phi.sin_cos();
    let p_t = ps.p_phi / rho;
    Ok(PhaseState {
        q: Vector3::new(rho * cs, rho * sn, a * xi * eta),
        p: Vector3::new(p_rho * cs - p_t * sn, p_rho * sn + p_t * cs, p_z),
    })
}

/// The separated energies `(H_xi, H_eta)` with `H = (H_xi + H_eta)/(xi^2 - eta^2)`.
pub fn separated_energies(ps: &ProlateState, p: &Params) -> (f64, f64) {
    let a = p.a;
    let s = p.strengths();
    let two_a2 = 2.0 * a * a;
    let l2 = ps.p_phi * ps.p_phi;
    let u = ps.xi * ps.xi - 1.0;
    let w = 1.0 - ps.eta * ps.eta;
    let h_xi = u * ps.p_xi * ps.p_xi / two_a2 + l2 / (two_a2 * u) - s.xi * ps.xi / a;
    let h_eta = w * ps.p_eta * ps.p_eta / two_a2 + l2 / (two_a2 * w) + s.eta * ps.eta / a;
    (h_xi, h_eta)
}

/// Numerator `N(x)` of the separated momentum, `p^2 = N(x)/(x^2 - 1)^2`.
///
/// `N(x) = (x^2 - 1)(2 a^2 h x^2 + 2 a s x - 2 c) - l^2` with
/// `c = g - (1 - a^2) h`. The same polynomial serves both coordinates; only
/// the strength and the admissible range differ.
pub fn momentum_numerator(f: &InvariantPoint, s: f64, a: f64) -> Poly {
    let c = f.g - (1.0 - a * a) * f.h;
    let big_a = 2.0 * a * a * f.h;
    let big_b = 2.0 * a * s;
    let big_c = 2.0 * c;
    Poly::new(vec![big_c - f.l * f.l, -big_b, -(big_a + big_c), big_b, big_a])
}

/// Squared conjugate momentum of `coord` at value `v`. Negative values mark
/// classically forbidden positions.
pub fn separated_momentum_sq(
    coord: Coord,
    v: f64,
    f: &InvariantPoint,
    s: Strengths,
    a: f64,
) -> Result<f64> {
    let (strength, inside) = match coord {
        Coord::Xi => (s.xi, v >= 1.0),
        Coord::Eta => (s.eta, v.abs() <= 1.0),
    };
    if !inside || !v.is_finite() {
        return Err(Error::OutOfRange { coord: coord.name(), value: v });
    }
    let d = v * v - 1.0;
    if d == 0.0 {
        return Err(Error::Pole { coord: coord.name(), value: v });
    }
    Ok(momentum_numerator(f, strength, a).eval(v) / (d * d))
}

/// Phase velocity `(dq/dt, dp/dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseVelocity {
    pub dq: Vector3<f64>,
    pub dp: Vector3<f64>,
}

pub fn equations_of_motion(s: &PhaseState, p: &Params) -> Result<PhaseVelocity> {
    check_collision(s, p, p.collision_radius())?;
    Ok(PhaseVelocity { dq: s.p, dp: force(&s.q, p) })
}

/// `-grad V` without collision checks.
pub(crate) fn force(q: &Vector3<f64>, p: &Params) -> Vector3<f64> {
    let d1 = q - p.o1();
    let d2 = q - p.o2();
    let r1 = d1.norm();
    let r2 = d2.norm();
    -d1 * (p.mu1 / (r1 * r1 * r1)) - d2 * (p.mu2 / (r2 * r2 * r2))
}
