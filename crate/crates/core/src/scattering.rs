//! Asymptotic states, the scattering map, the reference-Hamiltonian check
//! and deflection-angle differences.

use crate::actions::{eta_interval, ReferenceChoice};
use crate::dynamics::{eval_integrals_eps, momentum_numerator, InvariantPoint, Params, PhaseState};
use crate::error::{Error, Result};
use crate::kepler::{time_at_radius, kepler_solve, KeplerOrbit};
use crate::monodromy::LoopPath;
use crate::ode::{self, Finish, OdeOptions, OdeSystem};
use crate::trajectory::{self, StopConditions, Termination, Trajectory};
use nalgebra::Vector3;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `t -> -inf`
    Past,
    /// `t -> +inf`
    Future,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Past => "-inf",
            Side::Future => "+inf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptote {
    pub p_hat: Vector3<f64>,
    pub q_perp: Vector3<f64>,
    pub side: Side,
    /// Distance from the origin of the outermost sample used.
    pub radius: f64,
    /// Mismatch between the extractions at `radius` and `radius / 4`.
    pub error: f64,
}

/// Rotationally symmetric Coulomb tail used to remove the logarithmic drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub mu: f64,
    pub center: Vector3<f64>,
}

impl TailModel {
    /// Total strength placed at the center of charge, so that the residual
    /// field decays like a quadrupole.
    pub fn for_params(p: &Params) -> Self {
        let mu = p.mu1 + p.mu2;
        let z = if mu == 0.0 { 0.0 } else { p.a * (p.mu2 - p.mu1) / mu };
        Self { mu, center: Vector3::new(0.0, 0.0, z) }
    }
}

/// Minimal radius at which an asymptote is extracted.
pub const MIN_EXTRACTION_RADIUS: f64 = 50.0;

/// Reads off the asymptote at `side` from the trajectory end lying on that
/// side: the last sample for [`Side::Future`], the first for [`Side::Past`].
pub fn extract_asymptote(traj: &Trajectory, side: Side, tail: &TailModel) -> Result<Asymptote> {
    if side == Side::Future && traj.termination != Termination::RadiusReached {
        return Err(Error::Trapped(format!("trajectory ended by {}", traj.termination.as_str())));
    }
    let mut leg: Vec<&PhaseState> = traj.samples.iter().map(|(_, s)| s).collect();
    if side == Side::Future {
        leg.reverse();
    }
    let outer = leg[0];
    let r_end = outer.q.norm();
    if r_end < MIN_EXTRACTION_RADIUS {
        return Err(Error::Cutoff { r: r_end, min: MIN_EXTRACTION_RADIUS });
    }
    // Walk inwards while the radius decreases, stop near r_end/4.
    let mut inner = outer;
    for s in leg.iter().skip(1) {
        let r = s.q.norm();
        if r > inner.q.norm() {
            break;
        }
        inner = s;
        if r <= 0.25 * r_end {
            break;
        }
    }
    let fit = |s: &PhaseState| -> Result<(Vector3<f64>, Vector3<f64>)> {
        let o = KeplerOrbit::new(tail.mu, tail.center, *s)?;
        let a = o.asymptote(side == Side::Future);
        Ok((a.p_hat, a.q_perp))
    };
    let (p_hat, q_perp) = fit(outer)?;
    let error = if std::ptr::eq(inner, outer) {
        f64::INFINITY
    } else {
        let (p2, q2) = fit(inner)?;
        (p_hat - p2).norm().max((q_perp - q2).norm())
    };
    Ok(Asymptote { p_hat, q_perp, side, radius: r_end, error })
}

/// Both asymptotes of the orbit through an interior state.
#[derive(Debug, Clone)]
pub struct Scattering {
    pub incoming: Asymptote,
    pub outgoing: Asymptote,
    /// Backward leg in forward time order followed by the forward leg.
    pub trajectory: Trajectory,
}

/// Integrates the orbit through `s0` forwards and backwards to `stop.r_max`
/// and extracts its asymptotes.
pub fn scatter(s0: &PhaseState, p: &Params, stop: &StopConditions) -> Result<Scattering> {
    let reversed = PhaseState { q: s0.q, p: -s0.p };
    let (fwd, bwd) = rayon::join(|| trajectory::integrate(s0, p, stop), || trajectory::integrate(&reversed, p, stop));
    let (fwd, bwd) = (fwd?, bwd?);
    for t in [&fwd, &bwd] {
        match t.termination {
            Termination::RadiusReached => {}
            Termination::Collision => return Err(Error::Collision { dist: 0.0, eps: p.collision_radius() }),
            Termination::TimeLimit => return Err(Error::Trapped("no escape within t_max".into())),
        }
    }
    let tail = TailModel::for_params(p);
    let back = extract_asymptote(&bwd, Side::Future, &tail)?;
    let incoming = Asymptote { p_hat: -back.p_hat, side: Side::Past, ..back };
    let outgoing = extract_asymptote(&fwd, Side::Future, &tail)?;
    let mut samples: Vec<(f64, PhaseState)> =
        bwd.samples.iter().rev().map(|(t, s)| (-t, PhaseState { q: s.q, p: -s.p })).collect();
    samples.extend(fwd.samples.iter().skip(1).copied());
    let trajectory = Trajectory {
        samples,
        tol: stop.tol,
        termination: fwd.termination,
        accepted_steps: fwd.accepted_steps + bwd.accepted_steps,
        rejected_steps: fwd.rejected_steps + bwd.rejected_steps,
    };
    Ok(Scattering { incoming, outgoing, trajectory })
}

/// Value of `F = (H, L_z, G)` in the limit along an asymptotic line.
pub fn asymptotic_integrals(a: &Asymptote, p: &Params) -> InvariantPoint {
    let k2 = a.p_hat.norm_squared();
    let h = 0.5 * k2;
    let l_vec = a.q_perp.cross(&a.p_hat);
    let sigma = match a.side {
        Side::Future => a.p_hat.z / k2.sqrt(),
        Side::Past => -a.p_hat.z / k2.sqrt(),
    };
    let ph = &a.p_hat;
    let g = h + 0.5 * (l_vec.norm_squared() - p.a * p.a * (ph.x * ph.x + ph.y * ph.y))
        + p.a * (p.mu1 - p.mu2) * sigma;
    InvariantPoint { h, l: l_vec.z, g }
}

impl KeplerOrbit {
    /// Orbit with incoming momentum `p_in` (`|p_in|^2 = 2h`) and impact vector
    /// `b` relative to `center`, positioned at its pericenter at `t = 0`.
    pub fn from_incoming(mu: f64, center: Vector3<f64>, p_in: Vector3<f64>, b: Vector3<f64>) -> Result<Self> {
        let k = p_in.norm();
        let b = b - p_in * (b.dot(&p_in) / (k * k));
        let l = b.cross(&p_in);
        if l.norm() == 0.0 {
            return Err(Error::InvalidParams("zero impact parameter".into()));
        }
        let lrl = p_in.cross(&l) + p_in * (mu / k);
        let r_p = l.norm_squared() / (lrl.norm() + mu);
        let q = lrl.normalize() * r_p;
        let p = l.cross(&q) / (r_p * r_p);
        KeplerOrbit::new(mu, center, PhaseState { q: center + q, p })
    }
}

/// Kepler Hamiltonian tested for the reference property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub name: &'static str,
    pub mu: f64,
    pub center: Vector3<f64>,
}

impl Candidate {
    pub fn reference(rf: ReferenceChoice, p: &Params) -> Result<Self> {
        let (z, mu) = rf
            .kepler_center(p)
            .ok_or_else(|| Error::InvalidParams("self reference is not a Kepler Hamiltonian".into()))?;
        Ok(Self { name: rf.name(), mu, center: Vector3::new(0.0, 0.0, z) })
    }

    /// Total strength at the midpoint between the centers.
    pub fn origin_sum(p: &Params) -> Self {
        Self { name: "origin-sum", mu: p.mu1 + p.mu2, center: Vector3::zeros() }
    }

    pub fn off_axis(mu: f64, b0: f64, z0: f64) -> Self {
        Self { name: "off-axis", mu, center: Vector3::new(-b0, 0.0, z0) }
    }

    pub fn free() -> Self {
        Self { name: "free", mu: 0.0, center: Vector3::zeros() }
    }
}

/// Incoming momentum and impact vector relative to the candidate center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncomingSample {
    pub p_in: Vector3<f64>,
    pub b: Vector3<f64>,
}

/// A fixed spread of incoming directions and impact vectors at energy `h`.
pub fn default_samples(h: f64) -> Vec<IncomingSample> {
    let k = (2.0 * h).sqrt();
    let raw = [
        ([1.0, 0.0, 0.0], [0.0, 0.7, 0.4]),
        ([0.3, -0.5, 0.8], [1.1, 0.2, 0.0]),
        ([-0.2, 0.9, -0.4], [0.5, 0.3, 0.6]),
        ([0.0, 0.6, -0.8], [-0.9, 0.0, 0.0]),
    ];
    raw.iter()
        .map(|(d, b)| {
            let d = Vector3::from(*d).normalize();
            let b = Vector3::from(*b);
            IncomingSample { p_in: d * k, b: b - d * b.dot(&d) }
        })
        .collect()
}

/// The test orbit for an off-axis center: incoming along `+x` on the line
/// `y = -b0`, deflected by a right angle so that it leaves through the axis.
pub fn off_axis_test_case(h: f64, b0: f64, z0: f64) -> (Candidate, IncomingSample) {
    let k = (2.0 * h).sqrt();
    (
        Candidate::off_axis(2.0 * h * b0, b0, z0),
        IncomingSample { p_in: Vector3::new(k, 0.0, 0.0), b: Vector3::new(0.0, -b0, 0.0) },
    )
}

/// Vertical free line at distance `c` from the axis.
pub fn free_test_case(c: f64) -> (Candidate, IncomingSample) {
    (Candidate::free(), IncomingSample { p_in: Vector3::new(0.0, 0.0, 1.0), b: Vector3::new(c, 0.0, 0.0) })
}

pub const PROPERTY_RADII: [f64; 7] = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7];

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub candidate: Candidate,
    /// Componentwise max over samples of `|F(out) - F(in)|` for `(h, l, g)`,
    /// evaluated where the orbit crosses each radius.
    pub by_radius: Vec<(f64, [f64; 3])>,
    /// The same mismatch evaluated on the closed-form asymptotes.
    pub limit: [f64; 3],
}

impl PropertyReport {
    pub fn final_mismatch(&self) -> f64 {
        self.by_radius.last().map_or(f64::NAN, |(_, m)| max3(m))
    }

    /// Mismatch non-increasing in the radius, up to `slack`.
    pub fn monotone(&self, slack: f64) -> bool {
        self.by_radius.windows(2).all(|w| max3(&w[1].1) <= max3(&w[0].1) + slack)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.monotone(1e-12) && self.final_mismatch() < tol && max3(&self.limit) < tol
    }
}

fn max3(m: &[f64; 3]) -> f64 {
    m[0].max(m[1]).max(m[2])
}

fn diff(a: &InvariantPoint, b: &InvariantPoint) -> [f64; 3] {
    [(a.h - b.h).abs(), (a.l - b.l).abs(), (a.g - b.g).abs()]
}

fn max_into(acc: &mut [f64; 3], m: [f64; 3]) {
    for i in 0..3 {
        acc[i] = acc[i].max(m[i]);
    }
}

/// Evaluates the two-center integrals on both ends of the candidate orbits.
pub fn reference_property_check(
    cand: &Candidate,
    p: &Params,
    samples: &[IncomingSample],
    radii: &[f64],
) -> Result<PropertyReport> {
    let orbits = samples
        .iter()
        .map(|s| KeplerOrbit::from_incoming(cand.mu, cand.center, s.p_in, s.b))
        .collect::<Result<Vec<_>>>()?;
    let mut limit = [0.0; 3];
    for o in &orbits {
        let ends = [Side::Past, Side::Future].map(|side| {
            let a = o.asymptote(side == Side::Future);
            asymptotic_integrals(&Asymptote { p_hat: a.p_hat, q_perp: a.q_perp, side, radius: f64::INFINITY, error: 0.0 }, p)
        });
        max_into(&mut limit, diff(&ends[0], &ends[1]));
    }
    let by_radius = radii
        .par_iter()
        .map(|&r| {
            let mut m = [0.0; 3];
            for o in &orbits {
                let f_out = kepler_solve(o, time_at_radius(o, r, 1.0)?)?;
                let f_in = kepler_solve(o, time_at_radius(o, r, -1.0)?)?;
                let a = eval_integrals_eps(&f_out, p, 0.0)?;
                let b = eval_integrals_eps(&f_in, p, 0.0)?;
                max_into(&mut m, diff(&a, &b));
            }
            Ok((r, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PropertyReport { candidate: *cand, by_radius, limit })
}

/// Separated flow in the regularized time `tau` (`dt = (xi^2 - eta^2) dtau`),
/// with the azimuth split into its xi- and eta-driven parts.
/// State: `[xi, p_xi, eta, p_eta, phi_xi, phi_eta, t]`.
struct Separated {
    a: f64,
    h: f64,
    l: f64,
    s_xi: f64,
    s_eta: f64,
}

impl OdeSystem<7> for Separated {
    fn rhs(&self, _tau: f64, y: &[f64; 7]) -> [f64; 7] {
        let Separated { a, h, l, s_xi, s_eta } = *self;
        let a2 = a * a;
        let (xi, pxi, eta, peta) = (y[0], y[1], y[2], y[3]);
        let u = xi * xi - 1.0;
        let w = 1.0 - eta * eta;
        [
            u * pxi / a2,
            -(xi * pxi * pxi / a2 - l * l * xi / (a2 * u * u) - s_xi / a - 2.0 * h * xi),
            w * peta / a2,
            -(-eta * peta * peta / a2 + l * l * eta / (a2 * w * w) + s_eta / a + 2.0 * h * eta),
            l / (a2 * u),
            l / (a2 * w),
            a2 * (xi * xi - eta * eta),
        ]
    }
}

/// Azimuth advance of one pass from `xi = r` inbound back to `xi = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pass {
    pub total: f64,
    pub xi_channel: f64,
    pub time: f64,
}

/// Integrates one pass of the separated flow with strengths `(s_xi, s_eta)`
/// starting at `(xi, eta) = (r, eta0)` with `p_xi < 0`, `p_eta >= 0`.
pub fn separated_pass(f: &InvariantPoint, s_xi: f64, s_eta: f64, a: f64, r: f64, eta0: f64) -> Result<Pass> {
    let pxi2 = momentum_numerator(f, s_xi, a).eval(r);
    let peta2 = momentum_numerator(f, s_eta, a).eval(eta0);
    if pxi2 <= 0.0 || peta2 < 0.0 {
        return Err(Error::NonPhysical(format!("start point not allowed at {f:?}")));
    }
    let y0 = [r, -pxi2.sqrt() / (r * r - 1.0), eta0, peta2.sqrt() / (1.0 - eta0 * eta0), 0.0, 0.0, 0.0];
    let sys = Separated { a, h: f.h, l: f.l, s_xi, s_eta };
    let opts = OdeOptions::with_tol(1e-12);
    let run = ode::integrate(&sys, 0.0, y0, 1e6, &opts, |_, y| y[0] - r, |_, _| ode::Control::<()>::Continue)
        .map_err(|e| Error::Integration(format!("{e:?}")))?;
    if run.finish != Finish::Event {
        return Err(Error::Trapped("separated pass did not return to the start radius".into()));
    }
    Ok(Pass { total: run.y[4] + run.y[5], xi_channel: run.y[4], time: run.y[6] })
}

pub const DEFLECTION_RADII: [f64; 4] = [250.0, 500.0, 1000.0, 2000.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Deflection {
    /// Extrapolated `Phi - Phi_r`.
    pub total: f64,
    /// Extrapolated difference of the xi-driven azimuth parts.
    pub xi_channel: f64,
    /// Difference between the two last extrapolants, max over both parts.
    pub error: f64,
    /// `(radius, total, xi_channel)` before extrapolation.
    pub tail: Vec<(f64, f64, f64)>,
}

/// Deflection-angle difference between the orbit entering at the
/// prolate radius `xi = R` with `eta = eta0` and the reference orbit with the
/// same `(h, l, g)` and entry point, extrapolated in `1/R`.
pub fn deflection_difference_at(
    f: &InvariantPoint,
    p: &Params,
    rf: ReferenceChoice,
    r_seq: &[f64],
    eta0: f64,
) -> Result<Deflection> {
    if f.l == 0.0 {
        return Err(Error::InvalidParams("deflection needs l != 0".into()));
    }
    if r_seq.len() < 3 {
        return Err(Error::InvalidParams("need at least three radii".into()));
    }
    let s = p.strengths();
    let s_r = rf.xi_strength(p);
    let tail = r_seq
        .iter()
        .map(|&r| {
            let o = separated_pass(f, s.xi, s.eta, p.a, r, eta0)?;
            let q = separated_pass(f, s_r, s.eta, p.a, r, eta0)?;
            Ok((r, o.total - q.total, o.xi_channel - q.xi_channel))
        })
        .collect::<Result<Vec<_>>>()?;
    let rich = |i: usize, pick: fn(&(f64, f64, f64)) -> f64| {
        let (r0, r1) = (tail[i].0, tail[i + 1].0);
        (r1 * pick(&tail[i + 1]) - r0 * pick(&tail[i])) / (r1 - r0)
    };
    let n = tail.len();
    let (t1, t0) = (rich(n - 2, |x| x.1), rich(n - 3, |x| x.1));
    let (x1, x0) = (rich(n - 2, |x| x.2), rich(n - 3, |x| x.2));
    let error = (t1 - t0).abs().max((x1 - x0).abs());
    if !error.is_finite() || error > 1e-3 {
        return Err(Error::Extrapolation(tail.iter().map(|x| x.1).collect()));
    }
    Ok(Deflection { total: t1, xi_channel: x1, error, tail })
}

/// [`deflection_difference_at`] entering at the middle of the eta-interval.
pub fn deflection_difference(f: &InvariantPoint, p: &Params, rf: ReferenceChoice, r_seq: &[f64]) -> Result<Deflection> {
    let iv = eta_interval(f, p.strengths(), p.a)?;
    deflection_difference_at(f, p, rf, r_seq, 0.5 * (iv.lo + iv.hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopDeflection {
    /// `(g, l, deflection)` at the loop samples, in loop order.
    pub samples: Vec<(f64, f64, Deflection)>,
    /// Sum of the increments of `Phi - Phi_r` reduced to `(-pi, pi]`.
    pub variation_total: f64,
    /// The same for the xi-driven part.
    pub variation_xi: f64,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

fn variation(v: &[f64]) -> f64 {
    (0..v.len()).map(|i| wrap(v[(i + 1) % v.len()] - v[i])).sum()
}

/// Deflection differences at `k` points around a loop in the `(l, g)`
/// plane and their summed variation.
pub fn deflection_loop(lp: &LoopPath, p: &Params, rf: ReferenceChoice, k: usize, r_seq: &[f64]) -> Result<LoopDeflection> {
    let samples = lp
        .samples(k)
        .into_par_iter()
        .map(|(g, l)| deflection_difference(&InvariantPoint::new(lp.h, l, g), p, rf, r_seq).map(|d| (g, l, d)))
        .collect::<Result<Vec<_>>>()?;
    let tot: Vec<f64> = samples.iter().map(|s| s.2.total).collect();
    let xi: Vec<f64> = samples.iter().map(|s| s.2.xi_channel).collect();
    Ok(LoopDeflection { variation_total: variation(&tot), variation_xi: variation(&xi), samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert!((wrap(3.5 * PI) + 0.5 * PI).abs() < 1e-12);
        assert!((wrap(-0.25) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn from_incoming_asymptote_roundtrip() {
        for mu in [1.5, -0.8, 0.0] {
            let c = Vector3::new(0.1, -0.2, 0.3);
            let s = default_samples(0.7)[1];
            let o = KeplerOrbit::from_incoming(mu, c, s.p_in, s.b).unwrap();
            let a = o.asymptote(false);
            assert!((a.p_hat - s.p_in).norm() < 1e-12, "mu {mu}");
            let l = (o.state.q - c).cross(&o.state.p);
            assert!((l - s.b.cross(&s.p_in)).norm() < 1e-12);
        }
    }

    #[test]
    fn self_reference_deflection_vanishes() {
        let p = Params::unit(2.0, 1.0);
        let f = InvariantPoint::new(1.0, 0.5, 3.0);
        let d = deflection_difference(&f, &p, ReferenceChoice::SelfReference, &DEFLECTION_RADII).unwrap();
        assert_eq!(d.total, 0.0);
        assert_eq!(d.xi_channel, 0.0);
    }
}
