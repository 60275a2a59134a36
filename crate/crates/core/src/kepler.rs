//! Closed-form Kepler motion about a single center of either sign, and the
//! asymptotes of its hyperbolic orbits.

use crate::dynamics::PhaseState;
use crate::error::{Error, Result};
use nalgebra::Vector3;

/// A Kepler orbit `H = |p|^2/2 - mu/|q - center|` through `state` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerOrbit {
    pub mu: f64,
    pub center: Vector3<f64>,
    pub state: PhaseState,
}

/// Asymptotic direction and impact parameter of one end of an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicAsymptote {
    /// Asymptotic momentum, `|p_hat|^2 = 2h`.
    pub p_hat: Vector3<f64>,
    /// Point of the asymptotic line closest to the origin.
    pub q_perp: Vector3<f64>,
}

impl KeplerOrbit {
    pub fn new(mu: f64, center: Vector3<f64>, state: PhaseState) -> Result<Self> {
        let o = Self { mu, center, state };
        let r = o.rel_q().norm();
        if r == 0.0 {
            return Err(Error::Collision { dist: 0.0, eps: 0.0 });
        }
        if o.energy() <= 0.0 {
            return Err(Error::InvalidParams(format!("Kepler orbit needs h > 0, got {}", o.energy())));
        }
        Ok(o)
    }

    fn rel_q(&self) -> Vector3<f64> {
        self.state.q - self.center
    }

    pub fn energy(&self) -> f64 {
        0.5 * self.state.p.norm_squared() - self.mu / self.rel_q().norm()
    }

    /// Angular momentum about the center.
    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.rel_q().cross(&self.state.p)
    }

    /// Laplace–Runge–Lenz vector `p x L - mu q/|q|` about the center.
    pub fn lrl(&self) -> Vector3<f64> {
        let q = self.rel_q();
        self.state.p.cross(&self.angular_momentum()) - q * (self.mu / q.norm())
    }

    pub fn eccentricity(&self) -> f64 {
        if self.mu == 0.0 {
            return f64::INFINITY;
        }
        self.lrl().norm() / self.mu.abs()
    }

    /// Asymptote at `t -> +inf` (`outgoing = true`) or `t -> -inf`.
    pub fn asymptote(&self, outgoing: bool) -> ConicAsymptote {
        let h = self.energy();
        let k = (2.0 * h).sqrt();
        let l = self.angular_momentum();
        let p_hat = if self.mu == 0.0 {
            self.state.p
        } else {
            let a = self.lrl();
            let c = if outgoing { self.mu / k } else { -self.mu / k };
            -(a.cross(&l) + a * c) / (l.norm_squared() + c * c)
        };
        let rel = p_hat.cross(&l) / (2.0 * h);
        let x = self.center + rel;
        ConicAsymptote { p_hat, q_perp: x - p_hat * (x.dot(&p_hat) / p_hat.norm_squared()) }
    }
}

/// Stumpff functions `c0..c3` at `x`.
fn stumpff(x: f64) -> [f64; 4] {
    if x.abs() < 0.1 {
        // Series: c_k(x) = sum_j (-x)^j / (k + 2j)!
        let mut c = [0.0; 4];
        for (k, ck) in c.iter_mut().enumerate() {
            let mut term = 1.0 / (1..=k).map(|i| i as f64).product::<f64>();
            let mut sum = 0.0;
            for j in 0..12 {
                sum += term;
                let n = (k + 2 * j) as f64;
                term *= -x / ((n + 1.0) * (n + 2.0));
            }
            *ck = sum;
        }
        return c;
    }
    let (c0, c1) = if x > 0.0 {
        let s = x.sqrt();
        (s.cos(), s.sin() / s)
    } else {
        let s = (-x).sqrt();
        (s.cosh(), s.sinh() / s)
    };
    [c0, c1, (1.0 - c0) / x, (1.0 - c1) / x]
}

/// State on `orbit` at time `t`, via the universal Kepler equation in the
/// regularized variable `s` (`dt/ds = r`), solved by bracketed Newton.
pub fn kepler_solve(orbit: &KeplerOrbit, t: f64) -> Result<PhaseState> {
    let q0 = orbit.rel_q();
    let v0 = orbit.state.p;
    let mu = orbit.mu;
    let r0 = q0.norm();
    let eta0 = q0.dot(&v0);
    let beta = 2.0 * mu / r0 - v0.norm_squared();
    let zeta0 = mu - beta * r0;
    let g = |s: f64| {
        let c = stumpff(beta * s * s);
        let s2 = s * s;
        [c[0], s * c[1], s2 * c[2], s2 * s * c[3]]
    };
    let time = |gs: &[f64; 4]| r0 * gs[1] + eta0 * gs[2] + mu * gs[3];
    let radius = |gs: &[f64; 4]| r0 + eta0 * gs[1] + zeta0 * gs[2];
    if t == 0.0 {
        return Ok(orbit.state);
    }
    // t(s) is increasing; bracket the root.
    let dir = t.signum();
    let mut lo = 0.0;
    let mut hi = dir * (t.abs() / r0).min(1.0);
    let mut n = 0;
    while (time(&g(hi)) - t) * dir < 0.0 {
        lo = hi;
        hi *= 2.0;
        n += 1;
        if n > 200 {
            return Err(Error::Kepler(n));
        }
    }
    let (mut a, mut b) = if dir > 0.0 { (lo, hi) } else { (hi, lo) };
    let mut s = 0.5 * (a + b);
    let mut converged = false;
    for _ in 0..200 {
        let gs = g(s);
        let f = time(&gs) - t;
        if f > 0.0 {
            b = s;
        } else {
            a = s;
        }
        let mut next = s - f / radius(&gs);
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - s).abs() <= 1e-15 * s.abs().max(1e-300) || a == b {
            s = next;
            converged = true;
            break;
        }
        s = next;
    }
    if !converged {
        return Err(Error::Kepler(200));
    }
    let gs = g(s);
    let r = radius(&gs);
    let f = 1.0 - mu * gs[2] / r0;
    let gg = r0 * gs[1] + eta0 * gs[2];
    let fd = -mu * gs[1] / (r * r0);
    let gd = 1.0 - mu * gs[2] / r;
    Ok(PhaseState { q: orbit.center + q0 * f + v0 * gg, p: q0 * fd + v0 * gd })
}

/// Time at which `|q - origin|` reaches `radius` after (`dir > 0`) or before
/// (`dir < 0`) `t = 0`, assuming the orbit escapes monotonically there.
pub fn time_at_radius(orbit: &KeplerOrbit, radius: f64, dir: f64) -> Result<f64> {
    let dist = |t: f64| kepler_solve(orbit, t).map(|s| s.q.norm());
    let k = (2.0 * orbit.energy()).sqrt();
    let mut hi = dir * (radius / k).max(1.0);
    let mut n = 0;
    while dist(hi)? < radius {
        hi *= 2.0;
        n += 1;
        if n > 100 {
            return Err(Error::Trapped("Kepler orbit does not reach the radius".into()));
        }
    }
    let mut lo = 0.0;
    if dist(lo)? >= radius {
        return Err(Error::InvalidParams("orbit starts outside the radius".into()));
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if dist(m)? < radius {
            lo = m;
        } else {
            hi = m;
        }
        if (hi - lo).abs() <= 1e-14 * hi.abs() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
