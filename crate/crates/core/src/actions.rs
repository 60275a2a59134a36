//! Turning points, the eta-action, the modified xi-action and their
//! one-sided `l`-derivatives at `l = 0`.

use crate::bifurcation::{allowed_intervals, is_borderline, Interval};
use crate::dynamics::{momentum_numerator, Coord, InvariantPoint, Params, Strengths};
use crate::error::{Error, Result};
use crate::quad;
use std::f64::consts::{FRAC_PI_2, PI};

/// Absolute tolerance of the action quadratures.
pub const QUAD_TOL: f64 = 1e-11;

/// Reference system used to regularize the xi-action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceChoice {
    /// Kepler center of strength `mu1 - mu2` at `o1`.
    KeplerAtO1,
    /// Kepler center of strength `mu2 - mu1` at `o2`.
    KeplerAtO2,
    /// The two-center Hamiltonian itself.
    SelfReference,
}

impl ReferenceChoice {
    pub const ALL: [ReferenceChoice; 3] =
        [ReferenceChoice::KeplerAtO1, ReferenceChoice::KeplerAtO2, ReferenceChoice::SelfReference];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceChoice::KeplerAtO1 => "o1",
            ReferenceChoice::KeplerAtO2 => "o2",
            ReferenceChoice::SelfReference => "self",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "o1" | "kepler-o1" => Some(ReferenceChoice::KeplerAtO1),
            "o2" | "kepler-o2" => Some(ReferenceChoice::KeplerAtO2),
            "self" => Some(ReferenceChoice::SelfReference),
            _ => None,
        }
    }

    /// Strength of the xi-equation of the reference system. The eta-equation
    /// is the same as the original one for every choice.
    pub fn xi_strength(self, p: &Params) -> f64 {
        match self {
            ReferenceChoice::KeplerAtO2 => p.mu2 - p.mu1,
            // Reflection z -> -z maps the o1-reference onto the o2-reference.
            ReferenceChoice::KeplerAtO1 => ReferenceChoice::KeplerAtO2.xi_strength(&p.mirrored()),
            ReferenceChoice::SelfReference => p.mu1 + p.mu2,
        }
    }

    /// Kepler center `(z, strength)` of the reference, if it is one.
    pub fn kepler_center(self, p: &Params) -> Option<(f64, f64)> {
        match self {
            ReferenceChoice::KeplerAtO1 => Some((-p.a, p.mu1 - p.mu2)),
            ReferenceChoice::KeplerAtO2 => Some((p.a, p.mu2 - p.mu1)),
            ReferenceChoice::SelfReference => None,
        }
    }

    pub fn strengths(self, p: &Params) -> Strengths {
        Strengths { xi: self.xi_strength(p), eta: p.mu1 - p.mu2 }
    }

    /// Two-center parameters whose strengths are those of the reference.
    pub fn params(self, p: &Params) -> Params {
        let s = self.strengths(p);
        Params { mu1: 0.5 * (s.xi + s.eta), mu2: 0.5 * (s.xi - s.eta), a: p.a }
    }
}

fn check_regular(coord: Coord, f: &InvariantPoint, s: Strengths, a: f64) -> Result<()> {
    let q = Params { mu1: 0.5 * (s.xi + s.eta), mu2: 0.5 * (s.xi - s.eta), a };
    if is_borderline(f, &q)? {
        return Err(Error::Critical(format!("double root in {} at {f:?}", coord.name())));
    }
    Ok(())
}

/// The eta-oscillation interval `[eta_-, eta_+]`.
pub fn eta_interval(f: &InvariantPoint, s: Strengths, a: f64) -> Result<Interval> {
    check_regular(Coord::Eta, f, s, a)?;
    let iv = allowed_intervals(Coord::Eta, f, s, a)?;
    match iv.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::NonPhysical(format!("no eta motion at {f:?}"))),
        _ => Err(Error::NonPhysical(format!("{} eta components at {f:?}", iv.len()))),
    }
}

/// Lower end of the unbounded xi-interval (`h > 0`).
pub fn xi_min(f: &InvariantPoint, s: Strengths, a: f64) -> Result<f64> {
    if f.h <= 0.0 {
        return Err(Error::NonPhysical(format!("xi_min needs h > 0, got {}", f.h)));
    }
    check_regular(Coord::Xi, f, s, a)?;
    let iv = allowed_intervals(Coord::Xi, f, s, a)?;
    iv.iter()
        .find(|i| i.is_unbounded())
        .map(|i| i.lo)
        .ok_or_else(|| Error::NonPhysical(format!("no unbounded xi motion at {f:?}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TurningPoints {
    Eta { lo: f64, hi: f64 },
    Xi { min: f64 },
}

pub fn turning_points(coord: Coord, f: &InvariantPoint, s: Strengths, a: f64) -> Result<TurningPoints> {
    match coord {
        Coord::Eta => eta_interval(f, s, a).map(|i| TurningPoints::Eta { lo: i.lo, hi: i.hi }),
        Coord::Xi => xi_min(f, s, a).map(|min| TurningPoints::Xi { min }),
    }
}

/// Quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Value {
    pub value: f64,
    pub error: f64,
}

/// `(1/pi) * integral of |p_eta|` over the oscillation interval.
pub fn action_i_eta(f: &InvariantPoint, p: &Params) -> Result<Value> {
    action_i_eta_with(f, p.strengths(), p.a)
}

pub fn action_i_eta_with(f: &InvariantPoint, s: Strengths, a: f64) -> Result<Value> {
    let iv = eta_interval(f, s, a)?;
    let n = momentum_numerator(f, s.eta, a);
    let (lo, hi) = (iv.lo, iv.hi);
    // N = (eta - lo)(eta - hi) R with R < 0 inside.
    let rest = n.deflate(lo).deflate(hi);
    let m = 0.5 * (lo + hi);
    let w = 0.5 * (hi - lo);
    let (gap_lo, gap_hi) = (1.0 + lo, 1.0 - hi);
    let integrand = |th: f64| {
        let (sn, cs) = th.sin_cos();
        // 1 - sin and 1 + sin without cancellation.
        let half = 0.5 * (FRAC_PI_2 - th);
        let one_minus = 2.0 * half.sin().powi(2);
        let one_plus = 2.0 - one_minus;
        let eta = m + w * sn;
        let pole = (gap_hi + w * one_minus) * (gap_lo + w * one_plus);
        let r = (-rest.eval(eta)).max(0.0);
        w * w * cs * cs * r.sqrt() / pole
    };
    let q = quad::integrate(integrand, -FRAC_PI_2, FRAC_PI_2, QUAD_TOL, 1e-13)?;
    Ok(Value { value: q.value / PI, error: q.error / PI })
}

/// Smooth step: 0 below `r`, 1 above `r + 1`.
pub fn bump(xi: f64, r: f64) -> f64 {
    let t = xi - r;
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = |x: f64| (-1.0 / x).exp();
    let (a, b) = (f(t), f(1.0 - t));
    a / (a + b)
}

/// `(1/pi) * integral of (1 - chi) p_xi` from `xi_min` for one xi-strength.
fn xi_head(f: &InvariantPoint, s: Strengths, a: f64, r: f64, xmin: f64) -> Result<Value> {
    let n = momentum_numerator(f, s.xi, a);
    let rest = n.deflate(xmin);
    let gap = xmin - 1.0;
    // xi = xmin + u^2; N = (xi - xmin) R3 = u^2 R3.
    let integrand = |u: f64| {
        let u2 = u * u;
        let xi = xmin + u2;
        let r3 = rest.eval(xi).max(0.0);
        2.0 * u2 * r3.sqrt() / ((gap + u2) * (xi + 1.0)) * (1.0 - bump(xi, r))
    };
    let u_r = (r - xmin).sqrt();
    let u_end = (r + 1.0 - xmin).sqrt();
    let q1 = quad::integrate(integrand, 0.0, u_r, QUAD_TOL, 1e-13)?;
    let q2 = quad::integrate(integrand, u_r, u_end, QUAD_TOL, 1e-13)?;
    Ok(Value { value: (q1.value + q2.value) / PI, error: (q1.error + q2.error) / PI })
}

/// Default cutoff: `10 max(1, xi_min)` over original and reference.
pub fn default_cutoff(f: &InvariantPoint, p: &Params, rf: ReferenceChoice) -> Result<f64> {
    let xo = xi_min(f, p.strengths(), p.a)?;
    let xr = xi_min(f, rf.strengths(p), p.a)?;
    Ok(10.0 * xo.max(xr).max(1.0))
}

/// Modified xi-action relative to `rf` with bump cutoff at `r`.
pub fn action_i_xi_mod(f: &InvariantPoint, p: &Params, rf: ReferenceChoice, r: f64) -> Result<Value> {
    let so = p.strengths();
    let sr = rf.strengths(p);
    let xo = xi_min(f, so, p.a)?;
    let xr = xi_min(f, sr, p.a)?;
    let min = xo.max(xr);
    if !(r > min) {
        return Err(Error::Cutoff { r, min });
    }
    let o = xi_head(f, so, p.a, r, xo)?;
    let rv = xi_head(f, sr, p.a, r, xr)?;
    Ok(Value { value: o.value - rv.value, error: o.error + rv.error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionTriple {
    pub i_phi: f64,
    pub i_eta: Value,
    pub i_xi_mod: Value,
}

pub fn actions(f: &InvariantPoint, p: &Params, rf: ReferenceChoice, r: Option<f64>) -> Result<ActionTriple> {
    let r = match r {
        Some(r) => r,
        None => default_cutoff(f, p, rf)?,
    };
    Ok(ActionTriple { i_phi: f.l, i_eta: action_i_eta(f, p)?, i_xi_mod: action_i_xi_mod(f, p, rf, r)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Eta,
    XiMod,
}

/// Default smallest `l` of the difference sequence.
pub const DL_EPS: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct DlLimit {
    /// Extrapolated `lim_{l -> 0+} dI/dl`.
    pub value: f64,
    /// Central differences at `eps, 2 eps, 4 eps`.
    pub differences: [f64; 3],
    /// The two Richardson extrapolants.
    pub extrapolants: [f64; 2],
}

/// One-sided limit of `dI/dl` as `l -> 0+` at `(h, g)`.
pub fn dl_limit(kind: ActionKind, h: f64, g: f64, p: &Params, rf: ReferenceChoice, eps: f64) -> Result<DlLimit> {
    let at = |l: f64| InvariantPoint::new(h, l, g);
    let r = match kind {
        ActionKind::XiMod => default_cutoff(&at(4.0 * eps), p, rf)?,
        ActionKind::Eta => 0.0,
    };
    let action = |l: f64| -> Result<f64> {
        match kind {
            ActionKind::Eta => action_i_eta(&at(l), p).map(|v| v.value),
            ActionKind::XiMod => action_i_xi_mod(&at(l), p, rf, r).map(|v| v.value),
        }
    };
    let derivative = |l: f64| -> Result<f64> {
        let d = 0.5 * l;
        Ok((action(l + d)? - action(l - d)?) / (2.0 * d))
    };
    let d = [derivative(eps)?, derivative(2.0 * eps)?, derivative(4.0 * eps)?];
    let e = [2.0 * d[0] - d[1], 2.0 * d[1] - d[2]];
    if (e[0] - e[1]).abs() >= 1e-3 {
        return Err(Error::Extrapolation(vec![d[0], d[1], d[2], e[0], e[1]]));
    }
    Ok(DlLimit { value: e[0], differences: d, extrapolants: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(9.9, 10.0), 0.0);
        assert_eq!(bump(11.0, 10.0), 1.0);
        assert!((bump(10.5, 10.0) - 0.5).abs() < 1e-15);
        let mut last = 0.0;
        for k in 1..100 {
            let v = bump(10.0 + k as f64 / 100.0, 10.0);
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn symmetric_eta_interval() {
        let p = Params::unit(1.0, 1.0);
        let iv = eta_interval(&InvariantPoint::new(1.0, 0.0, 0.5), p.strengths(), 1.0).unwrap();
        assert!((iv.lo + iv.hi).abs() < 1e-14);
    }

    #[test]
    fn xi_min_is_a_root() {
        let p = Params::unit(2.0, 1.0);
        let f = InvariantPoint::new(1.0, 0.3, 4.5);
        let x = xi_min(&f, p.strengths(), 1.0).unwrap();
        let lhs = (x * x - 1.0) * (2.0 * x * x + 6.0 * x - 9.0);
        assert!((lhs - 0.09).abs() < 1e-12);
    }

    #[test]
    fn self_reference_vanishes() {
        let p = Params::unit(2.0, 1.0);
        let f = InvariantPoint::new(1.0, 0.3, 4.5);
        let v = action_i_xi_mod(&f, &p, ReferenceChoice::SelfReference, 20.0).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn free_eta_action_closed_form() {
        // mu = 0, l = 0: p_eta^2 = 2(c - h eta^2)/(1 - eta^2) with a = 1.
        let p = Params::unit(0.0, 0.0);
        let v = action_i_eta(&InvariantPoint::new(0.8, 0.0, 0.3), &p).unwrap();
        let c: f64 = 0.3;
        let h: f64 = 0.8;
        let e = (c / h).sqrt();
        let n = 200000;
        let mut s = 0.0;
        for k in 0..n {
            let th = -FRAC_PI_2 + PI * (k as f64 + 0.5) / n as f64;
            let x = e * th.sin();
            s += (2.0 * (c - h * x * x) / (1.0 - x * x)).sqrt() * e * th.cos();
        }
        s *= PI / n as f64;
        assert!((v.value - s / PI).abs() < 1e-9);
    }
}
