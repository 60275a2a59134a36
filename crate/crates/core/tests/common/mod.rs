//! Brute-force oracles shared by the integration tests. They evaluate the
//! separated momentum directly and avoid the library's root finder and
//! adaptive quadrature.
#![allow(dead_code)]

use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use twocenter::actions::{bump, ReferenceChoice};
use twocenter::{InvariantPoint, Params};

pub const GRID: usize = 100_000;

/// `(x^2 - 1)(2 a^2 h x^2 + 2 a s x - 2 c) - l^2` with `c = g - (1 - a^2) h`.
pub fn numerator(f: &InvariantPoint, s: f64, a: f64, x: f64) -> f64 {
    let c = f.g - (1.0 - a * a) * f.h;
    (x * x - 1.0) * (2.0 * a * a * f.h * x * x + 2.0 * a * s * x - 2.0 * c) - f.l * f.l
}

pub fn xi_grid(i: usize, n: usize) -> f64 {
    let t = (i as f64 + 0.5) / n as f64;
    1.0 + t / (1.0 - t)
}

pub fn eta_grid(i: usize, n: usize) -> f64 {
    -1.0 + 2.0 * (i as f64 + 0.5) / n as f64
}

/// Maximal runs of grid points with `N > 0`, as `(first, last, touches_end)`.
pub fn positive_runs(n: usize, at: impl Fn(usize) -> f64) -> Vec<(usize, usize, bool)> {
    let mut runs = Vec::new();
    let mut start = None;
    for i in 0..n {
        match (at(i) > 0.0, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i - 1, false));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, n - 1, true));
    }
    runs
}

/// Root of `g` in `[lo, hi]` given a sign change, by bisection.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let slo = g(lo).signum();
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m == lo || m == hi {
            break;
        }
        if g(m).signum() == slo {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Single allowed eta-interval from a grid scan and bisection.
pub fn oracle_eta_interval(f: &InvariantPoint, p: &Params) -> Option<(f64, f64)> {
    let s = p.mu1 - p.mu2;
    let n = 20_000;
    let runs = positive_runs(n, |i| numerator(f, s, p.a, eta_grid(i, n)));
    if runs.len() != 1 {
        return None;
    }
    let (i, j, _) = runs[0];
    let g = |x: f64| numerator(f, s, p.a, x);
    let step = 2.0 / n as f64;
    let lo = if i == 0 { -1.0 } else { bisect(g, eta_grid(i, n) - step, eta_grid(i, n)) };
    let hi = if j == n - 1 { 1.0 } else { bisect(g, eta_grid(j, n), eta_grid(j, n) + step) };
    Some((lo, hi))
}

/// Lower end of the unbounded allowed xi-interval.
pub fn oracle_xi_min(f: &InvariantPoint, s: f64, a: f64) -> Option<f64> {
    let g = |x: f64| numerator(f, s, a, x);
    let mut hi = 2.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e8 {
            return None;
        }
    }
    let mut x = hi;
    let step = 1e-3;
    while x > 1.0 + step && g(x - step) > 0.0 {
        x -= step;
    }
    if x <= 1.0 + step {
        return None;
    }
    Some(bisect(g, x - step, x))
}

/// `(1/pi) * integral of |p_eta|` by the midpoint rule in `eta = m + w sin(theta)`.
pub fn oracle_i_eta(f: &InvariantPoint, p: &Params, panels: usize) -> Option<f64> {
    let (lo, hi) = oracle_eta_interval(f, p)?;
    let s = p.mu1 - p.mu2;
    let (m, w) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let dth = PI / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let th = -FRAC_PI_2 + (k as f64 + 0.5) * dth;
        let eta = m + w * th.sin();
        let n = numerator(f, s, p.a, eta).max(0.0);
        sum += n.sqrt() / (1.0 - eta * eta) * w * th.cos();
    }
    Some(sum * dth / PI)
}

/// `(1/pi) * integral of (1 - chi) p_xi` by the midpoint rule in `xi = xmin + u^2`.
fn oracle_xi_head(f: &InvariantPoint, s: f64, a: f64, r: f64, xmin: f64, panels: usize) -> f64 {
    let u_end = (r + 1.0 - xmin).sqrt();
    let du = u_end / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let u = (k as f64 + 0.5) * du;
        let xi = xmin + u * u;
        let n = numerator(f, s, a, xi).max(0.0);
        sum += n.sqrt() / (xi * xi - 1.0) * 2.0 * u * (1.0 - bump(xi, r));
    }
    sum * du / PI
}

pub fn oracle_i_xi_mod(f: &InvariantPoint, p: &Params, rf: ReferenceChoice, r: f64, panels: usize) -> Option<f64> {
    let so = p.mu1 + p.mu2;
    let sr = rf.xi_strength(p);
    let xo = oracle_xi_min(f, so, p.a)?;
    let xr = oracle_xi_min(f, sr, p.a)?;
    Some(oracle_xi_head(f, so, p.a, r, xo, panels) - oracle_xi_head(f, sr, p.a, r, xr, panels))
}

/// Random `(h, l, g)` with `h > 0` whose fibers for `p` and its reference are
/// scattering, away from the critical set.
pub fn random_scattering_point(rng: &mut impl Rng, p: &Params, rf: ReferenceChoice) -> InvariantPoint {
    loop {
        let f = InvariantPoint::new(rng.gen_range(0.3..3.0), rng.gen_range(0.1..2.0), rng.gen_range(-4.0..8.0));
        let ok = |q: &Params| {
            twocenter::bifurcation::classify(&f, q).is_ok_and(|c| c.non_trapping())
                && !twocenter::bifurcation::is_borderline(&f, q).unwrap_or(true)
        };
        let refp = rf.params(p);
        if ok(p) && ok(&refp) && oracle_eta_interval(&f, p).is_some() {
            return f;
        }
    }
}

/// Counts of allowed xi- and eta-runs on the dense grids, and whether the
/// last xi-run reaches infinity.
pub fn grid_physical(f: &InvariantPoint, p: &Params) -> (usize, usize, bool) {
    let s = p.strengths();
    let xi = positive_runs(GRID, |i| numerator(f, s.xi, p.a, xi_grid(i, GRID)));
    let eta = positive_runs(GRID, |i| numerator(f, s.eta, p.a, eta_grid(i, GRID)));
    let unbounded = xi.last().is_some_and(|r| r.2);
    (xi.len(), eta.len(), unbounded)
}
