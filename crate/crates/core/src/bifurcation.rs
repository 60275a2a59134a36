//! Critical values of the integral map and physical-region classification.

use crate::dynamics::{momentum_numerator, Coord, InvariantPoint, Params, Strengths};
use crate::error::Result;
use crate::poly::Poly;

/// Points closer than this (in `g`) to the critical set are borderline.
pub const BORDERLINE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineId {
    L1,
    L2,
    L3,
}

impl LineId {
    pub const ALL: [LineId; 3] = [LineId::L1, LineId::L2, LineId::L3];

    pub fn name(self) -> &'static str {
        match self {
            LineId::L1 => "l1",
            LineId::L2 => "l2",
            LineId::L3 => "l3",
        }
    }
}

/// `{g = h + offset, l = 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLine {
    pub id: LineId,
    pub offset: f64,
}

impl CriticalLine {
    pub fn g_at(&self, h: f64) -> f64 {
        h + self.offset
    }
}

pub fn critical_lines(p: &Params) -> [CriticalLine; 3] {
    [
        CriticalLine { id: LineId::L1, offset: p.mu2 - p.mu1 },
        CriticalLine { id: LineId::L2, offset: p.mu1 - p.mu2 },
        CriticalLine { id: LineId::L3, offset: p.mu1 + p.mu2 },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurveFamily {
    /// Planar, `g = mu cosh(lambda)/2`, `h = -mu/(2 cosh(lambda))`.
    Lambda,
    /// Planar, `g = (mu1 - mu2) sin(nu)/2`, `h = (mu2 - mu1)/(2 sin(nu))`.
    Nu,
    /// Spatial, double root in xi.
    Xi,
    /// Spatial, double root in eta.
    Eta,
}

impl CurveFamily {
    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::Lambda => "lambda",
            CurveFamily::Nu => "nu",
            CurveFamily::Xi => "xi",
            CurveFamily::Eta => "eta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub param: f64,
    pub point: InvariantPoint,
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalCurve {
    pub family: CurveFamily,
    /// Which connected branch of the family (parameter sub-range, sign of `l`).
    pub branch: usize,
    pub samples: Vec<CurveSample>,
}

impl CriticalCurve {
    pub fn physical_samples(&self) -> impl Iterator<Item = &CurveSample> {
        self.samples.iter().filter(|s| s.physical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub count: usize,
    /// Parameter range for the planar families (`lambda`, `nu`).
    pub param_max: f64,
    /// Upper bound on xi for spatial families when the allowed range is unbounded.
    pub xi_max: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { count: 2000, param_max: 4.0, xi_max: 20.0 }
    }
}

fn linspace_open(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
}

/// Both planar critical families (`l = 0`).
pub fn critical_curves_planar(p: &Params, sampling: &Sampling) -> Vec<CriticalCurve> {
    let mu = p.mu1 + p.mu2;
    let d = p.mu1 - p.mu2;
    let n = sampling.count.max(2);
    let lam = linspace_open(-sampling.param_max, sampling.param_max, n)
        .map(|t| {
            let pt = InvariantPoint::new(-mu / (2.0 * t.cosh()), 0.0, 0.5 * mu * t.cosh());
            CurveSample { param: t, point: pt, physical: is_attained(&pt, p) }
        })
        .collect();
    let mut curves = vec![CriticalCurve { family: CurveFamily::Lambda, branch: 0, samples: lam }];
    // sin(nu) changes sign at nu = 0, pi: split into the two branches.
    for (branch, (lo, hi)) in [(0.0, std::f64::consts::PI), (-std::f64::consts::PI, 0.0)].into_iter().enumerate() {
        let samples = linspace_open(lo, hi, n)
            .map(|t| {
                let pt = InvariantPoint::new(-d / (2.0 * t.sin()), 0.0, 0.5 * d * t.sin());
                CurveSample { param: t, point: pt, physical: is_attained(&pt, p) }
            })
            .collect();
        curves.push(CriticalCurve { family: CurveFamily::Nu, branch, samples });
    }
    curves
}

/// Point on a spatial critical family at coordinate value `x`, if `l^2 >= 0`.
pub fn spatial_curve_point(family: CurveFamily, x: f64, h: f64, p: &Params) -> Option<InvariantPoint> {
    let s = match family {
        CurveFamily::Xi => p.mu1 + p.mu2,
        CurveFamily::Eta => p.mu1 - p.mu2,
        _ => return None,
    };
    let a = p.a;
    let hs = a * a * h;
    let ss = a * s;
    let l2 = -(ss + 2.0 * hs * x) * (x * x - 1.0).powi(2) / x;
    if !(l2 >= 0.0) || !l2.is_finite() {
        return None;
    }
    let c = hs * (2.0 * x * x - 1.0) + ss * (3.0 * x * x - 1.0) / (2.0 * x);
    Some(InvariantPoint::new(h, l2.sqrt(), c + (1.0 - a * a) * h))
}

/// Spatial critical families at fixed `h` in the `(l, g)`-plane. Each
/// branch with `l > 0` is followed by its mirror image with `l < 0`.
pub fn critical_curves_spatial(p: &Params, h: f64, sampling: &Sampling) -> Vec<CriticalCurve> {
    let n = sampling.count.max(2);
    let mut out = Vec::new();
    let ranges: [(CurveFamily, f64, f64); 3] = [
        (CurveFamily::Xi, 1.0, sampling.xi_max),
        (CurveFamily::Eta, -1.0, 0.0),
        (CurveFamily::Eta, 0.0, 1.0),
    ];
    let mut branch = 0;
    for (family, lo, hi) in ranges {
        let upper: Vec<CurveSample> = linspace_open(lo, hi, n)
            .filter_map(|x| {
                spatial_curve_point(family, x, h, p)
                    .map(|pt| CurveSample { param: x, point: pt, physical: is_attained(&pt, p) })
            })
            .collect();
        if upper.is_empty() {
            continue;
        }
        let lower = upper
            .iter()
            .map(|s| CurveSample { point: InvariantPoint { l: -s.point.l, ..s.point }, ..*s })
            .collect();
        out.push(CriticalCurve { family, branch, samples: upper });
        out.push(CriticalCurve { family, branch: branch + 1, samples: lower });
        branch += 2;
    }
    out
}

/// Closed interval of a coordinate; `hi` may be `+inf` for xi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalClassification {
    pub xi_intervals: Vec<Interval>,
    pub eta_intervals: Vec<Interval>,
    pub physical: bool,
    /// Within [`BORDERLINE`] of the critical set; intervals may be unstable.
    pub borderline: bool,
}

impl PhysicalClassification {
    pub fn scattering(&self) -> bool {
        self.physical && self.xi_intervals.iter().any(Interval::is_unbounded)
    }

    /// Regular, physical, and every motion escapes (no bounded xi-component).
    pub fn non_trapping(&self) -> bool {
        self.physical
            && !self.borderline
            && self.xi_intervals.len() == 1
            && self.xi_intervals[0].is_unbounded()
            && self.eta_intervals.len() == 1
    }
}

fn coord_range(coord: Coord) -> (f64, f64) {
    match coord {
        Coord::Xi => (1.0, f64::INFINITY),
        Coord::Eta => (-1.0, 1.0),
    }
}

fn strength(coord: Coord, s: Strengths) -> f64 {
    match coord {
        Coord::Xi => s.xi,
        Coord::Eta => s.eta,
    }
}

/// Sign intervals of the numerator quartic over the coordinate range.
pub fn allowed_intervals(coord: Coord, f: &InvariantPoint, s: Strengths, a: f64) -> Result<Vec<Interval>> {
    let (lo, hi) = coord_range(coord);
    if f.l == 0.0 {
        // The range ends are exact roots; use the quadratic factor, whose
        // sign is flipped on the eta-range where x^2 - 1 < 0.
        let c = f.g - (1.0 - a * a) * f.h;
        let sgn = if coord == Coord::Xi { 1.0 } else { -1.0 };
        let q = Poly::new(vec![-2.0 * c * sgn, 2.0 * a * strength(coord, s) * sgn, 2.0 * a * a * f.h * sgn]);
        return sign_intervals(&q, lo, hi);
    }
    let n = momentum_numerator(f, strength(coord, s), a);
    sign_intervals(&n, lo, hi)
}

pub(crate) fn sign_intervals(n: &Poly, lo: f64, hi: f64) -> Result<Vec<Interval>> {
    let mut cuts = vec![lo];
    cuts.extend(n.real_roots()?.into_iter().filter(|&r| r > lo && r < hi));
    cuts.push(hi);
    // No roots inside a window, so one probe decides its sign.
    let positive = |a: f64, b: f64| {
        let x = if b.is_infinite() { a + 1.0 + a.abs() } else { 0.5 * (a + b) };
        n.eval(x) > 0.0
    };
    let mut out: Vec<Interval> = Vec::new();
    for w in cuts.windows(2) {
        if positive(w[0], w[1]) {
            match out.last_mut() {
                Some(last) if last.hi == w[0] => last.hi = w[1],
                _ => out.push(Interval { lo: w[0], hi: w[1] }),
            }
        }
    }
    Ok(out)
}

/// Whether `f` is within [`BORDERLINE`] of a critical value, measured as the
/// `g`-shift that creates a double root or moves a root onto a pole.
pub fn is_borderline(f: &InvariantPoint, p: &Params) -> Result<bool> {
    let s = p.strengths();
    for coord in [Coord::Xi, Coord::Eta] {
        let n = momentum_numerator(f, strength(coord, s), p.a);
        let (lo, hi) = coord_range(coord);
        for x in n.derivative().real_roots()? {
            if x > lo && x < hi {
                let dg = 2.0 * (x * x - 1.0).abs();
                if n.eval(x).abs() <= BORDERLINE * dg {
                    return Ok(true);
                }
            }
        }
        if f.l.abs() <= BORDERLINE {
            // Near a line: the quadratic factor vanishes at a pole.
            for x in [-1.0, 1.0] {
                if coord == Coord::Xi && x < 0.0 {
                    continue;
                }
                let q = momentum_quadratic(f, strength(coord, s), p.a, x);
                if q.abs() <= 2.0 * BORDERLINE {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// `2 a^2 h x^2 + 2 a s x - 2 c`, the factor multiplying `x^2 - 1`.
fn momentum_quadratic(f: &InvariantPoint, s: f64, a: f64, x: f64) -> f64 {
    let c = f.g - (1.0 - a * a) * f.h;
    2.0 * a * a * f.h * x * x + 2.0 * a * s * x - 2.0 * c
}

pub fn classify(f: &InvariantPoint, p: &Params) -> Result<PhysicalClassification> {
    classify_with(f, p.strengths(), p)
}

/// Classification with substituted strengths (e.g. a reference system).
pub fn classify_with(f: &InvariantPoint, s: Strengths, p: &Params) -> Result<PhysicalClassification> {
    let xi_intervals = allowed_intervals(Coord::Xi, f, s, p.a)?;
    let eta_intervals = allowed_intervals(Coord::Eta, f, s, p.a)?;
    let physical = !xi_intervals.is_empty() && !eta_intervals.is_empty();
    let q = Params { mu1: 0.5 * (s.xi + s.eta), mu2: 0.5 * (s.xi - s.eta), a: p.a };
    Ok(PhysicalClassification { xi_intervals, eta_intervals, physical, borderline: is_borderline(f, &q)? })
}

/// Whether `f` is attained by some state, allowing the allowed set to shrink
/// to isolated points (as on critical values).
pub fn is_attained(f: &InvariantPoint, p: &Params) -> bool {
    let s = p.strengths();
    [Coord::Xi, Coord::Eta].into_iter().all(|coord| {
        let n = momentum_numerator(f, strength(coord, s), p.a);
        let (lo, hi) = coord_range(coord);
        let scale = n.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let tol = 1e-9 * scale;
        if hi.is_infinite() && n.sign_at_infinity() > 0.0 {
            return true;
        }
        let mut probes = vec![lo + 1e-9, hi.min(1e6) - 1e-9];
        if let Ok(r) = n.derivative().real_roots() {
            probes.extend(r.into_iter().filter(|&x| x > lo && x < hi));
        }
        probes.into_iter().any(|x| n.eval(x) >= -tol)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_offsets() {
        let l = critical_lines(&Params::unit(2.0, 1.0));
        assert_eq!([l[0].offset, l[1].offset, l[2].offset], [-1.0, 1.0, 3.0]);
        let l = critical_lines(&Params::unit(1.5, 1.5));
        assert_eq!(l[0].offset, l[1].offset);
        let l = critical_lines(&Params::unit(1.5, 0.0));
        assert_eq!(l[1].offset, l[2].offset);
    }

    #[test]
    fn planar_products() {
        let p = Params::unit(2.0, 1.0);
        for c in critical_curves_planar(&p, &Sampling { count: 50, ..Default::default() }) {
            let k = match c.family {
                CurveFamily::Lambda => -9.0 / 4.0,
                _ => -1.0 / 4.0,
            };
            for s in &c.samples {
                assert!((s.point.g * s.point.h - k).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attractive_xi_family_empty_at_positive_energy() {
        let p = Params::unit(2.0, 1.0);
        let curves = critical_curves_spatial(&p, 1.0, &Sampling::default());
        assert!(curves.iter().all(|c| c.family != CurveFamily::Xi));
        assert!(curves.iter().any(|c| c.family == CurveFamily::Eta));
    }

    #[test]
    fn scattering_interval_is_unbounded() {
        let p = Params::unit(2.0, 1.0);
        let c = classify(&InvariantPoint::new(2.0, 0.5, 3.0), &p).unwrap();
        assert!(c.physical && c.scattering());
        assert!(c.xi_intervals.last().unwrap().hi.is_infinite());
    }

    #[test]
    fn huge_l_is_not_physical() {
        let p = Params::unit(2.0, 1.0);
        let c = classify(&InvariantPoint::new(1.0, 10.0, 1.0), &p).unwrap();
        assert!(c.eta_intervals.is_empty());
        assert!(!c.physical);
    }

    #[test]
    fn points_on_lines_are_borderline() {
        let p = Params::unit(2.0, 1.0);
        for line in critical_lines(&p) {
            let f = InvariantPoint::new(1.0, 0.0, line.g_at(1.0));
            assert!(is_borderline(&f, &p).unwrap(), "{:?}", line.id);
        }
        assert!(!is_borderline(&InvariantPoint::new(1.0, 0.0, 1.5), &p).unwrap());
    }
}
