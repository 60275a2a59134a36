//! Scattering and Hamiltonian monodromy from jumps of `dI/dl` across `l = 0`.

use crate::actions::{dl_limit, ActionKind, ReferenceChoice, DL_EPS};
use crate::bifurcation::{
    classify_with, critical_curves_spatial, critical_lines, is_borderline, CriticalCurve, LineId, Sampling,
};
use crate::dynamics::{momentum_numerator, InvariantPoint, Params, Strengths};
use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Residual above which a monodromy result is unreliable.
pub const MAX_RESIDUAL: f64 = 0.05;

/// Orientation of the glued xi-cycle relative to increasing `I_xi^mod`.
/// With this sign a loop around the line `g = h + mu1 + mu2` has `m = 1`
/// for every reference.
const XI_CYCLE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoopShape {
    Ellipse,
    /// `|x|^p + |y|^p = 1`.
    Superellipse(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// Closed curve in the `(g, l)`-plane at fixed `h`, centered on `(g0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPath {
    pub h: f64,
    pub g0: f64,
    pub dg: f64,
    pub dl: f64,
    pub shape: LoopShape,
    pub orientation: Orientation,
}

impl LoopPath {
    pub fn ellipse(h: f64, g0: f64, dg: f64, dl: f64) -> Self {
        Self { h, g0, dg, dl, shape: LoopShape::Ellipse, orientation: Orientation::CounterClockwise }
    }

    /// `(g, l)` at parameter `t` in `[0, 1)`, starting at `(g0 + dg, 0)`.
    pub fn point(&self, t: f64) -> (f64, f64) {
        let th = match self.orientation {
            Orientation::CounterClockwise => TAU * t,
            Orientation::Clockwise => -TAU * t,
        };
        let (s, c) = th.sin_cos();
        let (x, y) = match self.shape {
            LoopShape::Ellipse => (c, s),
            LoopShape::Superellipse(p) => {
                let e = 2.0 / p;
                (c.signum() * c.abs().powf(e), s.signum() * s.abs().powf(e))
            }
        };
        (self.g0 + self.dg * x, self.dl * y)
    }

    /// The two crossings of `l = 0`, `g_a < g_b`.
    pub fn crossings(&self) -> (f64, f64) {
        (self.g0 - self.dg, self.g0 + self.dg)
    }

    /// `n` points at half-step offsets, so none lies on `l = 0`.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|k| self.point((k as f64 + 0.5) / n as f64)).collect()
    }
}

/// Numbers of real numerator roots inside the xi- and eta-ranges.
fn root_signature(f: &InvariantPoint, s: Strengths, a: f64) -> Result<(usize, usize)> {
    let nx = momentum_numerator(f, s.xi, a).real_roots()?.into_iter().filter(|&r| r > 1.0).count();
    let ne = momentum_numerator(f, s.eta, a).real_roots()?.into_iter().filter(|&r| r.abs() < 1.0).count();
    Ok((nx, ne))
}

fn segments_cross(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let orient = |a: (f64, f64), b: (f64, f64), c: (f64, f64)| (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn loop_hits_curve(poly: &[(f64, f64)], curve: &CriticalCurve) -> bool {
    let pts: Vec<(f64, f64)> = curve.samples.iter().map(|s| (s.point.g, s.point.l)).collect();
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        for w in pts.windows(2) {
            if segments_cross(a, b, w[0], w[1]) {
                return true;
            }
        }
    }
    false
}

/// Lines enclosed by a validated loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopReport {
    pub enclosed: Vec<LineId>,
}

/// Checks that the loop lies in the non-trapping region of both the original
/// and the reference system and meets no critical value.
pub fn validate_loop(lp: &LoopPath, p: &Params, rf: ReferenceChoice) -> Result<LoopReport> {
    if !(lp.h > 0.0 && lp.dg > 0.0 && lp.dl > 0.0) {
        return Err(Error::Loop(format!("need h, dg, dl > 0, got {lp:?}")));
    }
    let systems = [p.strengths(), rf.strengths(p)];
    let (ga, gb) = lp.crossings();
    for g in [ga, gb] {
        let f = InvariantPoint::new(lp.h, 0.0, g);
        for s in systems {
            let q = Params { mu1: 0.5 * (s.xi + s.eta), mu2: 0.5 * (s.xi - s.eta), a: p.a };
            if is_borderline(&f, &q)? {
                return Err(Error::Loop(format!("crossing g = {g} is on the critical set")));
            }
            if !classify_with(&f, s, p)?.scattering() {
                return Err(Error::Loop(format!("crossing g = {g} is not a scattering value")));
            }
        }
    }
    let poly = lp.samples(1024);
    let mut signature = None;
    for &(g, l) in &poly {
        let f = InvariantPoint::new(lp.h, l, g);
        let mut sig = Vec::new();
        for s in systems {
            if !classify_with(&f, s, p)?.non_trapping() {
                return Err(Error::Loop(format!("loop point (g, l) = ({g}, {l}) is not non-trapping")));
            }
            sig.push(root_signature(&f, s, p.a)?);
        }
        match &signature {
            None => signature = Some(sig),
            Some(s0) if *s0 != sig => {
                return Err(Error::Loop(format!("root structure changes along the loop near ({g}, {l})")))
            }
            _ => {}
        }
    }
    let sampling = Sampling { count: 4000, ..Sampling::default() };
    for q in [*p, rf.params(p)] {
        for c in critical_curves_spatial(&q, lp.h, &sampling) {
            if loop_hits_curve(&poly, &c) {
                return Err(Error::Loop(format!("loop meets the {} critical family", c.family.name())));
            }
        }
    }
    let enclosed = critical_lines(p)
        .iter()
        .filter(|line| {
            let g = line.g_at(lp.h);
            g > ga && g < gb
        })
        .map(|line| line.id)
        .collect();
    Ok(LoopReport { enclosed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyResult {
    pub m: i64,
    pub n: i64,
    /// Unrounded `(m, n)`.
    pub raw: [f64; 2],
    /// `J_xi` at `g_a`, `g_b`.
    pub jump_xi: [f64; 2],
    /// `J_eta` at `g_a`, `g_b`.
    pub jump_eta: [f64; 2],
    pub residual: f64,
    pub reference: ReferenceChoice,
    pub crossings: [f64; 2],
    pub enclosed: Vec<LineId>,
}

impl MonodromyResult {
    pub fn reliable(&self) -> bool {
        self.residual < MAX_RESIDUAL
    }

    /// Matrix in the basis `(c_xi, c_eta, c_phi)`.
    pub fn matrix(&self) -> [[i64; 3]; 3] {
        [[1, 0, self.m], [0, 1, self.n], [0, 0, 1]]
    }

    pub fn mn(&self) -> (i64, i64) {
        (self.m, self.n)
    }
}

/// Product of unipotent matrices of the form `(1,0,m),(0,1,n),(0,0,1)`.
pub fn compose(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 + b.0, a.1 + b.1)
}

/// Jump `J = 2 lim_{l -> 0+} dI/dl` of an action at `(h, g)`.
pub fn jump(kind: ActionKind, h: f64, g: f64, p: &Params, rf: ReferenceChoice) -> Result<f64> {
    Ok(2.0 * dl_limit(kind, h, g, p, rf, DL_EPS)?.value)
}

pub fn monodromy_matrix(lp: &LoopPath, p: &Params, rf: ReferenceChoice) -> Result<MonodromyResult> {
    let report = validate_loop(lp, p, rf)?;
    let (ga, gb) = lp.crossings();
    let ((xa, xb), (ea, eb)) = rayon::join(
        || rayon::join(|| jump(ActionKind::XiMod, lp.h, ga, p, rf), || jump(ActionKind::XiMod, lp.h, gb, p, rf)),
        || rayon::join(|| jump(ActionKind::Eta, lp.h, ga, p, rf), || jump(ActionKind::Eta, lp.h, gb, p, rf)),
    );
    let (xa, xb, ea, eb) = (xa?, xb?, ea?, eb?);
    let sign = match lp.orientation {
        Orientation::CounterClockwise => 1.0,
        Orientation::Clockwise => -1.0,
    };
    let raw_m = sign * XI_CYCLE_SIGN * (xa - xb);
    let raw_n = sign * (ea - eb);
    let (m, n) = (raw_m.round(), raw_n.round());
    Ok(MonodromyResult {
        m: m as i64,
        n: n as i64,
        raw: [raw_m, raw_n],
        jump_xi: [xa, xb],
        jump_eta: [ea, eb],
        residual: (raw_m - m).abs().max((raw_n - n).abs()),
        reference: rf,
        crossings: [ga, gb],
        enclosed: report.enclosed,
    })
}

/// Classical monodromy: the original system serves as its own reference.
pub fn hamiltonian_monodromy(lp: &LoopPath, p: &Params) -> Result<MonodromyResult> {
    monodromy_matrix(lp, p, ReferenceChoice::SelfReference)
}

/// Values of `g` on `l = 0` at energy `h` where some critical family of the
/// original or reference system meets the axis of the slice.
pub fn axis_critical_values(p: &Params, h: f64, rf: ReferenceChoice) -> Vec<f64> {
    let mut v: Vec<f64> = critical_lines(p).iter().map(|l| l.g_at(h)).collect();
    let a2 = p.a * p.a;
    let hs = a2 * h;
    if hs != 0.0 {
        for q in [*p, rf.params(p)] {
            // lambda-family (sum strength) and nu-family (difference strength).
            let lam = p.a * (q.mu1 + q.mu2);
            let nu = p.a * (q.mu1 - q.mu2);
            if -lam / (2.0 * hs) >= 1.0 {
                v.push(-lam * lam / (4.0 * hs) + (1.0 - a2) * h);
            }
            if nu != 0.0 && (nu / (2.0 * hs)).abs() <= 1.0 {
                v.push(-nu * nu / (4.0 * hs) + (1.0 - a2) * h);
            }
        }
    }
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    v
}

/// A loop around one line or a group of coincident lines.
#[derive(Debug, Clone, PartialEq)]
pub struct LineLoop {
    pub lines: Vec<LineId>,
    pub path: LoopPath,
}

impl LineLoop {
    pub fn label(&self) -> String {
        self.lines.iter().map(|l| l.name()).collect::<Vec<_>>().join("+")
    }
}

/// Groups of coincident lines, ordered by offset.
pub fn line_groups(p: &Params) -> Vec<(f64, Vec<LineId>)> {
    let mut lines = critical_lines(p).to_vec();
    lines.sort_by(|a, b| a.offset.total_cmp(&b.offset).then((a.id as u8).cmp(&(b.id as u8))));
    let mut groups: Vec<(f64, Vec<LineId>)> = Vec::new();
    for line in lines {
        match groups.last_mut() {
            Some((off, ids)) if (line.offset - *off).abs() < 1e-12 => ids.push(line.id),
            _ => groups.push((line.offset, vec![line.id])),
        }
    }
    groups
}

/// Elliptic loop enclosing exactly the given lines, shrinking the
/// `l`-extent until the loop avoids all critical values.
pub fn loop_around(p: &Params, h: f64, rf: ReferenceChoice, ids: &[LineId]) -> Result<LoopPath> {
    let offsets: Vec<f64> = critical_lines(p).iter().filter(|l| ids.contains(&l.id)).map(|l| l.offset).collect();
    if offsets.is_empty() {
        return Err(Error::Loop("no lines requested".into()));
    }
    let lo = h + offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = h + offsets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = axis_critical_values(p, h, rf)
        .into_iter()
        .filter(|&v| v < lo - 1e-12 || v > hi + 1e-12)
        .map(|v| (v - lo).abs().min((v - hi).abs()))
        .fold(f64::INFINITY, f64::min);
    let dg = 0.5 * (hi - lo) + (0.45 * gap).min(1.0);
    let mut want = ids.to_vec();
    want.sort_by_key(|id| *id as u8);
    let mut dl = dg.min(1.0);
    let mut last_err = None;
    for _ in 0..14 {
        let lp = LoopPath::ellipse(h, 0.5 * (lo + hi), dg, dl);
        match validate_loop(&lp, p, rf) {
            Ok(r) => {
                let mut got = r.enclosed;
                got.sort_by_key(|id| *id as u8);
                if got != want {
                    return Err(Error::Loop(format!("a loop around {want:?} also encloses {got:?}")));
                }
                return Ok(lp);
            }
            Err(e) => last_err = Some(e),
        }
        dl *= 0.5;
    }
    Err(last_err.unwrap_or_else(|| Error::Loop("no valid loop".into())))
}

/// A valid loop around each group of coincident lines.
pub fn loops_around_lines(p: &Params, h: f64, rf: ReferenceChoice) -> Result<Vec<LineLoop>> {
    line_groups(p)
        .into_iter()
        .map(|(_, mut ids)| {
            ids.sort_by_key(|id| *id as u8);
            let path = loop_around(p, h, rf, &ids)?;
            Ok(LineLoop { lines: ids, path })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub lines: Vec<LineId>,
    pub path: LoopPath,
    pub result: MonodromyResult,
}

/// Monodromy around every (group of) critical line(s) at energy `h`.
pub fn table1(p: &Params, h: f64, rf: ReferenceChoice) -> Result<Vec<TableEntry>> {
    use rayon::prelude::*;
    loops_around_lines(p, h, rf)?
        .into_par_iter()
        .map(|ll| {
            let result = monodromy_matrix(&ll.path, p, rf)?;
            Ok(TableEntry { lines: ll.lines, path: ll.path, result })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_geometry() {
        let lp = LoopPath::ellipse(1.0, 2.0, 0.5, 0.3);
        assert_eq!(lp.point(0.0), (2.5, 0.0));
        let (g, l) = lp.point(0.25);
        assert!((g - 2.0).abs() < 1e-15 && (l - 0.3).abs() < 1e-15);
        assert_eq!(lp.crossings(), (1.5, 2.5));
        let sq = LoopPath { shape: LoopShape::Superellipse(4.0), ..lp };
        let (g, l) = sq.point(0.125);
        assert!(((g - 2.0) / 0.5).powi(4) + (l / 0.3).powi(4) - 1.0 < 1e-12);
    }

    #[test]
    fn crossing_on_line_is_rejected() {
        let p = Params::unit(2.0, 1.0);
        let lp = LoopPath::ellipse(1.0, 1.5, 0.5, 0.2);
        assert!(matches!(validate_loop(&lp, &p, ReferenceChoice::KeplerAtO2), Err(Error::Loop(_))));
    }

    #[test]
    fn compose_adds() {
        assert_eq!(compose((-1, 1), (1, 0)), (0, 1));
    }
}
