//! Knauf's degree for planar scattering by regular short-range potentials.

use crate::error::{Error, Result};
use crate::ode::{self, Control, Finish, OdeOptions, OdeSystem};
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::io::Read;

/// Planar potential `V(q)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `v0 exp(-|q|^2 / (2 sigma^2))`.
    GaussianBump { v0: f64, sigma: f64 },
    /// `-mu1/|q - (0,-a)| - mu2/|q - (0,a)|`.
    TwoCenter { mu1: f64, mu2: f64, a: f64 },
    /// `-mu/|q|`.
    Kepler { mu: f64 },
    /// Radial profile, cubic Hermite between nodes and zero beyond the last one.
    Tabulated(RadialTable),
}

impl Potential {
    /// Registry lookup; numeric parameters take defaults when absent.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" | "gaussian-bump" => Ok(Potential::GaussianBump { v0: 1.0, sigma: 1.0 }),
            "two-center" => Ok(Potential::TwoCenter { mu1: 2.0, mu2: 1.0, a: 1.0 }),
            "kepler" => Ok(Potential::Kepler { mu: 1.0 }),
            _ => Err(Error::InvalidParams(format!("unknown potential {name:?}"))),
        }
    }

    pub fn value(&self, q: [f64; 2]) -> f64 {
        let r = q[0].hypot(q[1]);
        match self {
            Potential::GaussianBump { v0, sigma } => v0 * (-r * r / (2.0 * sigma * sigma)).exp(),
            Potential::TwoCenter { mu1, mu2, a } => {
                -mu1 / q[0].hypot(q[1] + a) - mu2 / q[0].hypot(q[1] - a)
            }
            Potential::Kepler { mu } => -mu / r,
            Potential::Tabulated(t) => t.eval(r).0,
        }
    }

    pub fn gradient(&self, q: [f64; 2]) -> [f64; 2] {
        let r = q[0].hypot(q[1]);
        let radial = |dv: f64| if r == 0.0 { [0.0, 0.0] } else { [dv * q[0] / r, dv * q[1] / r] };
        match self {
            Potential::GaussianBump { sigma, .. } => {
                let v = self.value(q) / (sigma * sigma);
                [-v * q[0], -v * q[1]]
            }
            Potential::TwoCenter { mu1, mu2, a } => {
                let d1 = [q[0], q[1] + a];
                let d2 = [q[0], q[1] - a];
                let c1 = mu1 / d1[0].hypot(d1[1]).powi(3);
                let c2 = mu2 / d2[0].hypot(d2[1]).powi(3);
                [c1 * d1[0] + c2 * d2[0], c1 * d1[1] + c2 * d2[1]]
            }
            Potential::Kepler { mu } => radial(mu / (r * r)),
            Potential::Tabulated(t) => radial(t.eval(r).1),
        }
    }

    /// Free of singularities.
    pub fn regular(&self) -> bool {
        matches!(self, Potential::GaussianBump { .. } | Potential::Tabulated(_))
    }

    /// Radius beyond which the potential is treated as zero.
    pub fn support(&self) -> Option<f64> {
        match self {
            Potential::GaussianBump { sigma, .. } => Some(9.0 * sigma),
            Potential::Tabulated(t) => t.r.last().copied(),
            _ => None,
        }
    }

    /// Supremum of `V` (for regular potentials).
    pub fn sup(&self) -> f64 {
        match self {
            Potential::GaussianBump { v0, .. } => v0.max(0.0),
            Potential::Tabulated(t) => t.v.iter().fold(0.0, |m, &x| m.max(x)),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialTable {
    r: Vec<f64>,
    v: Vec<f64>,
    slope: Vec<f64>,
}

impl RadialTable {
    /// Nodes must start at `r = 0` and increase strictly.
    pub fn new(r: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != v.len() {
            return Err(Error::Table("need at least two (r, V) rows".into()));
        }
        if r[0] != 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Table("radii must start at 0 and increase".into()));
        }
        let n = r.len();
        let slope = (0..n)
            .map(|i| match i {
                0 => 0.0,
                _ if i == n - 1 => (v[i] - v[i - 1]) / (r[i] - r[i - 1]),
                _ => (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]),
            })
            .collect();
        Ok(Self { r, v, slope })
    }

    /// Reads `r,V` columns with a header row.
    pub fn from_csv<R: Read>(src: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(src);
        let (mut r, mut v) = (Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::Table(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Table("short row".into()))?
                    .parse()
                    .map_err(|e| Error::Table(format!("{e}")))
            };
            r.push(num(0)?);
            v.push(num(1)?);
        }
        Self::new(r, v)
    }

    /// `(V, dV/dr)` at radius `x`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.r.len();
        if x >= self.r[n - 1] {
            return (0.0, 0.0);
        }
        let i = self.r.partition_point(|&ri| ri <= x) - 1;
        let hgt = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / hgt;
        let (t2, t3) = (t * t, t * t * t);
        let (y0, y1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.slope[i] * hgt, self.slope[i + 1] * hgt);
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
        let dv = (6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1;
        (v, dv / hgt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnaufOptions {
    /// Uniform samples of the compactified impact-parameter circle.
    pub samples: usize,
    /// Incoming direction angle.
    pub direction: f64,
    /// Neighbouring outgoing angles further apart than this get refined.
    pub refine_above: f64,
    pub max_depth: u32,
    pub tol: f64,
}

impl Default for KnaufOptions {
    fn default() -> Self {
        Self { samples: 2048, direction: 0.0, refine_above: 0.1, max_depth: 40, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnaufResult {
    pub degree: i64,
    /// Winding before rounding, in turns.
    pub raw: f64,
    /// `(impact parameter, outgoing angle)` in sweep order.
    pub sweep: Vec<(f64, f64)>,
}

struct Planar<'a>(&'a Potential);

impl OdeSystem<4> for Planar<'_> {
    fn rhs(&self, _t: f64, y: &[f64; 4]) -> [f64; 4] {
        let g = self.0.gradient([y[0], y[1]]);
        [y[2], y[3], -g[0], -g[1]]
    }
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Outgoing direction angle of the orbit entering along `direction` with
/// signed impact parameter `b` (positive to the left of the motion).
pub fn outgoing_angle(pot: &Potential, h: f64, direction: f64, b: f64, tol: f64) -> Result<f64> {
    let support = pot.support().ok_or_else(|| Error::InvalidParams("potential is not short-range".into()))?;
    if b.abs() >= support {
        return Ok(direction);
    }
    let (s, c) = direction.sin_cos();
    let r0 = support + 1.0;
    let q0 = [-r0 * c - b * s, -r0 * s + b * c];
    let k = (2.0 * (h - pot.value(q0))).sqrt();
    let exit = r0.hypot(b) + 1.0;
    let opts = OdeOptions::with_tol(tol);
    let run = ode::integrate(
        &Planar(pot),
        0.0,
        [q0[0], q0[1], k * c, k * s],
        1e4 * exit / k,
        &opts,
        |_, y| y[0].hypot(y[1]) - exit,
        |_, _| Control::<()>::Continue,
    )
    .map_err(|e| Error::Integration(format!("{e:?}")))?;
    if run.finish != Finish::Event {
        return Err(Error::TrappingEnergy(h));
    }
    Ok(run.y[3].atan2(run.y[2]))
}

/// Degree of the map from the compactified impact-parameter circle to the
/// circle of outgoing directions. The circle is traversed from `b = +inf`
/// to `b = -inf`, which gives a backscattering bump degree one.
pub fn knauf_degree_planar(pot: &Potential, h: f64, opts: &KnaufOptions) -> Result<KnaufResult> {
    if !pot.regular() {
        return Err(Error::InvalidParams("Knauf degree needs a regular potential".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidParams(format!("energy must be positive, got {h}")));
    }
    let support = pot.support().ok_or_else(|| Error::InvalidParams("potential is not short-range".into()))?;
    let b_of = |u: f64| support * (PI * (0.5 - u)).tan();
    let angle = |u: f64| outgoing_angle(pot, h, opts.direction, b_of(u), opts.tol);
    let n = opts.samples;
    let us: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let nodes = us[1..n].par_iter().map(|&u| angle(u).map(|a| (u, a))).collect::<Result<Vec<_>>>()?;
    let mut nodes = [vec![(0.0, opts.direction)], nodes, vec![(1.0, opts.direction)]].concat();
    let refined = nodes
        .par_windows(2)
        .map(|w| refine(w[0], w[1], &angle, opts, 0))
        .collect::<Result<Vec<_>>>()?;
    let last = nodes.pop().unwrap();
    let mut pts = Vec::new();
    for (node, extra) in nodes.into_iter().zip(refined) {
        pts.push(node);
        pts.extend(extra);
    }
    pts.push(last);
    let raw = pts.windows(2).map(|w| wrap(w[1].1 - w[0].1)).sum::<f64>() / TAU;
    let sweep = pts.iter().map(|&(u, a)| (if u == 0.0 || u == 1.0 { f64::INFINITY * (0.5 - u).signum() } else { b_of(u) }, a)).collect();
    Ok(KnaufResult { degree: raw.round() as i64, raw, sweep })
}

/// Interior points inserted between `a` and `b` until neighbours are close.
fn refine<F>(a: (f64, f64), b: (f64, f64), angle: &F, opts: &KnaufOptions, depth: u32) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    if wrap(b.1 - a.1).abs() <= opts.refine_above || depth >= opts.max_depth {
        return Ok(Vec::new());
    }
    let u = 0.5 * (a.0 + b.0);
    let m = (u, angle(u)?);
    let mut out = refine(a, m, angle, opts, depth + 1)?;
    out.push(m);
    out.extend(refine(m, b, angle, opts, depth + 1)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_gradient_matches_difference() {
        let p = Potential::GaussianBump { v0: 1.3, sigma: 0.8 };
        let q = [0.4, -0.7];
        let g = p.gradient(q);
        let e = 1e-6;
        let dx = (p.value([q[0] + e, q[1]]) - p.value([q[0] - e, q[1]])) / (2.0 * e);
        let dy = (p.value([q[0], q[1] + e]) - p.value([q[0], q[1] - e])) / (2.0 * e);
        assert!((g[0] - dx).abs() < 1e-8 && (g[1] - dy).abs() < 1e-8);
    }

    #[test]
    fn table_interpolates_nodes() {
        let t = RadialTable::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 0.5, 0.1, 0.0]).unwrap();
        assert_eq!(t.eval(1.0).0, 0.5);
        assert_eq!(t.eval(3.5), (0.0, 0.0));
        assert!(RadialTable::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn table_from_csv() {
        let t = RadialTable::from_csv("r,V\n0,1\n1,0.2\n2,0\n".as_bytes()).unwrap();
        assert_eq!(t.r, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn free_degree_zero() {
        let p = Potential::GaussianBump { v0: 0.0, sigma: 1.0 };
        let r = knauf_degree_planar(&p, 1.0, &KnaufOptions { samples: 64, ..Default::default() }).unwrap();
        assert_eq!(r.degree, 0);
    }

    #[test]
    fn singular_rejected() {
        let p = Potential::from_name("kepler").unwrap();
        assert!(knauf_degree_planar(&p, 1.0, &KnaufOptions::default()).is_err());
    }
}
