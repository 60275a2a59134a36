use crate::config::{BifdiagOptions, Plane, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};
use rayon::prelude::*;
use twocenter::bifurcation::*;
use twocenter::{InvariantPoint, Params};

const COLUMNS: [&str; 13] =
    ["kind", "family", "branch", "param", "h", "l", "g", "physical", "borderline", "xi_intervals", "eta_intervals", "unbounded", "region"];

fn curve_rows(t: &mut Table, curves: &[CriticalCurve]) {
    for c in curves {
        for s in &c.samples {
            let pt = s.point;
            t.push(vec![
                "curve".into(),
                c.family.name().into(),
                c.branch.into(),
                s.param.into(),
                pt.h.into(),
                pt.l.into(),
                pt.g.into(),
                s.physical.into(),
                "".into(),
                "".into(),
                "".into(),
                "".into(),
                "".into(),
            ]);
        }
    }
}

fn line_row(t: &mut Table, line: &CriticalLine, h: f64, p: &Params) {
    let pt = InvariantPoint::new(h, 0.0, line.g_at(h));
    t.push(vec![
        "line".into(),
        line.id.name().into(),
        0usize.into(),
        f64::NAN.into(),
        h.into(),
        0.0.into(),
        pt.g.into(),
        is_attained(&pt, p).into(),
        "".into(),
        "".into(),
        "".into(),
        "".into(),
        "".into(),
    ]);
}

/// Labels 4-connected components of equal keys on an `n x n` grid,
/// row-major. Cells without a key are left unlabeled.
fn label_regions<K: PartialEq>(keys: &[Option<K>], n: usize) -> (Vec<Option<usize>>, usize) {
    let mut label = vec![None; keys.len()];
    let mut count = 0;
    for start in 0..keys.len() {
        if keys[start].is_none() || label[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        label[start] = Some(count);
        while let Some(k) = stack.pop() {
            let (i, j) = (k / n, k % n);
            let mut nb = Vec::with_capacity(4);
            if i > 0 {
                nb.push(k - n);
            }
            if i + 1 < n {
                nb.push(k + n);
            }
            if j > 0 {
                nb.push(k - 1);
            }
            if j + 1 < n {
                nb.push(k + 1);
            }
            for m in nb {
                if label[m].is_none() && keys[m].is_some() && keys[m] == keys[k] {
                    label[m] = Some(count);
                    stack.push(m);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

fn axis(r: [f64; 2], n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64)
}

/// Classifies the grid `points` (row-major, `n x n`) and appends the rows.
fn grid_rows(t: &mut Table, points: Vec<InvariantPoint>, n: usize, p: &Params) -> Result<(), CliError> {
    let classes = points.par_iter().map(|f| classify(f, p)).collect::<twocenter::Result<Vec<_>>>()?;
    // Physical regions of one fiber type: same interval counts and escape.
    let keys: Vec<_> = classes
        .iter()
        .map(|c| (c.physical && !c.borderline).then(|| (c.xi_intervals.len(), c.eta_intervals.len(), c.scattering())))
        .collect();
    let (labels, regions) = label_regions(&keys, n);
    for ((f, c), lab) in points.iter().zip(&classes).zip(&labels) {
        t.push(vec![
            "grid".into(),
            "".into(),
            "".into(),
            f64::NAN.into(),
            f.h.into(),
            f.l.into(),
            f.g.into(),
            c.physical.into(),
            c.borderline.into(),
            c.xi_intervals.len().into(),
            c.eta_intervals.len().into(),
            c.scattering().into(),
            lab.map_or(Cell::from(""), Cell::from),
        ]);
    }
    t.meta("regions", regions);
    t.meta("physical_rows", classes.iter().filter(|c| c.physical).count());
    Ok(())
}

fn spatial_slice(o: &BifdiagOptions, h: f64, p: &Params, name: String) -> Result<Table, CliError> {
    let mut t = Table::new(name, &COLUMNS);
    t.meta("plane", "spatial");
    t.meta("h", h);
    t.meta("grid", o.grid);
    for line in critical_lines(p) {
        line_row(&mut t, &line, h, p);
    }
    let sampling = Sampling { count: o.curve_samples, ..Default::default() };
    curve_rows(&mut t, &critical_curves_spatial(p, h, &sampling));
    // Rows of constant g, l varying fastest.
    let points: Vec<_> = axis(o.g_range, o.grid)
        .flat_map(|g| axis(o.l_range, o.grid).map(move |l| InvariantPoint::new(h, l, g)))
        .collect();
    grid_rows(&mut t, points, o.grid, p)?;
    Ok(t)
}

fn planar(o: &BifdiagOptions, p: &Params) -> Result<Table, CliError> {
    let mut t = Table::new("planar", &COLUMNS);
    t.meta("plane", "planar");
    t.meta("grid", o.grid);
    for line in critical_lines(p) {
        for h in o.h_range {
            line_row(&mut t, &line, h, p);
        }
    }
    let sampling = Sampling { count: o.curve_samples, ..Default::default() };
    curve_rows(&mut t, &critical_curves_planar(p, &sampling));
    let points: Vec<_> = axis(o.g_range, o.grid)
        .flat_map(|g| axis(o.h_range, o.grid).map(move |h| InvariantPoint::new(h, 0.0, g)))
        .collect();
    grid_rows(&mut t, points, o.grid, p)?;
    Ok(t)
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let o = cfg.bifdiag.as_ref().expect("bifdiag options");
    let p = cfg.params()?;
    match o.plane {
        Plane::Planar => Ok(vec![planar(o, &p)?]),
        Plane::Spatial => o.h.iter().enumerate().map(|(k, &h)| spatial_slice(o, h, &p, format!("slice_{k}"))).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_are_four_connected() {
        #[rustfmt::skip]
        let keys = [
            Some(1), None, Some(1),
            None, None, Some(1),
            Some(1), Some(2), None,
        ];
        let (labels, n) = label_regions(&keys, 3);
        assert_eq!(n, 4);
        assert_eq!(labels[2], labels[5]);
        assert_ne!(labels[6], labels[7]);
        assert_ne!(labels[0], labels[2]);
        assert_eq!(labels[1], None);
    }
}
