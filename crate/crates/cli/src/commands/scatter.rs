use super::monodromy::parse_loop;
use super::Outcome;
use crate::config::{RunConfig, ScatterOptions};
use crate::error::CliError;
use crate::output::{Cell, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;
use twocenter::actions::ReferenceChoice;
use twocenter::knauf::{knauf_degree_planar, KnaufOptions, Potential, RadialTable};
use twocenter::monodromy::{loop_around, monodromy_matrix};
use twocenter::scattering::{deflection_difference, deflection_loop, scatter, Asymptote, DEFLECTION_RADII};
use twocenter::{eval_integrals, integrate, Error, InvariantPoint, Params, PhaseState, StopConditions};

fn potential(o: &ScatterOptions, name: &str) -> Result<Potential, CliError> {
    if name != "table" {
        return Ok(Potential::from_name(name)?);
    }
    let path = o.table.as_ref().ok_or_else(|| CliError::Config("--knauf table needs --table".into()))?;
    let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(Potential::Tabulated(RadialTable::from_csv(file)?))
}

fn knauf(o: &ScatterOptions, name: &str) -> Result<Outcome, CliError> {
    let pot = potential(o, name)?;
    let opts = KnaufOptions { samples: o.samples, direction: o.direction, ..Default::default() };
    let results = o.h.par_iter().map(|&h| knauf_degree_planar(&pot, h, &opts)).collect::<twocenter::Result<Vec<_>>>()?;
    let mut t = Table::new("knauf", &["h", "degree", "raw_winding", "b", "angle"]);
    t.meta("potential", name);
    t.meta("sup_v", pot.sup());
    t.meta("samples", o.samples);
    t.meta("direction", o.direction);
    for (&h, r) in o.h.iter().zip(&results) {
        for &(b, angle) in &r.sweep {
            t.push(vec![h.into(), r.degree.into(), r.raw.into(), b.into(), angle.into()]);
        }
    }
    Ok(Outcome { tables: vec![t], failure: None })
}

fn loop_variation(cfg: &RunConfig, o: &ScatterOptions, name: &str) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let rf = ReferenceChoice::from(o.reference);
    let h = o.h[0];
    let ids = parse_loop(name)?;
    let lp = loop_around(&p, h, rf, &ids)?;
    let (d, m) = rayon::join(|| deflection_loop(&lp, &p, rf, o.points, &DEFLECTION_RADII), || monodromy_matrix(&lp, &p, rf));
    let (d, m) = (d?, m?);
    let mut t = Table::new("deflection_loop", &["k", "s", "g", "l", "total", "xi_channel", "error"]);
    let turns = d.variation_xi / TAU;
    t.meta("loop", name);
    t.meta("reference", rf.name());
    t.meta("h", h);
    t.meta("g0", lp.g0);
    t.meta("dg", lp.dg);
    t.meta("dl", lp.dl);
    t.meta("variation_xi", d.variation_xi);
    t.meta("variation_total", d.variation_total);
    t.meta("turns", turns);
    t.meta("monodromy_m", m.m);
    t.meta("matches_monodromy", (turns - m.m as f64).abs() < 0.01);
    for (k, (g, l, s)) in d.samples.iter().enumerate() {
        let u = (k as f64 + 0.5) / o.points as f64;
        t.push(vec![k.into(), u.into(), (*g).into(), (*l).into(), s.total.into(), s.xi_channel.into(), s.error.into()]);
    }
    Ok(Outcome { tables: vec![t], failure: None })
}

fn fiber(cfg: &RunConfig, o: &ScatterOptions, [h, l, g]: [f64; 3]) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let rf = ReferenceChoice::from(o.reference);
    let f = InvariantPoint::new(h, l, g);
    let mut t = Table::new("deflection", &["radius", "total", "xi_channel"]);
    t.meta("h", h);
    t.meta("l", l);
    t.meta("g", g);
    t.meta("reference", rf.name());
    match deflection_difference(&f, &p, rf, &DEFLECTION_RADII) {
        Ok(d) => {
            t.meta("status", "ok");
            t.meta("total", d.total);
            t.meta("xi_channel", d.xi_channel);
            t.meta("error", d.error);
            for (r, tot, xi) in d.tail {
                t.push(vec![r.into(), tot.into(), xi.into()]);
            }
        }
        Err(e) => t.meta("status", e.to_string()),
    }
    Ok(Outcome { tables: vec![t], failure: None })
}

/// Seeded initial conditions with energies in `[0.2, 2]`, away from the centers.
fn random_states(n: usize, seed: u64, p: &Params) -> Vec<PhaseState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let q = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let d = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
        let h: f64 = rng.gen_range(0.2..2.0);
        let s = PhaseState::new(q, d);
        let (r1, r2) = p.distances(&s.q);
        let k2 = 2.0 * (h - p.potential(&s.q));
        if r1.min(r2) < 0.1 || s.p.norm() < 1e-3 || k2 <= 0.0 {
            continue;
        }
        out.push(PhaseState { q: s.q, p: s.p.normalize() * k2.sqrt() });
    }
    out
}

const ASYMPTOTE_COLUMNS: [&str; 27] = [
    "index", "status", "x0", "y0", "z0", "px0", "py0", "pz0", "h", "l", "g", "in_px", "in_py", "in_pz", "in_qx", "in_qy",
    "in_qz", "out_px", "out_py", "out_pz", "out_qx", "out_qy", "out_qz", "in_error", "out_error", "drift", "samples",
];

fn asymptote_cells(a: Option<&Asymptote>) -> Vec<Cell> {
    match a {
        Some(a) => a.p_hat.iter().chain(a.q_perp.iter()).map(|&x| x.into()).collect(),
        None => vec![f64::NAN.into(); 6],
    }
}

fn status(e: &Error) -> String {
    match e {
        Error::Trapped(_) | Error::TrappingEnergy(_) => "trapped".into(),
        Error::Collision { .. } => "collision".into(),
        e => format!("error: {e}"),
    }
}

fn trajectories(cfg: &RunConfig, o: &ScatterOptions) -> Result<Outcome, CliError> {
    let p = cfg.params()?;
    let states = match (o.q, o.p) {
        (Some(q), Some(pp)) => vec![PhaseState::new(q, pp)],
        _ => random_states(o.random, cfg.seed, &p),
    };
    let stop = StopConditions { r_max: o.r_max, ..Default::default() };
    let runs: Vec<_> = states.par_iter().map(|s| scatter(s, &p, &stop)).collect();
    let mut t = Table::new("asymptotes", &ASYMPTOTE_COLUMNS);
    t.meta("r_max", o.r_max);
    t.meta("count", states.len());
    for (k, (s, run)) in states.iter().zip(&runs).enumerate() {
        let f = eval_integrals(s, &p).map_or([f64::NAN; 3], |f| f.as_array());
        let mut row: Vec<Cell> = vec![k.into()];
        row.push(match run {
            Ok(_) => "scattered".into(),
            Err(e) => status(e).into(),
        });
        row.extend(s.q.iter().chain(s.p.iter()).map(|&x| Cell::from(x)));
        row.extend(f.map(Cell::from));
        let sc = run.as_ref().ok();
        row.extend(asymptote_cells(sc.map(|x| &x.incoming)));
        row.extend(asymptote_cells(sc.map(|x| &x.outgoing)));
        row.push(sc.map_or(f64::NAN, |x| x.incoming.error).into());
        row.push(sc.map_or(f64::NAN, |x| x.outgoing.error).into());
        let drift = sc.and_then(|x| x.trajectory.max_relative_drift(&p).ok()).map_or(f64::NAN, |d| d[0].max(d[1]).max(d[2]));
        row.push(drift.into());
        row.push(sc.map_or(0, |x| x.trajectory.samples.len()).into());
        t.push(row);
    }
    let mut tables = vec![t];
    if let [s] = states.as_slice() {
        let traj = match &runs[0] {
            Ok(sc) => sc.trajectory.clone(),
            Err(_) => integrate(s, &p, &stop)?,
        };
        let mut tt = Table::new("trajectory", &["t", "x", "y", "z", "px", "py", "pz"]);
        tt.meta("termination", traj.termination.as_str());
        for (time, st) in &traj.samples {
            let mut row: Vec<Cell> = vec![(*time).into()];
            row.extend(st.q.iter().chain(st.p.iter()).map(|&x| Cell::from(x)));
            tt.push(row);
        }
        tables.push(tt);
    }
    Ok(Outcome { tables, failure: None })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let o = cfg.scatter.as_ref().expect("scatter options");
    if let Some(name) = &o.knauf {
        knauf(o, name)
    } else if let Some(name) = &o.deflection_loop {
        loop_variation(cfg, o, name)
    } else if let Some(f) = o.fiber {
        fiber(cfg, o, f)
    } else {
        trajectories(cfg, o)
    }
}
