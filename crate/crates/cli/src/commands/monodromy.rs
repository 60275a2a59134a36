use super::Outcome;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Table;
use rayon::prelude::*;
use twocenter::actions::ReferenceChoice;
use twocenter::bifurcation::LineId;
use twocenter::monodromy::*;
use twocenter::Params;

const COLUMNS: [&str; 23] = [
    "mu1", "mu2", "a", "h", "reference", "loop", "g0", "dg", "dl", "g_a", "g_b", "m", "n", "raw_m", "raw_n",
    "jump_xi_a", "jump_xi_b", "jump_eta_a", "jump_eta_b", "residual", "reliable", "matrix", "enclosed",
];

/// Parses `gamma1+gamma3` into line ids.
pub fn parse_loop(s: &str) -> Result<Vec<LineId>, CliError> {
    s.split('+')
        .map(|part| match part.trim() {
            "gamma1" => Ok(LineId::L1),
            "gamma2" => Ok(LineId::L2),
            "gamma3" => Ok(LineId::L3),
            other => Err(CliError::Config(format!("unknown loop {other:?} (gamma1, gamma2, gamma3)"))),
        })
        .collect()
}

fn label(ids: &[LineId]) -> String {
    ids.iter()
        .map(|id| match id {
            LineId::L1 => "gamma1",
            LineId::L2 => "gamma2",
            LineId::L3 => "gamma3",
        })
        .collect::<Vec<_>>()
        .join("+")
}

struct Job {
    p: Params,
    rf: ReferenceChoice,
    name: String,
    path: LoopPath,
}

fn jobs(cfg: &RunConfig) -> Result<Vec<Job>, CliError> {
    let o = cfg.monodromy.as_ref().expect("monodromy options");
    let cases = if o.cases.is_empty() { vec![[cfg.mu1, cfg.mu2]] } else { o.cases.clone() };
    let mut out = Vec::new();
    for [m1, m2] in cases {
        let p = Params::new(m1, m2, cfg.a)?;
        for &r in &o.reference {
            let rf = ReferenceChoice::from(r);
            if let Some([g0, dg, dl]) = o.ellipse {
                out.push(Job { p, rf, name: "ellipse".into(), path: LoopPath::ellipse(o.h, g0, dg, dl) });
                continue;
            }
            for spec in &o.loops {
                if spec == "all" {
                    for ll in loops_around_lines(&p, o.h, rf)? {
                        out.push(Job { p, rf, name: label(&ll.lines), path: ll.path });
                    }
                } else {
                    let ids = parse_loop(spec)?;
                    out.push(Job { p, rf, name: label(&ids), path: loop_around(&p, o.h, rf, &ids)? });
                }
            }
        }
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let jobs = jobs(cfg)?;
    let results = jobs
        .par_iter()
        .map(|j| monodromy_matrix(&j.path, &j.p, j.rf))
        .collect::<twocenter::Result<Vec<_>>>()?;
    let mut t = Table::new("monodromy", &COLUMNS);
    let mut unreliable = Vec::new();
    for (j, r) in jobs.iter().zip(&results) {
        if !r.reliable() {
            unreliable.push(format!("({}, {}) {} {}: residual {:e}", j.p.mu1, j.p.mu2, j.rf.name(), j.name, r.residual));
        }
        let enclosed: Vec<&str> = r.enclosed.iter().map(|id| id.name()).collect();
        t.push(vec![
            j.p.mu1.into(),
            j.p.mu2.into(),
            j.p.a.into(),
            j.path.h.into(),
            j.rf.name().into(),
            j.name.clone().into(),
            j.path.g0.into(),
            j.path.dg.into(),
            j.path.dl.into(),
            r.crossings[0].into(),
            r.crossings[1].into(),
            r.m.into(),
            r.n.into(),
            r.raw[0].into(),
            r.raw[1].into(),
            r.jump_xi[0].into(),
            r.jump_xi[1].into(),
            r.jump_eta[0].into(),
            r.jump_eta[1].into(),
            r.residual.into(),
            r.reliable().into(),
            format!("{:?}", r.matrix()).into(),
            enclosed.join("+").into(),
        ]);
    }
    t.meta("rows", results.len());
    t.meta("unreliable", unreliable.len());
    t.meta("max_residual", MAX_RESIDUAL);
    let failure = (!unreliable.is_empty()).then(|| unreliable.join("; "));
    Ok(Outcome { tables: vec![t], failure })
}
