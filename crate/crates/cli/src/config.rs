//! Command-line flags, config files and presets, merged into a [`RunConfig`].
//!
//! Precedence, lowest first: built-in defaults, preset, config file, flags.

use crate::error::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use toml::{Table, Value};
use twocenter::actions::ReferenceChoice;

#[derive(Debug, Parser)]
#[command(name = "twocenter", version, about = "Integrable structure and scattering invariants of the two-center problem")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file with `key = value` entries and per-command sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub mu2: Option<f64>,
    /// Half the distance between the centers.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical lines, critical curves and a classification grid.
    Bifdiag(BifdiagArgs),
    /// Scattering or Hamiltonian monodromy around critical lines.
    Monodromy(MonodromyArgs),
    /// Trajectories, asymptotes, deflection angles and Knauf's degree.
    Scatter(ScatterArgs),
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Command::Bifdiag(_) => CommandName::Bifdiag,
            Command::Monodromy(_) => CommandName::Monodromy,
            Command::Scatter(_) => CommandName::Scatter,
        }
    }
}

#[derive(Debug, Args)]
pub struct BifdiagArgs {
    #[arg(long)]
    pub plane: Option<Plane>,
    /// Energies of the spatial slices.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h: Option<Vec<f64>>,
    /// Grid points per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub g_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub l_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h_range: Option<Vec<f64>>,
    #[arg(long)]
    pub curve_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    /// Reference systems: o1, o2 or self.
    #[arg(long = "ref", value_delimiter = ',')]
    pub reference: Option<Vec<RefName>>,
    #[arg(long)]
    pub h: Option<f64>,
    /// `all`, or loops such as `gamma1`, `gamma1+gamma2`.
    #[arg(long = "loop", value_delimiter = ',')]
    pub loops: Option<Vec<String>>,
    /// Explicit ellipse `g0,dg,dl` instead of loops around lines.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ellipse: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Initial position `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    /// Initial momentum `px,py,pz`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub p: Option<Vec<f64>>,
    /// Number of seeded random initial conditions.
    #[arg(long)]
    pub random: Option<usize>,
    /// Invariant point `h,l,g` for a deflection difference.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub fiber: Option<Vec<f64>>,
    /// Potential for the Knauf degree: gaussian, two-center, kepler or table.
    #[arg(long)]
    pub knauf: Option<String>,
    /// Radial potential table for `--knauf table`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Energies for the Knauf sweep, or the loop energy.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub h: Option<Vec<f64>>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub direction: Option<f64>,
    /// Loop (`gamma1`, `gamma2`, `gamma3`) for the deflection variation.
    #[arg(long)]
    pub deflection_loop: Option<String>,
    /// Samples around the deflection loop.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long = "ref")]
    pub reference: Option<RefName>,
    #[arg(long)]
    pub r_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Spatial,
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RefName {
    O1,
    O2,
    #[serde(rename = "self")]
    #[value(name = "self")]
    SelfRef,
}

impl From<RefName> for ReferenceChoice {
    fn from(r: RefName) -> Self {
        match r {
            RefName::O1 => ReferenceChoice::KeplerAtO1,
            RefName::O2 => ReferenceChoice::KeplerAtO2,
            RefName::SelfRef => ReferenceChoice::SelfReference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandName {
    Bifdiag,
    Monodromy,
    Scatter,
}

impl CommandName {
    fn key(self) -> &'static str {
        match self {
            CommandName::Bifdiag => "bifdiag",
            CommandName::Monodromy => "monodromy",
            CommandName::Scatter => "scatter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BifdiagOptions {
    pub plane: Plane,
    pub h: Vec<f64>,
    pub grid: usize,
    pub g_range: [f64; 2],
    pub l_range: [f64; 2],
    pub h_range: [f64; 2],
    pub curve_samples: usize,
}

impl Default for BifdiagOptions {
    fn default() -> Self {
        Self {
            plane: Plane::Spatial,
            h: vec![1.0],
            grid: 101,
            g_range: [-6.0, 8.0],
            l_range: [-3.0, 3.0],
            h_range: [-3.0, 3.0],
            curve_samples: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodromyOptions {
    pub reference: Vec<RefName>,
    pub h: f64,
    pub loops: Vec<String>,
    /// Strength pairs to sweep; empty means the top-level `mu1`, `mu2`.
    pub cases: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<[f64; 3]>,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self { reference: vec![RefName::O2], h: 1.0, loops: vec!["all".into()], cases: Vec::new(), ellipse: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterOptions {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<[f64; 3]>,
    pub random: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knauf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    pub h: Vec<f64>,
    pub samples: usize,
    pub direction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deflection_loop: Option<String>,
    pub points: usize,
    pub reference: RefName,
    pub r_max: f64,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self {
            q: None,
            p: None,
            random: 0,
            fiber: None,
            knauf: None,
            table: None,
            h: vec![1.0],
            samples: 2048,
            direction: 0.0,
            deflection_loop: None,
            points: 64,
            reference: RefName::O2,
            r_max: 1e3,
        }
    }
}

/// Fully resolved configuration. The output directory is kept apart so that
/// the config hash does not depend on where files are written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub mu1: f64,
    pub mu2: f64,
    pub a: f64,
    pub format: Format,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bifdiag: Option<BifdiagOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<MonodromyOptions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterOptions>,
}

impl RunConfig {
    fn defaults(command: CommandName) -> Self {
        Self {
            command,
            preset: None,
            mu1: 2.0,
            mu2: 1.0,
            a: 1.0,
            format: Format::Csv,
            seed: 0,
            bifdiag: (command == CommandName::Bifdiag).then(BifdiagOptions::default),
            monodromy: (command == CommandName::Monodromy).then(MonodromyOptions::default),
            scatter: (command == CommandName::Scatter).then(ScatterOptions::default),
        }
    }

    pub fn params(&self) -> Result<twocenter::Params, CliError> {
        twocenter::Params::new(self.mu1, self.mu2, self.a).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub const PRESETS: [&str; 8] =
    ["fig1", "appendixB-free", "thm62", "table1", "hamiltonian", "knauf", "deflection-loop", "free-trajectory"];

fn preset(name: &str, command: CommandName) -> Result<Table, CliError> {
    let (owner, src) = match name {
        "fig1" => (CommandName::Bifdiag, "mu1 = 2.0\nmu2 = 1.0\n[bifdiag]\nplane = \"spatial\"\nh = [0.2, 1.0, 5.0]\n"),
        "appendixB-free" => (CommandName::Bifdiag, "mu1 = 0.0\nmu2 = 0.0\n[bifdiag]\nplane = \"planar\"\n"),
        "thm62" => (CommandName::Monodromy, "mu1 = 2.0\nmu2 = 1.0\n[monodromy]\nreference = [\"o2\"]\nh = 1.0\n"),
        "hamiltonian" => (CommandName::Monodromy, "mu1 = 2.0\nmu2 = 1.0\n[monodromy]\nreference = [\"self\"]\nh = 1.0\n"),
        "table1" => (
            CommandName::Monodromy,
            "[monodromy]\nreference = [\"o1\", \"o2\"]\nh = 5.0\ncases = [[2.0, 1.0], [2.0, -1.0], [-2.0, 1.0], [-2.0, -1.0], \
             [1.0, -1.0], [1.0, 1.0], [-1.0, -1.0], [0.0, 0.0], [2.0, 0.0], [-2.0, 0.0]]\n",
        ),
        "knauf" => (CommandName::Scatter, "[scatter]\nknauf = \"gaussian\"\nh = [1.5, 0.5]\n"),
        "deflection-loop" => (
            CommandName::Scatter,
            "mu1 = 2.0\nmu2 = 1.0\n[scatter]\ndeflection_loop = \"gamma3\"\npoints = 64\nreference = \"o2\"\nh = [1.0]\n",
        ),
        "free-trajectory" => (
            CommandName::Scatter,
            "mu1 = 0.0\nmu2 = 0.0\n[scatter]\nq = [-5.0, 0.5, 0.25]\np = [1.0, 0.0, 0.0]\nr_max = 200.0\n",
        ),
        _ => return Err(CliError::Config(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    };
    if owner != command {
        return Err(CliError::Config(format!("preset {name:?} belongs to `{}`", owner.key())));
    }
    let mut t: Table = src.parse().expect("preset tables are valid TOML");
    t.insert("preset".into(), Value::String(name.into()));
    Ok(t)
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn put<T: Serialize>(t: &mut Table, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        t.insert(key.into(), Value::try_from(v).expect("flag values serialize"));
    }
}

fn flag_table(cli: &Cli) -> Table {
    let c = &cli.common;
    let mut t = Table::new();
    put(&mut t, "mu1", &c.mu1);
    put(&mut t, "mu2", &c.mu2);
    put(&mut t, "a", &c.a);
    put(&mut t, "format", &c.format);
    put(&mut t, "seed", &c.seed);
    put(&mut t, "out", &c.out);
    let mut s = Table::new();
    match &cli.command {
        Command::Bifdiag(b) => {
            put(&mut s, "plane", &b.plane);
            put(&mut s, "h", &b.h);
            put(&mut s, "grid", &b.grid);
            put(&mut s, "g_range", &b.g_range);
            put(&mut s, "l_range", &b.l_range);
            put(&mut s, "h_range", &b.h_range);
            put(&mut s, "curve_samples", &b.curve_samples);
        }
        Command::Monodromy(m) => {
            put(&mut s, "reference", &m.reference);
            put(&mut s, "h", &m.h);
            put(&mut s, "loops", &m.loops);
            put(&mut s, "ellipse", &m.ellipse);
        }
        Command::Scatter(x) => {
            put(&mut s, "q", &x.q);
            put(&mut s, "p", &x.p);
            put(&mut s, "random", &x.random);
            put(&mut s, "fiber", &x.fiber);
            put(&mut s, "knauf", &x.knauf);
            put(&mut s, "table", &x.table);
            put(&mut s, "h", &x.h);
            put(&mut s, "samples", &x.samples);
            put(&mut s, "direction", &x.direction);
            put(&mut s, "deflection_loop", &x.deflection_loop);
            put(&mut s, "points", &x.points);
            put(&mut s, "reference", &x.reference);
            put(&mut s, "r_max", &x.r_max);
        }
    }
    if !s.is_empty() {
        t.insert(cli.command.name().key().into(), Value::Table(s));
    }
    t
}

fn read_file(path: &Path) -> Result<Table, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    src.parse::<Table>().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Resolves the run configuration and the output directory.
pub fn resolve(cli: &Cli) -> Result<(RunConfig, PathBuf), CliError> {
    let command = cli.command.name();
    let mut file = match &cli.common.config {
        Some(path) => read_file(path)?,
        None => Table::new(),
    };
    // Sections for the other commands may share the file.
    for other in [CommandName::Bifdiag, CommandName::Monodromy, CommandName::Scatter] {
        if other != command {
            file.remove(other.key());
        }
    }
    let preset_name = match (&cli.common.preset, file.get("preset")) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(Value::String(p))) => Some(p.clone()),
        (None, Some(_)) => return Err(CliError::Config("preset must be a string".into())),
        (None, None) => None,
    };
    let mut t = match Value::try_from(RunConfig::defaults(command)).expect("defaults serialize") {
        Value::Table(t) => t,
        _ => unreachable!("a struct serializes to a table"),
    };
    if let Some(name) = &preset_name {
        merge(&mut t, preset(name, command)?);
    }
    merge(&mut t, file);
    merge(&mut t, flag_table(cli));
    t.insert("command".into(), Value::String(command.key().into()));
    let out = match t.remove("out") {
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(CliError::Config("out must be a path".into())),
        None => PathBuf::from("out"),
    };
    let cfg: RunConfig = Value::Table(t).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    validate(&cfg)?;
    Ok((cfg, out))
}

fn check(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    cfg.params()?;
    let range = |r: [f64; 2]| r[0] < r[1];
    if let Some(b) = &cfg.bifdiag {
        check(b.grid >= 2, "grid needs at least 2 points per axis")?;
        check(b.curve_samples >= 2, "curve_samples must be at least 2")?;
        check(range(b.g_range) && range(b.l_range) && range(b.h_range), "ranges must be increasing")?;
        check(b.plane == Plane::Planar || !b.h.is_empty(), "spatial slices need at least one h")?;
    }
    if let Some(m) = &cfg.monodromy {
        check(m.h > 0.0, "monodromy needs h > 0")?;
        check(!m.reference.is_empty() && !m.loops.is_empty(), "need at least one reference and one loop")?;
        check(m.ellipse.is_none_or(|e| e[1] > 0.0 && e[2] > 0.0), "ellipse semi-axes must be positive")?;
    }
    if let Some(s) = &cfg.scatter {
        let modes = [s.knauf.is_some(), s.deflection_loop.is_some(), s.fiber.is_some(), s.q.is_some() || s.random > 0];
        check(modes.iter().filter(|&&m| m).count() == 1, "choose exactly one of --knauf, --deflection-loop, --fiber, --q/--p or --random")?;
        check(s.q.is_some() == s.p.is_some(), "--q and --p go together")?;
        check(!(s.q.is_some() && s.random > 0), "--q/--p and --random are exclusive")?;
        check(s.r_max > 0.0 && s.samples >= 8 && s.points >= 3, "need r_max > 0, samples >= 8, points >= 3")?;
        check(!s.h.is_empty(), "need at least one h")?;
    }
    Ok(())
}
