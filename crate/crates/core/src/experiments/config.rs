//! Experiment configuration files.
//!
//! Plain text with `[section]` headers and `key = value` lines; `#` starts
//! a comment, lists are comma separated. Unknown sections or keys are
//! rejected so typos do not silently fall back to defaults.
//!
//! ```text
//! [domain]
//! length = 1          # L
//! lid_speed = 1       # U
//! re = 100            # or: viscosity = 0.01 (default re = 100)
//! c_s = 0.1
//! kappa = 1
//! delta = 0.1         # optional, defaults to the largest cell width
//!
//! [grid]
//! nx = 16
//! ny = 16
//! nz = 64
//!
//! [damping]
//! profile = hermite   # one | zero | constant | van_driest | algebraic | hermite | table
//! alpha = 2
//! value = 0.5         # constant profile only
//! table = beta.txt    # table profile only, two columns z beta
//!
//! [solver]
//! cfl = 0.4
//! projection_tolerance = 1e-10
//! end_time = 1
//! sample_interval = 0
//! deterministic = true
//! initial = perturbed # couette | perturbed | checkpoint
//! amplitude = 0.1
//! seed = 1
//! checkpoint = start.smdl
//! steady_tolerance = 1e-9
//! max_steps = 1000
//! max_dt = 1e-3
//!
//! [sweep]
//! re = 100, 1000
//! delta = 0.1
//! alpha = 2
//! profile = algebraic, hermite
//! nz = 32, 64
//!
//! [output]
//! mode = run          # run | sweep | bounds | damping-table | verify
//! dir = out
//! samples = 1001      # damping-table resolution
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::damping::{DampingProfile, Table};
use crate::domain::{DomainParams, Grid};
use crate::error::{Error, Result};
use crate::solver::{InitialCondition, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Sweep,
    Bounds,
    DampingTable,
    Verify,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "run" => Ok(Mode::Run),
            "sweep" => Ok(Mode::Sweep),
            "bounds" => Ok(Mode::Bounds),
            "damping-table" | "damping_table" => Ok(Mode::DampingTable),
            "verify" => Ok(Mode::Verify),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Domain settings before a Reynolds number / model scale is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub length: f64,
    pub lid_speed: f64,
    pub viscosity: Option<f64>,
    pub re: Option<f64>,
    pub delta: Option<f64>,
    pub c_s: f64,
    pub kappa: f64,
}

impl DomainSpec {
    /// Concrete parameters, optionally overriding Re and delta. Without an
    /// explicit delta the model scale is the largest cell width.
    pub fn build(&self, grid: (usize, usize, usize), re: Option<f64>, delta: Option<f64>) -> Result<DomainParams> {
        let delta = delta.or(self.delta).unwrap_or_else(|| self.length / grid.0.min(grid.1).min(grid.2) as f64);
        match (re.or(self.re), self.viscosity) {
            (Some(re), _) => DomainParams::with_reynolds(self.length, self.lid_speed, re, delta, self.c_s, self.kappa),
            (None, Some(nu)) => DomainParams::new(self.length, self.lid_speed, nu, delta, self.c_s, self.kappa),
            (None, None) => Err(Error::Parameter("either re or viscosity must be given".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepAxes {
    pub re: Vec<f64>,
    pub delta: Vec<f64>,
    pub alpha: Vec<u32>,
    pub profile: Vec<String>,
    pub nz: Vec<usize>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
            && self.delta.is_empty()
            && self.alpha.is_empty()
            && self.profile.is_empty()
            && self.nz.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub domain: DomainSpec,
    pub grid: (usize, usize, usize),
    pub profile_name: String,
    pub alpha: u32,
    pub constant_value: Option<f64>,
    pub table: Option<PathBuf>,
    pub solver: SolverConfig,
    pub sweep: SweepAxes,
    pub output_dir: PathBuf,
    pub samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Run,
            domain: DomainSpec {
                length: 1.0,
                lid_speed: 1.0,
                viscosity: None,
                re: Some(100.0),
                delta: None,
                c_s: 0.1,
                kappa: 1.0,
            },
            grid: (16, 16, 16),
            profile_name: "hermite".into(),
            alpha: 2,
            constant_value: None,
            table: None,
            solver: SolverConfig::default(),
            sweep: SweepAxes::default(),
            output_dir: PathBuf::from("out"),
            samples: 1001,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        // relative file references are taken from the config's directory
        if let Some(dir) = path.parent() {
            if let Some(t) = &cfg.table {
                if t.is_relative() {
                    cfg.table = Some(dir.join(t));
                }
            }
            if let InitialCondition::Checkpoint(c) = &cfg.solver.initial_condition {
                if c.is_relative() {
                    cfg.solver.initial_condition = InitialCondition::Checkpoint(dir.join(c));
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Entries::parse(text)?;
        let mut cfg = Self::default();

        let d = &mut cfg.domain;
        entries.set(("domain", "length"), &mut d.length)?;
        entries.set(("domain", "lid_speed"), &mut d.lid_speed)?;
        d.viscosity = entries.get(("domain", "viscosity"))?;
        d.re = entries.get(("domain", "re"))?;
        d.delta = entries.get(("domain", "delta"))?;
        entries.set(("domain", "c_s"), &mut d.c_s)?;
        entries.set(("domain", "kappa"), &mut d.kappa)?;
        if d.viscosity.is_some() && d.re.is_some() {
            let line = entries.line(("domain", "re"));
            return Err(Error::Config { line, reason: "give either re or viscosity, not both".into() });
        }
        if d.viscosity.is_none() && d.re.is_none() {
            d.re = Some(100.0);
        }

        entries.set(("grid", "nx"), &mut cfg.grid.0)?;
        entries.set(("grid", "ny"), &mut cfg.grid.1)?;
        entries.set(("grid", "nz"), &mut cfg.grid.2)?;

        entries.set(("damping", "profile"), &mut cfg.profile_name)?;
        entries.set(("damping", "alpha"), &mut cfg.alpha)?;
        cfg.constant_value = entries.get(("damping", "value"))?;
        cfg.table = entries.get::<String>(("damping", "table"))?.map(PathBuf::from);
        let profile_line = entries.line(("damping", "profile"));
        profile_from_name(&cfg.profile_name, cfg.alpha, cfg.constant_value, cfg.table.as_deref(), true)
            .map_err(|e| Error::Config { line: profile_line, reason: e.to_string() })?;

        let s = &mut cfg.solver;
        entries.set(("solver", "cfl"), &mut s.cfl_number)?;
        entries.set(("solver", "projection_tolerance"), &mut s.projection_tolerance)?;
        entries.set(("solver", "end_time"), &mut s.end_time)?;
        entries.set(("solver", "sample_interval"), &mut s.sample_interval)?;
        entries.set(("solver", "deterministic"), &mut s.deterministic_reduction)?;
        s.steady_tolerance = entries.get(("solver", "steady_tolerance"))?;
        s.max_steps = entries.get(("solver", "max_steps"))?;
        s.max_dt = entries.get(("solver", "max_dt"))?;
        let amplitude = entries.get(("solver", "amplitude"))?.unwrap_or(0.1);
        let seed = entries.get(("solver", "seed"))?.unwrap_or(0);
        let checkpoint: Option<String> = entries.get(("solver", "checkpoint"))?;
        let initial_line = entries.line(("solver", "initial"));
        s.initial_condition = match entries.get::<String>(("solver", "initial"))?.as_deref() {
            None | Some("couette") => InitialCondition::Couette,
            Some("perturbed") => InitialCondition::Perturbed { amplitude, seed },
            Some("checkpoint") => match checkpoint {
                Some(p) => InitialCondition::Checkpoint(PathBuf::from(p)),
                None => {
                    return Err(Error::Config {
                        line: initial_line,
                        reason: "initial = checkpoint needs a checkpoint path".into(),
                    })
                }
            },
            Some(other) => {
                return Err(Error::Config {
                    line: initial_line,
                    reason: format!("unknown initial condition '{other}'"),
                })
            }
        };
        s.validate().map_err(|e| Error::Config { line: entries.section_line("solver"), reason: e.to_string() })?;

        cfg.sweep.re = entries.list(("sweep", "re"))?;
        cfg.sweep.delta = entries.list(("sweep", "delta"))?;
        cfg.sweep.alpha = entries.list(("sweep", "alpha"))?;
        cfg.sweep.profile = entries.list(("sweep", "profile"))?;
        cfg.sweep.nz = entries.list(("sweep", "nz"))?;
        for name in &cfg.sweep.profile {
            profile_from_name(name, cfg.alpha, cfg.constant_value, cfg.table.as_deref(), true)
                .map_err(|e| Error::Config { line: entries.line(("sweep", "profile")), reason: e.to_string() })?;
        }

        entries.set(("output", "mode"), &mut cfg.mode)?;
        cfg.output_dir = entries.get::<String>(("output", "dir"))?.map(PathBuf::from).unwrap_or(cfg.output_dir);
        entries.set(("output", "samples"), &mut cfg.samples)?;
        if cfg.mode == Mode::Sweep && cfg.sweep.is_empty() {
            return Err(Error::Config {
                line: entries.section_line("sweep"),
                reason: "sweep mode needs at least one non-empty [sweep] axis".into(),
            });
        }

        entries.finish()?;
        Ok(cfg)
    }

    /// The configured damping profile (alpha, constant and table settings
    /// from the `[damping]` section).
    pub fn profile(&self) -> Result<DampingProfile> {
        profile_from_name(&self.profile_name, self.alpha, self.constant_value, self.table.as_deref(), false)
    }

    pub fn profile_named(&self, name: &str, alpha: u32) -> Result<DampingProfile> {
        profile_from_name(name, alpha, self.constant_value, self.table.as_deref(), false)
    }

    pub fn build_domain(&self) -> Result<DomainParams> {
        self.domain.build(self.grid, None, None)
    }

    pub fn build_grid(&self, domain: &DomainParams) -> Result<Grid> {
        Grid::new(domain, self.grid.0, self.grid.1, self.grid.2)
    }
}

/// `dry` skips reading table files (used while parsing, before paths are
/// resolved against the config location).
fn profile_from_name(
    name: &str,
    alpha: u32,
    value: Option<f64>,
    table: Option<&Path>,
    dry: bool,
) -> Result<DampingProfile> {
    match name {
        "one" => Ok(DampingProfile::one()),
        "zero" => Ok(DampingProfile::zero()),
        "constant" => {
            DampingProfile::constant(value.ok_or_else(|| Error::Parameter("constant profile needs 'value'".into()))?)
        }
        "van_driest" => Ok(DampingProfile::van_driest()),
        "algebraic" => Ok(DampingProfile::algebraic(alpha)),
        "hermite" => Ok(DampingProfile::hermite(alpha)),
        "table" => {
            let path = table.ok_or_else(|| Error::Parameter("table profile needs 'table'".into()))?;
            if dry {
                Ok(DampingProfile::one())
            } else {
                Ok(DampingProfile::tabulated(Table::from_path(path)?))
            }
        }
        other => Err(Error::Parameter(format!("unknown damping profile '{other}'"))),
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("domain", &["length", "lid_speed", "viscosity", "re", "delta", "c_s", "kappa"]),
    ("grid", &["nx", "ny", "nz"]),
    ("damping", &["profile", "alpha", "value", "table"]),
    (
        "solver",
        &[
            "cfl",
            "projection_tolerance",
            "end_time",
            "sample_interval",
            "deterministic",
            "initial",
            "amplitude",
            "seed",
            "checkpoint",
            "steady_tolerance",
            "max_steps",
            "max_dt",
        ],
    ),
    ("sweep", &["re", "delta", "alpha", "profile", "nz"]),
    ("output", &["mode", "dir", "samples"]),
];

type Key = (&'static str, &'static str);

/// Raw `section.key -> (value, line)` entries.
struct Entries {
    values: BTreeMap<(String, String), (String, usize)>,
    sections: BTreeMap<String, usize>,
    used: BTreeSet<(String, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut sections = BTreeMap::new();
        let mut section: Option<&'static str> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line, reason: "unterminated section header".into() })?
                    .trim();
                let known = KNOWN
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| Error::Config { line, reason: format!("unknown section [{name}]") })?;
                section = Some(known.0);
                sections.insert(name.to_string(), line);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::Config { line, reason: format!("expected 'key = value', got '{content}'") })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| Error::Config { line, reason: "key outside of any section".into() })?;
            let keys = KNOWN.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(Error::Config { line, reason: format!("unknown key '{key}' in [{sec}]") });
            }
            if value.is_empty() {
                return Err(Error::Config { line, reason: format!("empty value for '{key}'") });
            }
            if values.insert((sec.to_string(), key.to_string()), (value.to_string(), line)).is_some() {
                return Err(Error::Config { line, reason: format!("duplicate key '{key}' in [{sec}]") });
            }
        }
        Ok(Self { values, sections, used: BTreeSet::new() })
    }

    fn line(&self, key: Key) -> usize {
        self.values
            .get(&(key.0.to_string(), key.1.to_string()))
            .map(|(_, l)| *l)
            .unwrap_or_else(|| self.section_line(key.0))
    }

    fn section_line(&self, section: &str) -> usize {
        self.sections.get(section).copied().unwrap_or(0)
    }

    fn take(&mut self, key: Key) -> Option<(String, usize)> {
        let k = (key.0.to_string(), key.1.to_string());
        let found = self.values.get(&k).cloned();
        self.used.insert(k);
        found
    }

    fn get<T: FromStr>(&mut self, key: Key) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((raw, line)) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::Config { line, reason: format!("bad value '{raw}' for '{}': {e}", key.1) }),
        }
    }

    fn set<T: FromStr>(&mut self, key: Key, target: &mut T) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.get(key)? {
            *target = v;
        }
        Ok(())
    }

    fn list<T: FromStr>(&mut self, key: Key) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(Vec::new()),
            Some((raw, line)) => raw
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse::<T>().map_err(|e| Error::Config {
                        line,
                        reason: format!("bad list item '{item}' for '{}': {e}", key.1),
                    })
                })
                .collect(),
        }
    }

    /// Every recognised key must have been consumed.
    fn finish(self) -> Result<()> {
        match self.values.into_iter().find(|(k, _)| !self.used.contains(k)) {
            None => Ok(()),
            Some(((sec, key), (_, line))) => {
                Err(Error::Config { line, reason: format!("key '{key}' in [{sec}] was not used") })
            }
        }
    }
}
