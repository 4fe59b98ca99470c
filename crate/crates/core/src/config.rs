//! Run configuration: a flat `key = value` document with `[section]` headers.
//!
//! ```text
//! [grid]
//! cells = 128
//! hi = 1
//!
//! [potential]
//! kind = linear
//! g = 1
//! ```
//!
//! Keys are addressed as `section.key`. Unknown keys, keys that do not
//! apply to the chosen potential or initial condition, and repeated keys are
//! all errors. [`RunConfig::echo`] writes every effective value back out in
//! the same format; parsing the echo gives the same configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::AsymptoticsThresholds;
use crate::error::{Error, Result};
use crate::model::{Boundary, Grid, PhysParams};
use crate::stationary::ConfinementOptions;
use crate::stepper::StepConfig;

const SECTIONS: &[&str] = &[
    "grid",
    "params",
    "potential",
    "initial",
    "run",
    "solver",
    "asymptotics",
    "confinement",
    "output",
];

const KEYS: &[&str] = &[
    "grid.lo",
    "grid.hi",
    "grid.cells",
    "params.a",
    "params.gamma",
    "params.mu",
    "params.lambda",
    "params.beta",
    "params.delta",
    "params.delta_schedule",
    "params.h",
    "potential.kind",
    "potential.boundary",
    "potential.g",
    "potential.k",
    "potential.center",
    "potential.scale",
    "potential.file",
    "initial.kind",
    "initial.rho0",
    "initial.eta0",
    "initial.mass_rho",
    "initial.mass_eta",
    "initial.amplitude",
    "initial.modes",
    "initial.seed",
    "initial.file",
    "initial.smooth",
    "run.t_end",
    "run.sample_every",
    "solver.picard_tol",
    "solver.picard_max",
    "solver.linear_tol",
    "solver.energy_slack",
    "asymptotics.distance_threshold",
    "asymptotics.kinetic_threshold",
    "confinement.levels",
    "confinement.tail_shell",
    "confinement.tail_threshold",
    "confinement.radius_fraction",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn build(&self) -> Result<Grid> {
        Grid::new(&self.lo, &self.hi, &self.cells)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `g` times the last coordinate.
    Linear { g: f64 },
    /// `k/2 |x - center|^2`.
    Quadratic { k: f64, center: Vec<f64> },
    /// `scale ((s^2 - 1))^2` with `s` the first coordinate measured from the
    /// midpoint in units of a quarter of the extent: wells at the quarter
    /// points, barrier of height `scale` in the middle.
    DoubleWell { scale: f64 },
    /// One value per cell, in cell order.
    Tabulated { file: PathBuf, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            PotentialSpec::Linear { .. } => "linear",
            PotentialSpec::Quadratic { .. } => "quadratic",
            PotentialSpec::DoubleWell { .. } => "double_well",
            PotentialSpec::Tabulated { .. } => "tabulated",
        }
    }
}

/// Fields read from a snapshot file (`fields_<k>.csv` layout).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedFields {
    pub rho: Vec<f64>,
    pub velocity: Vec<[f64; 2]>,
    pub eta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Uniform {
        rho0: f64,
        eta0: f64,
    },
    Equilibrium {
        mass_rho: f64,
        mass_eta: f64,
    },
    PerturbedEquilibrium {
        mass_rho: f64,
        mass_eta: f64,
        amplitude: f64,
        modes: usize,
        seed: u64,
    },
    Tabulated {
        file: PathBuf,
        fields: TabulatedFields,
    },
}

impl InitialSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            InitialSpec::Uniform { .. } => "uniform",
            InitialSpec::Equilibrium { .. } => "equilibrium",
            InitialSpec::PerturbedEquilibrium { .. } => "perturbed_equilibrium",
            InitialSpec::Tabulated { .. } => "tabulated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub delta_schedule: Vec<f64>,
    pub boundary: Boundary,
    pub potential: PotentialSpec,
    pub initial: InitialSpec,
    /// Width-3 box filter applied to the initial fields.
    pub smooth: bool,
    pub t_end: f64,
    /// Accepted steps between full-field snapshots.
    pub sample_every: usize,
    pub step: StepConfig,
    pub thresholds: AsymptoticsThresholds,
    pub confinement: ConfinementOptions,
    pub output_dir: PathBuf,
}

/// Command-line values that take precedence over the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug)]
struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Doc {
    entries: BTreeMap<String, Entry>,
}

fn invalid(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Validation {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

impl Doc {
    fn parse(text: &str) -> Result<Doc> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(Error::Parse {
                        line,
                        message: format!("malformed section header `{body}`"),
                    });
                };
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown section `[{name}]`"),
                    });
                }
                section = name.to_string();
                continue;
            }
            let Some((k, v)) = body.split_once('=') else {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `key = value`, got `{body}`"),
                });
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || k.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    line,
                    message: format!("malformed key `{k}`"),
                });
            }
            let key = if section.is_empty() {
                k.to_string()
            } else {
                format!("{section}.{k}")
            };
            if let Some(first) = entries.get(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}` (lines {} and {line})", first.line),
                });
            }
            if !KEYS.contains(&key.as_str()) {
                return Err(invalid(&key, line, "unknown key"));
            }
            entries.insert(
                key,
                Entry {
                    line,
                    value: v.to_string(),
                    used: false,
                },
            );
        }
        Ok(Doc { entries })
    }

    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn get<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| invalid(key, line, format!("expected {what}, got `{v}`"))),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.get::<f64>(key, "a number")?.unwrap_or(default);
        if !v.is_finite() {
            return Err(invalid(key, self.line(key), "must be finite"));
        }
        Ok(v)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self
            .get::<usize>(key, "a nonnegative integer")?
            .unwrap_or(default))
    }

    fn list<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<Vec<T>>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    let s = s.trim();
                    s.parse::<T>()
                        .map_err(|_| invalid(key, line, format!("expected {what}, got `{s}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn required(&mut self, key: &str) -> Result<(String, usize)> {
        self.raw(key)
            .ok_or_else(|| invalid(key, 0, "required key is missing"))
    }

    fn require(&self, key: &str, ok: bool, rule: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(invalid(key, self.line(key), format!("must satisfy {rule}")))
        }
    }

    /// First key (in line order) that was given but never read.
    fn leftover(&self, context: &str) -> Result<()> {
        let mut unused: Vec<(&String, &Entry)> =
            self.entries.iter().filter(|(_, e)| !e.used).collect();
        unused.sort_by_key(|(_, e)| e.line);
        match unused.first() {
            None => Ok(()),
            Some((k, e)) => Err(invalid(
                k,
                e.line,
                format!("key does not apply to this configuration ({context})"),
            )),
        }
    }
}

fn resolve(base: &Path, key: &str, line: usize, value: &str) -> Result<PathBuf> {
    let p = base.join(value);
    p.canonicalize()
        .map_err(|e| invalid(key, line, format!("cannot open `{}`: {e}", p.display())))
}

fn read_file(key: &str, line: usize, path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| invalid(key, line, format!("cannot read `{}`: {e}", path.display())))
}

fn parse_values(key: &str, line: usize, text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(key, line, format!("bad value `{l}` in tabulated file")))
        })
        .collect()
}

/// Reads the `fields_<k>.csv` layout: a header, then one row per cell of
/// `cell_center..., rho, u..., eta`.
fn parse_fields(key: &str, line: usize, text: &str, dim: usize) -> Result<TabulatedFields> {
    let mut rows = text.lines().filter(|l| !l.trim().is_empty());
    rows.next()
        .ok_or_else(|| invalid(key, line, "tabulated initial file is empty"))?;
    let width = 2 * dim + 2;
    let mut f = TabulatedFields {
        rho: Vec::new(),
        velocity: Vec::new(),
        eta: Vec::new(),
    };
    for (r, row) in rows.enumerate() {
        let vals: Vec<f64> = row
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| invalid(key, line, format!("bad row {} in tabulated file", r + 2)))?;
        if vals.len() != width {
            return Err(invalid(
                key,
                line,
                format!("row {} has {} columns, expected {width}", r + 2, vals.len()),
            ));
        }
        f.rho.push(vals[dim]);
        let mut u = [0.0; 2];
        u[..dim].copy_from_slice(&vals[dim + 1..2 * dim + 1]);
        f.velocity.push(u);
        f.eta.push(vals[2 * dim + 1]);
    }
    Ok(f)
}

/// Parses and validates a configuration document. Relative file paths are
/// resolved against the current directory.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, Path::new("."), &ConfigOverrides::default())
}

/// Reads and parses a configuration file; relative paths inside it are
/// resolved against its directory.
pub fn load_config(path: &Path, overrides: &ConfigOverrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_with(&text, base, overrides)
}

pub fn parse_config_with(text: &str, base: &Path, ov: &ConfigOverrides) -> Result<RunConfig> {
    let mut d = Doc::parse(text)?;

    // grid
    let cells = match d.list::<usize>("grid.cells", "a cell count")? {
        Some(c) => c,
        None => return Err(invalid("grid.cells", 0, "required key is missing")),
    };
    let dim = cells.len();
    d.require("grid.cells", dim == 1 || dim == 2, "one or two entries")?;
    d.require(
        "grid.cells",
        cells.iter().all(|&c| c >= 4),
        "at least 4 cells per axis",
    )?;
    let lo = d
        .list::<f64>("grid.lo", "a number")?
        .unwrap_or(vec![0.0; dim]);
    let hi = d
        .list::<f64>("grid.hi", "a number")?
        .unwrap_or(vec![1.0; dim]);
    d.require(
        "grid.lo",
        lo.len() == dim,
        "one entry per axis of grid.cells",
    )?;
    d.require(
        "grid.hi",
        hi.len() == dim,
        "one entry per axis of grid.cells",
    )?;
    d.require(
        "grid.hi",
        lo.iter()
            .zip(&hi)
            .all(|(l, h)| l.is_finite() && h.is_finite() && h > l),
        "hi > lo on every axis",
    )?;
    let grid = GridSpec { lo, hi, cells };
    let n_cells: usize = grid.cells.iter().product();

    // params
    let a = d.f64_or("params.a", 1.0)?;
    d.require("params.a", a > 0.0, "a > 0")?;
    let gamma = d.f64_or("params.gamma", 2.0)?;
    d.require("params.gamma", gamma > 1.0, "gamma > 1")?;
    let mu = d.f64_or("params.mu", 1.0)?;
    d.require("params.mu", mu > 0.0, "mu > 0")?;
    let lambda = d.f64_or("params.lambda", 0.0)?;
    d.require(
        "params.lambda",
        lambda + 2.0 / 3.0 * mu >= 0.0,
        "lambda + (2/3) mu >= 0",
    )?;
    if dim == 2 {
        d.require(
            "params.lambda",
            lambda + 0.5 * mu >= 0.0,
            "lambda + mu/2 >= 0 on two-dimensional grids",
        )?;
    }
    let beta = d.f64_or("params.beta", 1.0)?;
    d.require("params.beta", beta != 0.0, "beta != 0")?;
    let delta = d.f64_or("params.delta", 0.0)?;
    d.require("params.delta", delta >= 0.0, "delta >= 0")?;
    let h = d.f64_or("params.h", 1e-3)?;
    d.require("params.h", h > 0.0, "h > 0")?;
    let delta_schedule = d
        .list::<f64>("params.delta_schedule", "a number")?
        .unwrap_or(vec![1e-2, 1e-3, 0.0]);
    d.require(
        "params.delta_schedule",
        !delta_schedule.is_empty()
            && delta_schedule.iter().all(|x| x.is_finite() && *x >= 0.0)
            && delta_schedule.windows(2).all(|w| w[1] < w[0]),
        "nonnegative, strictly decreasing entries",
    )?;
    let params = PhysParams {
        a,
        gamma,
        mu,
        lambda,
        beta,
        delta,
        h,
    };

    // potential
    let boundary = match d.raw("potential.boundary") {
        None => Boundary::Bounded,
        Some((v, line)) => v
            .parse::<Boundary>()
            .map_err(|m| invalid("potential.boundary", line, m))?,
    };
    let (kind, kind_line) = d.required("potential.kind")?;
    let potential = match kind.as_str() {
        "linear" => PotentialSpec::Linear {
            g: d.f64_or("potential.g", 1.0)?,
        },
        "quadratic" => {
            let k = d.f64_or("potential.k", 1.0)?;
            let mid: Vec<f64> = (0..dim).map(|a| 0.5 * (grid.lo[a] + grid.hi[a])).collect();
            let center = d
                .list::<f64>("potential.center", "a number")?
                .unwrap_or(mid);
            d.require(
                "potential.center",
                center.len() == dim,
                "one entry per axis",
            )?;
            PotentialSpec::Quadratic { k, center }
        }
        "double_well" => {
            let scale = d.f64_or("potential.scale", 1.0)?;
            d.require("potential.scale", scale > 0.0, "scale > 0")?;
            PotentialSpec::DoubleWell { scale }
        }
        "tabulated" => {
            let (v, line) = d.required("potential.file")?;
            let file = resolve(base, "potential.file", line, &v)?;
            let values = parse_values(
                "potential.file",
                line,
                &read_file("potential.file", line, &file)?,
            )?;
            if values.len() != n_cells {
                return Err(invalid(
                    "potential.file",
                    line,
                    format!("{} values for {n_cells} cells", values.len()),
                ));
            }
            PotentialSpec::Tabulated { file, values }
        }
        other => {
            return Err(invalid(
                "potential.kind",
                kind_line,
                format!("expected linear, quadratic, double_well or tabulated, got `{other}`"),
            ))
        }
    };

    // initial condition
    let (kind, kind_line) = d.required("initial.kind")?;
    let masses = |d: &mut Doc| -> Result<(f64, f64)> {
        let mr = d.f64_or("initial.mass_rho", 1.0)?;
        d.require("initial.mass_rho", mr > 0.0, "mass_rho > 0")?;
        let me = d.f64_or("initial.mass_eta", 1.0)?;
        d.require("initial.mass_eta", me > 0.0, "mass_eta > 0")?;
        Ok((mr, me))
    };
    let initial = match kind.as_str() {
        "uniform" => {
            let rho0 = d.f64_or("initial.rho0", 1.0)?;
            d.require("initial.rho0", rho0 > 0.0, "rho0 > 0")?;
            let eta0 = d.f64_or("initial.eta0", 1.0)?;
            d.require("initial.eta0", eta0 > 0.0, "eta0 > 0")?;
            InitialSpec::Uniform { rho0, eta0 }
        }
        "equilibrium" => {
            let (mass_rho, mass_eta) = masses(&mut d)?;
            InitialSpec::Equilibrium { mass_rho, mass_eta }
        }
        "perturbed_equilibrium" => {
            let (mass_rho, mass_eta) = masses(&mut d)?;
            let amplitude = d.f64_or("initial.amplitude", 0.1)?;
            d.require(
                "initial.amplitude",
                (0.0..1.0).contains(&amplitude),
                "0 <= amplitude < 1",
            )?;
            let modes = d.usize_or("initial.modes", 4)?;
            d.require("initial.modes", modes >= 1, "modes >= 1")?;
            let doc_seed = d.get::<u64>("initial.seed", "an unsigned integer")?;
            let seed = match ov.seed.or(doc_seed) {
                Some(s) => s,
                None => {
                    return Err(invalid(
                        "initial.seed",
                        kind_line,
                        "a seed is required for perturbed_equilibrium (set it or pass --seed)",
                    ))
                }
            };
            InitialSpec::PerturbedEquilibrium {
                mass_rho,
                mass_eta,
                amplitude,
                modes,
                seed,
            }
        }
        "tabulated" => {
            let (v, line) = d.required("initial.file")?;
            let file = resolve(base, "initial.file", line, &v)?;
            let fields = parse_fields(
                "initial.file",
                line,
                &read_file("initial.file", line, &file)?,
                dim,
            )?;
            if fields.rho.len() != n_cells {
                return Err(invalid(
                    "initial.file",
                    line,
                    format!("{} rows for {n_cells} cells", fields.rho.len()),
                ));
            }
            if fields.rho.iter().chain(&fields.eta).any(|x| !(*x >= 0.0)) {
                return Err(invalid(
                    "initial.file",
                    line,
                    "densities must be nonnegative",
                ));
            }
            InitialSpec::Tabulated { file, fields }
        }
        other => return Err(invalid(
            "initial.kind",
            kind_line,
            format!(
                "expected uniform, equilibrium, perturbed_equilibrium or tabulated, got `{other}`"
            ),
        )),
    };
    let smooth = d
        .get::<bool>("initial.smooth", "true or false")?
        .unwrap_or(false);

    // run
    let t_end = match d.get::<f64>("run.t_end", "a number")? {
        Some(t) => t,
        None => return Err(invalid("run.t_end", 0, "required key is missing")),
    };
    d.require("run.t_end", t_end > 0.0 && t_end.is_finite(), "t_end > 0")?;
    let sample_every = d.usize_or("run.sample_every", 100)?;
    d.require("run.sample_every", sample_every >= 1, "sample_every >= 1")?;

    // solver
    let picard_tol = d.f64_or("solver.picard_tol", 1e-11)?;
    d.require("solver.picard_tol", picard_tol > 0.0, "picard_tol > 0")?;
    let picard_max = d.usize_or("solver.picard_max", 60)?;
    d.require("solver.picard_max", picard_max >= 1, "picard_max >= 1")?;
    let linear_tol = d.f64_or("solver.linear_tol", 1e-13)?;
    d.require("solver.linear_tol", linear_tol > 0.0, "linear_tol > 0")?;
    let energy_slack = d.f64_or("solver.energy_slack", 1e-10)?;
    d.require(
        "solver.energy_slack",
        energy_slack >= 0.0,
        "energy_slack >= 0",
    )?;
    let step = StepConfig {
        h,
        picard_tol,
        picard_max,
        linear_tol,
        energy_slack,
        delta_schedule: delta_schedule.clone(),
    };

    let thresholds = AsymptoticsThresholds {
        distance: d.f64_or("asymptotics.distance_threshold", 1e-3)?,
        kinetic: d.f64_or("asymptotics.kinetic_threshold", 1e-6)?,
    };
    d.require(
        "asymptotics.distance_threshold",
        thresholds.distance >= 0.0,
        "distance_threshold >= 0",
    )?;
    d.require(
        "asymptotics.kinetic_threshold",
        thresholds.kinetic >= 0.0,
        "kinetic_threshold >= 0",
    )?;

    let dc = ConfinementOptions::default();
    let confinement = ConfinementOptions {
        levels: d.usize_or("confinement.levels", dc.levels)?,
        tail_shell: d.f64_or("confinement.tail_shell", dc.tail_shell)?,
        tail_threshold: d.f64_or("confinement.tail_threshold", dc.tail_threshold)?,
        radius_fraction: d.f64_or("confinement.radius_fraction", dc.radius_fraction)?,
    };
    d.require("confinement.levels", confinement.levels >= 1, "levels >= 1")?;
    d.require(
        "confinement.tail_shell",
        confinement.tail_shell > 0.0 && confinement.tail_shell < 1.0,
        "0 < tail_shell < 1",
    )?;
    d.require(
        "confinement.tail_threshold",
        confinement.tail_threshold > 0.0 && confinement.tail_threshold < 1.0,
        "0 < tail_threshold < 1",
    )?;
    d.require(
        "confinement.radius_fraction",
        confinement.radius_fraction >= 0.0 && confinement.radius_fraction < 1.0,
        "0 <= radius_fraction < 1",
    )?;

    let doc_out = d.raw("output.dir").map(|(v, _)| PathBuf::from(v));
    let output_dir = ov
        .output_dir
        .clone()
        .or(doc_out)
        .unwrap_or_else(|| PathBuf::from("out"));

    d.leftover(&format!(
        "potential kind {}, initial kind {}",
        potential.kind(),
        initial.kind()
    ))?;

    Ok(RunConfig {
        grid,
        params,
        delta_schedule,
        boundary,
        potential,
        initial,
        smooth,
        t_end,
        sample_every,
        step,
        thresholds,
        confinement,
        output_dir,
    })
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunConfig {
    /// Every effective value, in the input format. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "# effective configuration (defaults filled in)");
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "lo = {}", join(&self.grid.lo));
        let _ = writeln!(s, "hi = {}", join(&self.grid.hi));
        let _ = writeln!(s, "cells = {}", join(&self.grid.cells));
        let _ = writeln!(s, "\n[params]");
        for (k, v) in [
            ("a", p.a),
            ("gamma", p.gamma),
            ("mu", p.mu),
            ("lambda", p.lambda),
            ("beta", p.beta),
            ("delta", p.delta),
            ("h", p.h),
        ] {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "delta_schedule = {}", join(&self.delta_schedule));
        let _ = writeln!(s, "\n[potential]");
        let _ = writeln!(s, "kind = {}", self.potential.kind());
        let _ = writeln!(s, "boundary = {}", self.boundary.as_str());
        match &self.potential {
            PotentialSpec::Linear { g } => {
                let _ = writeln!(s, "g = {g}");
            }
            PotentialSpec::Quadratic { k, center } => {
                let _ = writeln!(s, "k = {k}");
                let _ = writeln!(s, "center = {}", join(center));
            }
            PotentialSpec::DoubleWell { scale } => {
                let _ = writeln!(s, "scale = {scale}");
            }
            PotentialSpec::Tabulated { file, .. } => {
                let _ = writeln!(s, "file = {}", file.display());
            }
        }
        let _ = writeln!(s, "\n[initial]");
        let _ = writeln!(s, "kind = {}", self.initial.kind());
        match &self.initial {
            InitialSpec::Uniform { rho0, eta0 } => {
                let _ = writeln!(s, "rho0 = {rho0}\neta0 = {eta0}");
            }
            InitialSpec::Equilibrium { mass_rho, mass_eta } => {
                let _ = writeln!(s, "mass_rho = {mass_rho}\nmass_eta = {mass_eta}");
            }
            InitialSpec::PerturbedEquilibrium {
                mass_rho,
                mass_eta,
                amplitude,
                modes,
                seed,
            } => {
                let _ = writeln!(s, "mass_rho = {mass_rho}\nmass_eta = {mass_eta}");
                let _ = writeln!(s, "amplitude = {amplitude}\nmodes = {modes}\nseed = {seed}");
            }
            InitialSpec::Tabulated { file, .. } => {
                let _ = writeln!(s, "file = {}", file.display());
            }
        }
        let _ = writeln!(s, "smooth = {}", self.smooth);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "t_end = {}", self.t_end);
        let _ = writeln!(s, "sample_every = {}", self.sample_every);
        let st = &self.step;
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "picard_tol = {}", st.picard_tol);
        let _ = writeln!(s, "picard_max = {}", st.picard_max);
        let _ = writeln!(s, "linear_tol = {}", st.linear_tol);
        let _ = writeln!(s, "energy_slack = {}", st.energy_slack);
        let _ = writeln!(s, "\n[asymptotics]");
        let _ = writeln!(s, "distance_threshold = {}", self.thresholds.distance);
        let _ = writeln!(s, "kinetic_threshold = {}", self.thresholds.kinetic);
        let c = &self.confinement;
        let _ = writeln!(s, "\n[confinement]");
        let _ = writeln!(s, "levels = {}", c.levels);
        let _ = writeln!(s, "tail_shell = {}", c.tail_shell);
        let _ = writeln!(s, "tail_threshold = {}", c.tail_threshold);
        let _ = writeln!(s, "radius_fraction = {}", c.radius_fraction);
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}", self.output_dir.display());
        s
    }
}
