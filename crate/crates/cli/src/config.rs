//! Flat `key = value` configuration with dotted keys.
//!
//! One pair per line; `#` starts a comment line; blank lines are ignored.
//! Reals accept `p/q` fractions and `pi` multiples (`8pi`, `pi/2`); lists
//! are comma-separated. Unknown and duplicate keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gkdv_core::continuation::S_CRITICAL;
use gkdv_core::estimates::{EstimateId, EstimateParams, Lab, TrialEnsemble, TrialKind};
use gkdv_core::solver::{Dealias, SolverConfig};
use gkdv_core::spectral::Grid1D;

use crate::error::CliError;

/// `(key, default, description)`. Defaults marked `*` depend on the command.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("command", "validate", "solve | almost | estimate | globalize | validate"),
    ("seed", "0", "root seed of every random draw"),
    ("grid.n", "*", "grid points (solve 512, almost 256, globalize 128)"),
    ("grid.L", "*", "box length (solve 100, almost 2pi, globalize 40)"),
    ("solver.dt", "*", "time step (solve 1e-4, almost 1e-5, globalize 0.01)"),
    ("solver.sign", "1", "+1 focusing, -1 defocusing"),
    ("solver.dealias", "pad", "pad | truncate"),
    ("solver.dealias_fraction", "0.4", "retained fraction of the spectrum under truncate"),
    ("solve.preset", "soliton", "soliton | rough | gaussian"),
    ("solve.c", "1", "soliton speed"),
    ("solve.T", "1", "horizon"),
    ("solve.stride", "1000", "steps between stored snapshots"),
    ("solve.dump", "false", "also write the binary spectral dump"),
    ("data.slope", "-1", "rough data: spectral slope of |u^(xi)|"),
    ("data.k_max", "50", "rough data: highest populated mode"),
    ("data.l2", "1", "rough data: L2 norm"),
    ("data.amplitude", "1", "gaussian data: peak value"),
    ("data.width", "2", "gaussian data: width"),
    ("almost.s", "-0.125", "order of I_N"),
    ("almost.N_list", "4,8,16,32,64", "cut-offs of the sweep"),
    ("almost.delta", "1", "length of the solve"),
    ("estimate.ids", "all", "comma-separated estimate ids, or all"),
    ("estimate.kind", "gaussian", "gaussian | near_resonant | mixed"),
    ("estimate.trials", "100", "ensemble size"),
    ("estimate.refine", "true", "repeat on the doubled lattice"),
    ("estimate.s", "-0.05", "regularity s"),
    ("estimate.s_i", "-0.125", "regularity of each factor of the four-linear estimate"),
    ("estimate.b", "0.55", "X_{s,b} exponent, b > 1/2"),
    ("estimate.b_prime", "auto", "dual exponent; auto = midpoint of (-1/2, s - 1/3)"),
    ("estimate.N", "1", "cut-off of I_N"),
    ("estimate.lab.n", "64", "lattice points in x"),
    ("estimate.lab.n_t", "64", "lattice points in t"),
    ("estimate.lab.L", "8pi", "box length"),
    ("estimate.lab.delta", "0.5", "restriction interval"),
    ("globalize.s", "-1/84", "regularity, -1/42 < s < 0"),
    ("globalize.T_list", "2,4,8", "horizons"),
    ("globalize.cap_steps", "1000", "step cap; larger runs switch to demo mode"),
    ("globalize.epsilon0_override", "auto", "fixed eps0; auto = calibrate"),
    ("globalize.decay_constant", "0", "constant C of the decay estimate"),
    ("globalize.N_ref", "16", "cut-off used during calibration"),
    ("globalize.data_ratio", "0.515", "||u0||_{H^s} / eps0 of the gaussian data"),
    ("globalize.data_width", "1.5", "width of the gaussian data"),
];

fn command_default(command: Command, key: &str) -> Option<&'static str> {
    use Command::*;
    Some(match (command, key) {
        (Almost, "grid.n") => "256",
        (Almost, "grid.L") => "2pi",
        (Almost, "solver.dt") => "1e-5",
        (Globalize, "grid.n") => "128",
        (Globalize, "grid.L") => "40",
        (Globalize, "solver.dt") => "0.01",
        (_, "grid.n") => "512",
        (_, "grid.L") => "100",
        (_, "solver.dt") => "1e-4",
        _ => return None,
    })
}

/// Split configuration text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, CliError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || !k.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
            return Err(CliError::Config(format!("line {}: malformed key {k:?}", i + 1)));
        }
        if v.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for {k}", i + 1)));
        }
        if out.iter().any(|(_, seen, _)| seen == k) {
            return Err(CliError::Config(format!("line {}: duplicate key {k}", i + 1)));
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Real literal: decimal, `p/q`, `pi`, `<x>pi`, `<x>pi/q`.
pub fn parse_real(v: &str) -> Option<f64> {
    let (num, den) = match v.split_once('/') {
        Some((a, b)) => (a.trim(), Some(b.trim().parse::<f64>().ok()?)),
        None => (v.trim(), None),
    };
    let num = if let Some(head) = num.strip_suffix("pi") {
        let head = head.trim();
        match head {
            "" => PI,
            "-" => -PI,
            h => h.parse::<f64>().ok()? * PI,
        }
    } else {
        num.parse::<f64>().ok()?
    };
    let x = match den {
        Some(d) if d != 0.0 => num / d,
        Some(_) => return None,
        None => num,
    };
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Almost,
    Estimate,
    Globalize,
    Validate,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "solve" => Command::Solve,
            "almost" => Command::Almost,
            "estimate" => Command::Estimate,
            "globalize" => Command::Globalize,
            "validate" => Command::Validate,
            _ => return Err(CliError::Config(format!("unknown command {s:?}"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Solve => "solve",
            Command::Almost => "almost",
            Command::Estimate => "estimate",
            Command::Globalize => "globalize",
            Command::Validate => "validate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Soliton,
    Rough,
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub preset: Preset,
    pub c: f64,
    pub horizon: f64,
    pub stride: usize,
    pub dump: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataOptions {
    pub slope: f64,
    pub k_max: usize,
    pub l2: f64,
    pub amplitude: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostOptions {
    pub s: f64,
    pub n_list: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateOptions {
    pub ids: Vec<EstimateId>,
    pub ensemble: TrialEnsemble,
    pub refine: bool,
    pub params: EstimateParams,
    pub lab: Lab,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalizeOptions {
    pub s: f64,
    pub t_list: Vec<f64>,
    pub cap_steps: usize,
    pub epsilon0_override: Option<f64>,
    pub decay_constant: f64,
    pub n_ref: f64,
    pub data_ratio: f64,
    pub data_width: f64,
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub solver: SolverConfig,
    pub solve: SolveOptions,
    pub data: DataOptions,
    pub almost: AlmostOptions,
    pub estimate: EstimateOptions,
    pub globalize: GlobalizeOptions,
    /// Every key with its resolved value, in key order.
    pub echo: BTreeMap<String, String>,
    pub out: PathBuf,
    pub threads: usize,
}

struct Values<'a>(&'a BTreeMap<String, String>);

impl Values<'_> {
    fn raw(&self, key: &str) -> &str {
        &self.0[key]
    }

    fn real(&self, key: &str) -> Result<f64, CliError> {
        parse_real(self.raw(key)).ok_or_else(|| bad(key, self.raw(key), "a real number"))
    }

    fn positive(&self, key: &str) -> Result<f64, CliError> {
        let x = self.real(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(bad(key, self.raw(key), "a positive number"))
        }
    }

    fn count(&self, key: &str) -> Result<usize, CliError> {
        self.raw(key).parse().map_err(|_| bad(key, self.raw(key), "a non-negative integer"))
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        self.raw(key).parse().map_err(|_| bad(key, self.raw(key), "true or false"))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        self.raw(key)
            .split(',')
            .map(|p| parse_real(p).ok_or_else(|| bad(key, self.raw(key), "a comma-separated list of reals")))
            .collect()
    }

    fn auto_real(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.positive(key).map(Some)
        }
    }
}

fn bad(key: &str, value: &str, want: &str) -> CliError {
    CliError::Config(format!("{key} = {value:?}: expected {want}"))
}

fn core(key: &str, e: gkdv_core::Error) -> CliError {
    match e {
        gkdv_core::Error::Config(m) => CliError::Config(format!("{key}: {m}")),
        other => CliError::Config(format!("{key}: {other}")),
    }
}

impl RunConfig {
    /// Resolve `pairs` (later entries win) against the defaults.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, CliError> {
        let mut given: BTreeMap<String, String> = BTreeMap::new();
        for (k, v) in pairs {
            if !KEYS.iter().any(|(key, _, _)| *key == k) {
                return Err(CliError::Config(format!("unknown key {k:?}")));
            }
            given.insert(k.to_string(), v.trim().to_string());
        }
        let command: Command = given.get("command").map_or("validate", String::as_str).parse()?;
        let mut echo = BTreeMap::new();
        for &(k, default, _) in KEYS {
            let v = match given.get(k) {
                Some(v) => v.clone(),
                None => command_default(command, k).unwrap_or(default).to_string(),
            };
            echo.insert(k.to_string(), v);
        }
        Self::build(command, echo)
    }

    fn build(command: Command, echo: BTreeMap<String, String>) -> Result<Self, CliError> {
        let v = Values(&echo);
        let seed: u64 = v.raw("seed").parse().map_err(|_| bad("seed", v.raw("seed"), "an unsigned integer"))?;

        let grid = Grid1D::new(v.count("grid.n")?, v.positive("grid.L")?).map_err(|e| core("grid", e))?;
        let dealias = match v.raw("solver.dealias") {
            "pad" => Dealias::Pad,
            "truncate" => Dealias::Truncate,
            other => return Err(bad("solver.dealias", other, "pad or truncate")),
        };
        let (sign, fraction) = (v.real("solver.sign")?, v.real("solver.dealias_fraction")?);
        let solver = SolverConfig::new(grid, v.positive("solver.dt")?)
            .and_then(|c| c.with_sign(sign))
            .and_then(|c| c.with_dealias(dealias, fraction))
            .map_err(|e| core("solver", e))?;

        let preset = match v.raw("solve.preset") {
            "soliton" => Preset::Soliton,
            "rough" => Preset::Rough,
            "gaussian" => Preset::Gaussian,
            other => return Err(bad("solve.preset", other, "soliton, rough or gaussian")),
        };
        let solve = SolveOptions {
            preset,
            c: v.positive("solve.c")?,
            horizon: v.positive("solve.T")?,
            stride: v.count("solve.stride")?.max(1),
            dump: v.flag("solve.dump")?,
        };
        if command == Command::Solve && preset == Preset::Soliton && solver.sign != 1.0 {
            return Err(CliError::Config("solve.preset = soliton needs solver.sign = 1".into()));
        }

        let data = DataOptions {
            slope: v.real("data.slope")?,
            k_max: v.count("data.k_max")?,
            l2: v.positive("data.l2")?,
            amplitude: v.real("data.amplitude")?,
            width: v.positive("data.width")?,
        };

        let almost = AlmostOptions {
            s: v.real("almost.s")?,
            n_list: v.list("almost.N_list")?,
            delta: v.positive("almost.delta")?,
        };
        if command == Command::Almost {
            if almost.s > 0.0 {
                return Err(CliError::Config(format!("almost.s must satisfy s <= 0, got {}", almost.s)));
            }
            if almost.n_list.iter().any(|&n| !(n >= 1.0)) {
                return Err(CliError::Config("almost.N_list entries must be >= 1".into()));
            }
        }

        let ids = match v.raw("estimate.ids") {
            "all" => EstimateId::ALL.to_vec(),
            list => list
                .split(',')
                .map(|p| p.trim().parse::<EstimateId>().map_err(|e| core("estimate.ids", e)))
                .collect::<Result<Vec<_>, _>>()?,
        };
        let kind = match v.raw("estimate.kind") {
            "gaussian" => TrialKind::GaussianBumps,
            "near_resonant" => TrialKind::NearResonantPackets,
            "mixed" => TrialKind::Mixed,
            other => return Err(bad("estimate.kind", other, "gaussian, near_resonant or mixed")),
        };
        let ensemble = TrialEnsemble {
            kind,
            ..TrialEnsemble::gaussian(v.count("estimate.trials")?, seed)
        };
        let mut params = EstimateParams::with_s(v.real("estimate.s")?);
        params.s_i = [v.real("estimate.s_i")?; 4];
        params.b = v.real("estimate.b")?;
        if let Some(bp) = match v.raw("estimate.b_prime") {
            "auto" => None,
            _ => Some(v.real("estimate.b_prime")?),
        } {
            params.b_prime = bp;
        }
        params.n_cut = v.real("estimate.N")?;
        let lab = Lab {
            box_length: v.positive("estimate.lab.L")?,
            n: v.count("estimate.lab.n")?,
            n_t: v.count("estimate.lab.n_t")?,
            delta: v.positive("estimate.lab.delta")?,
        };
        if command == Command::Estimate {
            params.validate().map_err(|e| core("estimate", e))?;
            for &id in &ids {
                params.validate_for(id).map_err(|e| core(&format!("estimate {id}"), e))?;
            }
            ensemble.validate().map_err(|e| core("estimate", e))?;
            lab.validate().map_err(|e| core("estimate.lab", e))?;
        }
        let estimate = EstimateOptions {
            ids,
            ensemble,
            refine: v.flag("estimate.refine")?,
            params,
            lab,
        };

        let globalize = GlobalizeOptions {
            s: v.real("globalize.s")?,
            t_list: v.list("globalize.T_list")?,
            cap_steps: v.count("globalize.cap_steps")?,
            epsilon0_override: v.auto_real("globalize.epsilon0_override")?,
            decay_constant: v.real("globalize.decay_constant")?,
            n_ref: v.real("globalize.N_ref")?,
            data_ratio: v.positive("globalize.data_ratio")?,
            data_width: v.positive("globalize.data_width")?,
        };
        if command == Command::Globalize {
            let s = globalize.s;
            if !(s > S_CRITICAL && s < 0.0) {
                return Err(CliError::Config(format!(
                    "globalize.s = {s}: the iteration needs s > -1/42 ≈ -0.0238 (and s < 0)"
                )));
            }
            if globalize.t_list.iter().any(|&t| !(t > 0.0)) {
                return Err(CliError::Config("globalize.T_list entries must be positive".into()));
            }
            if globalize.cap_steps == 0 {
                return Err(CliError::Config("globalize.cap_steps must be >= 1".into()));
            }
            if !(globalize.decay_constant >= 0.0) {
                return Err(CliError::Config("globalize.decay_constant must be >= 0".into()));
            }
            if !(globalize.n_ref >= 1.0) {
                return Err(CliError::Config("globalize.N_ref must be >= 1".into()));
            }
        }

        Ok(Self {
            command,
            seed,
            solver,
            solve,
            data,
            almost,
            estimate,
            globalize,
            echo,
            out: PathBuf::from("out"),
            threads: 0,
        })
    }

    /// Layer, from lowest to highest precedence: defaults, the file at
    /// `path`, `sets` (`key=value`), `seed`, and `command`.
    pub fn load(
        command: Command,
        path: Option<&Path>,
        sets: &[String],
        seed: Option<u64>,
        out: PathBuf,
        threads: usize,
    ) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => fs::read_to_string(p).map_err(|e| CliError::io(p, e))?,
            None => String::new(),
        };
        let mut pairs: Vec<(String, String)> = parse_pairs(&text)?.into_iter().map(|(_, k, v)| (k, v)).collect();
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set {s:?}: expected key=value")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        if let Some(seed) = seed {
            pairs.push(("seed".into(), seed.to_string()));
        }
        pairs.push(("command".into(), command.to_string()));
        let mut cfg = Self::from_pairs(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
        cfg.out = out;
        cfg.threads = threads;
        Ok(cfg)
    }

    /// The resolved configuration in file syntax; re-parsing it yields the
    /// same configuration.
    pub fn to_text(&self) -> String {
        self.echo.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Help text listing every key and its default.
pub fn key_reference() -> String {
    let mut s = String::from("configuration keys (key = default: meaning):\n");
    for (k, d, doc) in KEYS {
        s.push_str(&format!("  {k} = {d}: {doc}\n"));
    }
    s
}
