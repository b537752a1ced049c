//! Run configuration: a flat `key = value` file, command-line overrides, and
//! validation of every grid value before anything is computed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use susy8v_core::params::SpectralPoint;
use susy8v_core::Nome64;

/// Rejected configuration; `field` names the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub field: String,
    pub message: String,
}

impl UsageError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        UsageError { field: field.to_string(), message: message.into() }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for UsageError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ThetaSelftest,
    Susy,
    Hamiltonian,
    Vertex,
    Transfer,
    Theorem1,
    Theorem2,
    Theorem3,
    Conjecture,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::ThetaSelftest,
        Suite::Susy,
        Suite::Hamiltonian,
        Suite::Vertex,
        Suite::Transfer,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Theorem3,
        Suite::Conjecture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ThetaSelftest => "theta-selftest",
            Suite::Susy => "susy",
            Suite::Hamiltonian => "hamiltonian",
            Suite::Vertex => "vertex",
            Suite::Transfer => "transfer",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Theorem3 => "theorem3",
            Suite::Conjecture => "conjecture",
        }
    }

    /// Largest chain length the suite accepts. Dense suites are bounded by
    /// the dense cap (with one extra site where `L+1` or an auxiliary space
    /// is built); the dominance suite switches to the matrix-free path.
    pub fn max_l(self) -> usize {
        match self {
            Suite::Theorem3 => 20,
            Suite::Theorem1 | Suite::Theorem2 | Suite::Conjecture => 11,
            _ => 10,
        }
    }
}

/// Parses one suite name or `all`.
pub fn parse_suites(list: &str) -> Result<Vec<Suite>, UsageError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if name == "all" {
            out.extend(Suite::ALL);
            continue;
        }
        match Suite::ALL.iter().find(|s| s.name() == name) {
            Some(s) => out.push(*s),
            None => return Err(UsageError::new("suite", format!("unknown suite `{name}`"))),
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(UsageError::new("suite", "empty suite list"));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = UsageError;
    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s.trim() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(UsageError::new("format", format!("expected json or csv, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub p: Vec<f64>,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { p: vec![0.2, 0.5], u: vec![0.1, 0.3], t: vec![PI / 6.0, 0.4, PI / 2.0], l: (1..=6).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub suite: Vec<Suite>,
    pub grid: Grid,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            suite: Suite::ALL.to_vec(),
            grid: Grid::default(),
            tolerances: BTreeMap::new(),
            seed: 1,
            output: None,
            format: Format::Json,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

/// A real number, `pi`, `pi/N` or `K*pi/N`.
pub fn parse_real(field: &str, s: &str) -> Result<f64, UsageError> {
    let s = s.trim();
    let bad = || UsageError::new(field, format!("`{s}` is not a number"));
    if let Some(pos) = s.find("pi") {
        let (num, rest) = (&s[..pos], &s[pos + 2..]);
        let k = match num.trim_end_matches('*') {
            "" => 1.0,
            x => x.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match rest.strip_prefix('/') {
            Some(x) => x.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => 1.0,
            None => return Err(bad()),
        };
        return Ok(k * PI / d);
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    if !x.is_finite() {
        return Err(bad());
    }
    Ok(x)
}

pub fn parse_reals(field: &str, s: &str) -> Result<Vec<f64>, UsageError> {
    let v = s.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_real(field, x)).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return Err(UsageError::new(field, "empty list"));
    }
    Ok(v)
}

/// Comma-separated lengths; `a..b` is an inclusive range.
pub fn parse_lengths(s: &str) -> Result<Vec<usize>, UsageError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| UsageError::new("L", format!("`{item}` is not a length")));
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(UsageError::new("L", format!("empty range `{item}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(num(item)?),
        }
    }
    if out.is_empty() {
        return Err(UsageError::new("L", "empty list"));
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), UsageError> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "suite" => self.suite = parse_suites(value)?,
            "p" => self.grid.p = parse_reals("p", value)?,
            "u" => self.grid.u = parse_reals("u", value)?,
            "t" => self.grid.t = parse_reals("t", value)?,
            "L" => self.grid.l = parse_lengths(value)?,
            "seed" => self.seed = value.parse().map_err(|_| UsageError::new("seed", format!("`{value}` is not a non-negative integer")))?,
            "out" | "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "threads" => {
                self.threads = match value.parse::<usize>() {
                    Ok(n) if n > 0 => n,
                    _ => return Err(UsageError::new("threads", format!("`{value}` is not a positive integer"))),
                }
            }
            k if k.starts_with("tol.") => {
                let name = &k[4..];
                let tol = parse_real(k, value)?;
                if tol <= 0.0 {
                    return Err(UsageError::new(k, "tolerance must be positive"));
                }
                self.tolerances.insert(name.to_string(), tol);
            }
            other => return Err(UsageError::new(other, "unknown key")),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), UsageError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError::new(&format!("line {}", n + 1), format!("expected `key = value`, got `{line}`")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Checks every grid value against the domain of the modules that will
    /// consume it.
    pub fn validate(&self) -> Result<(), UsageError> {
        if self.suite.is_empty() {
            return Err(UsageError::new("suite", "empty suite list"));
        }
        for &p in &self.grid.p {
            Nome64::new(p).map_err(|e| UsageError::new("p", e.to_string()))?;
        }
        for &p in &self.grid.p {
            for &u in &self.grid.u {
                for &t in &self.grid.t {
                    SpectralPoint::new(p, PI / 3.0, u, t, 1.0).map_err(|e| UsageError::new("t", e.to_string()))?;
                }
            }
        }
        if self.suite.contains(&Suite::Theorem3) {
            if let Some(u) = self.grid.u.iter().find(|&&u| !(u > 0.0 && u < PI / 3.0)) {
                return Err(UsageError::new("u", format!("{u} is outside the positive-weight interval (0, π/3) required by theorem3")));
            }
        }
        for &l in &self.grid.l {
            if l == 0 {
                return Err(UsageError::new("L", "chain length must be at least 1"));
            }
            if let Some(s) = self.suite.iter().find(|s| l > s.max_l()) {
                return Err(UsageError::new("L", format!("L = {l} exceeds the limit {} of suite {}", s.max_l(), s.name())));
            }
        }
        if self.threads == 0 {
            return Err(UsageError::new("threads", "must be positive"));
        }
        Ok(())
    }
}
