//! Structured pass/fail records produced by the check functions.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sense {
    Below,
    Above,
    Fixed,
}

/// One certified (or refuted) statement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    /// Which statement of the theory the check certifies.
    pub citation: String,
    pub params: BTreeMap<String, f64>,
    pub residual: f64,
    pub tol: f64,
    pub status: Status,
    /// Wall time; zero until a caller times the check.
    pub ms: f64,
    #[serde(skip)]
    sense: Sense,
}

impl CheckRecord {
    fn make(check: &str, citation: &str, residual: f64, tol: f64, status: Status) -> Self {
        Self::make_with(check, citation, residual, tol, status, Sense::Fixed)
    }

    fn make_with(check: &str, citation: &str, residual: f64, tol: f64, status: Status, sense: Sense) -> Self {
        CheckRecord {
            check: check.to_string(),
            citation: citation.to_string(),
            params: BTreeMap::new(),
            residual,
            tol,
            status,
            ms: 0.0,
            sense,
        }
    }

    /// Passes iff `residual < tol`; NaN fails.
    pub fn below(check: &str, citation: &str, residual: f64, tol: f64) -> Self {
        let status = if residual < tol { Status::Pass } else { Status::Fail };
        Self::make_with(check, citation, residual, tol, status, Sense::Below)
    }

    /// Negative control: passes iff `residual > tol`.
    pub fn above(check: &str, citation: &str, residual: f64, tol: f64) -> Self {
        let status = if residual > tol { Status::Pass } else { Status::Fail };
        Self::make_with(check, citation, residual, tol, status, Sense::Above)
    }

    /// A boolean outcome recorded with residual 0 (pass) or 1 (fail).
    pub fn truth(check: &str, citation: &str, ok: bool) -> Self {
        let (r, s) = if ok { (0.0, Status::Pass) } else { (1.0, Status::Fail) };
        Self::make(check, citation, r, 0.5, s)
    }

    pub fn inconclusive(check: &str, citation: &str, why: &str) -> Self {
        let mut r = Self::make(check, citation, f64::NAN, f64::NAN, Status::Inconclusive);
        r.citation = format!("{citation} [{why}]");
        r
    }

    /// A check that could not run; a failure unless the error itself is an
    /// inconclusive numerical decision.
    pub fn error(check: &str, citation: &str, err: &crate::Error) -> Self {
        let status = match err {
            crate::Error::Inconclusive(_) => Status::Inconclusive,
            _ => Status::Fail,
        };
        let mut r = Self::make(check, citation, f64::NAN, f64::NAN, status);
        r.citation = format!("{citation} [error: {err}]");
        r
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_all(mut self, params: &[(&str, f64)]) -> Self {
        for (k, v) in params {
            self.params.insert((*k).to_string(), *v);
        }
        self
    }

    /// Replaces the tolerance of a threshold comparison and re-decides the
    /// status. Boolean, inconclusive and error records are left alone.
    pub fn set_tol(&mut self, tol: f64) {
        let ok = match self.sense {
            Sense::Below => self.residual < tol,
            Sense::Above => self.residual > tol,
            Sense::Fixed => return,
        };
        self.tol = tol;
        self.status = if ok { Status::Pass } else { Status::Fail };
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// A list of records from one or more checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<CheckRecord>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, r: CheckRecord) {
        self.records.push(r);
    }

    pub fn extend(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    /// Adds `params` to every record that does not already carry the key.
    pub fn tag(mut self, params: &[(&str, f64)]) -> Self {
        for r in &mut self.records {
            for (k, v) in params {
                r.params.entry((*k).to_string()).or_insert(*v);
            }
        }
        self
    }

    pub fn all_pass(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| r.status != Status::Pass)
    }

    /// Largest residual among records named `check`.
    pub fn worst(&self, check: &str) -> Option<f64> {
        self.records.iter().filter(|r| r.check == check).map(|r| r.residual).reduce(f64::max)
    }

    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for r in &self.records {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }
}

impl From<Vec<CheckRecord>> for Report {
    fn from(records: Vec<CheckRecord>) -> Self {
        Report { records }
    }
}

/// Runs `f` and stamps every produced record with the elapsed wall time.
pub fn timed(f: impl FnOnce() -> Report) -> Report {
    let t0 = Instant::now();
    let mut r = f();
    let ms = t0.elapsed().as_secs_f64() * 1e3;
    for rec in &mut r.records {
        rec.ms = ms;
    }
    r
}
