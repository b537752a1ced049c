//! Batch verification harness: named check suites over parameter grids,
//! JSON/CSV reports, and printers for individual constructions.

pub mod config;
pub mod print;
pub mod suites;

use std::io::Write;

use serde::Serialize;
use susy8v_core::report::{CheckRecord, Report, Summary};

pub use config::{Format, RunConfig, Suite, UsageError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl ReportDocument {
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            exit::FAIL
        } else if self.summary.inconclusive > 0 {
            exit::INCONCLUSIVE
        } else {
            exit::PASS
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.records {
            let params = r.params.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect::<Vec<_>>().join(";");
            let status = serde_json::to_value(r.status).expect("status serializes");
            out.write_record([
                r.check.as_str(),
                r.citation.as_str(),
                &params,
                &num(r.residual),
                &num(r.tol),
                status.as_str().unwrap_or_default(),
                &num(r.ms),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub const CSV_HEADER: [&str; 7] = ["check", "citation", "params", "residual", "tol", "status", "ms"];

/// Seventeen significant digits, enough to round-trip any double.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Validates the config, runs its suites and assembles the report.
pub fn run_suite(config: RunConfig) -> Result<ReportDocument, UsageError> {
    config.validate()?;
    let report: Report = suites::run_records(&config);
    let summary = report.summary();
    Ok(ReportDocument { version: VERSION.to_string(), config, records: report.records, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use susy8v_core::report::CheckRecord;

    fn doc(records: Vec<CheckRecord>) -> ReportDocument {
        let summary = Report::from(records.clone()).summary();
        ReportDocument { version: VERSION.into(), config: RunConfig::default(), records, summary }
    }

    #[test]
    fn exit_code_contract() {
        let pass = CheckRecord::below("a", "x", 0.0, 1.0);
        let fail = CheckRecord::below("a", "x", 2.0, 1.0);
        let inc = CheckRecord::inconclusive("a", "x", "band");
        assert_eq!(doc(vec![pass.clone()]).exit_code(), exit::PASS);
        assert_eq!(doc(vec![pass.clone(), inc.clone()]).exit_code(), exit::INCONCLUSIVE);
        assert_eq!(doc(vec![inc, fail, pass]).exit_code(), exit::FAIL);
    }

    #[test]
    fn csv_numbers_round_trip() {
        let r = CheckRecord::below("chk", "a, b", 0.1 + 0.2, 1.0).with("L", 3.0);
        let text = doc(vec![r]).to_csv();
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
        let row = rd.records().next().unwrap().unwrap();
        assert_eq!(&row[1], "a, b");
        assert_eq!(&row[2], "L=3.0000000000000000e0");
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(&row[5], "pass");
    }
}
