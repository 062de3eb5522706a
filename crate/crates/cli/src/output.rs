//! Run context, report writing and the exit-code contract.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

/// Version tag of every `report.json`.
pub const SCHEMA: &str = "hclab/1";

/// Why a run did not pass, in exit-code order.
#[derive(Debug)]
pub enum Failure {
    /// A checked criterion or clause failed (exit 1).
    Criterion(String),
    /// The configuration is malformed or violates a precondition (exit 2).
    Config(String),
    /// A size, integer or truncation limit was exceeded (exit 3).
    Capacity(String),
    /// Reading or writing a file failed (exit 4).
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Criterion(_) => 1,
            Failure::Config(_) => 2,
            Failure::Capacity(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Criterion(_) => "criterion",
            Failure::Config(_) => "config",
            Failure::Capacity(_) => "capacity",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Criterion(m) | Failure::Config(m) | Failure::Capacity(m) | Failure::Io(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl From<hclab::Error> for Failure {
    fn from(e: hclab::Error) -> Self {
        match e {
            hclab::Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            hclab::Error::Synthesis { .. } => Failure::Criterion(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

pub fn io_failure(path: &Path, e: impl fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// What a subcommand produced: its verdict, a summary for the report and a
/// table for standard output.
pub struct Outcome {
    pub passed: bool,
    pub summary: Value,
    pub table: String,
}

/// Output directory and invocation metadata shared by the subcommands.
pub struct RunContext {
    pub command: &'static str,
    pub out: PathBuf,
    pub seed: u64,
    /// Directory of the configuration file, for relative paths inside it.
    pub config_dir: PathBuf,
}

impl RunContext {
    pub fn prepare(&self) -> Result<(), Failure> {
        fs::create_dir_all(&self.out).map_err(|e| io_failure(&self.out, e))
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
        tracing::info!(file = %path.display(), "wrote");
        Ok(())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        self.config_dir.join(path)
    }

    /// Writes `report.json` for a finished or failed run.
    pub fn report(&self, config: &Value, result: &Result<Outcome, Failure>) -> Result<(), Failure> {
        let mut report = serde_json::json!({
            "schema": SCHEMA,
            "command": self.command,
            "seed": self.seed,
            "config": config,
        });
        match result {
            Ok(o) => {
                report["status"] = Value::from(if o.passed { "pass" } else { "fail" });
                report["result"] = o.summary.clone();
            }
            Err(f) => {
                report["status"] = Value::from("error");
                report["error"] = serde_json::json!({ "kind": f.kind(), "exit_code": f.code(), "message": f.message() });
            }
        }
        self.write_json("report.json", &report)
    }
}

/// Left-aligned text table with a header row.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)
        .map_err(|e| Failure::Io(e.to_string()))?;
    for row in rows {
        w.write_record(row)
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.6e}")
}

pub fn clause_status(status: hclab::criteria::ClauseStatus) -> String {
    use hclab::criteria::ClauseStatus;
    match status {
        ClauseStatus::Pass => "pass",
        ClauseStatus::Fail => "fail",
        ClauseStatus::Indeterminate => "indeterminate",
    }
    .into()
}
