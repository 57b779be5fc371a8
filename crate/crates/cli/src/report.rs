//! Report and progress plumbing. A report is a single JSON document whose
//! every field except `meta` is a pure function of inputs and config, so
//! repeated runs are byte-identical once `meta` is set aside. Progress is a
//! stream of JSON lines on stderr, mirrored to a file when an output
//! directory is given.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

/// Failure classes, one per nonzero exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 2: unreadable, unparseable, or mutually inconsistent inputs.
    Input(String),
    /// Exit 3: a word-length or iteration budget ran out.
    Budget(String),
    /// Exit 4: the analysis finished but an audit flagged a violation.
    Invariant(String),
    /// Exit 5: a guard refused the run (non-hyperbolic input, finite index).
    Refused(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Invariant(_) => 4,
            Failure::Refused(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Budget(m) | Failure::Invariant(m) | Failure::Refused(m) => {
                m
            }
        }
    }
}

/// Everything that may vary between identical runs lives here.
#[derive(Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub unix_time_secs: u64,
}

impl Meta {
    pub fn now() -> Meta {
        let unix_time_secs =
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Meta { tool: "fgdyn", version: env!("CARGO_PKG_VERSION"), unix_time_secs }
    }
}

#[derive(Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    /// Echo of the parsed inputs (texts, never file paths).
    pub inputs: Value,
    /// Budgets the run actually used, defaults included.
    pub config: Value,
    pub result: Value,
    /// Budget exhaustions that were survivable (skipped samples and the
    /// like); fatal ones exit 3 instead.
    pub budget_flags: Vec<String>,
    pub meta: Meta,
}

impl Report {
    pub fn new(command: &'static str, inputs: Value, config: Value, result: Value) -> Report {
        Report {
            schema: "fgdyn-report/1",
            command,
            inputs,
            config,
            result,
            budget_flags: Vec::new(),
            meta: Meta::now(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// A finished analysis: the report, human-readable summary lines, and an
/// optional audit violation that turns exit 0 into exit 4 after the report
/// is emitted.
pub struct Outcome {
    pub report: Report,
    pub summary: Vec<String>,
    pub violation: Option<String>,
}

impl Outcome {
    pub fn new(report: Report, summary: Vec<String>) -> Outcome {
        Outcome { report, summary, violation: None }
    }
}

/// JSON Lines progress sink: stderr always, `progress.jsonl` when an output
/// directory is set.
pub struct Progress {
    file: Option<BufWriter<File>>,
}

impl Progress {
    pub fn new(out_dir: Option<&Path>) -> Result<Progress, Failure> {
        let file = match out_dir {
            None => None,
            Some(dir) => {
                fs::create_dir_all(dir)
                    .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
                let path = dir.join("progress.jsonl");
                let f = File::create(&path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                Some(BufWriter::new(f))
            }
        };
        Ok(Progress { file })
    }

    pub fn event(&mut self, kind: &str, data: Value) {
        let line = json!({ "event": kind, "data": data }).to_string();
        eprintln!("{line}");
        if let Some(f) = &mut self.file {
            let _ = writeln!(f, "{line}");
            let _ = f.flush();
        }
    }
}

pub fn write_report(dir: &PathBuf, report: &Report) -> Result<(), Failure> {
    let path = dir.join("report.json");
    fs::write(&path, report.to_json())
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}
