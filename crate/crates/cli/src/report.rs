use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub status: Status,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckRow {
    /// Pass iff `worst < tolerance`.
    pub fn below(
        check: impl Into<String>,
        worst: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        let status = if worst < tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        CheckRow::with_status(check, status, worst, tolerance, detail)
    }

    pub fn with_status(
        check: impl Into<String>,
        status: Status,
        worst: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        CheckRow {
            check: check.into(),
            status,
            worst_residual: worst,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn error(check: impl Into<String>, tolerance: f64, err: impl fmt::Display) -> Self {
        CheckRow::with_status(check, Status::Error, f64::NAN, tolerance, err.to_string())
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub rows: Vec<CheckRow>,
    pub files: Vec<PathBuf>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == Status::Pass)
    }

    /// Writes `report.csv` into `dir` and records it.
    pub fn write_csv(&mut self, dir: &Path) -> Result<(), CliError> {
        let mut text = String::from("check,status,worst_residual,tolerance,detail\n");
        for r in &self.rows {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&r.check),
                r.status,
                number(r.worst_residual),
                number(r.tolerance),
                csv_field(&r.detail)
            ));
        }
        let path = dir.join("report.csv");
        write_file(&path, text.as_bytes())?;
        self.files.push(path);
        Ok(())
    }

    pub fn print_summary(&self, command: &str, model: &str) {
        println!("kcontact {command} ({model})");
        for r in &self.rows {
            println!(
                "  {:<6} {:<28} worst {} tol {}  {}",
                r.status,
                r.check,
                number(r.worst_residual),
                number(r.tolerance),
                r.detail
            );
        }
        for f in &self.files {
            println!("  wrote {}", f.display());
        }
        println!("  wall time {:.3} s", self.wall_time.as_secs_f64());
    }
}

/// `{:.16e}`, the round-trip format used by every CSV.
pub fn number(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(bytes).map_err(io)
}

/// Builds a CSV from a header and rows of numbers.
pub fn numeric_csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut text = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(number).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_and_status() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
        assert_eq!(CheckRow::below("c", 0.1, 1.0, "").status, Status::Pass);
        assert_eq!(CheckRow::below("c", 1.0, 1.0, "").status, Status::Fail);
        assert_eq!(CheckRow::below("c", f64::NAN, 1.0, "").status, Status::Fail);
        assert_eq!(number(0.5), "5.0000000000000000e-1");
        assert_eq!(
            numeric_csv("a,b", [vec![1.0, 2.0]]),
            "a,b\n1.0000000000000000e0,2.0000000000000000e0\n"
        );
    }
}
