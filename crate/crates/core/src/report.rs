//! Experiment reports: per-point rows, empirical constants, named checks and a status.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub constants: Vec<(String, f64)>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

/// Shortest round-trip formatting, stable across runs.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>, seed: u64, columns: &[&str]) -> Self {
        ExperimentReport {
            name: name.into(),
            seed,
            params: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            constants: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
    }

    pub fn constant(&mut self, key: &str, value: f64) {
        self.constants.push((key.to_string(), value));
    }

    pub fn get_constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    pub fn check(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Worst check status; fail beats inconclusive beats pass.
    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {}", self.columns.join(",")).map_err(|e| Error::io("<report>", e))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush().map_err(|e| Error::io("<report>", e))?;
        Ok(())
    }

    /// `key=value` summary; everything except the optional header line is deterministic.
    pub fn write_summary<W: Write>(&self, mut w: W, header: Option<&str>) -> Result<()> {
        let io = |e| Error::io("<summary>", e);
        if let Some(h) = header {
            writeln!(w, "# {h}").map_err(io)?;
        }
        writeln!(w, "experiment={}", self.name).map_err(io)?;
        writeln!(w, "seed={}", self.seed).map_err(io)?;
        writeln!(w, "status={}", self.status().name()).map_err(io)?;
        for (k, v) in &self.params {
            writeln!(w, "param.{k}={v}").map_err(io)?;
        }
        for (k, v) in &self.constants {
            writeln!(w, "constant.{k}={}", num(*v)).map_err(io)?;
        }
        for c in &self.checks {
            writeln!(w, "check.{}={}", c.name, c.status.name()).map_err(io)?;
            if !c.detail.is_empty() {
                writeln!(w, "check.{}.detail={}", c.name, c.detail.replace('\n', " ")).map_err(io)?;
            }
        }
        for (i, n) in self.notes.iter().enumerate() {
            writeln!(w, "note.{i}={}", n.replace('\n', " ")).map_err(io)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_combination_and_output() {
        let mut r = ExperimentReport::new("demo", 3, &["x", "value"]);
        assert_eq!(r.status(), Status::Pass);
        r.row(vec![num(0.5), num(1.25)]);
        r.constant("c", 2.0);
        r.check("a", Status::Pass, "");
        r.check("b", Status::Inconclusive, "noisy");
        assert_eq!(r.status(), Status::Inconclusive);
        r.check("c", Status::Fail, "");
        assert_eq!(r.status().exit_code(), 1);
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# columns: x,value\nx,value\n5e-1,1.25e0\n"));
        let mut out = Vec::new();
        r.write_summary(&mut out, None).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.contains("status=fail") && s.contains("constant.c=2e0"));
    }
}
