//! Ratio profiles: the evidence container for every two-sided comparability check.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub arg: f64,
    /// Secondary coordinate (e.g. `lambda` in a `(t, lambda)` scan).
    pub aux: Option<f64>,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioProfile {
    pub label: String,
    pub points: Vec<ProfilePoint>,
    pub min: f64,
    pub max: f64,
}

impl RatioProfile {
    pub fn new(label: impl Into<String>, points: Vec<ProfilePoint>) -> Result<Self> {
        let label = label.into();
        if points.is_empty() {
            return Err(Error::Domain(format!("empty profile {label}")));
        }
        if let Some(bad) = points.iter().find(|p| !p.ratio.is_finite()) {
            return Err(Error::Domain(format!(
                "profile {label}: non-finite ratio at {:e}",
                bad.arg
            )));
        }
        let min = points.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
        let max = points.iter().map(|p| p.ratio).fold(f64::NEG_INFINITY, f64::max);
        Ok(RatioProfile {
            label,
            points,
            min,
            max,
        })
    }

    pub fn from_pairs(label: impl Into<String>, pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Self::new(
            label,
            pairs
                .into_iter()
                .map(|(arg, ratio)| ProfilePoint {
                    arg,
                    aux: None,
                    ratio,
                })
                .collect(),
        )
    }

    /// `max / min`; infinite if some ratio is nonpositive.
    pub fn spread(&self) -> f64 {
        if self.min > 0.0 {
            self.max / self.min
        } else {
            f64::INFINITY
        }
    }

    pub fn median(&self) -> f64 {
        let mut r: Vec<f64> = self.points.iter().map(|p| p.ratio).collect();
        r.sort_by(f64::total_cmp);
        let n = r.len();
        if n % 2 == 1 {
            r[n / 2]
        } else {
            0.5 * (r[n / 2 - 1] + r[n / 2])
        }
    }

    pub const CSV_COLUMNS: &'static str = "label,arg,aux,ratio";

    /// Long-format CSV body (one row per point), preceded by the schema comment.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {}", Self::CSV_COLUMNS).map_err(|e| Error::io("<profile>", e))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::CSV_COLUMNS.split(','))?;
        for p in &self.points {
            wr.write_record([
                self.label.clone(),
                format!("{:e}", p.arg),
                p.aux.map(|a| format!("{a:e}")).unwrap_or_default(),
                format!("{:e}", p.ratio),
            ])?;
        }
        wr.flush().map_err(|e| Error::io("<profile>", e))?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Log-uniform grid from `lo` to `hi` inclusive with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=n)
        .map(|i| lo * 10f64.powf(decades * i as f64 / n as f64))
        .collect()
}
