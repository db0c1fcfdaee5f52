//! Regular harmonic functions `u(x) = P_x(X_{tau_D} in A)`.

use crate::error::{Error, Result};
use crate::potential::target::TargetSet;
use crate::sim::{ExitBatch, ExitSampler, Geometry};

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Completed paths behind the estimate.
    pub n: usize,
    pub target: TargetSet,
}

impl HarmonicEstimate {
    /// Relative standard error; infinite when the estimate is zero.
    pub fn rel_error(&self) -> f64 {
        if self.value > 0.0 {
            self.stderr / self.value
        } else {
            f64::INFINITY
        }
    }
}

/// Fraction of the batch's exits that land in `target`.
pub fn harmonic_from_batch(batch: &ExitBatch, target: &TargetSet) -> HarmonicEstimate {
    let n = batch.samples.len();
    let hits = batch.positions().filter(|y| target.contains(y)).count();
    let p = hits as f64 / n.max(1) as f64;
    HarmonicEstimate {
        value: p,
        stderr: (p * (1.0 - p) / n.max(1) as f64).sqrt(),
        n,
        target: target.clone(),
    }
}

/// Monte Carlo `P_x(X_{tau_D} in A)` from `n` exits.
pub fn harmonic_eval(
    sampler: &ExitSampler,
    geometry: &Geometry,
    target: &TargetSet,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<HarmonicEstimate> {
    target.validate(sampler.model.d)?;
    if n == 0 {
        return Err(Error::Domain("harmonic estimate needs n > 0".into()));
    }
    let batch = ExitBatch::generate(sampler, geometry, x, n, seed)?;
    Ok(harmonic_from_batch(&batch, target))
}
