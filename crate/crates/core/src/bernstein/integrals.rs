//! The three scaling integrals controlled by `phi(lambda^2)`:
//!
//! * `I1 = ∫_0^{1/l} phi(r^-2)^{1/2} dr` against `phi(l^2)^{1/2} / l`,
//! * `I2 = l^2 ∫_0^{1/l} r phi(r^-2) dr + ∫_{1/l}^{R0} phi(r^-2)/r dr` against `phi(l^2)`,
//! * `I3` as `I2` with `phi^{1/2}` in place of `phi`, against `phi(l^2)^{1/2}`.

use rayon::prelude::*;

use crate::bernstein::model::PhiModel;
use crate::error::{Error, Result};
use crate::profile::{ProfilePoint, RatioProfile};
use crate::quad::{try_integrate_log, QuadSpec};

/// Lower cut of the `(0, 1/l)` integrals, relative to `1/l`.
const DEPTH: f64 = 1e-14;

/// `∫_0^b r^p phi(r^-2)^q dr` with a local power-law correction for `(0, DEPTH b)`.
fn near_zero(model: &PhiModel, p: f64, q: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    let h = |r: f64| -> Result<f64> { Ok(r.powf(p) * model.eval(r.powi(-2))?.powf(q)) };
    let lo = b * DEPTH;
    let body = try_integrate_log(h, lo, b, &[], spec)?;
    // h ~ r^s near lo; s from the local log-slope
    let (h1, h2) = (h(lo)?, h(lo * 1.01)?);
    let s = (h2 / h1).ln() / 1.01f64.ln();
    if !(s > -1.0) {
        return Err(Error::Domain(format!(
            "scaling integral not integrable at 0 (local exponent {s})"
        )));
    }
    Ok(body.value + h1 * lo / (s + 1.0))
}

fn far(model: &PhiModel, q: f64, a: f64, b: f64, spec: &QuadSpec) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    Ok(try_integrate_log(|r| Ok(model.eval(r.powi(-2))?.powf(q) / r), a, b, &[], spec)?.value)
}

/// Ratios of the three integrals to their right-hand sides at one `lambda`.
pub fn scaling_integral_ratios(model: &PhiModel, lambda: f64, r0: f64, spec: &QuadSpec) -> Result<[f64; 3]> {
    if !(lambda >= 1.0 / r0) {
        return Err(Error::Domain(format!("scaling integrals need lambda >= 1/R0, got {lambda}")));
    }
    let b = 1.0 / lambda;
    let pl = model.eval(lambda * lambda)?;
    let i1 = near_zero(model, 0.0, 0.5, b, spec)?;
    let i2 = lambda * lambda * near_zero(model, 1.0, 1.0, b, spec)? + far(model, 1.0, b, r0, spec)?;
    let i3 = lambda * lambda * near_zero(model, 1.0, 0.5, b, spec)? + far(model, 0.5, b, r0, spec)?;
    Ok([i1 / (pl.sqrt() / lambda), i2 / pl, i3 / pl.sqrt()])
}

pub fn scaling_integral_profile(
    model: &PhiModel,
    lambda_grid: &[f64],
    r0: f64,
    spec: &QuadSpec,
) -> Result<[RatioProfile; 3]> {
    let rows = lambda_grid
        .par_iter()
        .map(|&l| scaling_integral_ratios(model, l, r0, spec))
        .collect::<Result<Vec<_>>>()?;
    let make = |k: usize, label: &str| {
        RatioProfile::new(
            label,
            lambda_grid
                .iter()
                .zip(&rows)
                .map(|(&l, r)| ProfilePoint {
                    arg: l,
                    aux: None,
                    ratio: r[k],
                })
                .collect(),
        )
    };
    Ok([
        make(0, "scaling_sqrt_head")?,
        make(1, "scaling_phi")?,
        make(2, "scaling_sqrt_phi")?,
    ])
}
