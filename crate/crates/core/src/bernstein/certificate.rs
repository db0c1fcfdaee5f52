//! Finite-grid certification of the two-sided power scaling of `phi`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bernstein::model::PhiModel;
use crate::error::{Error, Result};
use crate::profile::{ProfilePoint, RatioProfile};

/// Log grid: `lambda in [1, lambda_max]`, `r in [1/R0^2, r_max]`, `per_decade` nodes per decade.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertGrid {
    pub lambda_max: f64,
    pub r_max: f64,
    pub per_decade: usize,
}

impl Default for CertGrid {
    fn default() -> Self {
        CertGrid {
            lambda_max: 1e4,
            r_max: 1e6,
            per_decade: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCertificate {
    pub delta1: f64,
    pub delta2: f64,
    pub a1: f64,
    pub a2: f64,
    pub r0: f64,
    pub grid: CertGrid,
    pub pass: bool,
    /// `(lambda, r)` attaining `delta1`, `delta2`, `a1`, `a2`.
    pub witness_delta1: (f64, f64),
    pub witness_delta2: (f64, f64),
    pub witness_a1: (f64, f64),
    pub witness_a2: (f64, f64),
}

impl ScalingCertificate {
    pub const CSV_COLUMNS: &'static str = "quantity,value,lambda,r";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {}", Self::CSV_COLUMNS).map_err(|e| Error::io("<certificate>", e))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::CSV_COLUMNS.split(','))?;
        let rows = [
            ("delta1", self.delta1, Some(self.witness_delta1)),
            ("delta2", self.delta2, Some(self.witness_delta2)),
            ("a1", self.a1, Some(self.witness_a1)),
            ("a2", self.a2, Some(self.witness_a2)),
            ("R0", self.r0, None),
            ("lambda_max", self.grid.lambda_max, None),
            ("r_max", self.grid.r_max, None),
            ("per_decade", self.grid.per_decade as f64, None),
            ("pass", if self.pass { 1.0 } else { 0.0 }, None),
        ];
        for (name, v, wit) in rows {
            let (l, r) = wit.map(|(l, r)| (format!("{l:e}"), format!("{r:e}"))).unwrap_or_default();
            wr.write_record([name.to_string(), format!("{v:e}"), l, r])?;
        }
        wr.flush().map_err(|e| Error::io("<certificate>", e))?;
        Ok(())
    }
}

/// Evaluate `phi` on a grid in parallel, keeping grid order.
pub(crate) fn eval_grid(model: &PhiModel, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| model.eval(x)).collect()
}

pub fn scaling_certificate(model: &PhiModel, r0: f64, grid: &CertGrid) -> Result<ScalingCertificate> {
    model.validate()?;
    if !(r0 > 0.0) || grid.per_decade < 1 || !(grid.lambda_max >= 2.0) {
        return Err(Error::Domain(format!("certificate with R0 = {r0}, grid {grid:?}")));
    }
    let r_min = 1.0 / (r0 * r0);
    if !(grid.r_max > r_min) {
        return Err(Error::Domain("r_max must exceed 1/R0^2".into()));
    }
    let n = grid.per_decade as f64;
    let n_r = ((grid.r_max / r_min).log10() * n).ceil() as usize;
    let n_l = (grid.lambda_max.log10() * n).ceil() as usize;
    let step = 10f64.powf(1.0 / n);
    // one shared grid: node k is r_min * step^k, lambda_j r_i = node (i + j)
    let nodes: Vec<f64> = (0..=n_r + n_l).map(|k| r_min * step.powi(k as i32)).collect();
    let vals = eval_grid(model, &nodes)?;
    for (k, w) in vals.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidModel(format!(
                "phi not increasing on the grid near {:e}",
                nodes[k + 1]
            )));
        }
    }
    let lam = |j: usize| step.powi(j as i32);
    let j2 = (0..=n_l).find(|&j| lam(j) >= 2.0 * (1.0 - 1e-12)).unwrap_or(n_l);

    let mut d1 = (f64::INFINITY, (0.0, 0.0));
    let mut d2 = (f64::NEG_INFINITY, (0.0, 0.0));
    for i in 0..=n_r {
        for j in j2..=n_l {
            let e = (vals[i + j] / vals[i]).ln() / lam(j).ln();
            if e < d1.0 {
                d1 = (e, (lam(j), nodes[i]));
            }
            if e > d2.0 {
                d2 = (e, (lam(j), nodes[i]));
            }
        }
    }
    let (delta1, delta2) = (d1.0, d2.0);
    let mut a1 = (f64::INFINITY, (0.0, 0.0));
    let mut a2 = (f64::NEG_INFINITY, (0.0, 0.0));
    for i in 0..=n_r {
        for j in 0..=n_l {
            let ratio = vals[i + j] / vals[i];
            let l = lam(j);
            let lo = ratio / l.powf(delta1);
            let hi = ratio / l.powf(delta2);
            if lo < a1.0 {
                a1 = (lo, (l, nodes[i]));
            }
            if hi > a2.0 {
                a2 = (hi, (l, nodes[i]));
            }
        }
    }
    let pass = delta1 > 0.0 && delta2 < 1.0 && delta1 <= delta2 && a1.0 > 0.0 && a2.0.is_finite();
    Ok(ScalingCertificate {
        delta1,
        delta2,
        a1: a1.0,
        a2: a2.0,
        r0,
        grid: *grid,
        pass,
        witness_delta1: d1.1,
        witness_delta2: d2.1,
        witness_a1: a1.1,
        witness_a2: a2.1,
    })
}

/// Profile of `phi(t lambda) / (lambda phi(t))` over `t_grid x lambda_grid`.
pub fn global_bernstein_check(model: &PhiModel, t_grid: &[f64], lambda_grid: &[f64]) -> Result<RatioProfile> {
    if lambda_grid.iter().any(|&l| l < 1.0) {
        return Err(Error::Domain("global Bernstein check needs lambda >= 1".into()));
    }
    let pairs: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| lambda_grid.iter().map(move |&l| (t, l)))
        .collect();
    let points = pairs
        .par_iter()
        .map(|&(t, l)| {
            let ratio = if l == 1.0 {
                1.0
            } else {
                model.eval(t * l)? / (l * model.eval(t)?)
            };
            Ok(ProfilePoint {
                arg: t,
                aux: Some(l),
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::new("global_bernstein", points)
}
