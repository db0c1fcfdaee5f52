use std::sync::{Arc, OnceLock};

use statrs::function::gamma::gamma;

use crate::bernstein::{mu_from_stieltjes, mu_tail_from_stieltjes, PhiModel, SectionSixForm};
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quad::QuadSpec;

/// Log-log table of a positive decreasing function with power-law extension.
#[derive(Clone, Debug)]
pub struct LogTable {
    interp: Pchip,
}

impl LogTable {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        if y.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidModel("log table needs positive values".into()));
        }
        Ok(LogTable {
            interp: Pchip::new(x.iter().map(|v| v.ln()).collect(), y.iter().map(|v| v.ln()).collect())?,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.interp.lo().exp(), self.interp.hi().exp())
    }

    /// Interpolated value; outside the table, continued with the end log-slope.
    pub fn eval(&self, x: f64) -> f64 {
        let s = x.ln();
        let (lo, hi) = (self.interp.lo(), self.interp.hi());
        let (xs, ys) = self.interp.nodes();
        if s < lo {
            let slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
            (ys[0] + slope * (s - lo)).exp()
        } else if s > hi {
            let n = xs.len();
            let slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
            (ys[n - 1] + slope * (s - hi)).exp()
        } else {
            self.interp.eval(s).map(f64::exp).unwrap_or(f64::NAN)
        }
    }

    /// Like [`LogTable::eval`] but refuses to leave the table.
    pub fn eval_strict(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(x >= lo * (1.0 - 1e-12) && x <= hi * (1.0 + 1e-12)) {
            return Err(Error::Extrapolation { lo, hi, at: x });
        }
        Ok(self.eval(x.clamp(lo, hi)))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct MuTables {
    pub density: LogTable,
    pub tail: LogTable,
}

/// Driftless subordinator with Laplace exponent `phi`.
#[derive(Clone, Debug)]
pub struct SubordinatorModel {
    pub phi: PhiModel,
    pub quad: QuadSpec,
    tables: Arc<OnceLock<Result<MuTables>>>,
}

impl PartialEq for SubordinatorModel {
    fn eq(&self, other: &Self) -> bool {
        self.phi == other.phi && self.quad == other.quad
    }
}

/// `t` range of the cached Levy-density tables.
pub(crate) const MU_TABLE_RANGE: (f64, f64) = (1e-24, 1e24);

impl SubordinatorModel {
    pub fn new(phi: PhiModel) -> Self {
        SubordinatorModel {
            phi,
            quad: QuadSpec::with_rel_tol(1e-9),
            tables: Arc::new(OnceLock::new()),
        }
    }

    pub fn with_quad(mut self, quad: QuadSpec) -> Self {
        self.quad = quad;
        self.tables = Arc::new(OnceLock::new());
        self
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("Levy density at t = {t}")));
        }
        Ok(())
    }

    /// Levy density `mu(t)`.
    pub fn mu_density(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        match &self.phi {
            PhiModel::SectionSix(s) => match s.form {
                SectionSixForm::LambdaG => mu_from_stieltjes(&s.schedule, t, &self.quad),
                SectionSixForm::ReciprocalG => Err(unsupported(&self.phi)),
            },
            PhiModel::Tabulated(_) => Err(unsupported(&self.phi)),
            m => Ok(m
                .stable_components()
                .unwrap()
                .iter()
                .map(|c| {
                    let a = c.alpha / 2.0;
                    c.weight * a / gamma(1.0 - a) * t.powf(-1.0 - a)
                })
                .sum()),
        }
    }

    /// Tail `mu(t, inf)`.
    pub fn mu_tail(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        match &self.phi {
            PhiModel::SectionSix(s) => match s.form {
                SectionSixForm::LambdaG => mu_tail_from_stieltjes(&s.schedule, t, &self.quad),
                SectionSixForm::ReciprocalG => Err(unsupported(&self.phi)),
            },
            PhiModel::Tabulated(_) => Err(unsupported(&self.phi)),
            m => Ok(m
                .stable_components()
                .unwrap()
                .iter()
                .map(|c| {
                    let a = c.alpha / 2.0;
                    c.weight * t.powf(-a) / gamma(1.0 - a)
                })
                .sum()),
        }
    }

    /// `mu(t)`, through a cached log-log table for quadrature-backed models.
    pub fn mu_fast(&self, t: f64) -> Result<f64> {
        match &self.phi {
            PhiModel::SectionSix(_) => Ok(self.tables()?.density.eval(t)),
            _ => self.mu_density(t),
        }
    }

    pub fn mu_tail_fast(&self, t: f64) -> Result<f64> {
        match &self.phi {
            PhiModel::SectionSix(_) => Ok(self.tables()?.tail.eval(t)),
            _ => self.mu_tail(t),
        }
    }

    pub(crate) fn tables(&self) -> Result<&MuTables> {
        let built = self.tables.get_or_init(|| {
            let grid = crate::profile::log_grid(MU_TABLE_RANGE.0, MU_TABLE_RANGE.1, 8);
            use rayon::prelude::*;
            let dens = grid.par_iter().map(|&t| self.mu_density(t)).collect::<Result<Vec<_>>>()?;
            let tail = grid.par_iter().map(|&t| self.mu_tail(t)).collect::<Result<Vec<_>>>()?;
            Ok(MuTables {
                density: LogTable::new(&grid, &dens)?,
                tail: LogTable::new(&grid, &tail)?,
            })
        });
        match built {
            Ok(t) => Ok(t),
            Err(e) => Err(Error::InvalidModel(format!("Levy density tabulation failed: {e}"))),
        }
    }

    /// `∫_0^eps s mu(s) ds`, the drift replacing jumps below `eps`.
    pub fn small_jump_mean(&self, eps: f64) -> Result<f64> {
        match self.phi.stable_components() {
            Some(cs) => Ok(cs
                .iter()
                .map(|c| {
                    let a = c.alpha / 2.0;
                    c.weight * a / gamma(1.0 - a) * eps.powf(1.0 - a) / (1.0 - a)
                })
                .sum()),
            None => {
                let lo = eps * 1e-16;
                let body = crate::quad::try_integrate_log(|s| Ok(s * self.mu_fast(s)?), lo, eps, &[], &self.quad)?;
                // mu ~ s^{-1-a} near zero with a <= 1/2 for the shipped constructions
                Ok(body.value + lo * lo * self.mu_fast(lo)?)
            }
        }
    }
}

fn unsupported(phi: &PhiModel) -> Error {
    Error::InvalidModel(format!("no Levy density available for {}", phi.label()))
}
