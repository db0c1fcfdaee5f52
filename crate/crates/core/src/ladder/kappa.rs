use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::bernstein::PhiModel;
use crate::error::{Error, Result};
use crate::levy::{LogTable, ProcessModel};
use crate::profile::{log_grid, RatioProfile};
use crate::quad::{try_integrate_breaks, QuadSpec};

/// Characteristic exponent feeding the ladder formula.
#[derive(Clone, Debug, PartialEq)]
pub enum LadderSource {
    /// `Psi(theta) = phi(theta^2)`: the 1-d projection of the subordinate Brownian motion.
    Phi(PhiModel),
    /// `Psi` of a (possibly modulated) process, by radial quadrature.
    Psi(ProcessModel),
}

/// Range on which a quadrature-backed `Psi` is tabulated before being continued by `phi` scaling.
pub const PSI_TABLE_RANGE: (f64, f64) = (1e-3, 1e3);

/// Ladder-height exponent `kappa(lambda) = exp((1/pi) ∫_0^∞ ln Psi(lambda theta) / (1 + theta^2) dtheta)`.
#[derive(Clone, Debug)]
pub struct LadderExponent {
    pub source: LadderSource,
    pub quad: QuadSpec,
    psi_table: Arc<OnceLock<Result<LogTable>>>,
}

impl PartialEq for LadderExponent {
    fn eq(&self, o: &Self) -> bool {
        self.source == o.source && self.quad == o.quad
    }
}

/// Cut-off of the symmetrized integral in `s = ln theta`; the weight there is `e^{-40}`.
const S_MAX: f64 = 40.0;

impl LadderExponent {
    pub fn from_phi(phi: PhiModel) -> Self {
        Self::new(LadderSource::Phi(phi))
    }

    pub fn from_process(model: ProcessModel) -> Self {
        Self::new(LadderSource::Psi(model))
    }

    fn new(source: LadderSource) -> Self {
        LadderExponent {
            source,
            // the integral vanishes for pure powers, so an absolute floor is needed
            quad: QuadSpec {
                abs_tol: 1e-12,
                ..QuadSpec::with_rel_tol(1e-10)
            },
            psi_table: Arc::new(OnceLock::new()),
        }
    }

    fn phi(&self) -> &PhiModel {
        match &self.source {
            LadderSource::Phi(p) => p,
            LadderSource::Psi(m) => m.phi(),
        }
    }

    fn table(&self, build: impl FnOnce() -> Result<LogTable>) -> Result<&LogTable> {
        match self.psi_table.get_or_init(build) {
            Ok(t) => Ok(t),
            Err(e) => Err(Error::InvalidModel(format!("exponent tabulation failed: {e}"))),
        }
    }

    /// `Psi(theta)` as used by the ladder formula.
    pub fn psi(&self, theta: f64) -> Result<f64> {
        if !(theta > 0.0) {
            return Err(Error::Domain(format!("Psi at {theta}")));
        }
        match &self.source {
            LadderSource::Phi(p) => match p {
                PhiModel::StablePower { .. } | PhiModel::Mixture(_) => p.eval(theta * theta),
                _ => {
                    // quadrature-backed phi: one log-log table over a wide range
                    let t = self.table(|| {
                        let grid = log_grid(1e-60, 1e60, 4);
                        let vals = grid.par_iter().map(|&l| p.eval(l)).collect::<Result<Vec<_>>>()?;
                        LogTable::new(&grid, &vals)
                    })?;
                    Ok(t.eval(theta * theta))
                }
            },
            LadderSource::Psi(m) => {
                let phi = m.phi();
                let t = self.table(|| {
                    let grid = log_grid(PSI_TABLE_RANGE.0, PSI_TABLE_RANGE.1, 8);
                    let spec = QuadSpec::with_rel_tol(1e-8);
                    let vals = grid.par_iter().map(|&th| m.psi_eval(th, &spec)).collect::<Result<Vec<_>>>()?;
                    LogTable::new(&grid, &vals)
                })?;
                let (lo, hi) = t.range();
                if theta < lo {
                    Ok(t.eval(lo) * phi.eval(theta * theta)? / phi.eval(lo * lo)?)
                } else if theta > hi {
                    Ok(t.eval(hi) * phi.eval(theta * theta)? / phi.eval(hi * hi)?)
                } else {
                    Ok(t.eval(theta))
                }
            }
        }
    }

    /// `kappa(lambda)`; with `theta = e^s` the integral becomes
    /// `∫_0^∞ [F(lambda e^{-s}) + F(lambda e^s)] / (2 cosh s) ds`, `F = ln Psi`.
    pub fn kappa(&self, lambda: f64) -> Result<f64> {
        self.kappa_with(lambda, &self.quad)
    }

    pub fn kappa_with(&self, lambda: f64, spec: &QuadSpec) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("kappa at lambda = {lambda}")));
        }
        let lnpsi = |th: f64| -> Result<f64> {
            let v = self.psi(th)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("Psi({th:e}) = {v} is not positive")));
            }
            Ok(v.ln())
        };
        let f = |s: f64| -> Result<f64> {
            Ok((lnpsi(lambda * (-s).exp())? + lnpsi(lambda * s.exp())?) / (2.0 * s.cosh()))
        };
        let est = try_integrate_breaks(f, &[0.0, 1.0, 3.0, 8.0, 16.0, S_MAX], spec)?;
        let target = 1e-5 * est.value.abs().max(1.0);
        if est.error > target {
            return Err(Error::Quadrature {
                achieved: est.error,
                target,
                context: format!("ladder integral at lambda = {lambda:e}"),
            });
        }
        Ok((est.value / PI).exp())
    }

    /// `kappa` on a grid, evaluated in parallel.
    pub fn kappa_grid(&self, lambdas: &[f64]) -> Result<Vec<f64>> {
        lambdas.par_iter().map(|&l| self.kappa(l)).collect()
    }
}

/// Profile of `kappa(lambda) / sqrt(phi(lambda^2))`.
pub fn kappa_profile(ladder: &LadderExponent, lambdas: &[f64]) -> Result<RatioProfile> {
    let k = ladder.kappa_grid(lambdas)?;
    let pairs = lambdas
        .iter()
        .zip(k)
        .map(|(&l, k)| Ok((l, k / ladder.phi().eval(l * l)?.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::from_pairs("kappa_over_sqrt_phi", pairs)
}

/// Profile of `chi / kappa`, where `chi` comes from the process exponent and
/// `kappa` from `phi`; both are within `gamma^{±1/2}` of each other.
pub fn chi_kappa_profile(model: &ProcessModel, lambdas: &[f64]) -> Result<RatioProfile> {
    let chi = LadderExponent::from_process(model.clone()).kappa_grid(lambdas)?;
    let kap = LadderExponent::from_phi(model.phi().clone()).kappa_grid(lambdas)?;
    let pairs = lambdas.iter().zip(chi.iter().zip(&kap)).map(|(&l, (c, k))| (l, c / k));
    RatioProfile::from_pairs("chi_over_kappa", pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::{section6_build_f, Continuity};
    use crate::levy::Modulation;

    #[test]
    fn cauchy_ladder() {
        let k = LadderExponent::from_phi(PhiModel::stable(1.0));
        assert!((k.kappa(4.0).unwrap() - 2.0).abs() < 1e-4);
        assert!((k.kappa(1.0).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn power_exponents_give_power_kappa() {
        for &ap in &[0.3, 0.5, 0.7] {
            // Psi(theta) = theta^{2 a'} is phi(lambda) = lambda^{a'}, i.e. alpha = 2 a'
            let k = LadderExponent::from_phi(PhiModel::stable(2.0 * ap));
            for &l in &log_grid(1e-2, 1e4, 2) {
                let v = k.kappa(l).unwrap();
                assert!((v / l.powf(ap) - 1.0).abs() < 1e-4, "{ap} {l}: {v}");
            }
        }
    }

    #[test]
    fn kappa_increasing_and_comparable() {
        let models = [
            PhiModel::mixture(&[(1.0, 1.0), (1.0, 0.8)]),
            PhiModel::section_six(section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap()),
        ];
        let grid = log_grid(1e-2, 1e4, 4);
        for m in models {
            let k = LadderExponent::from_phi(m.clone());
            let v = k.kappa_grid(&grid).unwrap();
            assert!(v.windows(2).all(|w| w[1] > w[0]));
            let p = kappa_profile(&k, &grid).unwrap();
            assert!(p.max <= 3.0 && p.min >= 1.0 / 3.0, "{}: {} {}", m.label(), p.min, p.max);
        }
    }

    #[test]
    fn process_source_matches_phi_source_without_modulation() {
        let m = ProcessModel::new(1, PhiModel::stable(1.0));
        let k = LadderExponent::from_process(m);
        for &l in &[0.01, 1.0, 50.0] {
            assert!((k.kappa(l).unwrap() / l.sqrt() - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn chi_within_gamma_band() {
        let g = 1.4;
        let m = ProcessModel::new(1, PhiModel::stable(1.0)).with_modulation(g, Modulation::LogPeriodic { period: 3.0 });
        let p = chi_kappa_profile(&m, &log_grid(0.01, 100.0, 2)).unwrap();
        assert!(p.min >= g.powf(-0.5) - 1e-3 && p.max <= g.sqrt() + 1e-3, "{} {}", p.min, p.max);
    }
}
