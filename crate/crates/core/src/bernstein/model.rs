use crate::bernstein::section6::{section6_phi, stieltjes_g, PiecewiseSchedule, SectionSixForm};
use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quad::QuadSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionSixPhi {
    pub schedule: PiecewiseSchedule,
    pub form: SectionSixForm,
    pub quad: QuadSpec,
}

/// `phi` tabulated on a log grid, interpolated monotonically in log-log space.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedPhi {
    lambda: Vec<f64>,
    phi: Vec<f64>,
    interp: Pchip,
}

impl TabulatedPhi {
    pub fn new(lambda: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if lambda.iter().chain(&phi).any(|v| !(*v > 0.0)) {
            return Err(Error::InvalidModel("tabulated phi needs positive nodes".into()));
        }
        if phi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("tabulated phi must be strictly increasing".into()));
        }
        let interp = Pchip::new(
            lambda.iter().map(|v| v.ln()).collect(),
            phi.iter().map(|v| v.ln()).collect(),
        )?;
        Ok(TabulatedPhi { lambda, phi, interp })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.lambda, &self.phi)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lambda[0], self.lambda[self.lambda.len() - 1])
    }

    fn eval(&self, lambda: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        // tolerate round-off at the hull ends from the log transform
        let l = if lambda < lo && lambda >= lo * (1.0 - 1e-12) {
            lo
        } else if lambda > hi && lambda <= hi * (1.0 + 1e-12) {
            hi
        } else {
            lambda
        };
        match self.interp.eval(l.ln()) {
            Ok(v) => Ok(v.exp()),
            Err(Error::Extrapolation { .. }) => Err(Error::Extrapolation { lo, hi, at: lambda }),
            Err(e) => Err(e),
        }
    }
}

/// A complete Bernstein function without drift.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiModel {
    /// `lambda^{alpha/2}`.
    StablePower { alpha: f64 },
    /// `sum_k w_k lambda^{alpha_k / 2}`.
    Mixture(Vec<MixtureComponent>),
    SectionSix(Box<SectionSixPhi>),
    Tabulated(TabulatedPhi),
}

impl PhiModel {
    pub fn stable(alpha: f64) -> Self {
        PhiModel::StablePower { alpha }
    }

    pub fn mixture(pairs: &[(f64, f64)]) -> Self {
        PhiModel::Mixture(
            pairs
                .iter()
                .map(|&(weight, alpha)| MixtureComponent { weight, alpha })
                .collect(),
        )
    }

    pub fn section_six(schedule: PiecewiseSchedule) -> Self {
        PhiModel::SectionSix(Box::new(SectionSixPhi {
            schedule,
            form: SectionSixForm::LambdaG,
            quad: QuadSpec::with_rel_tol(1e-8),
        }))
    }

    pub fn validate(&self) -> Result<()> {
        let alpha_ok = |a: f64| a > 0.0 && a < 2.0;
        match self {
            PhiModel::StablePower { alpha } if !alpha_ok(*alpha) => {
                Err(Error::InvalidModel(format!("alpha = {alpha} outside (0, 2)")))
            }
            PhiModel::Mixture(cs) if cs.is_empty() => Err(Error::InvalidModel("empty mixture".into())),
            PhiModel::Mixture(cs) => {
                for c in cs {
                    if !(c.weight > 0.0) || !alpha_ok(c.alpha) {
                        return Err(Error::InvalidModel(format!(
                            "mixture component (w={}, alpha={}) invalid",
                            c.weight, c.alpha
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PhiModel::StablePower { alpha } => format!("stable(alpha={alpha})"),
            PhiModel::Mixture(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| format!("{}*a{}", c.weight, c.alpha)).collect();
                format!("mixture({})", parts.join("+"))
            }
            PhiModel::SectionSix(s) => format!(
                "section6(pieces={}, eps={}, {:?}, {:?})",
                s.schedule.pieces.len(),
                s.schedule.epsilon,
                s.schedule.continuity,
                s.form
            ),
            PhiModel::Tabulated(t) => {
                let (lo, hi) = t.range();
                format!("tabulated([{lo:e}, {hi:e}])")
            }
        }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("phi at lambda = {lambda}")));
        }
        match self {
            PhiModel::StablePower { alpha } => Ok(lambda.powf(alpha / 2.0)),
            PhiModel::Mixture(cs) => Ok(cs.iter().map(|c| c.weight * lambda.powf(c.alpha / 2.0)).sum()),
            PhiModel::SectionSix(s) => match s.form {
                SectionSixForm::LambdaG => section6_phi(&s.schedule, lambda, &s.quad),
                SectionSixForm::ReciprocalG => Ok(1.0 / stieltjes_g(&s.schedule, lambda, &s.quad)?),
            },
            PhiModel::Tabulated(t) => t.eval(lambda),
        }
    }

    /// Stable components `(weight, alpha)` if the model is a finite stable mixture.
    pub fn stable_components(&self) -> Option<Vec<MixtureComponent>> {
        match self {
            PhiModel::StablePower { alpha } => Some(vec![MixtureComponent {
                weight: 1.0,
                alpha: *alpha,
            }]),
            PhiModel::Mixture(cs) => Some(cs.clone()),
            _ => None,
        }
    }

    pub fn stable_alpha(&self) -> Option<f64> {
        match self {
            PhiModel::StablePower { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// Replace an expensive model by its log-log interpolant on `[lo, hi]`.
    pub fn tabulate(&self, lo: f64, hi: f64, per_decade: usize) -> Result<PhiModel> {
        let grid = crate::profile::log_grid(lo, hi, per_decade);
        let vals = grid.iter().map(|&l| self.eval(l)).collect::<Result<Vec<_>>>()?;
        Ok(PhiModel::Tabulated(TabulatedPhi::new(grid, vals)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_forms() {
        assert_eq!(PhiModel::stable(1.0).eval(4.0).unwrap(), 2.0);
        assert_eq!(PhiModel::stable(1.0).eval(1.0).unwrap(), 1.0);
        let m = PhiModel::mixture(&[(1.0, 1.0), (1.0, 0.8)]);
        // 16^{0.4} = 2^{1.6}
        let oracle = 4.0 + (1.6 * std::f64::consts::LN_2).exp();
        let v = m.eval(16.0).unwrap();
        assert!((v - oracle).abs() < 1e-13);
        assert!((v - 7.0314).abs() < 1e-4);
    }

    #[test]
    fn domain_and_extrapolation_errors() {
        assert!(matches!(PhiModel::stable(1.0).eval(0.0), Err(Error::Domain(_))));
        assert!(matches!(PhiModel::stable(1.0).eval(-1.0), Err(Error::Domain(_))));
        let t = PhiModel::stable(1.0).tabulate(1e-2, 1e2, 10).unwrap();
        assert!((t.eval(3.0).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert!(matches!(t.eval(1e3), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn tabulated_power_law_is_exact() {
        let t = PhiModel::stable(0.7).tabulate(1e-4, 1e6, 5).unwrap();
        for &l in &[1.3e-4, 0.77, 55.0, 9.9e5] {
            assert!((t.eval(l).unwrap() / l.powf(0.35) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PhiModel::stable(2.0).validate().is_err());
        assert!(PhiModel::mixture(&[(0.0, 1.0)]).validate().is_err());
        assert!(PhiModel::mixture(&[(1.0, 1.0)]).validate().is_ok());
    }

    fn model_strategy() -> impl Strategy<Value = PhiModel> {
        prop_oneof![
            (0.05f64..1.95).prop_map(PhiModel::stable),
            prop::collection::vec((0.1f64..5.0, 0.05f64..1.95), 1..4).prop_map(|v| PhiModel::mixture(&v)),
        ]
    }

    proptest! {
        #[test]
        fn increasing_and_concave_on_log_grids(m in model_strategy(), lo in -6.0f64..0.0, span in 1.0f64..8.0) {
            let n = 60;
            let xs: Vec<f64> = (0..n).map(|i| 10f64.powf(lo + span * i as f64 / (n - 1) as f64)).collect();
            let ys: Vec<f64> = xs.iter().map(|&x| m.eval(x).unwrap()).collect();
            for i in 1..n {
                prop_assert!(ys[i] > ys[i - 1]);
            }
            for i in 1..n - 1 {
                let s1 = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
                let s2 = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                prop_assert!(s2 <= s1 * (1.0 + 1e-9));
            }
            // no drift
            prop_assert!(ys[n - 1] / xs[n - 1] < ys[0] / xs[0]);
        }

        #[test]
        fn global_bernstein_inequality(m in model_strategy(), t in 1e-6f64..1e6, lam in 1.0f64..1e4) {
            let lhs = m.eval(t * lam).unwrap();
            let rhs = lam * m.eval(t).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
