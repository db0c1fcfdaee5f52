use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::ladder::kappa::LadderExponent;
use crate::levy::{Modulation, ProcessModel};
use crate::profile::{log_grid, RatioProfile};
use crate::quad::{Estimate, QuadSpec};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    #[default]
    GaverStehfest,
    PostWidder,
}

/// Neumaier-compensated sum.
fn neumaier(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let u = s + t;
        if s.abs() >= t.abs() {
            c += (s - u) + t;
        } else {
            c += (t - u) + s;
        }
        s = u;
    }
    s + c
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn stehfest_weights(n: usize) -> Vec<f64> {
    let h = n / 2;
    (1..=n)
        .map(|k| {
            let lo = k.div_ceil(2);
            let hi = k.min(h);
            let s: f64 = (lo..=hi)
                .map(|j| {
                    (j as f64).powi(h as i32) * factorial(2 * j)
                        / (factorial(h - j) * factorial(j) * factorial(j - 1) * factorial(k - j) * factorial(2 * j - k))
                })
                .sum();
            if (k + h) % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect()
}

/// Gaver–Stehfest inversion of `transform` at `t` with even order `n`.
pub fn gaver_stehfest<F>(transform: F, t: f64, n: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let ln2 = std::f64::consts::LN_2;
    let w = stehfest_weights(n);
    let terms = w
        .iter()
        .enumerate()
        .map(|(i, wk)| Ok(wk * transform((i + 1) as f64 * ln2 / t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ln2 / t * neumaier(terms))
}

/// Gaver functionals (discrete Post–Widder) accelerated by Wynn's rho algorithm.
pub fn post_widder<F>(transform: F, t: f64, m: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let ln2 = std::f64::consts::LN_2;
    let a = ln2 / t;
    let mut seq = Vec::with_capacity(m);
    for n in 1..=m {
        let binom = |p: usize, q: usize| factorial(p) / (factorial(q) * factorial(p - q));
        let terms = (0..=n)
            .map(|k| {
                let sgn = if k % 2 == 0 { 1.0 } else { -1.0 };
                Ok(sgn * binom(n, k) * transform((n + k) as f64 * a)?)
            })
            .collect::<Result<Vec<_>>>()?;
        seq.push(n as f64 * a * binom(2 * n, n) * neumaier(terms));
    }
    // rho table: prev = column k-1, cur = column k
    let mut prev = vec![0.0; seq.len() + 1];
    let mut cur = seq.clone();
    let mut best = *seq.last().unwrap();
    for k in 0..seq.len() - 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| prev[i + 1] + (k + 1) as f64 / (cur[i + 1] - cur[i]))
            .collect();
        if k % 2 == 1 {
            if let Some(v) = next.last().filter(|v| v.is_finite()) {
                best = *v;
            }
        }
        prev = cur;
        cur = next;
    }
    Ok(best)
}

/// `V(r)` by inverting `1 / (lambda kappa(lambda))`.
pub fn renewal_v(ladder: &LadderExponent, r: f64, method: InversionMethod) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("renewal function at r = {r}")));
    }
    let lv = |l: f64| Ok(1.0 / (l * ladder.kappa(l)?));
    match method {
        InversionMethod::GaverStehfest => {
            let v12 = gaver_stehfest(lv, r, 12)?;
            let v10 = gaver_stehfest(lv, r, 10)?;
            let rel = (v12 - v10).abs() / v12.abs();
            if !(v12 > 0.0) || rel > 1e-2 {
                return Err(Error::Inversion {
                    at: r,
                    diagnostic: format!("orders 10 and 12 give {v10:e} and {v12:e}"),
                });
            }
            Ok(v12)
        }
        InversionMethod::PostWidder => {
            let v = post_widder(lv, r, 10)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Inversion {
                    at: r,
                    diagnostic: format!("accelerated Gaver sequence gave {v:e}"),
                });
            }
            Ok(v)
        }
    }
}

/// Tabulated renewal function with monotone log-log interpolation.
#[derive(Clone, Debug)]
pub struct RenewalFunction {
    pub ladder: LadderExponent,
    pub method: InversionMethod,
    pub r: Vec<f64>,
    pub v: Vec<f64>,
    interp: Pchip,
}

impl RenewalFunction {
    pub fn tabulate(ladder: LadderExponent, lo: f64, hi: f64, per_decade: usize, method: InversionMethod) -> Result<Self> {
        let r = log_grid(lo, hi, per_decade);
        let v = r.par_iter().map(|&x| renewal_v(&ladder, x, method)).collect::<Result<Vec<_>>>()?;
        if let Some(w) = v.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Inversion {
                at: r[w + 1],
                diagnostic: "tabulated renewal function is not increasing".into(),
            });
        }
        let interp = Pchip::new(r.iter().map(|x| x.ln()).collect(), v.iter().map(|x| x.ln()).collect())?;
        Ok(RenewalFunction {
            ladder,
            method,
            r,
            v,
            interp,
        })
    }

    /// `V(x)`; below the table continued by the end power law (so `V(0+) = 0`), above by the other end.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = self.r.len();
        let s = x.ln();
        let edge = |i: usize, j: usize| {
            let p = (self.v[j] / self.v[i]).ln() / (self.r[j] / self.r[i]).ln();
            self.v[i] * (x / self.r[i]).powf(p)
        };
        if x < self.r[0] {
            edge(0, 1)
        } else if x > self.r[n - 1] {
            edge(n - 1, n - 2)
        } else {
            self.interp.eval(s).map(f64::exp).unwrap_or(f64::NAN)
        }
    }

    pub const CSV_COLUMNS: &'static str = "r,V";

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# columns: {}", Self::CSV_COLUMNS).map_err(|e| Error::io("<renewal>", e))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::CSV_COLUMNS.split(','))?;
        for (r, v) in self.r.iter().zip(&self.v) {
            wr.write_record([format!("{r:e}"), format!("{v:e}")])?;
        }
        wr.flush().map_err(|e| Error::io("<renewal>", e))?;
        Ok(())
    }
}

/// Ladder exponent of the first coordinate of a process: from `phi` when
/// unmodulated, from the radial `Psi` otherwise.
pub fn ladder_for(model: &ProcessModel) -> LadderExponent {
    if model.modulation == Modulation::Unit {
        LadderExponent::from_phi(model.phi().clone())
    } else {
        LadderExponent::from_process(model.clone())
    }
}

/// Profile of `V(r) sqrt(phi(r^-2))`.
pub fn renewal_comparability_check(model: &ProcessModel, r_grid: &[f64]) -> Result<RatioProfile> {
    if r_grid.iter().any(|&r| !(r > 0.0 && r <= 1e2)) {
        return Err(Error::Domain("renewal grid must lie in (0, 100]".into()));
    }
    let ladder = ladder_for(model);
    let pairs = r_grid
        .par_iter()
        .map(|&r| Ok((r, renewal_v(&ladder, r, InversionMethod::GaverStehfest)? * model.phi().eval(r.powi(-2))?.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::from_pairs("renewal_sqrt_phi", pairs)
}

/// Cells of a Stieltjes sum on `[0, b]`: midpoints and `V` increments,
/// geometric from `b * 1e-9` with the first cell `[0, b * 1e-9]`.
fn stieltjes_cells(v: &RenewalFunction, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = b * 1e-9;
    let mut edges = vec![0.0];
    edges.extend((0..=n).map(|i| lo * (b / lo).powf(i as f64 / n as f64)));
    let vals: Vec<f64> = edges.iter().map(|&e| v.eval(e)).collect();
    let mids = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let dv = vals.windows(2).map(|w| w[1] - w[0]).collect();
    (mids, dv)
}

/// `∫_0^∞ V(dy) ∫_0^x V(dz) f(x + y - z)` for `f` vanishing on `[support, ∞)`.
///
/// The error is the change between 500- and 1000-cell Stieltjes sums.
pub fn halfline_green_apply<F>(v: &RenewalFunction, x: f64, f: F, support: f64, spec: &QuadSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + Sync,
{
    if !(x > 0.0) || !(support > 0.0) || !support.is_finite() {
        return Err(Error::Domain(format!("half-line Green operator at x = {x}, support {support}")));
    }
    let sum = |n: usize| -> f64 {
        let (ym, dvy) = stieltjes_cells(v, support, n);
        let (zm, dvz) = stieltjes_cells(v, x, n);
        let rows: Vec<f64> = ym
            .par_iter()
            .zip(&dvy)
            .map(|(&y, &wy)| wy * neumaier(zm.iter().zip(&dvz).map(|(&z, &wz)| wz * f(x + y - z))))
            .collect();
        neumaier(rows)
    };
    let fine = sum(1000);
    let coarse = sum(500);
    let err = (fine - coarse).abs();
    let target = spec.rel_tol.max(2e-2) * fine.abs();
    if err > target && err > spec.abs_tol {
        return Err(Error::Quadrature {
            achieved: err,
            target,
            context: format!("half-line Green operator at x = {x:e}"),
        });
    }
    Ok(Estimate {
        value: fine,
        error: err,
        evaluations: 2 * (1001 * 1001 + 501 * 501),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiModel;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cauchy_v() -> RenewalFunction {
        RenewalFunction::tabulate(LadderExponent::from_phi(PhiModel::stable(1.0)), 1e-10, 1e2, 10, InversionMethod::GaverStehfest)
            .unwrap()
    }

    #[test]
    fn inversion_of_power_transforms() {
        // L[t^{a}] = Gamma(1+a) / s^{1+a}
        for &a in &[0.3, 0.5, 1.0] {
            let g = statrs::function::gamma::gamma(1.0 + a);
            let f = |s: f64| Ok(g / s.powf(1.0 + a));
            for &t in &[0.01, 1.0, 30.0] {
                let v = gaver_stehfest(f, t, 12).unwrap();
                assert!((v / t.powf(a) - 1.0).abs() < 1e-4, "{a} {t}: {v}");
                let w = post_widder(f, t, 10).unwrap();
                assert!((w / t.powf(a) - 1.0).abs() < 1e-3, "{a} {t}: {w}");
            }
        }
    }

    #[test]
    fn cauchy_renewal_function() {
        let k = LadderExponent::from_phi(PhiModel::stable(1.0));
        let v1 = renewal_v(&k, 1.0, InversionMethod::GaverStehfest).unwrap();
        assert!((v1 - 2.0 / PI.sqrt()).abs() < 1e-3 * v1);
        assert!((v1 - 1.1284).abs() < 1e-4);
        let v4 = renewal_v(&k, 4.0, InversionMethod::GaverStehfest).unwrap();
        assert!((v4 / v1 - 2.0).abs() < 1e-3);
        assert!(renewal_v(&k, 1e-8, InversionMethod::GaverStehfest).unwrap() < 1e-3);
        let pw = renewal_v(&k, 1.0, InversionMethod::PostWidder).unwrap();
        assert!((pw / v1 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn renewal_power_laws() {
        for &ap in &[0.3, 0.5, 0.7] {
            let k = LadderExponent::from_phi(PhiModel::stable(2.0 * ap));
            let g = statrs::function::gamma::gamma(1.0 + ap);
            for &r in &log_grid(1e-2, 1e2, 2) {
                let v = renewal_v(&k, r, InversionMethod::GaverStehfest).unwrap();
                assert!((v * g / r.powf(ap) - 1.0).abs() < 1e-3, "{ap} {r}");
            }
        }
    }

    #[test]
    fn renewal_profiles() {
        let p = renewal_comparability_check(&ProcessModel::new(1, PhiModel::stable(1.0)), &log_grid(1e-3, 10.0, 2)).unwrap();
        let c = 2.0 / PI.sqrt();
        assert!((p.min / c - 1.0).abs() < 1e-2 && (p.max / c - 1.0).abs() < 1e-2);
        let mix = ProcessModel::new(1, PhiModel::mixture(&[(1.0, 1.0), (1.0, 0.8)]));
        assert!(renewal_comparability_check(&mix, &log_grid(1e-3, 10.0, 2)).unwrap().spread() <= 5.0);
    }

    #[test]
    fn table_interpolates_closed_form() {
        let v = cauchy_v();
        for &r in &[1e-12, 3.3e-4, 0.5, 77.0] {
            assert!((v.eval(r) / (2.0 * (r / PI).sqrt()) - 1.0).abs() < 1e-3, "{r}");
        }
        assert_eq!(v.eval(0.0), 0.0);
    }

    #[test]
    fn green_operator_bounds() {
        let v = cauchy_v();
        let spec = QuadSpec::with_rel_tol(1e-2);
        let zero = halfline_green_apply(&v, 0.3, |_| 0.0, 1.0, &spec).unwrap();
        assert_eq!(zero.value, 0.0);
        let r = 1.0;
        for &x in &[1e-3, 0.1, 0.25, 0.5] {
            let g = halfline_green_apply(&v, x, |w| if w > 0.0 && w < r { 1.0 } else { 0.0 }, r, &spec).unwrap();
            assert!(g.value <= 2.0 * v.eval(r) * v.eval(x).min(v.eval(r - x)), "{x}: {}", g.value);
        }
    }

    #[test]
    fn green_operator_closed_form_for_cauchy() {
        // with V = c sqrt(r): (c^2 / 2) ∫_0^{1/2} z^{-1/2} sqrt(1/2 + z) dz at x = 1/2, r = 1
        let v = cauchy_v();
        let g = halfline_green_apply(&v, 0.5, |w| if w > 0.0 && w < 1.0 { 1.0 } else { 0.0 }, 1.0, &QuadSpec::with_rel_tol(1e-2))
            .unwrap();
        let u = 0.5f64.sqrt();
        let exact = 4.0 / PI * (u / 2.0 * (u * u + 0.5).sqrt() + 0.25 * ((u + 1.0) / u).ln());
        assert!((g.value / exact - 1.0).abs() < 1e-2, "{} vs {exact}", g.value);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn green_operator_is_monotone(x in 0.05f64..0.9, c in 0.0f64..1.0, k in 0.5f64..3.0) {
            let v = cauchy_v();
            let spec = QuadSpec::with_rel_tol(0.5);
            let f1 = |w: f64| if w > 0.0 && w < 1.0 { c * (-k * w).exp() } else { 0.0 };
            let f2 = |w: f64| if w > 0.0 && w < 1.0 { (-k * w * c).exp() } else { 0.0 };
            let a = halfline_green_apply(&v, x, f1, 1.0, &spec).unwrap().value;
            let b = halfline_green_apply(&v, x, f2, 1.0, &spec).unwrap().value;
            prop_assert!(a <= b);
        }
    }
}
