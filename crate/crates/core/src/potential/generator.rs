//! The jump generator `L f(x) = ∫ (f(x+y) - f(x) - y·∇f(x) 1{|y|<=1}) J_X(y) dy` by quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::ProcessModel;
use crate::quad::{gauss_legendre, try_integrate_log, QuadSpec};
use crate::report::{num, ExperimentReport, Status};
use crate::special::sphere_area;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub quad: QuadSpec,
    /// Length over which `f` varies; sets the Taylor cutoff and the far radius.
    pub length_scale: f64,
    /// Radial integration stops at `far_factor * length_scale`; beyond it `f` is replaced by
    /// its mean over the last decade.
    pub far_factor: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            quad: QuadSpec {
                rel_tol: 1e-7,
                abs_tol: 1e-12,
                max_intervals: 20_000,
            },
            length_scale: 1.0,
            far_factor: 1e3,
        }
    }
}

/// Angular nodes (unit vectors) and weights summing to 1 for the sphere average.
fn sphere_rule(d: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    match d {
        1 => Ok(vec![(vec![1.0], 1.0)]),
        2 => {
            // symmetrized integrand has period pi
            let m = 64;
            Ok((0..m)
                .map(|k| {
                    let a = std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                    (vec![a.cos(), a.sin()], 1.0 / m as f64)
                })
                .collect())
        }
        3 => {
            let (t, w) = gauss_legendre(24);
            let m = 32;
            let mut out = Vec::with_capacity(24 * m);
            for (c, wc) in t.iter().zip(&w) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..m {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    out.push((vec![*c, s * a.cos(), s * a.sin()], wc / 2.0 / m as f64));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Domain(format!("generator quadrature supports d <= 3, got {d}"))),
    }
}

/// `L f(x)` for a radial `J_X`. The gradient term cancels after symmetrizing `y -> -y`;
/// near the origin the second difference is replaced by its quadratic Taylor form.
pub fn generator_apply<F>(model: &ProcessModel, f: F, x: &[f64], spec: &GeneratorSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let d = model.d;
    if x.len() != d {
        return Err(Error::Domain(format!("point has {} coordinates, model d = {d}", x.len())));
    }
    if !(spec.length_scale > 0.0 && spec.far_factor > 1.0) {
        return Err(Error::Domain(format!("generator spec {spec:?}")));
    }
    let rule = sphere_rule(d)?;
    let fx = f(x);
    let mut buf = vec![0.0; d];
    let mut avg_pair = |rho: f64| -> f64 {
        let mut acc = 0.0;
        for (u, w) in &rule {
            for (b, (xi, ui)) in buf.iter_mut().zip(x.iter().zip(u)) {
                *b = xi + rho * ui;
            }
            let plus = f(&buf);
            for (b, (xi, ui)) in buf.iter_mut().zip(x.iter().zip(u)) {
                *b = xi - rho * ui;
            }
            acc += w * 0.5 * (plus + f(&buf));
        }
        acc
    };
    // Taylor cutoff: shrink until the quadratic coefficient settles
    let mut rho_h = 1e-2 * spec.length_scale;
    let mut q = (avg_pair(rho_h) - fx) / (rho_h * rho_h);
    for _ in 0..20 {
        let half = 0.5 * rho_h;
        let qh = (avg_pair(half) - fx) / (half * half);
        let settled = (qh - q).abs() <= 1e-6 * qh.abs().max(1e-300) || half < 1e-6 * spec.length_scale;
        rho_h = half;
        q = qh;
        if settled {
            break;
        }
    }
    let table = model.j_table()?;
    let jx = |rho: f64| table.eval(rho) * model.m(rho) * rho.powi(d as i32 - 1);
    // head: ∫_0^{rho_h} J rho^{d-1} q rho^2, power law below 1e-6 rho_h
    let lo = 1e-6 * rho_h;
    let head = try_integrate_log(|rho| Ok(jx(rho) * rho * rho), lo, rho_h, &[], &spec.quad)?.value;
    let s = (table.eval(lo * 1.01) / table.eval(lo)).ln() / 1.01f64.ln() + d as f64 - 1.0;
    if !(s + 3.0 > 0.0) {
        return Err(Error::Domain("jump kernel too singular for a C^2 generator".into()));
    }
    let head = q * (head + jx(lo) * lo.powi(3) / (s + 3.0));
    let far = spec.far_factor * spec.length_scale;
    let mut cuts = Vec::new();
    let mut c = rho_h * 2.0;
    while c < far {
        cuts.push(c);
        c *= 2.0;
    }
    let body = try_integrate_log(|rho| Ok(jx(rho) * (avg_pair(rho) - fx)), rho_h, far, &cuts, &spec.quad)?;
    // past `far` the pair average is replaced by its mean over the last decade
    let m = 2000;
    let lo_far = 0.1 * far;
    let mean_far = (0..m)
        .map(|k| avg_pair(lo_far + (far - lo_far) * (k as f64 + 0.5) / m as f64))
        .sum::<f64>()
        / m as f64;
    let tail = (mean_far - fx) * model.shell_mass(far, f64::INFINITY, true)? / sphere_area(d);
    Ok((head + body.value + tail) * sphere_area(d))
}

/// Envelope of `|L f_r(x)|` against `phi(r^-2) (2 + L1/2) + b0` over `r_grid`, `f_r(y) = f(y/r)`.
///
/// `l1` bounds the sum of absolute second derivatives of `f`; `r0` enters `b0 = 2 ∫_{|z|>r0} J_X`.
pub fn generator_envelope<F>(
    model: &ProcessModel,
    f: F,
    l1: f64,
    x: &[f64],
    r_grid: &[f64],
    r0: f64,
    spec: &GeneratorSpec,
) -> Result<ExperimentReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let b0 = 2.0 * model.shell_mass(r0, f64::INFINITY, true)?;
    let mut rep = ExperimentReport::new("generator", 0, &["r", "lf", "phi", "ratio"]);
    rep.param("model", model.phi().label());
    rep.param("d", model.d);
    rep.param("l1", l1);
    rep.constant("b0", b0);
    let mut ratios = Vec::new();
    for &r in r_grid {
        let scaled = |y: &[f64]| {
            let z: Vec<f64> = y.iter().map(|v| v / r).collect();
            f(&z)
        };
        let sp = GeneratorSpec {
            length_scale: spec.length_scale * r,
            ..*spec
        };
        let lf = generator_apply(model, scaled, x, &sp)?;
        let phi = model.phi().eval(r.powi(-2))?;
        let ratio = (lf.abs() - b0).max(0.0) / (phi * (2.0 + 0.5 * l1));
        ratios.push(ratio);
        rep.row(vec![num(r), num(lf), num(phi), num(ratio)]);
    }
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    rep.constant("c", c);
    rep.check("envelope", Status::from_bool(c.is_finite()), format!("single constant c = {c}"));
    Ok(rep)
}
