//! Exit-time envelopes and Poisson kernel bounds on balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::kernel::{KernelBins, KernelEstimate};
use crate::report::{num, ExperimentReport, Status};
use crate::sim::rng::sub_seed;
use crate::sim::stats::mean_stderr;
use crate::sim::{ExitBatch, ExitSampler, Geometry};

/// `max / min` of positive finite values (infinite if any is not).
pub fn spread(values: &[f64]) -> f64 {
    let ok = values.iter().all(|v| *v > 0.0 && v.is_finite());
    if values.is_empty() || !ok {
        return f64::INFINITY;
    }
    let hi = values.iter().cloned().fold(f64::MIN, f64::max);
    let lo = values.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}

fn axis_point(d: usize, x0: &[f64], t: f64) -> Vec<f64> {
    let mut x = if x0.is_empty() { vec![0.0; d] } else { x0.to_vec() };
    x[0] += t;
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExitTimeConfig {
    /// Ball center; empty means the origin.
    pub x0: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// Start points `x0 + t r e_1`.
    pub offsets: Vec<f64>,
    /// Sub-domain starts are restricted to `B(0, a r)`.
    pub a: f64,
    pub n: usize,
    pub stability: f64,
}

impl Default for ExitTimeConfig {
    fn default() -> Self {
        ExitTimeConfig {
            x0: Vec::new(),
            r_grid: vec![0.25, 0.5, 1.0],
            offsets: vec![0.0, 0.25, 0.5, 0.75, 0.9],
            a: 0.5,
            n: 20_000,
            stability: 2.0,
        }
    }
}

/// Sub-domains of `B(0, r)` and the direction along which their start points are placed.
fn sub_domains(d: usize, r: f64) -> Vec<(Geometry, f64)> {
    let mut v = vec![
        (Geometry::HalfSpaceCapBall { radius: r }, 1.0),
        (
            Geometry::Ball {
                center: vec![0.0; d],
                radius: 0.5 * r,
            },
            1.0,
        ),
    ];
    if d >= 2 {
        v.push((
            Geometry::ConeCapBall {
                aperture: std::f64::consts::FRAC_PI_4,
                radius: r,
            },
            1.0,
        ));
        v.push((
            Geometry::SlitBall {
                half_width: 0.05 * r,
                radius: r,
            },
            -1.0,
        ));
    }
    v
}

/// Lower envelope `inf_{B(x0, r/2)} E tau * phi((r/2)^-2)`, upper envelope
/// `E_x tau * (phi(r^-2) phi((r-|x-x0|)^-2))^{1/2}`, and for sub-domains `D` of `B(0, r)` the
/// ratio `P_x(X_{tau_D} outside B(0, r)) / (phi(r^-2) E_x tau_D)`.
pub fn exit_time_profile_check(sampler: &ExitSampler, cfg: &ExitTimeConfig, seed: u64) -> Result<ExperimentReport> {
    let d = sampler.model.d;
    let phi = sampler.model.phi();
    if !cfg.x0.is_empty() && cfg.x0.len() != d {
        return Err(Error::Domain(format!("x0 has {} coordinates, model d = {d}", cfg.x0.len())));
    }
    if cfg.r_grid.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::Domain("exit-time radii must lie in (0, 1]".into()));
    }
    if cfg.offsets.iter().any(|t| !(*t >= 0.0 && *t < 1.0)) {
        return Err(Error::Domain("offsets must lie in [0, 1)".into()));
    }
    let mut rep = ExperimentReport::new(
        "exit_time",
        seed,
        &["kind", "r", "geometry", "offset", "mean_tau", "stderr", "exit_prob", "ratio"],
    );
    rep.param("model", phi.label());
    rep.param("d", d);
    rep.param("strategy", sampler.strategy.name());
    rep.param("n", cfg.n);
    let (mut lower, mut upper, mut sub) = (Vec::new(), Vec::new(), Vec::new());
    let mut censored = 0.0f64;
    for (k, &r) in cfg.r_grid.iter().enumerate() {
        let ball = Geometry::Ball {
            center: axis_point(d, &cfg.x0, 0.0),
            radius: r,
        };
        let (mut lo_r, mut up_r) = (f64::INFINITY, 0.0f64);
        for (j, &t) in cfg.offsets.iter().enumerate() {
            let x = axis_point(d, &cfg.x0, t * r);
            let b = ExitBatch::generate(sampler, &ball, &x, cfg.n, sub_seed(seed, (k * 1000 + j) as u64))?;
            censored = censored.max(b.censored_fraction());
            let (m, se) = mean_stderr(&b.times());
            let up = m * (phi.eval(r.powi(-2))? * phi.eval(((1.0 - t) * r).powi(-2))?).sqrt();
            up_r = up_r.max(up);
            rep.row(vec!["upper".into(), num(r), "ball".into(), num(t), num(m), num(se), String::new(), num(up)]);
            if t <= 0.5 {
                let low = m * phi.eval((0.5 * r).powi(-2))?;
                lo_r = lo_r.min(low);
                rep.row(vec!["lower".into(), num(r), "ball".into(), num(t), num(m), num(se), String::new(), num(low)]);
            }
        }
        let mut sub_r = 0.0f64;
        for (gi, (g, dir)) in sub_domains(d, r).into_iter().enumerate() {
            for (j, &t) in cfg.offsets.iter().enumerate() {
                let x = axis_point(d, &[], dir * t * r);
                if t > cfg.a || !g.contains(&x) {
                    continue;
                }
                let b = ExitBatch::generate(sampler, &g, &x, cfg.n, sub_seed(seed, (k * 1000 + 100 * (gi + 1) + j) as u64))?;
                censored = censored.max(b.censored_fraction());
                let (m, se) = mean_stderr(&b.times());
                let out = b.positions().filter(|y| y.iter().map(|v| v * v).sum::<f64>() >= r * r).count() as f64
                    / b.samples.len().max(1) as f64;
                let ratio = out / (phi.eval(r.powi(-2))? * m);
                sub_r = sub_r.max(ratio);
                rep.row(vec![
                    "subdomain".into(),
                    num(r),
                    g.name().into(),
                    num(t),
                    num(m),
                    num(se),
                    num(out),
                    num(ratio),
                ]);
            }
        }
        rep.constant(&format!("lower@r={r}"), lo_r);
        rep.constant(&format!("upper@r={r}"), up_r);
        rep.constant(&format!("subdomain@r={r}"), sub_r);
        lower.push(lo_r);
        upper.push(up_r);
        sub.push(sub_r);
    }
    let (sl, su, ss) = (spread(&lower), spread(&upper), spread(&sub));
    rep.constant("lower_min", lower.iter().cloned().fold(f64::INFINITY, f64::min));
    rep.constant("upper_max", upper.iter().cloned().fold(0.0, f64::max));
    rep.constant("subdomain_max", sub.iter().cloned().fold(0.0, f64::max));
    rep.constant("lower_spread", sl);
    rep.constant("upper_spread", su);
    rep.constant("subdomain_spread", ss);
    rep.check("lower_envelope", Status::from_bool(sl < cfg.stability), format!("spread {sl} across r"));
    rep.check("upper_envelope", Status::from_bool(su < cfg.stability), format!("spread {su} across r"));
    rep.check("subdomain_envelope", Status::from_bool(ss < cfg.stability), format!("spread {ss} across r"));
    if censored > 0.01 {
        rep.check("censoring", Status::Inconclusive, format!("up to {censored} of paths censored"));
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoissonKernelConfig {
    pub r_grid: Vec<f64>,
    /// Start points `t r e_1` (signed `t`).
    pub x_offsets: Vec<f64>,
    /// Near-boundary bound is checked for starts in `B(0, a r)`.
    pub a: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    /// Bins extend to `r_max_factor * r`.
    pub r_max_factor: f64,
    pub n: usize,
    /// Bins whose relative standard error exceeds this are left out.
    pub max_rel_error: f64,
    pub stability: f64,
}

impl Default for PoissonKernelConfig {
    fn default() -> Self {
        PoissonKernelConfig {
            r_grid: vec![0.25, 0.5, 1.0],
            x_offsets: vec![0.0, 0.25, 0.45, -0.45, 0.8],
            a: 0.5,
            n_radial: 9,
            n_angular: 8,
            r_max_factor: 8.0,
            n: 100_000,
            max_rel_error: 0.2,
            stability: 2.0,
        }
    }
}

/// Ratio profiles of the ball kernel `K_{B(0,r)}(x, y)`:
/// upper `K sqrt(phi(r^-2) phi((r-|x|)^-2)) / j(|y|-r)`, lower (from the center)
/// `K phi(r^-2) / j(|y|)`, start-point comparability `K(x1,y)/K(x2,y)` for `x1, x2` in
/// `B(0, r/2)`, and the near-boundary profile `K r^d (phi(r^-2) / phi((|y|-r)^-2))^{1/2}`
/// on `r < |y| < 2r`.
pub fn poisson_kernel_check(sampler: &ExitSampler, cfg: &PoissonKernelConfig, seed: u64) -> Result<ExperimentReport> {
    let d = sampler.model.d;
    let phi = sampler.model.phi();
    let jt = sampler.model.j_table()?;
    if !cfg.x_offsets.contains(&0.0) {
        return Err(Error::Domain("poisson kernel check needs the center (offset 0)".into()));
    }
    let mut rep = ExperimentReport::new(
        "poisson_kernel",
        seed,
        &["r", "offset", "bin", "y_radius", "density", "stderr", "upper", "lower", "near"],
    );
    rep.param("model", phi.label());
    rep.param("d", d);
    rep.param("n", cfg.n);
    let (mut ups, mut lows, mut comps, mut nears) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut used, mut total) = (0usize, 0usize);
    for (k, &r) in cfg.r_grid.iter().enumerate() {
        let ball = Geometry::ball(d, r);
        let bins = KernelBins {
            center: vec![0.0; d],
            r_min: r,
            r_max: cfg.r_max_factor * r,
            n_radial: cfg.n_radial,
            n_angular: cfg.n_angular,
        };
        bins.validate(d)?;
        let vols = bins.complement_volumes(&ball, d);
        let phi_r = phi.eval(r.powi(-2))?;
        let mut ests: Vec<(f64, KernelEstimate)> = Vec::new();
        for (j, &t) in cfg.x_offsets.iter().enumerate() {
            if !(t.abs() < 1.0) {
                return Err(Error::Domain(format!("offset {t} outside the ball")));
            }
            let x = axis_point(d, &[], t * r);
            let b = ExitBatch::generate(sampler, &ball, &x, cfg.n, sub_seed(seed, (k * 1000 + j) as u64))?;
            ests.push((t, KernelEstimate::from_batch(&b, &bins, &vols)));
        }
        let (mut up_r, mut low_r, mut near_r) = (0.0f64, f64::INFINITY, 0.0f64);
        for (t, e) in &ests {
            let phi_x = phi.eval(((1.0 - t.abs()) * r).powi(-2))?;
            for i in 0..e.counts.len() {
                total += 1;
                if e.rel_error(i) > cfg.max_rel_error {
                    continue;
                }
                used += 1;
                let y = bins.bin_radius(i, d);
                let k_hat = e.density[i];
                let up = k_hat * (phi_r * phi_x).sqrt() / jt.eval(y - r);
                up_r = up_r.max(up);
                let low = if *t == 0.0 {
                    let v = k_hat * phi_r / jt.eval(y);
                    low_r = low_r.min(v);
                    num(v)
                } else {
                    String::new()
                };
                let (_, r_hi, _, _) = bins.bounds(i, d);
                let near = if t.abs() <= cfg.a && r_hi <= 2.0 * r * (1.0 + 1e-12) {
                    let v = k_hat * r.powi(d as i32) * (phi_r / phi.eval((y - r).powi(-2))?).sqrt();
                    near_r = near_r.max(v);
                    num(v)
                } else {
                    String::new()
                };
                rep.row(vec![num(r), num(*t), i.to_string(), num(y), num(k_hat), num(e.stderr[i]), num(up), low, near]);
            }
        }
        let mut comp_r = 1.0f64;
        for (t1, e1) in ests.iter().filter(|(t, _)| t.abs() <= 0.5) {
            for (t2, e2) in ests.iter().filter(|(t, _)| t.abs() <= 0.5) {
                if t1 == t2 {
                    continue;
                }
                for i in 0..e1.counts.len() {
                    if e1.rel_error(i) <= cfg.max_rel_error && e2.rel_error(i) <= cfg.max_rel_error {
                        comp_r = comp_r.max(e1.density[i] / e2.density[i]);
                    }
                }
            }
        }
        for (name, v) in [("upper", up_r), ("lower", low_r), ("comparability", comp_r), ("near", near_r)] {
            rep.constant(&format!("{name}@r={r}"), v);
        }
        ups.push(up_r);
        lows.push(low_r);
        comps.push(comp_r);
        nears.push(near_r);
    }
    for (name, v) in [("upper", &ups), ("lower", &lows), ("comparability", &comps), ("near", &nears)] {
        let s = spread(v);
        rep.constant(&format!("{name}_spread"), s);
        rep.check(name, Status::from_bool(s < cfg.stability), format!("spread {s} across r"));
    }
    rep.constant("used_fraction", used as f64 / total.max(1) as f64);
    if 2 * used < total {
        rep.check("coverage", Status::Inconclusive, format!("only {used} of {total} bin estimates usable"));
    }
    Ok(rep)
}
