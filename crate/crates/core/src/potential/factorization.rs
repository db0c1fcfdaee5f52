//! Two-sided factorization `u(x) ≍ E_x[tau_U] ∫_{B(0,r/2)^c} j(|y|) u(y) dy` on `U = D ∩ B(0, r)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::potential::envelopes::spread;
use crate::potential::harmonic::harmonic_from_batch;
use crate::potential::target::TargetSet;
use crate::report::{num, ExperimentReport, Status};
use crate::sim::rng::{stream, sub_seed};
use crate::sim::stats::mean_stderr;
use crate::sim::{unit_direction, ExitBatch, ExitSampler, Geometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorizationConfig {
    /// Domains anchored at the origin (`z0 = 0`).
    pub geometries: Vec<Geometry>,
    pub r: f64,
    /// Start points in units of `r`; those outside `U ∩ B(0, r/2)` are skipped.
    pub x_grid: Vec<Vec<f64>>,
    /// The target is `{|y| >= target_factor * r}`.
    pub target_factor: f64,
    pub n: usize,
    pub max_rel_error: f64,
    pub stability: f64,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig {
            geometries: vec![
                Geometry::Ball {
                    center: vec![0.0, 0.0],
                    radius: 2.0,
                },
                Geometry::HalfSpaceCapBall { radius: 2.0 },
            ],
            r: 0.5,
            x_grid: vec![
                vec![0.0, 0.0],
                vec![0.1, 0.0],
                vec![0.25, 0.0],
                vec![0.4, 0.0],
                vec![0.25, 0.25],
                vec![0.05, 0.3],
                vec![-0.3, 0.1],
            ],
            target_factor: 8.0,
            n: 100_000,
            max_rel_error: 0.2,
            stability: 2.0,
        }
    }
}

/// Inverse CDF sampler for the radius of `j(|y|)` on the shell `a <= |y| < b`.
struct ShellRadius {
    inv: Pchip,
    hi: f64,
}

impl ShellRadius {
    fn new(sampler: &ExitSampler, a: f64, b: f64) -> Result<Self> {
        let table = sampler.model.j_table()?;
        let p = sampler.model.d as i32 - 1;
        let m = 2048;
        let xs: Vec<f64> = (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect();
        let mut cdf = vec![0.0; m + 1];
        for k in 1..=m {
            let (x0, x1) = (xs[k - 1], xs[k]);
            let xm = 0.5 * (x0 + x1);
            // Simpson on each cell
            let f = |x: f64| table.eval(x) * x.powi(p);
            cdf[k] = cdf[k - 1] + (x1 - x0) / 6.0 * (f(x0) + 4.0 * f(xm) + f(x1));
        }
        let tot = cdf[m];
        let u: Vec<f64> = cdf.iter().map(|c| c / tot).collect();
        Ok(ShellRadius { inv: Pchip::new(u, xs)?, hi: b })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.inv.eval(u).unwrap_or(self.hi)
    }
}

/// `∫_{U \ B(0, r/2)} j(|y|) u(y) dy` by sampling `y ~ j` on the shell `r/2 <= |y| < r` and one
/// exit of `U` from each `y` that lies in `U`. Returns `(value, stderr)`.
fn near_integral(
    sampler: &ExitSampler,
    u_geom: &Geometry,
    target: &TargetSet,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let d = sampler.model.d;
    let w = sampler.model.shell_mass(0.5 * r, r, false)?;
    let radius = ShellRadius::new(sampler, 0.5 * r, r)?;
    let vals: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let rho = radius.sample(&mut rng);
            let mut y = vec![0.0; d];
            unit_direction(&mut rng, &mut y);
            y.iter_mut().for_each(|v| *v *= rho);
            if !u_geom.contains(&y) {
                return Ok(0.0);
            }
            match sampler.sample(u_geom, &y, &mut rng) {
                Ok(s) => Ok(if target.contains(&s.position) { 1.0 } else { 0.0 }),
                Err(Error::Censored { .. }) => Ok(0.0),
                Err(e) => Err(e),
            }
        })
        .collect();
    let vals = vals.into_iter().collect::<Result<Vec<f64>>>()?;
    let (m, se) = mean_stderr(&vals);
    Ok((w * m, w * se))
}

/// For each domain: `ratio(x) = u(x) / (E_x[tau_U] I)` with `u(x) = P_x(X_{tau_U} in A)`,
/// `A = {|y| >= target_factor r}`, and the empirical constant `C = max max(ratio, 1/ratio)`.
pub fn factorization_experiment(sampler: &ExitSampler, cfg: &FactorizationConfig, seed: u64) -> Result<ExperimentReport> {
    let d = sampler.model.d;
    let r = cfg.r;
    if !(r > 0.0 && r < 1.0) || !(cfg.target_factor >= 1.0) {
        return Err(Error::Domain(format!("factorization needs r in (0, 1), target factor >= 1 (r = {r})")));
    }
    let mut rep = ExperimentReport::new(
        "factorization",
        seed,
        &["geometry", "x1", "x2", "u", "u_stderr", "mean_tau", "tau_stderr", "ratio", "ratio_stderr"],
    );
    rep.param("model", sampler.model.phi().label());
    rep.param("d", d);
    rep.param("r", r);
    rep.param("target_factor", cfg.target_factor);
    rep.param("n", cfg.n);
    let target = TargetSet::OutsideBall {
        center: vec![0.0; d],
        radius: cfg.target_factor * r,
    };
    let far = sampler.model.shell_mass(cfg.target_factor * r, f64::INFINITY, false)?;
    rep.constant("integral_far", far);
    let mut cs = Vec::new();
    for (gi, g) in cfg.geometries.iter().enumerate() {
        g.validate(d)?;
        let u_geom = g.intersect_ball(r)?;
        let (near, near_se) = near_integral(sampler, &u_geom, &target, r, cfg.n, sub_seed(seed, 7000 + gi as u64))?;
        let total = far + near;
        let name = format!("{}{gi}", g.name());
        rep.constant(&format!("integral@{name}"), total);
        rep.constant(&format!("integral_stderr@{name}"), near_se);
        if near_se > cfg.max_rel_error * total {
            rep.check(&format!("integral@{name}"), Status::Inconclusive, "integral below the noise floor");
        }
        let mut pts = Vec::new();
        for (j, p) in cfg.x_grid.iter().enumerate() {
            if p.len() != d {
                return Err(Error::Domain(format!("grid point {p:?} in dimension {d}")));
            }
            let x: Vec<f64> = p.iter().map(|v| v * r).collect();
            if !u_geom.contains(&x) || x.iter().map(|v| v * v).sum::<f64>() >= 0.25 * r * r {
                continue;
            }
            let b = ExitBatch::generate(sampler, &u_geom, &x, cfg.n, sub_seed(seed, (gi * 1000 + j) as u64))?;
            let h = harmonic_from_batch(&b, &target);
            let (tau, tau_se) = mean_stderr(&b.times());
            let ratio = h.value / (tau * total);
            let rse = ratio * ((h.stderr / h.value).powi(2) + (tau_se / tau).powi(2)).sqrt();
            let mut row = vec![name.clone(), num(x[0]), num(x.get(1).copied().unwrap_or(0.0))];
            row.extend([h.value, h.stderr, tau, tau_se, ratio, rse].map(num));
            rep.row(row);
            if h.rel_error() <= cfg.max_rel_error {
                pts.push((ratio, rse));
            }
        }
        if pts.len() < 2 {
            rep.check(&format!("x_independence@{name}"), Status::Inconclusive, "fewer than two usable points");
            continue;
        }
        let wsum: f64 = pts.iter().map(|(_, s)| 1.0 / (s * s)).sum();
        let mean = pts.iter().map(|(v, s)| v / (s * s)).sum::<f64>() / wsum;
        let worst = pts.iter().map(|(v, s)| (v - mean).abs() / s).fold(0.0, f64::max);
        rep.constant(&format!("ratio_mean@{name}"), mean);
        rep.constant(&format!("max_z@{name}"), worst);
        rep.check(
            &format!("x_independence@{name}"),
            Status::from_bool(worst <= 3.0),
            format!("largest deviation {worst} sigma from the weighted mean {mean}"),
        );
        let c = pts.iter().map(|(v, _)| v.max(1.0 / v)).fold(1.0, f64::max);
        rep.constant(&format!("C@{name}"), c);
        cs.push(c);
    }
    let s = spread(&cs);
    rep.constant("C_spread", s);
    if cs.len() >= 2 {
        rep.check("geometry_stability", Status::from_bool(s < cfg.stability), format!("C varies by {s}"));
    }
    Ok(rep)
}
