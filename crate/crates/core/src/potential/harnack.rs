//! Harnack inequality for functions harmonic in a ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::envelopes::spread;
use crate::potential::harmonic::harmonic_from_batch;
use crate::potential::target::TargetSet;
use crate::report::{num, ExperimentReport, Status};
use crate::sim::rng::sub_seed;
use crate::sim::{ExitBatch, ExitSampler, Geometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnackConfig {
    /// Ball center; empty means the origin.
    pub x0: Vec<f64>,
    pub radii: Vec<f64>,
    pub a: f64,
    /// Targets in units of `r` around `x0`; they must avoid the unit ball.
    pub targets: Vec<TargetSet>,
    /// Grid points in units of `r` around `x0`; empty means the center plus a ring at `0.9 a`.
    pub grid: Vec<Vec<f64>>,
    pub n: usize,
    /// Largest acceptable `max u / min u`.
    pub c_max: f64,
    pub max_rel_error: f64,
}

impl HarnackConfig {
    /// Targets: the right exterior half, a small ball at distance `2`, and `|y| >= 3`.
    pub fn default_targets(d: usize) -> Vec<TargetSet> {
        let mut c = vec![0.0; d];
        c[0] = 2.0;
        vec![
            TargetSet::exterior_half(&vec![0.0; d], 1.0, true),
            TargetSet::InsideBall { center: c, radius: 0.5 },
            TargetSet::OutsideBall {
                center: vec![0.0; d],
                radius: 3.0,
            },
        ]
    }
}

impl Default for HarnackConfig {
    fn default() -> Self {
        HarnackConfig {
            x0: Vec::new(),
            radii: vec![0.25, 0.5],
            a: 0.5,
            targets: Vec::new(),
            grid: Vec::new(),
            n: 20_000,
            c_max: 100.0,
            max_rel_error: 0.2,
        }
    }
}

/// Center plus `2d` (or 8 in the plane) points at radius `0.9 a`.
fn default_grid(d: usize, a: f64) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; d]];
    let rho = 0.9 * a;
    if d == 2 {
        for k in 0..8 {
            let t = std::f64::consts::PI * k as f64 / 4.0;
            g.push(vec![rho * t.cos(), rho * t.sin()]);
        }
    } else {
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut p = vec![0.0; d];
                p[i] = s * rho;
                g.push(p);
            }
        }
    }
    g
}

/// `max u / min u` over the grid in `B(x0, a r)` for `u(x) = P_x(X_{tau_{B(x0,r)}} in A)`.
pub fn harnack_experiment(sampler: &ExitSampler, cfg: &HarnackConfig, seed: u64) -> Result<ExperimentReport> {
    let d = sampler.model.d;
    let x0 = if cfg.x0.is_empty() { vec![0.0; d] } else { cfg.x0.clone() };
    if x0.len() != d {
        return Err(Error::Domain(format!("x0 has {} coordinates, model d = {d}", x0.len())));
    }
    if !(cfg.a > 0.0 && cfg.a < 1.0) || cfg.radii.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::Domain("harnack needs a in (0, 1) and r in (0, 1]".into()));
    }
    let targets = if cfg.targets.is_empty() {
        HarnackConfig::default_targets(d)
    } else {
        cfg.targets.clone()
    };
    for t in &targets {
        t.validate(d)?;
    }
    let grid = if cfg.grid.is_empty() { default_grid(d, cfg.a) } else { cfg.grid.clone() };
    for p in &grid {
        if p.len() != d || p.iter().map(|v| v * v).sum::<f64>().sqrt() >= cfg.a {
            return Err(Error::Domain(format!("grid point {p:?} not in B(0, a)")));
        }
    }
    let mut rep = ExperimentReport::new("harnack", seed, &["r", "target", "point", "u", "stderr"]);
    rep.param("model", sampler.model.phi().label());
    rep.param("d", d);
    rep.param("a", cfg.a);
    rep.param("n", cfg.n);
    let mut worst = 1.0f64;
    let mut noisy = 0;
    for (k, &r) in cfg.radii.iter().enumerate() {
        let ball = Geometry::Ball {
            center: x0.clone(),
            radius: r,
        };
        let scaled: Vec<TargetSet> = targets.iter().map(|t| t.scaled(&x0, r)).collect();
        let mut u = vec![Vec::new(); targets.len()];
        for (j, p) in grid.iter().enumerate() {
            let x: Vec<f64> = x0.iter().zip(p).map(|(o, v)| o + r * v).collect();
            let b = ExitBatch::generate(sampler, &ball, &x, cfg.n, sub_seed(seed, (k * 1000 + j) as u64))?;
            for (ti, t) in scaled.iter().enumerate() {
                let h = harmonic_from_batch(&b, t);
                rep.row(vec![num(r), ti.to_string(), j.to_string(), num(h.value), num(h.stderr)]);
                if h.rel_error() > cfg.max_rel_error {
                    noisy += 1;
                }
                u[ti].push(h.value);
            }
        }
        for (ti, vals) in u.iter().enumerate() {
            let c = spread(vals);
            worst = worst.max(c);
            rep.constant(&format!("ratio@r={r},target={ti}"), c);
        }
    }
    rep.constant("max_ratio", worst);
    rep.check(
        "harnack",
        Status::from_bool(worst.is_finite() && worst <= cfg.c_max),
        format!("max ratio {worst} (cap {})", cfg.c_max),
    );
    if noisy > 0 {
        rep.check("noise", Status::Inconclusive, format!("{noisy} estimates with stderr above {}", cfg.max_rel_error));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiModel;
    use crate::levy::ProcessModel;
    use crate::sim::{SamplerParams, Strategy};

    fn cauchy(d: usize) -> ExitSampler {
        ExitSampler::new(&ProcessModel::new(d, PhiModel::stable(1.0)), Strategy::WosStable, SamplerParams::default()).unwrap()
    }

    #[test]
    fn constant_function_has_ratio_one() {
        let cfg = HarnackConfig {
            targets: vec![TargetSet::All],
            n: 2000,
            ..HarnackConfig::default()
        };
        let rep = harnack_experiment(&cauchy(2), &cfg, 1).unwrap();
        assert_eq!(rep.get_constant("max_ratio"), Some(1.0));
        assert!(rep.passed());
    }

    #[test]
    fn symmetric_target_on_symmetric_grid() {
        // |y| >= 3 around the center is rotation invariant
        let cfg = HarnackConfig {
            targets: vec![TargetSet::OutsideBall { center: vec![0.0, 0.0], radius: 3.0 }],
            grid: vec![vec![0.4, 0.0], vec![-0.4, 0.0], vec![0.0, 0.4]],
            radii: vec![0.5],
            n: 40_000,
            ..HarnackConfig::default()
        };
        let rep = harnack_experiment(&cauchy(2), &cfg, 2).unwrap();
        let u: Vec<f64> = rep.rows.iter().map(|r| r[3].parse().unwrap()).collect();
        let se: Vec<f64> = rep.rows.iter().map(|r| r[4].parse().unwrap()).collect();
        for i in 1..3 {
            assert!((u[i] - u[0]).abs() <= 3.0 * (se[i] * se[i] + se[0] * se[0]).sqrt());
        }
    }

    #[test]
    fn line_ratio_is_scale_invariant() {
        let cfg = HarnackConfig {
            radii: vec![0.25, 0.5, 1.0],
            n: 40_000,
            ..HarnackConfig::default()
        };
        let rep = harnack_experiment(&cauchy(1), &cfg, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        for t in 0..3 {
            let v: Vec<f64> = [0.25, 0.5, 1.0]
                .iter()
                .map(|r| rep.get_constant(&format!("ratio@r={r},target={t}")).unwrap())
                .collect();
            assert!(spread(&v) < 1.2, "target {t}: {v:?}");
        }
    }
}
