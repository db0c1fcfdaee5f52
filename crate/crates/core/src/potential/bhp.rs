//! Uniform boundary Harnack principle: ratio constants of harmonic functions and Poisson kernels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::envelopes::spread;
use crate::potential::harmonic::harmonic_from_batch;
use crate::potential::kernel::{KernelBins, KernelEstimate};
use crate::potential::target::TargetSet;
use crate::report::{num, ExperimentReport, Status};
use crate::sim::rng::sub_seed;
use crate::sim::{ExitBatch, ExitSampler, Geometry};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BhpConfig {
    /// Domains anchored at `z0 = 0`.
    pub family: Vec<Geometry>,
    pub radii: Vec<f64>,
    /// Start points `r t (cos b, sin b)` for `t` in `t_grid` and `n_angles` equally spaced `b`.
    pub t_grid: Vec<f64>,
    pub n_angles: usize,
    /// Kernel bins: shells from `r` to `bin_factor r`.
    pub n_radial: usize,
    pub n_angular: usize,
    pub bin_factor: f64,
    /// `(A1, A2)` in units of `r` around `z0`; empty means the default pair.
    pub targets: Vec<TargetSet>,
    pub n: usize,
    pub max_rel_error: f64,
    pub stability: f64,
}

impl Default for BhpConfig {
    fn default() -> Self {
        BhpConfig {
            family: vec![
                Geometry::HalfSpaceCapBall { radius: 2.0 },
                Geometry::ConeCapBall {
                    aperture: std::f64::consts::FRAC_PI_3,
                    radius: 2.0,
                },
                Geometry::SlitBall {
                    half_width: 0.01,
                    radius: 2.0,
                },
            ],
            radii: vec![0.1, 0.25, 0.5],
            t_grid: vec![0.1, 0.25],
            n_angles: 8,
            n_radial: 4,
            n_angular: 4,
            bin_factor: 16.0,
            targets: Vec::new(),
            n: 100_000,
            max_rel_error: 0.2,
            stability: 2.0,
        }
    }
}

impl BhpConfig {
    /// Near shell `1 <= |y| < 2` and far exterior `|y| >= 2`.
    pub fn default_targets(d: usize) -> Vec<TargetSet> {
        let o = vec![0.0; d];
        vec![
            TargetSet::And {
                parts: vec![
                    TargetSet::OutsideBall { center: o.clone(), radius: 1.0 },
                    TargetSet::InsideBall { center: o.clone(), radius: 2.0 },
                ],
            },
            TargetSet::OutsideBall { center: o, radius: 2.0 },
        ]
    }
}

fn start_points(d: usize, r: f64, t_grid: &[f64], n_angles: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for &t in t_grid {
        if d == 1 {
            out.push(vec![r * t]);
            out.push(vec![-r * t]);
            continue;
        }
        for k in 0..n_angles {
            let b = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
            let mut x = vec![0.0; d];
            x[0] = r * t * b.cos();
            x[1] = r * t * b.sin();
            out.push(x);
        }
    }
    out
}

/// `(max / min, stderr of its log)` of the ratios `a_i / b_i`.
fn ratio_constant(pairs: &[(f64, f64, f64, f64)]) -> (f64, f64) {
    let q: Vec<f64> = pairs.iter().map(|(a, _, b, _)| a / b).collect();
    let imax = (0..q.len()).max_by(|&i, &j| q[i].total_cmp(&q[j])).unwrap_or(0);
    let imin = (0..q.len()).min_by(|&i, &j| q[i].total_cmp(&q[j])).unwrap_or(0);
    let lvar = |i: usize| {
        let (a, sa, b, sb) = pairs[i];
        (sa / a).powi(2) + (sb / b).powi(2)
    };
    (spread(&q), (lvar(imax) + lvar(imin)).sqrt())
}

/// Largest kernel cross-ratio `K(x1,y1) K(x2,y2) / (K(x1,y2) K(x2,y1))` over start pairs and
/// usable bins; volumes cancel, so counts are compared directly.
fn cross_ratio(ests: &[KernelEstimate], max_rel: f64) -> f64 {
    let mut worst = 0.0f64;
    for (i, e1) in ests.iter().enumerate() {
        for e2 in &ests[i + 1..] {
            let diffs: Vec<f64> = (0..e1.counts.len())
                .filter(|&b| e1.rel_error(b) <= max_rel && e2.rel_error(b) <= max_rel)
                .map(|b| (e1.counts[b] as f64 / e1.n as f64).ln() - (e2.counts[b] as f64 / e2.n as f64).ln())
                .collect();
            if diffs.len() < 2 {
                continue;
            }
            let hi = diffs.iter().cloned().fold(f64::MIN, f64::max);
            let lo = diffs.iter().cloned().fold(f64::MAX, f64::min);
            worst = worst.max(hi - lo);
        }
    }
    worst.exp()
}

/// Boundary Harnack constants on `U = D ∩ B(0, r)` with `u, v` the exit probabilities into the
/// targets `A1`, `A2` outside `B(0, r)` (by default `r <= |y| < 2r` and `|y| >= 2r`), and kernel cross-ratios
/// of `D` on bins outside `B(0, r)`.
pub fn bhp_experiment(sampler: &ExitSampler, cfg: &BhpConfig, seed: u64) -> Result<ExperimentReport> {
    let d = sampler.model.d;
    if cfg.radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::Domain("bhp radii must lie in (0, 1)".into()));
    }
    if cfg.t_grid.iter().any(|t| !(*t > 0.0 && *t < 0.5)) {
        return Err(Error::Domain("bhp start points must lie in B(0, r/2)".into()));
    }
    let mut rep = ExperimentReport::new(
        "bhp",
        seed,
        &["geometry", "r", "x1", "x2", "u", "u_stderr", "v", "v_stderr"],
    );
    rep.param("model", sampler.model.phi().label());
    rep.param("d", d);
    rep.param("n", cfg.n);
    let targets = if cfg.targets.is_empty() { BhpConfig::default_targets(d) } else { cfg.targets.clone() };
    if targets.len() != 2 {
        return Err(Error::Domain(format!("bhp needs two targets, got {}", targets.len())));
    }
    for t in &targets {
        t.validate(d)?;
        if t.contains(&vec![0.0; d]) {
            return Err(Error::Domain(format!("target {} contains z0", t.label())));
        }
    }
    let origin = vec![0.0; d];
    let (mut used, mut total) = (0usize, 0usize);
    let mut per_geom: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (gi, g) in cfg.family.iter().enumerate() {
        g.validate(d)?;
        let name = format!("{}{gi}", g.name());
        let (mut c1s, mut c2s) = (Vec::new(), Vec::new());
        for (k, &r) in cfg.radii.iter().enumerate() {
            let u_geom = g.intersect_ball(r)?;
            let a1 = targets[0].scaled(&origin, r);
            let a2 = targets[1].scaled(&origin, r);
            let bins = KernelBins {
                center: origin.clone(),
                r_min: r,
                r_max: cfg.bin_factor * r,
                n_radial: cfg.n_radial,
                n_angular: cfg.n_angular,
            };
            let vols = bins.complement_volumes(g, d);
            let live: Vec<usize> = (0..vols.len()).filter(|&i| vols[i] > 0.0).collect();
            let mut pairs = Vec::new();
            let mut kernels = Vec::new();
            for (j, x) in start_points(d, r, &cfg.t_grid, cfg.n_angles).into_iter().enumerate() {
                if !u_geom.contains(&x) {
                    continue;
                }
                let tag = ((gi * 100 + k) * 1000 + j) as u64;
                let bu = ExitBatch::generate(sampler, &u_geom, &x, cfg.n, sub_seed(seed, 2 * tag))?;
                let (u, v) = (harmonic_from_batch(&bu, &a1), harmonic_from_batch(&bu, &a2));
                rep.row(vec![
                    name.clone(),
                    num(r),
                    num(x[0]),
                    num(x.get(1).copied().unwrap_or(0.0)),
                    num(u.value),
                    num(u.stderr),
                    num(v.value),
                    num(v.stderr),
                ]);
                total += 2;
                if u.rel_error() <= cfg.max_rel_error && v.rel_error() <= cfg.max_rel_error {
                    used += 2;
                    pairs.push((u.value, u.stderr, v.value, v.stderr));
                }
                let bd = ExitBatch::generate(sampler, g, &x, cfg.n, sub_seed(seed, 2 * tag + 1))?;
                let ke = KernelEstimate::from_batch(&bd, &bins, &vols);
                total += live.len();
                used += live.iter().filter(|&&i| ke.rel_error(i) <= cfg.max_rel_error).count();
                kernels.push(ke);
            }
            let key = format!("{name},r={r}");
            let (c1, sig) = ratio_constant(&pairs);
            let swapped: Vec<_> = pairs.iter().map(|&(a, sa, b, sb)| (b, sb, a, sa)).collect();
            let (c1s_, _) = ratio_constant(&swapped);
            let c2 = cross_ratio(&kernels, cfg.max_rel_error);
            rep.constant(&format!("ratio@{key}"), c1);
            rep.constant(&format!("ratio_swapped@{key}"), c1s_);
            rep.constant(&format!("ratio_log_stderr@{key}"), sig);
            rep.constant(&format!("cross@{key}"), c2);
            rep.check(
                &format!("swap@{key}"),
                Status::from_bool((c1.ln() - c1s_.ln()).abs() <= 3.0 * sig + 1e-12),
                format!("{c1} vs {c1s_}"),
            );
            if pairs.len() < 2 {
                rep.check(&format!("points@{key}"), Status::Inconclusive, "fewer than two usable start points");
            }
            c1s.push(c1);
            c2s.push(c2);
        }
        for (label, v) in [("ratio", &c1s), ("cross", &c2s)] {
            let s = spread(v);
            rep.constant(&format!("{label}_r_spread@{name}"), s);
            rep.check(&format!("{label}_r_stability@{name}"), Status::from_bool(s < cfg.stability), format!("spread {s}"));
        }
        per_geom.push((c1s, c2s));
    }
    for (k, r) in cfg.radii.iter().enumerate() {
        for (label, pick) in [("ratio", 0usize), ("cross", 1)] {
            let v: Vec<f64> = per_geom.iter().map(|p| if pick == 0 { p.0[k] } else { p.1[k] }).collect();
            let s = spread(&v);
            rep.constant(&format!("{label}_family_spread@r={r}"), s);
            rep.check(&format!("{label}_family_stability@r={r}"), Status::from_bool(s < cfg.stability), format!("spread {s}"));
        }
    }
    let all: Vec<f64> = per_geom.iter().flat_map(|p| p.0.iter().chain(&p.1)).cloned().collect();
    rep.constant("max_constant", all.iter().cloned().fold(0.0, f64::max));
    rep.constant("used_fraction", used as f64 / total.max(1) as f64);
    rep.check(
        "finite",
        Status::from_bool(all.iter().all(|c| c.is_finite())),
        "all constants finite",
    );
    if 2 * used < total {
        rep.check("coverage", Status::Inconclusive, format!("only {used} of {total} estimates usable"));
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
    fn identical_functions_give_one() {
        let pairs = [(0.2, 0.01, 0.2, 0.01), (0.5, 0.01, 0.5, 0.01)];
        assert_eq!(ratio_constant(&pairs).0, 1.0);
    }

    #[test]
    fn half_space_constants_are_finite_and_swap_invariant() {
        let cfg = BhpConfig {
            family: vec![Geometry::HalfSpaceCapBall { radius: 2.0 }],
            radii: vec![0.25],
            n: 10_000,
            ..BhpConfig::default()
        };
        let rep = bhp_experiment(&cauchy(2), &cfg, 5).unwrap();
        let c = rep.get_constant("ratio@half_space_cap_ball0,r=0.25").unwrap();
        let cs = rep.get_constant("ratio_swapped@half_space_cap_ball0,r=0.25").unwrap();
        assert!(c.is_finite() && c >= 1.0);
        assert!((c - cs).abs() < 1e-9 * c);
        assert!(rep.get_constant("cross@half_space_cap_ball0,r=0.25").unwrap().is_finite());
    }
}
