//! Histogram estimates of the Poisson kernel `K_D(x, ·)` from exit positions.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::report::{num, ExperimentReport};
use crate::sim::rng::stream;
use crate::sim::{unit_direction, ExitBatch, ExitSampler, Geometry};
use crate::special::sphere_area;

/// Radial-angular bins around `center` with geometric radial edges from `r_min` to `r_max`.
///
/// Angles: the sign of `y_1 - c_1` for `d = 1`, the polar angle in `[-pi, pi)` for `d = 2`,
/// and the angle to `e_1` in `[0, pi]` for `d >= 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBins {
    pub center: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinSlot {
    Inner,
    Bin(usize),
    Far,
}

impl KernelBins {
    /// Default bins for a bounded domain: shells from the ball radius (or 5% of the cap radius)
    /// out to ten times the bounding radius.
    pub fn for_geometry(g: &Geometry, d: usize, n_radial: usize, n_angular: usize) -> Result<Self> {
        let br = g.bounding_radius();
        if !br.is_finite() {
            return Err(Error::Geometry(format!("{} is unbounded; give bins explicitly", g.name())));
        }
        let (center, r_min) = match g {
            Geometry::Ball { center, radius } => (center.clone(), *radius),
            _ => (vec![0.0; d], 0.05 * br / 1.5),
        };
        let b = KernelBins {
            center,
            r_min,
            r_max: 10.0 * br,
            n_radial,
            n_angular,
        };
        b.validate(d)?;
        Ok(b)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.center.len() != d || !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::Domain(format!(
                "kernel bins: center {:?}, radii [{}, {}]",
                self.center, self.r_min, self.r_max
            )));
        }
        if self.n_radial == 0 || self.n_angular == 0 {
            return Err(Error::Domain("kernel bins need at least one shell and one sector".into()));
        }
        Ok(())
    }

    pub fn sectors(&self, d: usize) -> usize {
        if d == 1 {
            2
        } else {
            self.n_angular
        }
    }

    pub fn len(&self, d: usize) -> usize {
        self.n_radial * self.sectors(d)
    }

    pub fn is_empty(&self) -> bool {
        self.n_radial == 0
    }

    pub fn edges(&self) -> Vec<f64> {
        let q = (self.r_max / self.r_min).powf(1.0 / self.n_radial as f64);
        (0..=self.n_radial).map(|k| self.r_min * q.powi(k as i32)).collect()
    }

    fn angle_range(&self, d: usize) -> (f64, f64) {
        match d {
            1 => (0.0, 2.0),
            2 => (-PI, PI),
            _ => (0.0, PI),
        }
    }

    fn angle_of(&self, u: &[f64], rho: f64) -> f64 {
        match u.len() {
            1 => {
                if u[0] < 0.0 {
                    0.5
                } else {
                    1.5
                }
            }
            2 => u[1].atan2(u[0]),
            _ => (u[0] / rho).clamp(-1.0, 1.0).acos(),
        }
    }

    pub fn locate(&self, y: &[f64]) -> BinSlot {
        let d = y.len();
        let u: Vec<f64> = y.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let rho = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rho < self.r_min {
            return BinSlot::Inner;
        }
        if rho >= self.r_max {
            return BinSlot::Far;
        }
        let q = (self.r_max / self.r_min).ln() / self.n_radial as f64;
        let kr = (((rho / self.r_min).ln() / q) as usize).min(self.n_radial - 1);
        let (a0, a1) = self.angle_range(d);
        let m = self.sectors(d);
        let ka = (((self.angle_of(&u, rho) - a0) / (a1 - a0) * m as f64) as usize).min(m - 1);
        BinSlot::Bin(kr * m + ka)
    }

    /// `(r_lo, r_hi, angle_lo, angle_hi)` of bin `i`.
    pub fn bounds(&self, i: usize, d: usize) -> (f64, f64, f64, f64) {
        let m = self.sectors(d);
        let e = self.edges();
        let (a0, a1) = self.angle_range(d);
        let w = (a1 - a0) / m as f64;
        let (kr, ka) = (i / m, i % m);
        (e[kr], e[kr + 1], a0 + w * ka as f64, a0 + w * (ka + 1) as f64)
    }

    /// Radius (geometric mid-shell) and direction (mid-sector) of bin `i`.
    pub fn bin_point(&self, i: usize, d: usize) -> Vec<f64> {
        let (r0, r1, a0, a1) = self.bounds(i, d);
        let rho = (r0 * r1).sqrt();
        let a = 0.5 * (a0 + a1);
        let mut y = self.center.clone();
        match d {
            1 => y[0] += if a < 1.0 { -rho } else { rho },
            2 => {
                y[0] += rho * a.cos();
                y[1] += rho * a.sin();
            }
            _ => {
                y[0] += rho * a.cos();
                y[1] += rho * a.sin();
            }
        }
        y
    }

    /// Mid-shell radius of bin `i` measured from the bin center.
    pub fn bin_radius(&self, i: usize, d: usize) -> f64 {
        let (r0, r1, _, _) = self.bounds(i, d);
        (r0 * r1).sqrt()
    }

    /// Volume of each bin intersected with the complement of `g`.
    pub fn complement_volumes(&self, g: &Geometry, d: usize) -> Vec<f64> {
        (0..self.len(d)).map(|i| self.complement_volume(i, g, d)).collect()
    }

    fn complement_volume(&self, i: usize, g: &Geometry, d: usize) -> f64 {
        let (r0, r1, a0, a1) = self.bounds(i, d);
        let sub = 48;
        match d {
            1 => {
                let s = if a0 < 1.0 { -1.0 } else { 1.0 };
                let h = (r1 - r0) / sub as f64;
                (0..sub)
                    .filter(|k| !g.contains(&[self.center[0] + s * (r0 + (*k as f64 + 0.5) * h)]))
                    .count() as f64
                    * h
            }
            2 => {
                let mut v = 0.0;
                for kr in 0..sub {
                    let ra = r0 + (r1 - r0) * kr as f64 / sub as f64;
                    let rb = r0 + (r1 - r0) * (kr + 1) as f64 / sub as f64;
                    let rm = 0.5 * (ra + rb);
                    let area = 0.5 * (rb * rb - ra * ra) * (a1 - a0) / sub as f64;
                    for ka in 0..sub {
                        let a = a0 + (a1 - a0) * (ka as f64 + 0.5) / sub as f64;
                        let y = [self.center[0] + rm * a.cos(), self.center[1] + rm * a.sin()];
                        if !g.contains(&y) {
                            v += area;
                        }
                    }
                }
                v
            }
            _ => {
                // band of polar angles: exact measure, complement fraction by seeded sampling
                let (t, w) = gauss_legendre(64);
                let band = |lo: f64, hi: f64| -> f64 {
                    let h = 0.5 * (hi - lo);
                    t.iter()
                        .zip(&w)
                        .map(|(t, w)| w * h * (lo + h * (t + 1.0)).sin().powi(d as i32 - 2))
                        .sum()
                };
                let frac = band(a0, a1) / band(0.0, PI);
                let full = (r1.powi(d as i32) - r0.powi(d as i32)) / d as f64 * sphere_area(d) * frac;
                let mut rng = stream(0x6b65_726e, i as u64);
                let mut dir = vec![0.0; d];
                let (mut hit, mut tot) = (0usize, 0usize);
                while tot < 2000 {
                    unit_direction(&mut rng, &mut dir);
                    let th = dir[0].clamp(-1.0, 1.0).acos();
                    if th < a0 || th >= a1 {
                        continue;
                    }
                    let u: f64 = rng.random();
                    let rho = (r0.powi(d as i32) + u * (r1.powi(d as i32) - r0.powi(d as i32))).powf(1.0 / d as f64);
                    let y: Vec<f64> = self.center.iter().zip(&dir).map(|(c, e)| c + rho * e).collect();
                    tot += 1;
                    if !g.contains(&y) {
                        hit += 1;
                    }
                }
                full * hit as f64 / tot as f64
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct KernelEstimate {
    pub geometry: Geometry,
    pub start: Vec<f64>,
    pub bins: KernelBins,
    /// Completed (uncensored) paths.
    pub n: usize,
    pub censored: usize,
    pub counts: Vec<u64>,
    pub volumes: Vec<f64>,
    pub density: Vec<f64>,
    pub stderr: Vec<f64>,
    pub inner: u64,
    pub far: u64,
    pub warnings: Vec<String>,
}

impl KernelEstimate {
    /// Histogram of a batch; `volumes` from [`KernelBins::complement_volumes`].
    pub fn from_batch(batch: &ExitBatch, bins: &KernelBins, volumes: &[f64]) -> Self {
        let d = batch.start.len();
        let mut counts = vec![0u64; bins.len(d)];
        let (mut inner, mut far) = (0, 0);
        for y in batch.positions() {
            match bins.locate(y) {
                BinSlot::Inner => inner += 1,
                BinSlot::Far => far += 1,
                BinSlot::Bin(i) => counts[i] += 1,
            }
        }
        let n = batch.samples.len();
        let nf = n.max(1) as f64;
        let (density, stderr) = counts
            .iter()
            .zip(volumes)
            .map(|(&c, &v)| {
                if v <= 0.0 {
                    return (0.0, 0.0);
                }
                let p = c as f64 / nf;
                (p / v, (p * (1.0 - p) / nf).sqrt() / v)
            })
            .unzip();
        let mut warnings = Vec::new();
        if batch.censored_fraction() > 0.01 {
            warnings.push(format!("{:.2}% of paths censored", 100.0 * batch.censored_fraction()));
        }
        let stray = counts.iter().zip(volumes).filter(|(c, v)| **c > 0 && **v <= 0.0).count();
        if stray > 0 {
            warnings.push(format!("{stray} bins with exits but no complement volume"));
        }
        KernelEstimate {
            geometry: batch.geometry.clone(),
            start: batch.start.clone(),
            bins: bins.clone(),
            n,
            censored: batch.censored,
            counts,
            volumes: volumes.to_vec(),
            density,
            stderr,
            inner,
            far,
            warnings,
        }
    }

    /// Total probability in bins and both buckets, with its binomial standard error over all paths.
    pub fn mass(&self) -> (f64, f64) {
        let total = self.n + self.censored;
        let m = (self.counts.iter().sum::<u64>() + self.inner + self.far) as f64 / total.max(1) as f64;
        (m, (m * (1.0 - m) / total.max(1) as f64).sqrt())
    }

    pub fn far_fraction(&self) -> f64 {
        self.far as f64 / self.n.max(1) as f64
    }

    /// Bins without any exit.
    pub fn empty_bins(&self) -> Vec<usize> {
        (0..self.counts.len()).filter(|&i| self.counts[i] == 0 && self.volumes[i] > 0.0).collect()
    }

    /// Relative standard error of bin `i` (infinite for empty bins).
    pub fn rel_error(&self, i: usize) -> f64 {
        if self.density[i] > 0.0 {
            self.stderr[i] / self.density[i]
        } else {
            f64::INFINITY
        }
    }

    pub fn to_report(&self, seed: u64) -> ExperimentReport {
        let d = self.start.len();
        let mut r = ExperimentReport::new(
            "kernel",
            seed,
            &["bin", "r_lo", "r_hi", "angle_lo", "angle_hi", "count", "volume", "density", "stderr"],
        );
        r.param("geometry", self.geometry.name());
        r.param("start", format!("{:?}", self.start));
        r.param("n", self.n + self.censored);
        for i in 0..self.counts.len() {
            let (r0, r1, a0, a1) = self.bins.bounds(i, d);
            r.row(vec![
                i.to_string(),
                num(r0),
                num(r1),
                num(a0),
                num(a1),
                self.counts[i].to_string(),
                num(self.volumes[i]),
                num(self.density[i]),
                num(self.stderr[i]),
            ]);
        }
        let (m, se) = self.mass();
        r.constant("mass", m);
        r.constant("mass_stderr", se);
        r.constant("inner_fraction", self.inner as f64 / self.n.max(1) as f64);
        r.constant("far_fraction", self.far_fraction());
        r.constant("censored_fraction", self.censored as f64 / (self.n + self.censored).max(1) as f64);
        r.check(
            "normalization",
            crate::report::Status::from_bool((m - 1.0).abs() <= 3.0 * se + 1e-12),
            format!("mass {m}"),
        );
        if self.censored as f64 > 0.01 * (self.n + self.censored) as f64 {
            r.check("censoring", crate::report::Status::Inconclusive, "more than 1% of paths censored");
        }
        for w in &self.warnings {
            r.note(w.clone());
        }
        r
    }
}

/// `K_D(x, ·)` on `bins` from `n` exits of `geometry` started at `x`.
pub fn kernel_estimate(
    sampler: &ExitSampler,
    geometry: &Geometry,
    x: &[f64],
    bins: &KernelBins,
    n: usize,
    seed: u64,
) -> Result<KernelEstimate> {
    let d = sampler.model.d;
    bins.validate(d)?;
    geometry.validate(d)?;
    if !geometry.contains(x) {
        return Err(Error::Geometry(format!("start point {x:?} is not in the {}", geometry.name())));
    }
    let volumes = bins.complement_volumes(geometry, d);
    let batch = ExitBatch::generate(sampler, geometry, x, n, seed)?;
    Ok(KernelEstimate::from_batch(&batch, bins, &volumes))
}
