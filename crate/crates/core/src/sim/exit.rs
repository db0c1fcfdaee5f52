//! Exit sampling from a domain and batches of exits.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy::{Modulation, ProcessModel};
use crate::sim::geometry::Geometry;
use crate::sim::increments::{IncrementSampler, StepClock};
use crate::sim::rng::stream;
use crate::sim::samplers::{centered_exit_factor, unit_direction};
use crate::sim::stats::mean_stderr;
use crate::special::stable_ball_exit_time_center;

#[derive(Clone, Debug, PartialEq)]
pub struct ExitSample {
    pub position: Vec<f64>,
    /// Exit time; for walk-on-spheres the sum of per-ball expected exit times.
    pub time: f64,
    pub exited_by_jump: bool,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    WosStable,
    Timestep,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::WosStable => "wos_stable",
            Strategy::Timestep => "timestep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerParams {
    /// Step constant in `h = c_h / phi(dist^-2)`.
    pub c_h: f64,
    /// Jump truncation for non-stable models.
    pub eps_cut: f64,
    pub max_steps: usize,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            c_h: 0.01,
            eps_cut: 1e-3,
            max_steps: 1_000_000,
        }
    }
}

/// A model prepared for exit sampling with a given strategy.
#[derive(Clone, Debug)]
pub struct ExitSampler {
    pub model: ProcessModel,
    pub strategy: Strategy,
    pub params: SamplerParams,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Wos { alpha: f64, t_unit: f64, clock: f64 },
    Timestep { inc: IncrementSampler, clock: StepClock, rate: f64 },
}

impl ExitSampler {
    pub fn new(model: &ProcessModel, strategy: Strategy, params: SamplerParams) -> Result<Self> {
        model.validate()?;
        if !(params.c_h > 0.0) || params.max_steps == 0 {
            return Err(Error::Domain(format!("sampler parameters {params:?}")));
        }
        let clock = match model.modulation {
            Modulation::Constant(c) => c,
            _ => 1.0,
        };
        let kind = match strategy {
            Strategy::WosStable => {
                let alpha = model.phi().stable_alpha().filter(|_| clock > 0.0 && model.modulation != Modulation::LogPeriodic { period: 0.0 });
                match (alpha, model.modulation) {
                    (Some(alpha), Modulation::Unit | Modulation::Constant(_)) => Kind::Wos {
                        alpha,
                        t_unit: stable_ball_exit_time_center(model.d, alpha),
                        clock,
                    },
                    _ => {
                        return Err(Error::InvalidModel(format!(
                            "walk-on-spheres needs an unmodulated stable model, got {}",
                            model.phi().label()
                        )))
                    }
                }
            }
            Strategy::Timestep => Kind::Timestep {
                inc: IncrementSampler::for_model(model, params.eps_cut)?,
                clock: StepClock::for_phi(model.phi())?,
                rate: clock,
            },
        };
        Ok(ExitSampler {
            model: model.clone(),
            strategy,
            params,
            kind,
        })
    }

    /// One exit from `geometry` started at `x`.
    pub fn sample<R: Rng + ?Sized>(&self, geometry: &Geometry, x: &[f64], rng: &mut R) -> Result<ExitSample> {
        if x.len() != self.model.d {
            return Err(Error::Domain(format!("start point has {} coordinates, model d = {}", x.len(), self.model.d)));
        }
        if !geometry.contains(x) {
            return Err(Error::Geometry(format!("start point {x:?} is not in the {}", geometry.name())));
        }
        let mut pos = x.to_vec();
        let mut time = 0.0;
        match &self.kind {
            Kind::Wos { alpha, t_unit, clock } => {
                let mut dir = vec![0.0; pos.len()];
                for steps in 1..=self.params.max_steps {
                    let rho = geometry.dist_to_complement(&pos);
                    let f = centered_exit_factor(*alpha, rng);
                    unit_direction(rng, &mut dir);
                    for (p, u) in pos.iter_mut().zip(&dir) {
                        *p += rho * f * u;
                    }
                    time += t_unit * rho.powf(*alpha) / clock;
                    if !geometry.contains(&pos) {
                        return Ok(ExitSample {
                            position: pos,
                            time,
                            exited_by_jump: true,
                            steps,
                        });
                    }
                }
            }
            Kind::Timestep { inc, clock, rate } => {
                for steps in 1..=self.params.max_steps {
                    let dist = geometry.dist_to_complement(&pos);
                    let h = self.params.c_h / (rate * clock.phi(dist.powi(-2)));
                    let jumped = inc.step(h, &mut pos, rng);
                    if !geometry.contains(&pos) {
                        // the exit happened somewhere inside the last step
                        time += 0.5 * h;
                        return Ok(ExitSample {
                            position: pos,
                            time,
                            exited_by_jump: jumped,
                            steps,
                        });
                    }
                    time += h;
                }
            }
        }
        Err(Error::Censored {
            steps: self.params.max_steps,
        })
    }
}

pub fn sample_exit<R: Rng + ?Sized>(
    model: &ProcessModel,
    geometry: &Geometry,
    x: &[f64],
    strategy: Strategy,
    params: SamplerParams,
    rng: &mut R,
) -> Result<ExitSample> {
    ExitSampler::new(model, strategy, params)?.sample(geometry, x, rng)
}

#[derive(Clone, Debug)]
pub struct ExitBatch {
    pub geometry: Geometry,
    pub start: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub params: SamplerParams,
    /// Completed samples with their stream index.
    pub samples: Vec<(usize, ExitSample)>,
    pub censored: usize,
}

impl ExitBatch {
    /// `n` exits; sample `i` uses stream `i` of `seed`, so the batch does not depend on the worker count.
    pub fn generate(sampler: &ExitSampler, geometry: &Geometry, x: &[f64], n: usize, seed: u64) -> Result<Self> {
        geometry.validate(sampler.model.d)?;
        let results: Vec<Result<ExitSample>> = (0..n)
            .into_par_iter()
            .map(|i| sampler.sample(geometry, x, &mut stream(seed, i as u64)))
            .collect();
        let mut samples = Vec::with_capacity(n);
        let mut censored = 0;
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(s) => samples.push((i, s)),
                Err(Error::Censored { .. }) => censored += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(ExitBatch {
            geometry: geometry.clone(),
            start: x.to_vec(),
            n,
            seed,
            strategy: sampler.strategy,
            params: sampler.params,
            samples,
            censored,
        })
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.n.max(1) as f64
    }

    pub fn jump_fraction(&self) -> f64 {
        self.samples.iter().filter(|(_, s)| s.exited_by_jump).count() as f64 / self.samples.len().max(1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|(_, s)| s.time).collect()
    }

    pub fn positions(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.iter().map(|(_, s)| s.position.as_slice())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.start.len();
        let mut cols = vec!["index".to_string()];
        cols.extend((1..=d).map(|k| format!("x{k}")));
        cols.extend(["time", "jump", "steps"].map(String::from));
        writeln!(w, "# columns: {}", cols.join(",")).map_err(|e| Error::io("<batch>", e))?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&cols)?;
        for (i, s) in &self.samples {
            let mut rec = vec![i.to_string()];
            rec.extend(s.position.iter().map(|v| format!("{v:e}")));
            rec.push(format!("{:e}", s.time));
            rec.push((s.exited_by_jump as u8).to_string());
            rec.push(s.steps.to_string());
            wr.write_record(&rec)?;
        }
        wr.flush().map_err(|e| Error::io("<batch>", e))?;
        Ok(())
    }

    /// Sidecar `key=value` metadata.
    pub fn write_meta<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e| Error::io("<batch meta>", e);
        writeln!(w, "seed={}", self.seed).map_err(io)?;
        writeln!(w, "n={}", self.n).map_err(io)?;
        writeln!(w, "strategy={}", self.strategy.name()).map_err(io)?;
        writeln!(w, "geometry={}", self.geometry.name()).map_err(io)?;
        writeln!(w, "start={:?}", self.start).map_err(io)?;
        writeln!(w, "c_h={}", self.params.c_h).map_err(io)?;
        writeln!(w, "eps_cut={}", self.params.eps_cut).map_err(io)?;
        writeln!(w, "max_steps={}", self.params.max_steps).map_err(io)?;
        writeln!(w, "censored={}", self.censored).map_err(io)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitTimeEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub censored_fraction: f64,
}

impl ExitTimeEstimate {
    /// More than 1% of paths censored.
    pub fn unreliable(&self) -> bool {
        self.censored_fraction > 0.01
    }
}

/// Mean exit time and its standard error over `n` paths.
pub fn expected_exit_time(sampler: &ExitSampler, geometry: &Geometry, x: &[f64], n: usize, seed: u64) -> Result<ExitTimeEstimate> {
    let b = ExitBatch::generate(sampler, geometry, x, n, seed)?;
    let (mean, stderr) = mean_stderr(&b.times());
    Ok(ExitTimeEstimate {
        mean,
        stderr,
        censored_fraction: b.censored_fraction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiModel;
    use crate::sim::samplers::sample_ball_exit_stable;
    use crate::sim::stats::ks_two_sample;

    fn cauchy(d: usize) -> ProcessModel {
        ProcessModel::new(d, PhiModel::stable(1.0))
    }

    #[test]
    fn wos_in_a_ball_is_one_exact_exit() {
        let m = cauchy(2);
        let g = Geometry::ball(2, 1.0);
        let s = ExitSampler::new(&m, Strategy::WosStable, SamplerParams::default()).unwrap();
        let b = ExitBatch::generate(&s, &g, &[0.0, 0.0], 20_000, 6).unwrap();
        assert!(b.samples.iter().all(|(_, s)| s.steps == 1 && !g.contains(&s.position)));
        let mut rng = stream(17, 0);
        let direct: Vec<f64> = (0..20_000)
            .map(|_| {
                let e = sample_ball_exit_stable(1.0, &[0.0, 0.0], 1.0, &[0.0, 0.0], &mut rng).unwrap();
                e.position.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect();
        let wos: Vec<f64> = b.positions().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
        assert!(ks_two_sample(&wos, &direct).1 > 0.01);
        // radial law P(R <= r) = 1 - (2/pi) asin(1/r)
        let exact = |r: f64| 1.0 - 2.0 / std::f64::consts::PI * (1.0 / r).asin();
        assert!(crate::sim::stats::ks_one_sample(&wos, exact).1 > 0.01);
    }

    #[test]
    fn batches_are_reproducible() {
        let m = cauchy(2);
        let g = Geometry::SlitBall { half_width: 0.0, radius: 1.0 };
        let s = ExitSampler::new(&m, Strategy::WosStable, SamplerParams::default()).unwrap();
        let a = ExitBatch::generate(&s, &g, &[-0.3, 0.1], 500, 9).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| ExitBatch::generate(&s, &g, &[-0.3, 0.1], 500, 9).unwrap());
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
        // exits never land on the slit itself
        assert!(a.positions().all(|p| !(p[0] >= 0.0 && p[1] == 0.0 && p[0] * p[0] + p[1] * p[1] < 1.0)));
    }

    #[test]
    fn timestep_matches_wos_in_law() {
        let m = cauchy(1);
        let g = Geometry::ball(1, 1.0);
        let p = SamplerParams { c_h: 0.01, ..SamplerParams::default() };
        let ts = ExitSampler::new(&m, Strategy::Timestep, p).unwrap();
        let wos = ExitSampler::new(&m, Strategy::WosStable, p).unwrap();
        let a = ExitBatch::generate(&ts, &g, &[0.0], 20_000, 1).unwrap();
        let b = ExitBatch::generate(&wos, &g, &[0.0], 20_000, 2).unwrap();
        let fa: Vec<f64> = a.positions().map(|p| p[0]).collect();
        let fb: Vec<f64> = b.positions().map(|p| p[0]).collect();
        assert!(ks_two_sample(&fa, &fb).1 > 0.05);
        assert!(a.jump_fraction() > 0.999);
        assert_eq!(a.censored, 0);
    }

    #[test]
    fn exit_time_shrinks_near_the_boundary() {
        let m = cauchy(1);
        let g = Geometry::ball(1, 1.0);
        let s = ExitSampler::new(&m, Strategy::Timestep, SamplerParams { c_h: 0.02, ..SamplerParams::default() }).unwrap();
        let c = expected_exit_time(&s, &g, &[0.0], 20_000, 3).unwrap();
        let e = expected_exit_time(&s, &g, &[0.9], 20_000, 4).unwrap();
        assert!((c.mean - 1.0).abs() < 3.0 * c.stderr + 0.01, "{c:?}");
        assert!(e.mean + 3.0 * (e.stderr.hypot(c.stderr)) < c.mean);
    }

    #[test]
    fn nested_balls_strong_markov() {
        // E tau_D = E tau_U + E E_{X_tau_U} tau_D with U = B(0, 1/2) inside D = B(0, 1)
        let m = cauchy(1);
        let (u, dball) = (Geometry::ball(1, 0.5), Geometry::ball(1, 1.0));
        let s = ExitSampler::new(&m, Strategy::WosStable, SamplerParams::default()).unwrap();
        let n = 40_000;
        let direct = expected_exit_time(&s, &dball, &[0.0], n, 31).unwrap();
        let first = ExitBatch::generate(&s, &u, &[0.0], n, 32).unwrap();
        let two: Vec<f64> = first
            .samples
            .iter()
            .map(|(_, e)| {
                let y = e.position[0];
                let rest = if y.abs() < 1.0 { crate::special::stable_ball_exit_time(1, 1.0, 1.0, y.abs()) } else { 0.0 };
                e.time + rest
            })
            .collect();
        let (m2, s2) = mean_stderr(&two);
        assert!((m2 - direct.mean).abs() < 3.0 * s2.hypot(direct.stderr));
    }

    #[test]
    fn boundary_shell_is_rarely_hit() {
        let m = cauchy(2);
        let g = Geometry::ball(2, 1.0);
        let s = ExitSampler::new(&m, Strategy::WosStable, SamplerParams::default()).unwrap();
        let n = 100_000;
        let b = ExitBatch::generate(&s, &g, &[0.2, 0.1], n, 8).unwrap();
        let shell = b.positions().filter(|p| (p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0) < 1e-6).count();
        assert!((shell as f64) / (n as f64) < 1e-3, "{shell}");
    }

    #[test]
    fn wos_rejects_non_stable_models() {
        let m = ProcessModel::new(1, PhiModel::mixture(&[(1.0, 1.0), (1.0, 0.8)]));
        assert!(ExitSampler::new(&m, Strategy::WosStable, SamplerParams::default()).is_err());
    }

    #[test]
    fn start_outside_is_an_error() {
        let s = ExitSampler::new(&cauchy(1), Strategy::WosStable, SamplerParams::default()).unwrap();
        assert!(matches!(s.sample(&Geometry::ball(1, 1.0), &[1.5], &mut stream(0, 0)), Err(Error::Geometry(_))));
    }
}
