//! Random variates: positive stable laws, directions, and the exact stable ball exit.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::sim::exit::ExitSample;
use crate::special::stable_ball_exit_time_center;

/// Positive stable variate with `E exp(-lambda S) = exp(-lambda^a)`, `0 < a <= 1` (Kanter's representation).
pub fn positive_stable<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a >= 1.0 {
        return 1.0;
    }
    let u: f64 = rng.random::<f64>() * PI;
    let e: f64 = Exp1.sample(rng);
    let s = (a * u).sin() / u.sin().powf(1.0 / a) * (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a);
    s.max(f64::MIN_POSITIVE)
}

/// Increment over time `t` of the subordinator with Laplace exponent `lambda^{alpha_sub}`.
pub fn sample_stable_subordinator_increment<R: Rng + ?Sized>(alpha_sub: f64, t: f64, rng: &mut R) -> Result<f64> {
    if !(alpha_sub > 0.0 && alpha_sub < 1.0) || !(t > 0.0) {
        return Err(Error::Domain(format!("stable subordinator with index {alpha_sub}, t = {t}")));
    }
    Ok(t.powf(1.0 / alpha_sub) * positive_stable(alpha_sub, rng))
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform point on the unit sphere of `R^d`, written into `out`.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            *v = gaussian(rng);
            n2 += *v * *v;
        }
        if n2 > 1e-20 {
            let s = n2.sqrt();
            out.iter_mut().for_each(|v| *v /= s);
            return;
        }
    }
}

/// Distance factor `R / rho` of the exit from the center of `B(0, rho)`: `s^{-1/2}` with `s ~ Beta(alpha/2, 1 - alpha/2)`.
pub fn centered_exit_factor<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let a = alpha / 2.0;
    let s: f64 = rand_distr::Beta::new(a, 1.0 - a).unwrap().sample(rng);
    1.0 / s.max(f64::MIN_POSITIVE).sqrt()
}

/// Cap on the number of inscribed-ball exits for a non-central start.
pub const BALL_EXIT_MAX_ITER: usize = 10_000;

/// Exact exit position of the isotropic `alpha`-stable process from `B(center, radius)` started at `x`.
///
/// From the center this is one draw of the closed-form exit law; otherwise centered
/// exits from inscribed balls are chained. `time` holds the summed expected exit times.
pub fn sample_ball_exit_stable<R: Rng + ?Sized>(
    alpha: f64,
    center: &[f64],
    radius: f64,
    x: &[f64],
    rng: &mut R,
) -> Result<ExitSample> {
    let d = center.len();
    if !(alpha > 0.0 && alpha < 2.0) || x.len() != d {
        return Err(Error::Domain(format!("ball exit with alpha = {alpha}")));
    }
    let t_unit = stable_ball_exit_time_center(d, alpha);
    let mut pos = x.to_vec();
    let mut dir = vec![0.0; d];
    let mut time = 0.0;
    for steps in 1..=BALL_EXIT_MAX_ITER {
        let dc = pos.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let rho = radius - dc;
        if !(rho > 0.0) {
            return Err(Error::Domain("start point is not inside the ball".into()));
        }
        let f = centered_exit_factor(alpha, rng);
        unit_direction(rng, &mut dir);
        for (p, u) in pos.iter_mut().zip(&dir) {
            *p += rho * f * u;
        }
        time += t_unit * rho.powf(alpha);
        let dn = pos.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if dn >= radius {
            return Ok(ExitSample {
                position: pos,
                time,
                exited_by_jump: true,
                steps,
            });
        }
    }
    Err(Error::Sampler(format!(
        "ball exit needed more than {BALL_EXIT_MAX_ITER} inscribed balls"
    )))
}
