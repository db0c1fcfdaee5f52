//! Adaptive Gauss–Kronrod quadrature.
//!
//! All integrals in the crate go through [`integrate_breaks`]: the range is
//! cut at caller-supplied kinks (breakpoints, `xi = lambda`, `r = 1/lambda`,
//! ...) and the worst sub-interval is bisected until the summed error
//! estimate drops below the requested tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances for adaptive quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadSpec {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadSpec {
            rel_tol,
            ..QuadSpec::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x)?;
        let f2 = f(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        return Err(Error::Domain(format!(
            "non-finite integrand on [{a:e}, {b:e}]"
        )));
    }
    Ok((value, err))
}

/// Integrate a fallible integrand over consecutive `points`, refining globally.
pub fn try_integrate_breaks<F>(mut f: F, points: &[f64], spec: &QuadSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if points.len() < 2 {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error) = kronrod21(&mut f, a, b)?;
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Segment { a, b, value, error });
    }
    while total_err > spec.abs_tol.max(spec.rel_tol * total.abs()) {
        if heap.len() >= spec.max_intervals {
            return Err(Error::Quadrature {
                achieved: total_err,
                target: spec.abs_tol.max(spec.rel_tol * total.abs()),
                context: format!("[{:e}, {:e}]", points[0], points[points.len() - 1]),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval below floating resolution; accept what we have
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod21(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed the drift of the running updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

pub fn integrate_breaks<F>(mut f: F, points: &[f64], spec: &QuadSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_breaks(|x| Ok(f(x)), points, spec)
}

pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> f64,
{
    integrate_breaks(f, &[a, b], spec)
}

/// `∫_a^∞ f(x) dx` through `x = a + t / (1 - t)`.
pub fn try_integrate_to_infinity<F>(mut f: F, a: f64, spec: &QuadSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_breaks(
        |t| {
            if t >= 1.0 {
                return Ok(0.0);
            }
            let s = 1.0 - t;
            let x = a + t / s;
            Ok(f(x)? / (s * s))
        },
        &[0.0, 0.5, 0.9, 1.0],
        spec,
    )
}

/// `∫_a^b f` over a range spanning many decades, integrated in `ln x`.
///
/// Extra `cuts` (in `x`) inside `(a, b)` become breakpoints.
pub fn try_integrate_log<F>(mut f: F, a: f64, b: f64, cuts: &[f64], spec: &QuadSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(a > 0.0 && b > a);
    let mut pts = vec![a.ln()];
    let mut inner: Vec<f64> = cuts
        .iter()
        .copied()
        .filter(|&c| c > a && c < b)
        .map(f64::ln)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b.ln());
    try_integrate_breaks(
        |s| {
            let x = s.exp();
            Ok(f(x)? * x)
        },
        &pts,
        spec,
    )
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let est = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadSpec::default()).unwrap();
        assert!((est.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let est = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, &QuadSpec::with_rel_tol(1e-9)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn infinite_range() {
        let est = try_integrate_to_infinity(|x| Ok((-x).exp()), 0.0, &QuadSpec::default()).unwrap();
        assert!((est.value - 1.0).abs() < 1e-12);
        let est = try_integrate_to_infinity(|x| Ok(1.0 / (1.0 + x * x)), 0.0, &QuadSpec::default())
            .unwrap();
        assert!((est.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn log_space_many_decades() {
        // ∫_{1e-8}^{1e8} x^{-1/2}/(1+x) dx → π as the range grows
        let est = try_integrate_log(
            |x| Ok(x.powf(-0.5) / (1.0 + x)),
            1e-12,
            1e12,
            &[1.0],
            &QuadSpec::default(),
        )
        .unwrap();
        assert!((est.value - std::f64::consts::PI).abs() < 1e-5);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadSpec {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x| (1.0 / x).sin(), 1e-3, 1.0, &spec).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn legendre_weights() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-13);
    }
}
