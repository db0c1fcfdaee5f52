//! Small statistical helpers for Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean and standard error.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Asymptotic Kolmogorov survival function `P(K > x)`.
fn kolmogorov_sf(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sgn = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            sgn * (-2.0 * k * k * x * x).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    (d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d))
}

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value against `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut a = xs.to_vec();
    a.sort_by(f64::total_cmp);
    let n = a.len() as f64;
    let d = a
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    let sq = n.sqrt();
    (d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d))
}

/// Pearson chi-squared statistic and p-value for observed counts against expected probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, f64) {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (counts.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(dof).map(|c| c.cdf(stat)).unwrap_or(f64::NAN);
    (stat, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..2000).map(|i| i as f64 / 2000.0).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.2).collect();
        assert!(ks_two_sample(&a, &b).1 < 1e-6);
        let c: Vec<f64> = (0..1500).map(|i| (i as f64 + 0.5) / 1500.0).collect();
        assert!(ks_two_sample(&a, &c).1 > 0.5);
    }

    #[test]
    fn chi_square_of_perfect_fit() {
        let (s, p) = chi_square(&[25, 25, 25, 25], &[0.25; 4]);
        assert_eq!(s, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
    }
}
