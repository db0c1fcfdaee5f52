//! Monotone piecewise cubic Hermite interpolation (Fritsch–Carlson).

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl Pchip {
    /// `x` must be strictly increasing with at least two nodes.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidModel(format!(
                "interpolation needs >= 2 matching nodes, got {} and {}",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidModel("interpolation nodes not increasing".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite interpolation data".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = delta[0];
            slope[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    slope[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slope[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slope[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, slope })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.x, &self.y)
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.lo(), self.hi());
        if !(t >= lo && t <= hi) {
            return Err(Error::Extrapolation { lo, hi, at: t });
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= self.x.len() => self.x.len() - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Ok(h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_nodes_and_lines() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 2.0, 4.0, 5.0]).unwrap();
        assert!((p.eval(2.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((p.eval(3.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn extrapolation_is_an_error() {
        let p = Pchip::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(p.eval(1.5), Err(Error::Extrapolation { .. })));
    }

    proptest! {
        #[test]
        fn monotone_data_stays_monotone(steps in prop::collection::vec(0.0f64..3.0, 3..20),
                                        gaps in prop::collection::vec(0.1f64..2.0, 20)) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                x.push(x[i] + gaps[i]);
                y.push(y[i] + s);
            }
            let p = Pchip::new(x.clone(), y).unwrap();
            let n = 400;
            let mut prev = p.eval(x[0]).unwrap();
            for k in 1..=n {
                let t = x[0] + (x[x.len() - 1] - x[0]) * k as f64 / n as f64;
                let v = p.eval(t.min(p.hi())).unwrap();
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
