//! Special functions not covered by statrs.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::quad::gauss_legendre;

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)
}

/// Bessel `J0`, rational approximations (absolute error ~1e-8).
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let a1 = 57_568_490_574.0
            + y * (-13_362_590_354.0
                + y * (651_619_640.7 + y * (-11_214_424.18 + y * (77_392.330_17 + y * (-184.905_245_6)))));
        let a2 = 57_568_490_411.0
            + y * (1_029_532_985.0 + y * (9_494_680.718 + y * (59_272.648_53 + y * (267.853_271_2 + y))));
        a1 / a2
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785_398_164;
        let a1 = 1.0
            + y * (-0.109_862_862_7e-2
                + y * (0.273_451_040_7e-4 + y * (-0.207_337_063_9e-5 + y * 0.209_388_721_1e-6)));
        let a2 = -0.156_249_999_5e-1
            + y * (0.143_048_876_5e-3
                + y * (-0.691_114_765_1e-5 + y * (0.762_109_516_1e-6 - y * 0.934_935_152e-7)));
        (0.636_619_772 / ax).sqrt() * (xx.cos() * a1 - z * xx.sin() * a2)
    }
}

/// `E[cos(x U_1)]` for `U` uniform on the unit sphere of `R^d`.
///
/// This is the radial Fourier kernel: `∫_{S^{d-1}} cos(x u_1) du / |S^{d-1}|`.
pub fn spherical_mean_cos(d: usize, x: f64) -> f64 {
    match d {
        1 => x.cos(),
        2 => bessel_j0(x),
        3 => {
            if x.abs() < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
        _ => {
            // U_1 = sin(u) with density proportional to cos^{d-2}(u) on (-pi/2, pi/2)
            let n = 64 + (x.abs() * 2.0) as usize;
            let (t, w) = gauss_legendre(n.min(4000));
            let h = std::f64::consts::FRAC_PI_2;
            let k = d as i32 - 2;
            let norm = (ln_gamma(0.5) + ln_gamma((d as f64 - 1.0) / 2.0) - ln_gamma(d as f64 / 2.0)).exp();
            t.iter()
                .zip(&w)
                .map(|(t, w)| {
                    let u = h * t;
                    w * h * (x * u.sin()).cos() * u.cos().powi(k)
                })
                .sum::<f64>()
                / norm
        }
    }
}

/// Expected exit time of the isotropic `alpha`-stable process (symbol `|xi|^alpha`)
/// from the unit ball, started at the center.
pub fn stable_ball_exit_time_center(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    (ln_gamma(d / 2.0) - alpha * 2f64.ln() - ln_gamma(1.0 + alpha / 2.0) - ln_gamma((d + alpha) / 2.0))
        .exp()
}

/// Expected exit time of the same process from `B(0, rho)` started at distance `s` from the center.
pub fn stable_ball_exit_time(d: usize, alpha: f64, rho: f64, s: f64) -> f64 {
    if s >= rho {
        return 0.0;
    }
    stable_ball_exit_time_center(d, alpha) * (rho * rho - s * s).powf(alpha / 2.0)
}

/// Constant `c` in the isotropic stable jump density `c |y|^{-d-alpha}` for symbol `|xi|^alpha`.
pub fn stable_jump_constant(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((d + alpha) / 2.0)
        / (PI.powf(d / 2.0) * gamma(1.0 - alpha / 2.0))
}

/// Poisson kernel of `B(0, rho)` for the isotropic `alpha`-stable process.
pub fn stable_ball_kernel(d: usize, alpha: f64, rho: f64, x: &[f64], y: &[f64]) -> f64 {
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let y2: f64 = y.iter().map(|v| v * v).sum();
    let r2 = rho * rho;
    if x2 >= r2 || y2 <= r2 {
        return 0.0;
    }
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let df = d as f64;
    let c = gamma(df / 2.0) * PI.powf(-df / 2.0 - 1.0) * (PI * alpha / 2.0).sin();
    c * ((r2 - x2) / (y2 - r2)).powf(alpha / 2.0) * dist2.powf(-df / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_reference_values() {
        // values from Abramowitz & Stegun table 9.1
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-8);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-8);
        assert!((bessel_j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-8);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-8);
    }

    #[test]
    fn spherical_mean_matches_closed_forms() {
        for &x in &[0.3, 1.0, 4.0, 11.0] {
            // d=3 via the generic quadrature branch written out for d=3
            let nu: f64 = 0.0;
            let (t, w) = gauss_legendre(200);
            let q: f64 = t
                .iter()
                .zip(&w)
                .map(|(t, w)| w * (x * t).cos() * (1.0 - t * t).powf(nu))
                .sum::<f64>()
                / 2.0;
            assert!((q - spherical_mean_cos(3, x)).abs() < 1e-10);
            // d=5: Γ(5/2)(2/x)^{3/2} J_{3/2}(x) = 3(sin x - x cos x)/x^3
            let exact = 3.0 * (x.sin() - x * x.cos()) / x.powi(3);
            assert!((spherical_mean_cos(5, x) - exact).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn getoor_cauchy_line() {
        assert!((stable_ball_exit_time_center(1, 1.0) - 1.0).abs() < 1e-12);
        // Brownian limit: E τ = (ρ² - s²)/(2d) for generator Δ... symbol |ξ|^2 gives E τ = (1-s²)/(2d)
        assert!((stable_ball_exit_time_center(3, 2.0) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_line_jump_constant() {
        assert!((stable_jump_constant(1, 1.0) - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn ball_kernel_line_value() {
        let k = stable_ball_kernel(1, 1.0, 1.0, &[0.0], &[2f64.sqrt()]);
        assert!((k - 1.0 / (PI * 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
