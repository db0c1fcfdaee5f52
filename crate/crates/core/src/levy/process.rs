use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::bernstein::PhiModel;
use crate::error::{Error, Result};
use crate::levy::subordinator::{LogTable, SubordinatorModel};
use crate::quad::{try_integrate_breaks, try_integrate_log, QuadSpec};
use crate::special::{sphere_area, spherical_mean_cos};

/// Smallest radius at which the subordination integral is evaluated.
pub const J_MIN_RADIUS: f64 = 1e-8;

/// Radial factor `m` with `1/gamma <= m <= gamma`, so `J_X(y) = j(|y|) m(|y|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Modulation {
    Unit,
    Constant(f64),
    /// `m(r) = gamma^{sin(2 pi ln(r) / period)}`.
    LogPeriodic { period: f64 },
}

#[derive(Clone, Debug)]
pub struct ProcessModel {
    pub d: usize,
    pub sub: SubordinatorModel,
    pub gamma: f64,
    pub modulation: Modulation,
    pub quad: QuadSpec,
    j_table: Arc<OnceLock<Result<LogTable>>>,
}

impl PartialEq for ProcessModel {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.sub == o.sub && self.gamma == o.gamma && self.modulation == o.modulation
    }
}

/// Radial range of the cached `j` table.
pub const J_TABLE_RANGE: (f64, f64) = (1e-7, 1e7);

impl ProcessModel {
    pub fn new(d: usize, phi: PhiModel) -> Self {
        ProcessModel {
            d,
            sub: SubordinatorModel::new(phi),
            gamma: 1.0,
            modulation: Modulation::Unit,
            quad: QuadSpec::with_rel_tol(1e-8),
            j_table: Arc::new(OnceLock::new()),
        }
    }

    pub fn with_modulation(mut self, gamma: f64, modulation: Modulation) -> Self {
        self.gamma = gamma;
        self.modulation = modulation;
        self
    }

    pub fn phi(&self) -> &PhiModel {
        &self.sub.phi
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidModel("dimension must be >= 1".into()));
        }
        if !(self.gamma >= 1.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidModel(format!("gamma = {} must be >= 1", self.gamma)));
        }
        match self.modulation {
            Modulation::Constant(c) if !(c >= 1.0 / self.gamma - 1e-12 && c <= self.gamma + 1e-12) => Err(
                Error::InvalidModel(format!("modulation {c} outside [1/gamma, gamma]")),
            ),
            Modulation::LogPeriodic { period } if !(period > 0.0) => {
                Err(Error::InvalidModel("modulation period must be positive".into()))
            }
            _ => self.sub.phi.validate(),
        }
    }

    pub fn m(&self, r: f64) -> f64 {
        match self.modulation {
            Modulation::Unit => 1.0,
            Modulation::Constant(c) => c,
            Modulation::LogPeriodic { period } => self.gamma.powf((2.0 * PI * r.ln() / period).sin()),
        }
    }

    /// `j(r) = ∫ (4 pi t)^{-d/2} e^{-r^2/(4t)} mu(t) dt`, via `t = r^2/u` split at `u = 1`.
    pub fn j_density(&self, r: f64) -> Result<f64> {
        if !(r >= J_MIN_RADIUS) || !r.is_finite() {
            return Err(Error::Domain(format!(
                "j at r = {r:e}: below the {J_MIN_RADIUS:e} guard"
            )));
        }
        let d = self.d as f64;
        let r2 = r * r;
        let h = |u: f64| -> Result<f64> {
            let t = r2 / u;
            Ok((u / (4.0 * PI * r2)).powf(d / 2.0) * (-u / 4.0).exp() * self.sub.mu_fast(t)? * r2 / (u * u))
        };
        let est = try_integrate_log(h, 1e-24, 400.0, &[1.0, 4.0 * d.max(2.0)], &self.quad)?;
        Ok(est.value)
    }

    /// `J_X` at radius `r`.
    pub fn jump_kernel(&self, r: f64) -> Result<f64> {
        Ok(self.j_density(r)? * self.m(r))
    }

    /// Cached table of `j` over [`J_TABLE_RANGE`].
    pub fn j_table(&self) -> Result<&LogTable> {
        let built = self.j_table.get_or_init(|| {
            let grid = crate::profile::log_grid(J_TABLE_RANGE.0, J_TABLE_RANGE.1, 20);
            let vals = grid.par_iter().map(|&r| self.j_density(r)).collect::<Result<Vec<_>>>()?;
            LogTable::new(&grid, &vals)
        });
        match built {
            Ok(t) => Ok(t),
            Err(e) => Err(Error::InvalidModel(format!("j tabulation failed: {e}"))),
        }
    }

    /// `J_X(r)` from the table, power-law continued outside it.
    pub fn jump_kernel_fast(&self, r: f64) -> Result<f64> {
        Ok(self.j_table()?.eval(r) * self.m(r))
    }

    /// Jump mass of the shell `a <= |y| < b` (`b` may be infinite), under `J_X` or, with
    /// `modulated = false`, under `j`.
    pub fn shell_mass(&self, a: f64, b: f64, modulated: bool) -> Result<f64> {
        if !(a > 0.0 && b > a) {
            return Err(Error::Domain(format!("shell [{a:e}, {b:e})")));
        }
        let table = self.j_table()?;
        let p = self.d as i32 - 1;
        let weight = |rho: f64| if modulated { self.m(rho) } else { 1.0 };
        let f = |rho: f64| table.eval(rho) * weight(rho) * rho.powi(p);
        let upper = if b.is_finite() { b } else { J_TABLE_RANGE.1.max(10.0 * a) };
        let mut total = try_integrate_log(|rho| Ok(f(rho)), a, upper, &[], &self.quad)?.value;
        if !b.is_finite() {
            let s = (table.eval(upper) / table.eval(upper / 1.01)).ln() / 1.01f64.ln() + p as f64;
            if !(s < -1.0) {
                return Err(Error::Domain("jump kernel tail not integrable".into()));
            }
            total += -f(upper) * upper / (s + 1.0);
        }
        Ok(total * sphere_area(self.d))
    }

    /// `Psi(theta) = ∫ (1 - cos(theta y_1)) J_X(y) dy`, reduced to a radial integral.
    pub fn psi_eval(&self, theta: f64, spec: &QuadSpec) -> Result<f64> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::Domain(format!("Psi at theta = {theta}")));
        }
        if theta == 0.0 {
            return Ok(0.0);
        }
        let d = self.d;
        let df = d as f64;
        let table = self.j_table()?;
        let jr = |rho: f64| table.eval(rho) * self.m(rho) * rho.powi(d as i32 - 1);
        let one_minus = |x: f64| {
            if x < 1e-3 {
                let x2 = x * x;
                x2 / (2.0 * df) - x2 * x2 / (8.0 * df * (df + 2.0))
            } else {
                1.0 - spherical_mean_cos(d, x)
            }
        };
        // first asymptotic zero of the radial kernel beyond x = 1
        let phase = (df - 1.0) / 4.0 + 0.5;
        let first = ((1.0 - phase * PI) / PI).ceil().max(0.0) + phase;
        let x0 = first * PI;
        let rho0 = x0 / theta;
        let lo = rho0 * 1e-12;
        let near = try_integrate_log(|rho| Ok(jr(rho) * one_minus(theta * rho)), lo, rho0, &[1.0 / theta], spec)?;
        // below lo the kernel is x^2/(2d) times a power of rho
        let slope = |a: f64, b: f64| (table.eval(b) / table.eval(a)).ln() / (b / a).ln() + df - 1.0;
        let s = slope(lo, lo * 1.01);
        let head = theta * theta / (2.0 * df) * jr(lo) * lo.powi(3) / (s + 3.0);

        // ∫_{rho0}^∞ J rho^{d-1}: non-oscillatory, power tail past the table
        let (_, tab_hi) = J_TABLE_RANGE;
        let upper = tab_hi.max(rho0 * 10.0);
        let smooth = try_integrate_log(|rho| Ok(jr(rho)), rho0, upper, &[], spec)?;
        let st = slope(upper / 1.01, upper);
        if !(st < -1.0) {
            return Err(Error::Domain("jump kernel tail not integrable".into()));
        }
        let smooth_tail = -jr(upper) * upper / (st + 1.0);

        // ∫_{rho0}^∞ J rho^{d-1} Lambda_d(theta rho): alternating half-period chunks
        let n_chunks = 40;
        let mut partial = Vec::with_capacity(n_chunks);
        let mut acc = 0.0;
        for k in 0..n_chunks {
            let a = (first + k as f64) * PI / theta;
            let b = a + PI / theta;
            let c = try_integrate_breaks(|rho| Ok(jr(rho) * spherical_mean_cos(d, theta * rho)), &[a, b], spec)?;
            acc += c.value;
            partial.push(acc);
        }
        let (osc, osc_err) = accelerate_alternating(&partial);
        let total = head + near.value + smooth.value + smooth_tail - osc;
        let scale = sphere_area(d);
        let tol = spec.rel_tol.max(1e-6) * total.abs();
        if osc_err > 100.0 * tol {
            return Err(Error::Quadrature {
                achieved: osc_err,
                target: tol,
                context: format!("oscillatory tail of Psi at theta = {theta:e}"),
            });
        }
        Ok(total * scale)
    }
}

/// Repeated averaging of the last partial sums of an alternating series.
/// Returns the limit estimate and the change of the final averaging step.
fn accelerate_alternating(partial: &[f64]) -> (f64, f64) {
    let m = partial.len().min(16);
    let mut row: Vec<f64> = partial[partial.len() - m..].to_vec();
    let mut last_change = f64::INFINITY;
    while row.len() > 1 {
        let next: Vec<f64> = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        last_change = (next[next.len() - 1] - row[row.len() - 1]).abs();
        row = next;
    }
    (row[0], last_change)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::stable_jump_constant;

    #[test]
    fn cauchy_line_density() {
        let p = ProcessModel::new(1, PhiModel::stable(1.0));
        for &r in &[1e-3, 0.37, 1.0, 2.0, 50.0, 100.0] {
            let j = p.j_density(r).unwrap();
            assert!((j * PI * r * r - 1.0).abs() < 1e-6, "{r}: {j}");
        }
        assert!((p.j_density(1.0).unwrap() - 0.318_31).abs() < 1e-5);
        assert!((p.j_density(2.0).unwrap() - 0.079_577).abs() < 1e-6);
    }

    #[test]
    fn stable_density_closed_form_all_dims() {
        for d in 1..=3 {
            for &alpha in &[0.6, 1.0, 1.5] {
                let p = ProcessModel::new(d, PhiModel::stable(alpha));
                let c = stable_jump_constant(d, alpha);
                for &r in &[1e-3, 0.1, 3.0, 100.0] {
                    let j = p.j_density(r).unwrap();
                    let exact = c * r.powf(-(d as f64) - alpha);
                    assert!((j / exact - 1.0).abs() < 1e-6, "d={d} alpha={alpha} r={r}");
                }
            }
        }
    }

    #[test]
    fn tiny_radius_is_guarded() {
        let p = ProcessModel::new(1, PhiModel::stable(1.0));
        assert!(matches!(p.j_density(1e-9), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_of_cauchy_line() {
        let p = ProcessModel::new(1, PhiModel::stable(1.0));
        let spec = QuadSpec::with_rel_tol(1e-8);
        assert_eq!(p.psi_eval(0.0, &spec).unwrap(), 0.0);
        for &th in &[0.01, 1.0, 30.0] {
            let v = p.psi_eval(th, &spec).unwrap();
            assert!((v / th - 1.0).abs() < 1e-3, "{th}: {v}");
        }
    }

    #[test]
    fn psi_round_trip_in_higher_dimension() {
        for d in [2, 3, 4] {
            let p = ProcessModel::new(d, PhiModel::stable(1.2));
            let spec = QuadSpec::with_rel_tol(1e-8);
            for &th in &[0.5, 4.0] {
                let v = p.psi_eval(th, &spec).unwrap();
                let phi = th.powf(1.2);
                assert!((v / phi - 1.0).abs() < 1e-2, "d={d} {th}: {v} vs {phi}");
            }
        }
    }

    #[test]
    fn constant_modulation_scales_psi() {
        let p = ProcessModel::new(2, PhiModel::stable(1.0)).with_modulation(1.2, Modulation::Constant(1.2));
        let spec = QuadSpec::with_rel_tol(1e-8);
        for &th in &[0.3, 2.0] {
            let ratio = p.psi_eval(th, &spec).unwrap() / th;
            assert!(ratio >= 1.0 / 1.2 - 1e-3 && ratio <= 1.2 + 1e-3);
            assert!((ratio - 1.2).abs() < 1e-3);
        }
    }

    #[test]
    fn shell_mass_of_stable_kernel() {
        // d = 2, alpha = 1: mass of |y| >= a is 2 pi c / a
        let p = ProcessModel::new(2, PhiModel::stable(1.0));
        let c = stable_jump_constant(2, 1.0);
        for &a in &[0.1, 1.0, 8.0] {
            let m = p.shell_mass(a, f64::INFINITY, true).unwrap();
            assert!((m / (2.0 * PI * c / a) - 1.0).abs() < 1e-6, "{a}: {m}");
        }
        let m = p.shell_mass(0.5, 1.0, false).unwrap();
        assert!((m / (2.0 * PI * c) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn modulation_bounds_are_validated() {
        let p = ProcessModel::new(2, PhiModel::stable(1.0)).with_modulation(1.2, Modulation::Constant(1.5));
        assert!(p.validate().is_err());
    }
}
