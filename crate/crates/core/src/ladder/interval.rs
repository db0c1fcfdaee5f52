use crate::error::{Error, Result};
use crate::ladder::renewal::{ladder_for, InversionMethod, RenewalFunction};
use crate::levy::{Modulation, ProcessModel};
use crate::report::{num, ExperimentReport, Status};
use crate::sim::{expected_exit_time, ExitSampler, Geometry, SamplerParams, Strategy};

/// Monte Carlo `E_x tau` of the first coordinate from `(0, r)` against `2 V(r) (V(x) ∧ V(r - x))`.
///
/// Stable unmodulated models use walk-on-spheres (unbiased for the mean), others time stepping.
pub fn interval_exit_bound_check(
    model: &ProcessModel,
    r: f64,
    x_grid: &[f64],
    n_samples: usize,
    seed: u64,
    params: SamplerParams,
) -> Result<ExperimentReport> {
    if !(r > 0.0) || x_grid.iter().any(|&x| !(x > 0.0 && x < r)) {
        return Err(Error::Domain(format!("interval check needs x in (0, {r})")));
    }
    let strategy = match (model.phi().stable_alpha(), model.modulation) {
        (Some(_), Modulation::Unit | Modulation::Constant(_)) => Strategy::WosStable,
        _ => Strategy::Timestep,
    };
    let sampler = ExitSampler::new(model, strategy, params)?;
    let v = RenewalFunction::tabulate(ladder_for(model), r * 1e-6, r, 10, InversionMethod::GaverStehfest)?;
    let geom = Geometry::Slab { lo: 0.0, hi: r };
    let mut rep = ExperimentReport::new(
        "interval_exit_bound",
        seed,
        &["x", "mean_exit_time", "stderr", "bound", "censored_fraction"],
    );
    rep.param("r", r).param("n", n_samples).param("strategy", strategy.name()).param("model", model.phi().label());
    let vr = v.eval(r);
    let mut ests = Vec::with_capacity(x_grid.len());
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (k, &x) in x_grid.iter().enumerate() {
        let mut start = vec![0.0; model.d];
        start[0] = x;
        let e = expected_exit_time(&sampler, &geom, &start, n_samples, crate::sim::rng::sub_seed(seed, k as u64))?;
        let bound = 2.0 * vr * v.eval(x).min(v.eval(r - x));
        ok &= e.mean <= bound + 3.0 * e.stderr;
        worst = worst.max(e.mean / bound);
        if e.unreliable() {
            rep.note(format!("{:.1}% censored paths at x = {x}", 100.0 * e.censored_fraction));
        }
        rep.row(vec![num(x), num(e.mean), num(e.stderr), num(bound), num(e.censored_fraction)]);
        ests.push(e);
    }
    rep.constant("max_ratio_to_bound", worst);
    rep.check("bound", Status::from_bool(ok), "E_x tau <= bound + 3 stderr on the grid");
    // symmetric pairs x, r - x
    let mut sym_ok = true;
    let mut pairs = 0;
    for i in 0..x_grid.len() {
        for j in i + 1..x_grid.len() {
            if ((x_grid[i] + x_grid[j]) / r - 1.0).abs() < 1e-9 {
                pairs += 1;
                let (a, b) = (ests[i], ests[j]);
                sym_ok &= (a.mean - b.mean).abs() <= 3.0 * a.stderr.hypot(b.stderr);
            }
        }
    }
    if pairs > 0 {
        rep.check("symmetry", Status::from_bool(sym_ok), format!("{pairs} mirrored pairs within 3 joint stderr"));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::PhiModel;

    #[test]
    fn cauchy_interval() {
        let m = ProcessModel::new(1, PhiModel::stable(1.0));
        let rep = interval_exit_bound_check(&m, 1.0, &[1e-3, 0.25, 0.5, 0.75], 20_000, 4, SamplerParams::default()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        let mid: f64 = rep.rows[2][1].parse().unwrap();
        let se: f64 = rep.rows[2][2].parse().unwrap();
        assert!((mid - 0.5).abs() <= 3.0 * se + 1e-12);
        let near: f64 = rep.rows[0][1].parse().unwrap();
        assert!(near < 0.05);
        let b: f64 = rep.rows[2][3].parse().unwrap();
        assert!((b - 2.0 * 1.1284 * 0.7979).abs() < 2e-3);
    }
}
