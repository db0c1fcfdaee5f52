//! Exit positions and times from a ball, by walk-on-spheres and by time stepping.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::sim::{expected_exit_time, ExitBatch, ExitSampler, Geometry, SamplerParams, Strategy};

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(2, PhiModel::stable(1.0));
    let ball = Geometry::ball(2, 1.0);
    let x = [0.3, 0.0];

    let wos = ExitSampler::new(&model, Strategy::WosStable, SamplerParams::default())?;
    let batch = ExitBatch::generate(&wos, &ball, &x, 10_000, 1)?;
    let far = batch.positions().filter(|y| y.iter().map(|v| v * v).sum::<f64>() > 4.0).count();
    println!("wos: {} paths, P(|Y| > 2) = {:.4}", batch.times().len(), far as f64 / 1e4);

    let step = ExitSampler::new(&model, Strategy::Timestep, SamplerParams { c_h: 0.02, ..Default::default() })?;
    for s in [&wos, &step] {
        let e = expected_exit_time(s, &ball, &x, 20_000, 2)?;
        println!("{:>10}: E tau = {:.4} +- {:.4} (censored {:.2e})", s.strategy.name(), e.mean, e.stderr, e.censored_fraction);
    }
    Ok(())
}
