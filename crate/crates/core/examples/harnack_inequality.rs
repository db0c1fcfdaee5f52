//! Scale-invariant Harnack ratios sup u / inf u over B(0, a r) for functions
//! harmonic in B(0, r), with exit-position targets as boundary data.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::potential::{harnack_experiment, HarnackConfig};
use harnack_core::sim::{ExitSampler, SamplerParams, Strategy};

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(2, PhiModel::mixture(&[(1.0, 0.5), (1.0, 1.5)]));
    let sampler = ExitSampler::new(&model, Strategy::Timestep, SamplerParams::default())?;
    let cfg = HarnackConfig { radii: vec![0.5], n: 16_000, ..Default::default() };
    let rep = harnack_experiment(&sampler, &cfg, 11)?;
    for (k, v) in &rep.constants {
        println!("{k} = {v:.4}");
    }
    for c in &rep.checks {
        println!("{} {}: {}", c.status.name(), c.name, c.detail);
    }
    println!("status: {}", rep.status().name());
    Ok(())
}
