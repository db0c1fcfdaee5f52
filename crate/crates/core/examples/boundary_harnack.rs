//! Boundary Harnack ratios for a family of domains sharing a boundary point at the origin.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::potential::{bhp_experiment, BhpConfig};
use harnack_core::sim::{ExitSampler, SamplerParams, Strategy};

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(2, PhiModel::stable(1.0));
    let sampler = ExitSampler::new(&model, Strategy::WosStable, SamplerParams::default())?;
    let cfg = BhpConfig { radii: vec![0.25, 0.5], n: 10_000, ..BhpConfig::default() };
    let rep = bhp_experiment(&sampler, &cfg, 9)?;
    for (k, v) in rep.constants.iter().filter(|(k, _)| k.starts_with("cross")) {
        println!("{k} = {v:.4}");
    }
    println!("status: {}", rep.status().name());
    Ok(())
}
