//! Compare u(x) / E_x tau for harmonic u vanishing near a boundary point,
//! across several domains.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::potential::{factorization_experiment, FactorizationConfig};
use harnack_core::sim::{ExitSampler, SamplerParams, Strategy};

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(2, PhiModel::stable(1.0));
    let sampler = ExitSampler::new(&model, Strategy::WosStable, SamplerParams::default())?;
    let cfg = FactorizationConfig { n: 5_000, ..Default::default() };
    let rep = factorization_experiment(&sampler, &cfg, 5)?;
    for (k, v) in &rep.constants {
        println!("{k} = {v:.4}");
    }
    for c in &rep.checks {
        println!("{} {}", c.status.name(), c.name);
    }
    Ok(())
}
