//! Ladder exponent and renewal function of a one-dimensional projection,
//! and the interval exit-time bound they give.
use harnack_core::bernstein::PhiModel;
use harnack_core::ladder::{interval_exit_bound_check, ladder_for, renewal_v, InversionMethod};
use harnack_core::levy::ProcessModel;
use harnack_core::sim::SamplerParams;

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(1, PhiModel::stable(1.0));
    let ladder = ladder_for(&model);
    for lambda in [0.01, 1.0, 100.0] {
        // alpha = 1: kappa(lambda) = lambda^(1/2) exactly
        println!("kappa({lambda}) = {:.8}", ladder.kappa(lambda)?);
    }
    for r in [0.1, 1.0, 10.0] {
        let v = renewal_v(&ladder, r, InversionMethod::GaverStehfest)?;
        println!("V({r}) = {v:.6}  V / sqrt(r) = {:.6}", v / r.sqrt());
    }
    let rep = interval_exit_bound_check(&model, 1.0, &[0.1, 0.25, 0.5], 20_000, 7, SamplerParams::default())?;
    for c in &rep.checks {
        println!("{} {}: {}", c.status.name(), c.name, c.detail);
    }
    Ok(())
}
