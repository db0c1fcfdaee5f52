//! Evaluate a few complete Bernstein functions and their scaling certificates.
//!
//! ```bash
//! cargo run --release --example phi_models
//! ```
use harnack_core::bernstein::{scaling_certificate, section6_build_f, CertGrid, Continuity, PhiModel};

fn main() -> harnack_core::Result<()> {
    let models = [
        PhiModel::stable(1.0),
        PhiModel::mixture(&[(1.0, 0.5), (1.0, 1.5)]),
        PhiModel::section_six(section6_build_f(4, 0.05, Continuity::default())?),
    ];
    for phi in &models {
        println!("{}", phi.label());
        for lambda in [1e-2, 1.0, 1e2] {
            println!("  phi({lambda:e}) = {:.6e}", phi.eval(lambda)?);
        }
        let cert = scaling_certificate(phi, 1.0, &CertGrid::default())?;
        println!(
            "  delta1 = {:.4}  delta2 = {:.4}  a1 = {:.3}  a2 = {:.3}  pass = {}",
            cert.delta1, cert.delta2, cert.a1, cert.a2, cert.pass
        );
    }
    Ok(())
}
