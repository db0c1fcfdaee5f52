//! Jump kernel j(r) of the subordinate process against the two-sided bound
//! phi(r^-2) / r^d, and the characteristic exponent psi.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::quad::QuadSpec;

fn main() -> harnack_core::Result<()> {
    let model = ProcessModel::new(2, PhiModel::mixture(&[(1.0, 0.5), (1.0, 1.5)]));
    println!("{:>10} {:>14} {:>10}", "r", "j(r)", "ratio");
    for r in [1e-2, 1e-1, 1.0, 1e1, 1e2] {
        let j = model.j_density(r)?;
        let bound = model.phi().eval(r.powi(-2))? / r.powi(2);
        println!("{r:>10.0e} {j:>14.6e} {:>10.4}", j / bound);
    }
    let spec = QuadSpec::default();
    for theta in [0.1, 1.0, 10.0] {
        // psi(theta) = phi(theta^2) for a subordinate Brownian motion
        let psi = model.psi_eval(theta, &spec)?;
        println!("psi({theta}) = {psi:.6e}  phi(theta^2) = {:.6e}", model.phi().eval(theta * theta)?);
    }
    Ok(())
}
