//! Histogram estimate of the Poisson kernel of the unit ball for the Cauchy process,
//! compared bin by bin with the closed form.
use harnack_core::bernstein::PhiModel;
use harnack_core::levy::ProcessModel;
use harnack_core::potential::{kernel_estimate, KernelBins};
use harnack_core::sim::{ExitSampler, Geometry, SamplerParams, Strategy};
use harnack_core::special::stable_ball_kernel;

fn main() -> harnack_core::Result<()> {
    let d = 2;
    let model = ProcessModel::new(d, PhiModel::stable(1.0));
    let sampler = ExitSampler::new(&model, Strategy::WosStable, SamplerParams::default())?;
    let ball = Geometry::ball(d, 1.0);
    let x = [0.0, 0.0];
    let bins = KernelBins::for_geometry(&ball, d, 8, 1)?;
    let est = kernel_estimate(&sampler, &ball, &x, &bins, 200_000, 3)?;
    println!("{:>8} {:>12} {:>12} {:>8}", "|y|", "estimate", "exact", "rel.err");
    for i in 0..est.density.len() {
        // radial kernel: average the exact density over the shell
        let (a, b, _, _) = bins.bounds(i, d);
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..400 {
            let r = a + (b - a) * (k as f64 + 0.5) / 400.0;
            num += r * stable_ball_kernel(d, 1.0, 1.0, &x, &[r, 0.0]);
            den += r;
        }
        let exact = num / den;
        println!("{:>8.3} {:>12.4e} {:>12.4e} {:>8.3}", bins.bin_radius(i, d), est.density[i], exact, est.rel_error(i));
    }
    Ok(())
}
