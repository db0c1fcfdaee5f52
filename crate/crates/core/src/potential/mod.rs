//! Poisson kernels, harmonic functions, the generator and the verification batteries.

mod bhp;
mod envelopes;
mod factorization;
mod generator;
mod harnack;
mod harmonic;
mod kernel;
mod target;

pub use crate::report::ExperimentReport;
pub use bhp::{bhp_experiment, BhpConfig};
pub use envelopes::{exit_time_profile_check, poisson_kernel_check, spread, ExitTimeConfig, PoissonKernelConfig};
pub use factorization::{factorization_experiment, FactorizationConfig};
pub use generator::{generator_apply, generator_envelope, GeneratorSpec};
pub use harmonic::{harmonic_eval, harmonic_from_batch, HarmonicEstimate};
pub use harnack::{harnack_experiment, HarnackConfig};
pub use kernel::{kernel_estimate, BinSlot, KernelBins, KernelEstimate};
pub use target::TargetSet;
