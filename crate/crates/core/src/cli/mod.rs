//! Experiment runner: configuration, dispatch, persisted reports and the seed-stability meta-check.

mod config;
mod run;

pub use config::{parse_config, CheckSpec, ExperimentKind, GridSpec, ModelSpec, ModulationKind, PhiKind, RunConfig, SamplerSpec};
pub use run::{execute, run, seed_stability, RunOutcome, RunStatus};

/// Constant-name prefixes compared by the seed-stability meta-check; empty means all constants.
pub fn stability_keys(kind: ExperimentKind) -> Vec<String> {
    let keys: &[&str] = match kind {
        ExperimentKind::Bhp => &["ratio@", "cross@"],
        ExperimentKind::Harnack => &["ratio@", "max_ratio"],
        ExperimentKind::Factorization => &["C@"],
        ExperimentKind::PoissonKernel => &["upper@", "lower@", "comparability@", "near@"],
        ExperimentKind::ExitTime => &["lower@", "upper@", "subdomain@"],
        _ => &[],
    };
    keys.iter().map(|k| k.to_string()).collect()
}
