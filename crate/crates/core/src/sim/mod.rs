//! Seeded Monte Carlo: increments, exact stable ball exits and exit sampling from domains.

mod exit;
mod geometry;
mod increments;
pub mod rng;
mod samplers;
pub mod stats;

pub use exit::{expected_exit_time, sample_exit, ExitBatch, ExitSample, ExitSampler, ExitTimeEstimate, SamplerParams, Strategy};
pub use geometry::Geometry;
pub use increments::{
    empirical_cf, sample_jump_process_increment, sample_sbm_increment, IncrementSampler, StepClock, TailInverseHandle,
};
pub use samplers::{
    centered_exit_factor, positive_stable, sample_ball_exit_stable, sample_stable_subordinator_increment,
    unit_direction, BALL_EXIT_MAX_ITER,
};
