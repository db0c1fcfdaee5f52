//! Complete Bernstein functions, subordinate jump processes and Monte Carlo
//! verification of boundary Harnack estimates.

pub mod bernstein;
pub mod cli;
pub mod error;
pub mod interp;
pub mod ladder;
pub mod levy;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod report;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
