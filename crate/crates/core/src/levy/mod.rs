//! Levy densities of the subordinator, the subordinate jump kernel and its
//! characteristic exponent.

mod asymptotics;
mod process;
mod subordinator;

pub use asymptotics::{asymp_ratio_profile, modulation_profile, psi_phi_profile, AsympKind};
pub use process::{Modulation, ProcessModel, J_MIN_RADIUS, J_TABLE_RANGE};
pub use subordinator::{LogTable, SubordinatorModel};
