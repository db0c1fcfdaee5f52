//! Ladder-height exponent, renewal function and the half-line Green operator.

mod interval;
mod kappa;
mod renewal;

pub use interval::interval_exit_bound_check;
pub use kappa::{chi_kappa_profile, kappa_profile, LadderExponent, LadderSource, PSI_TABLE_RANGE};
pub use renewal::{
    gaver_stehfest, halfline_green_apply, ladder_for, post_widder, renewal_comparability_check, renewal_v,
    InversionMethod, RenewalFunction,
};
