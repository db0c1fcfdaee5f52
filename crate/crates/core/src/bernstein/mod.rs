//! Complete Bernstein functions: evaluation, scaling certificates, the
//! oscillating-index construction and the scaling integrals.

mod certificate;
mod integrals;
mod model;
pub mod section6;

pub use certificate::{global_bernstein_check, scaling_certificate, CertGrid, ScalingCertificate};
pub use integrals::{scaling_integral_profile, scaling_integral_ratios};
pub use model::{MixtureComponent, PhiModel, SectionSixPhi, TabulatedPhi};
pub use section6::{
    g_bounds, mu_from_stieltjes, mu_tail_from_stieltjes, section6_build_f, section6_phi, stieltjes_g,
    Continuity, Piece, PiecewiseSchedule, SectionSixForm,
};
