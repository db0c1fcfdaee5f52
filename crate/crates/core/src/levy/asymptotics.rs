use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::process::ProcessModel;
use crate::profile::RatioProfile;
use crate::quad::QuadSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsympKind {
    /// `mu(t) t / phi(1/t)`
    Mu,
    /// `mu(t, inf) / phi(1/t)`
    Tail,
    /// `j(r) r^d / phi(r^-2)`
    J,
    /// `j(r) / j(2r)`, `r <= 1`
    DoublingSmall,
    /// `j(r) / j(r + 1)`, `r > 1`
    DoublingLarge,
}

impl AsympKind {
    pub fn label(self) -> &'static str {
        match self {
            AsympKind::Mu => "mu",
            AsympKind::Tail => "tail",
            AsympKind::J => "j",
            AsympKind::DoublingSmall => "doubling_small",
            AsympKind::DoublingLarge => "doubling_large",
        }
    }
}

impl FromStr for AsympKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mu" => AsympKind::Mu,
            "tail" => AsympKind::Tail,
            "j" => AsympKind::J,
            "doubling_small" => AsympKind::DoublingSmall,
            "doubling_large" => AsympKind::DoublingLarge,
            _ => return Err(Error::Domain(format!("unknown ratio kind '{s}'"))),
        })
    }
}

pub fn asymp_ratio_profile(model: &ProcessModel, which: AsympKind, grid: &[f64]) -> Result<RatioProfile> {
    match which {
        AsympKind::DoublingSmall if grid.iter().any(|&r| r > 1.0) => {
            return Err(Error::Domain("doubling_small grid must lie in (0, 1]".into()))
        }
        AsympKind::DoublingLarge if grid.iter().any(|&r| r <= 1.0) => {
            return Err(Error::Domain("doubling_large grid must lie in (1, inf)".into()))
        }
        _ => {}
    }
    let phi = model.phi();
    let d = model.d as i32;
    let pairs = grid
        .par_iter()
        .map(|&x| {
            let ratio = match which {
                AsympKind::Mu => model.sub.mu_density(x)? * x / phi.eval(1.0 / x)?,
                AsympKind::Tail => model.sub.mu_tail(x)? / phi.eval(1.0 / x)?,
                AsympKind::J => model.j_density(x)? * x.powi(d) / phi.eval(x.powi(-2))?,
                AsympKind::DoublingSmall => model.j_density(x)? / model.j_density(2.0 * x)?,
                AsympKind::DoublingLarge => model.j_density(x)? / model.j_density(x + 1.0)?,
            };
            Ok((x, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::from_pairs(which.label(), pairs)
}

/// `J_X(r) / j(r)` over `grid`; lies in `[1/gamma, gamma]` by construction.
pub fn modulation_profile(model: &ProcessModel, grid: &[f64]) -> Result<RatioProfile> {
    let pairs = grid
        .par_iter()
        .map(|&r| Ok((r, model.jump_kernel(r)? / model.j_density(r)?)))
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::from_pairs("jx_over_j", pairs)
}

/// `Psi(theta) / phi(theta^2)` over `grid`.
pub fn psi_phi_profile(model: &ProcessModel, grid: &[f64], spec: &QuadSpec) -> Result<RatioProfile> {
    let pairs = grid
        .par_iter()
        .map(|&th| Ok((th, model.psi_eval(th, spec)? / model.phi().eval(th * th)?)))
        .collect::<Result<Vec<_>>>()?;
    RatioProfile::from_pairs("psi_over_phi", pairs)
}
