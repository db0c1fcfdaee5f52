//! Target sets `A` in the complement of a domain, given by membership predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSet {
    All,
    /// `y_axis >= at` (or `< at` when `positive` is false).
    HalfSpace {
        axis: usize,
        positive: bool,
        #[serde(default)]
        at: f64,
    },
    /// `|y - center| >= radius`.
    OutsideBall { center: Vec<f64>, radius: f64 },
    /// `|y - center| < radius`.
    InsideBall { center: Vec<f64>, radius: f64 },
    And { parts: Vec<TargetSet> },
}

impl TargetSet {
    pub fn contains(&self, y: &[f64]) -> bool {
        match self {
            TargetSet::All => true,
            TargetSet::HalfSpace { axis, positive, at } => (y[*axis] >= *at) == *positive,
            TargetSet::OutsideBall { center, radius } => dist(y, center) >= *radius,
            TargetSet::InsideBall { center, radius } => dist(y, center) < *radius,
            TargetSet::And { parts } => parts.iter().all(|p| p.contains(y)),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Geometry(m));
        match self {
            TargetSet::All => Ok(()),
            TargetSet::HalfSpace { axis, .. } if *axis >= d => bad(format!("half-space axis {axis} in dimension {d}")),
            TargetSet::HalfSpace { .. } => Ok(()),
            TargetSet::OutsideBall { center, radius } | TargetSet::InsideBall { center, radius } => {
                if center.len() != d || !(*radius >= 0.0) || !radius.is_finite() {
                    bad(format!("target ball center {center:?}, radius {radius}"))
                } else {
                    Ok(())
                }
            }
            TargetSet::And { parts } => parts.iter().try_for_each(|p| p.validate(d)),
        }
    }

    /// `{|y - z0| >= r, ±y_1 >= 0}`: the two halves of the exterior of `B(z0, r)`.
    pub fn exterior_half(z0: &[f64], r: f64, positive: bool) -> Self {
        TargetSet::And {
            parts: vec![
                TargetSet::OutsideBall {
                    center: z0.to_vec(),
                    radius: r,
                },
                TargetSet::HalfSpace {
                    axis: 0,
                    positive,
                    at: z0[0],
                },
            ],
        }
    }

    /// The image under `y -> x0 + r y`: targets written in units of `r` around `x0`.
    pub fn scaled(&self, x0: &[f64], r: f64) -> Self {
        let map = |c: &[f64]| c.iter().zip(x0).map(|(c, o)| o + r * c).collect::<Vec<_>>();
        match self {
            TargetSet::All => TargetSet::All,
            TargetSet::HalfSpace { axis, positive, at } => TargetSet::HalfSpace {
                axis: *axis,
                positive: *positive,
                at: x0[*axis] + r * at,
            },
            TargetSet::OutsideBall { center, radius } => TargetSet::OutsideBall {
                center: map(center),
                radius: r * radius,
            },
            TargetSet::InsideBall { center, radius } => TargetSet::InsideBall {
                center: map(center),
                radius: r * radius,
            },
            TargetSet::And { parts } => TargetSet::And {
                parts: parts.iter().map(|p| p.scaled(x0, r)).collect(),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            TargetSet::All => "all".into(),
            TargetSet::HalfSpace { axis, positive, .. } => format!("half{}{axis}", if *positive { "+" } else { "-" }),
            TargetSet::OutsideBall { radius, .. } => format!("outside{radius}"),
            TargetSet::InsideBall { radius, .. } => format!("inside{radius}"),
            TargetSet::And { parts } => parts.iter().map(|p| p.label()).collect::<Vec<_>>().join("&"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let a1 = TargetSet::exterior_half(&[0.0, 0.0], 1.0, true);
        let a2 = TargetSet::exterior_half(&[0.0, 0.0], 1.0, false);
        for y in [[1.5, 0.2], [-1.5, 0.2], [0.0, -2.0], [0.3, 0.3]] {
            assert!(!(a1.contains(&y) && a2.contains(&y)));
            assert_eq!(a1.contains(&y) || a2.contains(&y), y[0].hypot(y[1]) >= 1.0);
        }
        assert!(TargetSet::InsideBall { center: vec![3.0], radius: 0.5 }.contains(&[3.2]));
        assert!(TargetSet::HalfSpace { axis: 2, positive: true, at: 0.0 }.validate(2).is_err());
        let t = TargetSet::InsideBall { center: vec![2.0, 0.0], radius: 0.5 }.scaled(&[1.0, 1.0], 0.1);
        assert!(t.contains(&[1.2, 1.0]) && !t.contains(&[1.3, 1.0]));
    }
}
