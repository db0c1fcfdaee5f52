//! Open sets used as domains. Everything except `Ball` is anchored at the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Ball { center: Vec<f64>, radius: f64 },
    /// `{x_1 > 0} ∩ B(0, R)`.
    HalfSpaceCapBall { radius: f64 },
    /// `{angle(x, e_1) < aperture} ∩ B(0, R)`.
    ConeCapBall { aperture: f64, radius: f64 },
    /// `B(0, R)` minus the closed half-slab `{x_1 >= 0, |x_2| <= w}`.
    SlitBall { half_width: f64, radius: f64 },
    /// `{inner < |x| < outer}`.
    Annulus { inner: f64, outer: f64 },
    /// `{|x| > R}`.
    ComplementOfBall { radius: f64 },
    /// `{lo < x_1 < hi}`: the exit set of the first coordinate from an interval.
    Slab { lo: f64, hi: f64 },
}

impl Geometry {
    pub fn ball(d: usize, radius: f64) -> Self {
        Geometry::Ball {
            center: vec![0.0; d],
            radius,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Geometry::Ball { .. } => "ball",
            Geometry::HalfSpaceCapBall { .. } => "half_space_cap_ball",
            Geometry::ConeCapBall { .. } => "cone_cap_ball",
            Geometry::SlitBall { .. } => "slit_ball",
            Geometry::Annulus { .. } => "annulus",
            Geometry::ComplementOfBall { .. } => "complement_of_ball",
            Geometry::Slab { .. } => "slab",
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(Error::Geometry(m));
        let pos = |v: f64| v > 0.0 && v.is_finite();
        match self {
            Geometry::Ball { center, radius } => {
                if center.len() != d {
                    return bad(format!("ball center has {} coordinates, expected {d}", center.len()));
                }
                if !pos(*radius) {
                    return bad(format!("ball radius {radius} must be positive"));
                }
            }
            Geometry::HalfSpaceCapBall { radius } if !pos(*radius) => return bad(format!("radius {radius} must be positive")),
            Geometry::ConeCapBall { aperture, radius } => {
                if !pos(*radius) || !(*aperture > 0.0 && *aperture < std::f64::consts::PI) {
                    return bad(format!("cone aperture {aperture}, radius {radius}"));
                }
            }
            Geometry::SlitBall { half_width, radius } => {
                if d < 2 {
                    return bad("slit ball needs d >= 2".into());
                }
                if !pos(*radius) || !(*half_width >= 0.0 && half_width < radius) {
                    return bad(format!("slit half-width {half_width}, radius {radius}"));
                }
            }
            Geometry::Annulus { inner, outer } if !(pos(*inner) && outer > inner && outer.is_finite()) => {
                return bad(format!("annulus radii {inner}, {outer}"))
            }
            Geometry::ComplementOfBall { radius } if !pos(*radius) => return bad(format!("radius {radius} must be positive")),
            Geometry::Slab { lo, hi } if !(lo.is_finite() && hi.is_finite() && hi > lo) => {
                return bad(format!("slab bounds {lo}, {hi}"))
            }
            _ => {}
        }
        if d < 1 {
            return bad("dimension must be >= 1".into());
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.dist_to_complement(x) > 0.0
    }

    /// Lower bound on the distance from `x` to the complement; `<= 0` outside.
    pub fn dist_to_complement(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        match self {
            Geometry::Ball { center, radius } => {
                let dc: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                radius - dc
            }
            Geometry::HalfSpaceCapBall { radius } => x[0].min(radius - r),
            Geometry::ConeCapBall { aperture, radius } => {
                if r == 0.0 {
                    return 0.0;
                }
                let theta = (x[0] / r).clamp(-1.0, 1.0).acos();
                let gap = aperture - theta;
                let to_cone = if gap <= 0.0 {
                    // outside: negative distance to the cone surface
                    -r * (-gap).min(std::f64::consts::FRAC_PI_2).sin()
                } else if gap >= std::f64::consts::FRAC_PI_2 {
                    r
                } else {
                    r * gap.sin()
                };
                to_cone.min(radius - r)
            }
            Geometry::SlitBall { half_width, radius } => {
                let over = x[1].abs() - half_width;
                let to_slit = if x[0] >= 0.0 {
                    over
                } else if over <= 0.0 {
                    -x[0]
                } else {
                    (x[0] * x[0] + over * over).sqrt()
                };
                to_slit.min(radius - r)
            }
            Geometry::Annulus { inner, outer } => (r - inner).min(outer - r),
            Geometry::ComplementOfBall { radius } => r - radius,
            Geometry::Slab { lo, hi } => (x[0] - lo).min(hi - x[0]),
        }
    }

    /// `self ∩ B(0, r)` for shapes anchored at the origin.
    pub fn intersect_ball(&self, r: f64) -> Result<Geometry> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Geometry(format!("cap radius {r}")));
        }
        Ok(match self {
            Geometry::Ball { center, radius } if center.iter().all(|c| *c == 0.0) => Geometry::Ball {
                center: center.clone(),
                radius: radius.min(r),
            },
            Geometry::HalfSpaceCapBall { radius } => Geometry::HalfSpaceCapBall { radius: radius.min(r) },
            Geometry::ConeCapBall { aperture, radius } => Geometry::ConeCapBall {
                aperture: *aperture,
                radius: radius.min(r),
            },
            Geometry::SlitBall { half_width, radius } if *half_width < r => Geometry::SlitBall {
                half_width: *half_width,
                radius: radius.min(r),
            },
            _ => return Err(Error::Geometry(format!("no ball cap of {} at radius {r}", self.name()))),
        })
    }

    /// A point well inside the domain.
    pub fn witness(&self, d: usize) -> Vec<f64> {
        let mut w = vec![0.0; d];
        match self {
            Geometry::Ball { center, .. } => return center.clone(),
            Geometry::HalfSpaceCapBall { radius } | Geometry::ConeCapBall { radius, .. } => w[0] = radius / 2.0,
            Geometry::SlitBall { radius, .. } => w[0] = -radius / 2.0,
            Geometry::Annulus { inner, outer } => w[0] = (inner + outer) / 2.0,
            Geometry::ComplementOfBall { radius } => w[0] = 2.0 * radius,
            Geometry::Slab { lo, hi } => w[0] = (lo + hi) / 2.0,
        }
        w
    }

    /// Radius of a ball around the witness containing the domain (infinite if unbounded).
    pub fn bounding_radius(&self) -> f64 {
        match self {
            Geometry::Ball { radius, .. } => *radius,
            Geometry::HalfSpaceCapBall { radius }
            | Geometry::ConeCapBall { radius, .. }
            | Geometry::SlitBall { radius, .. } => 1.5 * radius,
            Geometry::Annulus { inner, outer } => (inner + outer) / 2.0 + outer,
            Geometry::ComplementOfBall { .. } => f64::INFINITY,
            // unbounded once d >= 2
            Geometry::Slab { .. } => f64::INFINITY,
        }
    }
}
