//! Symbolic container descriptions and their exact support functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::polygon::{clip_halfplane, convex_hull, minkowski_hull, perimeter_closed, shoelace, Point};
use crate::error::{Error, Result};

/// A planar convex body given in closed form.
///
/// Every variant reduces to a [`NormalForm`] `K + r B` where `K` is a convex
/// polygon (possibly a segment or a point) and `B` the unit disk, which is
/// what area, perimeter and inner parallel sets are computed from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContainerSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    /// Segment of half-length `half_length` along `axis_angle`, thickened by `radius`.
    Stadium {
        half_length: f64,
        radius: f64,
        #[serde(default)]
        axis_angle: f64,
    },
    MinkowskiSum {
        left: Box<ContainerSpec>,
        right: Box<ContainerSpec>,
    },
    Scaled {
        base: Box<ContainerSpec>,
        factor: f64,
    },
    Translated {
        base: Box<ContainerSpec>,
        offset: [f64; 2],
    },
}

/// `K + radius * B` with `core` the counterclockwise hull of `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub core: Vec<Point>,
    pub radius: f64,
}

impl NormalForm {
    pub fn support(&self, theta: f64) -> f64 {
        let u = Point::unit(theta);
        self.core.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max) + self.radius
    }

    /// Steiner formula `|K| + P(K) r + pi r^2`.
    pub fn area(&self) -> f64 {
        shoelace(&self.core) + self.core_perimeter() * self.radius + PI * self.radius * self.radius
    }

    pub fn perimeter(&self) -> f64 {
        self.core_perimeter() + 2.0 * PI * self.radius
    }

    fn core_perimeter(&self) -> f64 {
        perimeter_closed(&self.core)
    }

    /// Boundary points, exact for polygons; arcs sampled with `arc_points` per turn.
    pub fn boundary(&self, arc_points: usize) -> Vec<Point> {
        if self.radius == 0.0 {
            return self.core.clone();
        }
        let mut out: Vec<Point> = Vec::with_capacity(arc_points);
        for k in 0..arc_points {
            let theta = 2.0 * PI * k as f64 / arc_points as f64;
            let u = Point::unit(theta);
            let v = self
                .core
                .iter()
                .copied()
                .max_by(|a, b| a.dot(u).total_cmp(&b.dot(u)))
                .unwrap_or_default();
            out.push(v + u.scale(self.radius));
        }
        out
    }

    fn to_spec(&self) -> ContainerSpec {
        let r = self.radius;
        match self.core.len() {
            1 => ContainerSpec::Disk {
                center: [self.core[0].x, self.core[0].y],
                radius: r,
            },
            2 if r > 0.0 => {
                let (a, b) = (self.core[0], self.core[1]);
                let d = b - a;
                let mid = a + d.scale(0.5);
                let stadium = ContainerSpec::Stadium {
                    half_length: 0.5 * d.norm(),
                    radius: r,
                    axis_angle: d.y.atan2(d.x),
                };
                if mid.norm() == 0.0 {
                    stadium
                } else {
                    ContainerSpec::Translated {
                        base: Box::new(stadium),
                        offset: [mid.x, mid.y],
                    }
                }
            }
            _ => {
                let poly = ContainerSpec::Polygon {
                    vertices: self.core.iter().map(|p| [p.x, p.y]).collect(),
                };
                if r > 0.0 {
                    ContainerSpec::MinkowskiSum {
                        left: Box::new(poly),
                        right: Box::new(ContainerSpec::Disk {
                            center: [0.0, 0.0],
                            radius: r,
                        }),
                    }
                } else {
                    poly
                }
            }
        }
    }
}

impl ContainerSpec {
    pub fn disk(radius: f64) -> Self {
        ContainerSpec::Disk {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn polygon(vertices: &[[f64; 2]]) -> Self {
        ContainerSpec::Polygon {
            vertices: vertices.to_vec(),
        }
    }

    /// Axis-aligned square `[-half, half]^2`.
    pub fn square(half: f64) -> Self {
        Self::polygon(&[[-half, -half], [half, -half], [half, half], [-half, half]])
    }

    pub fn stadium(half_length: f64, radius: f64) -> Self {
        ContainerSpec::Stadium {
            half_length,
            radius,
            axis_angle: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidContainer(msg));
        match self {
            ContainerSpec::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad(format!("polygon needs at least 3 vertices, got {}", vertices.len()));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return bad("polygon vertex is not finite".into());
                }
                let pts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                let hull = convex_hull(&pts);
                if hull.len() < 3 || shoelace(&hull) <= 0.0 {
                    return bad("polygon has empty interior".into());
                }
                Ok(())
            }
            ContainerSpec::Disk { center, radius } => {
                if !(center[0].is_finite() && center[1].is_finite()) {
                    return bad("disk center is not finite".into());
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("disk radius must be > 0, got {radius}"));
                }
                Ok(())
            }
            ContainerSpec::Stadium {
                half_length,
                radius,
                axis_angle,
            } => {
                if !(*half_length >= 0.0 && half_length.is_finite()) {
                    return bad(format!("stadium half_length must be >= 0, got {half_length}"));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return bad(format!("stadium radius must be > 0, got {radius}"));
                }
                if !axis_angle.is_finite() {
                    return bad("stadium axis_angle is not finite".into());
                }
                Ok(())
            }
            ContainerSpec::MinkowskiSum { left, right } => {
                left.validate()?;
                right.validate()
            }
            ContainerSpec::Scaled { base, factor } => {
                if !(*factor > 0.0 && factor.is_finite()) {
                    return bad(format!("scale factor must be > 0, got {factor}"));
                }
                base.validate()
            }
            ContainerSpec::Translated { base, offset } => {
                if !(offset[0].is_finite() && offset[1].is_finite()) {
                    return bad("translation is not finite".into());
                }
                base.validate()
            }
        }
    }

    /// Exact support value `max_{y in body} <u(theta), y>`.
    pub fn support(&self, theta: f64) -> f64 {
        match self {
            ContainerSpec::Polygon { vertices } => {
                let (c, s) = (theta.cos(), theta.sin());
                vertices
                    .iter()
                    .map(|v| v[0] * c + v[1] * s)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            ContainerSpec::Disk { center, radius } => {
                center[0] * theta.cos() + center[1] * theta.sin() + radius
            }
            ContainerSpec::Stadium {
                half_length,
                radius,
                axis_angle,
            } => half_length * (theta - axis_angle).cos().abs() + radius,
            ContainerSpec::MinkowskiSum { left, right } => left.support(theta) + right.support(theta),
            ContainerSpec::Scaled { base, factor } => factor * base.support(theta),
            ContainerSpec::Translated { base, offset } => {
                base.support(theta) + offset[0] * theta.cos() + offset[1] * theta.sin()
            }
        }
    }

    pub fn normal_form(&self) -> NormalForm {
        match self {
            ContainerSpec::Polygon { vertices } => {
                let pts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                NormalForm {
                    core: convex_hull(&pts),
                    radius: 0.0,
                }
            }
            ContainerSpec::Disk { center, radius } => NormalForm {
                core: vec![(*center).into()],
                radius: *radius,
            },
            ContainerSpec::Stadium {
                half_length,
                radius,
                axis_angle,
            } => {
                let d = Point::unit(*axis_angle).scale(*half_length);
                let core = if *half_length > 0.0 {
                    convex_hull(&[Point::new(-d.x, -d.y), d])
                } else {
                    vec![Point::default()]
                };
                NormalForm {
                    core,
                    radius: *radius,
                }
            }
            ContainerSpec::MinkowskiSum { left, right } => {
                let (a, b) = (left.normal_form(), right.normal_form());
                NormalForm {
                    core: minkowski_hull(&a.core, &b.core),
                    radius: a.radius + b.radius,
                }
            }
            ContainerSpec::Scaled { base, factor } => {
                let nf = base.normal_form();
                NormalForm {
                    core: nf.core.iter().map(|p| p.scale(*factor)).collect(),
                    radius: nf.radius * factor,
                }
            }
            ContainerSpec::Translated { base, offset } => {
                let nf = base.normal_form();
                let v: Point = (*offset).into();
                NormalForm {
                    core: nf.core.iter().map(|&p| p + v).collect(),
                    radius: nf.radius,
                }
            }
        }
    }

    pub fn area(&self) -> f64 {
        self.normal_form().area()
    }

    pub fn perimeter(&self) -> f64 {
        self.normal_form().perimeter()
    }

    /// Radius of the largest inscribed disk.
    pub fn inradius(&self) -> f64 {
        let nf = self.normal_form();
        nf.radius + polygon_inradius(&nf.core)
    }

    /// Lower bound `d_0` on the radius of curvature `h'' + h`.
    pub fn min_curvature_radius(&self) -> f64 {
        self.normal_form().radius
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let right = self.support(0.0);
        let top = self.support(0.5 * PI);
        let left = -self.support(PI);
        let bottom = -self.support(1.5 * PI);
        (Point::new(left, bottom), Point::new(right, top))
    }

    pub fn diameter(&self) -> f64 {
        // width in direction theta is h(theta) + h(theta + pi); its max is the diameter
        let n = 2048;
        (0..n)
            .map(|k| {
                let t = PI * k as f64 / n as f64;
                self.support(t) + self.support(t + PI)
            })
            .fold(0.0, f64::max)
    }

    /// Inner parallel set `{x : d(x, boundary) >= t}`.
    pub fn inner_parallel(&self, t: f64) -> Result<ContainerSpec> {
        self.validate()?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("offset distance must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.clone());
        }
        let empty = || Error::EmptyInterior {
            distance: t,
            inradius: self.inradius(),
        };
        match self {
            ContainerSpec::Disk { center, radius } => {
                if t < *radius {
                    Ok(ContainerSpec::Disk {
                        center: *center,
                        radius: radius - t,
                    })
                } else {
                    Err(empty())
                }
            }
            ContainerSpec::Stadium {
                half_length,
                radius,
                axis_angle,
            } => {
                if t < *radius {
                    Ok(ContainerSpec::Stadium {
                        half_length: *half_length,
                        radius: radius - t,
                        axis_angle: *axis_angle,
                    })
                } else {
                    Err(empty())
                }
            }
            ContainerSpec::Polygon { vertices } => {
                let pts: Vec<Point> = vertices.iter().map(|&v| v.into()).collect();
                let inner = offset_polygon(&convex_hull(&pts), t).ok_or_else(empty)?;
                Ok(ContainerSpec::Polygon {
                    vertices: inner.iter().map(|p| [p.x, p.y]).collect(),
                })
            }
            ContainerSpec::Scaled { base, factor } => Ok(ContainerSpec::Scaled {
                base: Box::new(base.inner_parallel(t / factor)?),
                factor: *factor,
            }),
            ContainerSpec::Translated { base, offset } => Ok(ContainerSpec::Translated {
                base: Box::new(base.inner_parallel(t)?),
                offset: *offset,
            }),
            ContainerSpec::MinkowskiSum { left, right } => {
                if let ContainerSpec::Disk { center, radius } = right.as_ref() {
                    if t < *radius {
                        return Ok(ContainerSpec::MinkowskiSum {
                            left: left.clone(),
                            right: Box::new(ContainerSpec::Disk {
                                center: *center,
                                radius: radius - t,
                            }),
                        });
                    }
                }
                let nf = self.normal_form();
                if t < nf.radius {
                    return Ok(NormalForm {
                        core: nf.core,
                        radius: nf.radius - t,
                    }
                    .to_spec());
                }
                let inner = offset_polygon(&nf.core, t - nf.radius).ok_or_else(empty)?;
                Ok(NormalForm {
                    core: inner,
                    radius: 0.0,
                }
                .to_spec())
            }
        }
    }
}

/// Clips a counterclockwise convex polygon by each edge moved inward by `t`.
/// `None` when the result has empty interior.
fn offset_polygon(hull: &[Point], t: f64) -> Option<Vec<Point>> {
    let poly = clip_offsets(hull, t)?;
    let cleaned = convex_hull(&poly);
    let scale = hull.iter().map(|p| p.norm()).fold(1.0_f64, f64::max);
    if cleaned.len() < 3 || shoelace(&cleaned) <= 1e-20 * scale * scale {
        return None;
    }
    Some(cleaned)
}

fn clip_offsets(hull: &[Point], t: f64) -> Option<Vec<Point>> {
    if hull.len() < 3 {
        return None;
    }
    let n = hull.len();
    let mut poly = hull.to_vec();
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        let e = b - a;
        let normal = Point::new(e.y, -e.x).scale(1.0 / e.norm());
        poly = clip_halfplane(&poly, normal, normal.dot(a) - t);
        if poly.len() < 3 {
            return None;
        }
    }
    Some(poly)
}

fn polygon_inradius(hull: &[Point]) -> f64 {
    if hull.len() < 3 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, perimeter_closed(hull));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if clip_offsets(hull, mid).is_some_and(|p| shoelace(&p) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn square_support_values() {
        let sq = ContainerSpec::square(1.0);
        assert!((sq.support(0.0) - 1.0).abs() < 1e-15);
        assert!((sq.support(PI / 4.0) - SQRT2).abs() < 1e-15);
    }

    #[test]
    fn offset_disk_support() {
        let d = ContainerSpec::Disk {
            center: [1.0, 0.0],
            radius: 2.0,
        };
        assert!((d.support(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        assert!(ContainerSpec::disk(0.0).validate().is_err());
        assert!(ContainerSpec::stadium(-1.0, 1.0).validate().is_err());
        assert!(ContainerSpec::polygon(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).validate().is_err());
        let scaled = ContainerSpec::Scaled {
            base: Box::new(ContainerSpec::disk(1.0)),
            factor: 0.0,
        };
        assert!(scaled.validate().is_err());
    }

    #[test]
    fn closed_form_areas_and_perimeters() {
        assert!((ContainerSpec::square(1.0).area() - 4.0).abs() < 1e-14);
        assert!((ContainerSpec::disk(2.0).area() - 4.0 * PI).abs() < 1e-12);
        let st = ContainerSpec::stadium(1.0, 1.0);
        assert!((st.area() - (4.0 + PI)).abs() < 1e-12);
        assert!((st.perimeter() - (4.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn inner_parallel_of_square() {
        let inner = ContainerSpec::square(1.0).inner_parallel(0.5).unwrap();
        assert!((inner.area() - 1.0).abs() < 1e-12);
        assert!(matches!(
            ContainerSpec::square(1.0).inner_parallel(1.0),
            Err(Error::EmptyInterior { .. })
        ));
    }

    #[test]
    fn inner_parallel_of_disk_and_stadium() {
        assert_eq!(
            ContainerSpec::disk(1.0).inner_parallel(0.3).unwrap(),
            ContainerSpec::Disk {
                center: [0.0, 0.0],
                radius: 1.0 - 0.3
            }
        );
        assert_eq!(
            ContainerSpec::stadium(1.0, 1.0).inner_parallel(0.5).unwrap(),
            ContainerSpec::stadium(1.0, 0.5)
        );
        assert!(ContainerSpec::stadium(1.0, 1.0).inner_parallel(1.0).is_err());
    }

    #[test]
    fn inner_parallel_of_rounded_polygon_past_its_radius() {
        // (K + 0.2 B)_{-0.7} = K_{-0.5}
        let rounded = ContainerSpec::MinkowskiSum {
            left: Box::new(ContainerSpec::square(1.0)),
            right: Box::new(ContainerSpec::Stadium {
                half_length: 0.0,
                radius: 0.2,
                axis_angle: 0.0,
            }),
        };
        let inner = rounded.inner_parallel(0.7).unwrap();
        assert!((inner.area() - 1.0).abs() < 1e-12);
        let t = 0.1;
        let (a, b) = (rounded.inner_parallel(t).unwrap(), rounded.clone());
        for k in 0..16 {
            let th = 0.37 * k as f64;
            assert!((a.support(th) - (b.support(th) - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn inradius_of_square_and_stadium() {
        assert!((ContainerSpec::square(1.0).inradius() - 1.0).abs() < 1e-9);
        assert!((ContainerSpec::stadium(1.0, 0.7).inradius() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip_of_nested_spec() {
        let spec = ContainerSpec::Translated {
            base: Box::new(ContainerSpec::MinkowskiSum {
                left: Box::new(ContainerSpec::square(1.0)),
                right: Box::new(ContainerSpec::disk(0.5)),
            }),
            offset: [0.25, -1.0],
        };
        #[derive(Serialize, Deserialize)]
        struct Doc {
            container: ContainerSpec,
        }
        let text = toml::to_string(&Doc {
            container: spec.clone(),
        })
        .unwrap();
        let back: Doc = toml::from_str(&text).unwrap();
        assert_eq!(back.container, spec);
    }
}
