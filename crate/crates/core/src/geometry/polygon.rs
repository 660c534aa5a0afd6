//! Planar points, polygon chains, and the convex-polygon primitives used by
//! container normalization (hulls, clipping, Minkowski sums).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn unit(theta: f64) -> Point {
        Point::new(theta.cos(), theta.sin())
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point::new(p[0], p[1])
    }
}

/// Ordered list of boundary points, counterclockwise for convex shapes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PolygonChain {
    pub points: Vec<Point>,
}

impl PolygonChain {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance between two points of the chain.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max((*a - *b).norm());
            }
        }
        best
    }

    /// Smallest normalized turn `cross(b-a, c-b) / (|b-a| + |c-b|)` over all
    /// consecutive triples; nonnegative for a counterclockwise convex chain.
    pub fn min_turn(&self) -> f64 {
        let n = self.points.len();
        if n < 3 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                let c = self.points[(i + 2) % n];
                let (e1, e2) = (b - a, c - b);
                let scale = e1.norm() + e2.norm();
                if scale == 0.0 {
                    0.0
                } else {
                    e1.cross(e2) / scale
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Convex up to `tol` (a length) in the sense of [`PolygonChain::min_turn`].
    pub fn is_convex(&self, tol: f64) -> bool {
        self.min_turn() >= -tol
    }
}

/// Shoelace area, positive for counterclockwise chains.
pub fn polygon_area(chain: &PolygonChain) -> Result<f64> {
    let pts = &chain.points;
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "area needs at least 3 points, got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::NonFinite("polygon_area"));
    }
    let n = pts.len();
    let twice: f64 = (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum();
    Ok(0.5 * twice)
}

pub(crate) fn perimeter_closed(pts: &[Point]) -> f64 {
    match pts.len() {
        0 | 1 => 0.0,
        n => (0..n).map(|i| (pts[(i + 1) % n] - pts[i]).norm()).sum(),
    }
}

pub(crate) fn shoelace(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>()
}

/// Convex hull (Andrew's monotone chain), counterclockwise, collinear and
/// duplicate points removed. Degenerate inputs return one or two points.
pub(crate) fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (*a - *b).norm() <= 1e-14 * (1.0 + a.norm()));
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts.iter().map(|p| p.norm()).fold(1.0_f64, f64::max);
    let eps = 1e-13 * scale * scale;
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Keeps the part of a convex polygon with `normal . x <= offset`.
pub(crate) fn clip_halfplane(poly: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let da = normal.dot(a) - offset;
        let db = normal.dot(b) - offset;
        if da <= 0.0 {
            out.push(a);
        }
        if (da < 0.0 && db > 0.0) || (da > 0.0 && db < 0.0) {
            let t = da / (da - db);
            out.push(a + (b - a).scale(t));
        }
    }
    out
}

/// Minkowski sum of two convex point sets, as a hull.
pub(crate) fn minkowski_hull(a: &[Point], b: &[Point]) -> Vec<Point> {
    let mut sums = Vec::with_capacity(a.len() * b.len());
    for &p in a {
        for &q in b {
            sums.push(p + q);
        }
    }
    convex_hull(&sums)
}
