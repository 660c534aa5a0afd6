//! Nodal support values on the uniform angular grid.

use std::f64::consts::PI;

use super::container::ContainerSpec;
use super::polygon::{Point, PolygonChain};
use crate::error::{Error, Result};

/// Support values `h_k = h(2 pi k / N)`, `k = 0..N`, indices taken modulo `N`.
///
/// Values may be negative: the support function of a body that does not
/// contain the origin is negative in some directions.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportSamples {
    values: Vec<f64>,
}

impl SupportSamples {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "support samples need N >= 3, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("support samples"));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|k| f(grid_angle(k, n))).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn theta(&self, k: usize) -> f64 {
        grid_angle(k, self.n())
    }

    /// Angular step `2 pi / N`.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Convexity acceptance tolerance `1e-9 * max(1, |h|_inf)`.
    pub fn convexity_tolerance(&self) -> f64 {
        1e-9 * self.max_abs().max(1.0)
    }

    pub fn convexity_residuals(&self) -> Vec<f64> {
        convexity_residuals(self)
    }

    pub fn is_convex(&self) -> bool {
        self.min_convexity_residual() >= -self.convexity_tolerance()
    }

    pub fn min_convexity_residual(&self) -> f64 {
        convexity_residuals(self).into_iter().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn grid_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

/// Exact container support values on the `n`-point grid.
pub fn support_samples(spec: &ContainerSpec, n: usize) -> Result<SupportSamples> {
    spec.validate()?;
    SupportSamples::from_fn(n, |t| spec.support(t))
}

/// Rectangle rule for `P = int_0^{2 pi} h`.
pub fn perimeter_from_support(h: &SupportSamples) -> f64 {
    h.step() * h.values.iter().sum::<f64>()
}

/// `max_k |h1_k - h2_k|`.
pub fn hausdorff_from_supports(h1: &SupportSamples, h2: &SupportSamples) -> Result<f64> {
    if h1.n() != h2.n() {
        return Err(Error::SizeMismatch {
            expected: h1.n(),
            got: h2.n(),
        });
    }
    Ok(h1
        .values
        .iter()
        .zip(&h2.values)
        .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// `c_k = h_{k+1} + h_{k-1} - 2 h_k cos(2 pi / N)`.
pub fn convexity_residuals(h: &SupportSamples) -> Vec<f64> {
    let n = h.n();
    let c2 = 2.0 * h.step().cos();
    let v = &h.values;
    (0..n)
        .map(|k| v[(k + 1) % n] + v[(k + n - 1) % n] - c2 * v[k])
        .collect()
}

/// Boundary points `x = h u + h' u_perp` with central-difference `h'`.
///
/// The difference quotient uses `2 sin(step)` rather than `2 step`: it is exact
/// on first harmonics (translations) and places each point at the midpoint of
/// the corresponding edge of the circumscribed polygon with normals `u_k`, so
/// discretely convex samples always give a convex chain.
pub fn reconstruct_boundary(h: &SupportSamples) -> Result<PolygonChain> {
    if !h.is_convex() {
        return Err(Error::NotConvex {
            min_residual: h.min_convexity_residual(),
            tolerance: h.convexity_tolerance(),
        });
    }
    let n = h.n();
    let v = &h.values;
    let inv = 1.0 / (2.0 * h.step().sin());
    let points = (0..n)
        .map(|k| {
            let t = h.theta(k);
            let (c, s) = (t.cos(), t.sin());
            let dh = (v[(k + 1) % n] - v[(k + n - 1) % n]) * inv;
            Point::new(v[k] * c - dh * s, v[k] * s + dh * c)
        })
        .collect();
    Ok(PolygonChain::new(points))
}

/// Geometric convexity tolerance `1e-8 * diameter` for a reconstructed chain.
pub fn geometry_tolerance(chain: &PolygonChain) -> f64 {
    1e-8 * chain.diameter().max(f64::MIN_POSITIVE)
}
