//! Support-function geometry of planar convex bodies.
//!
//! Containers are described symbolically by [`ContainerSpec`] and evaluated
//! exactly; candidate shapes live on the uniform angular grid as
//! [`SupportSamples`]. All quadratures are the uniform rectangle rule.

mod container;
mod polygon;
mod samples;

pub use container::{ContainerSpec, NormalForm};
pub use polygon::{polygon_area, Point, PolygonChain};
pub use samples::{
    convexity_residuals, geometry_tolerance, hausdorff_from_supports, perimeter_from_support,
    reconstruct_boundary, support_samples, SupportSamples,
};

pub(crate) use samples::grid_angle;

/// Exact support value of `spec` in direction `theta`.
pub fn support_eval(spec: &ContainerSpec, theta: f64) -> crate::Result<f64> {
    spec.validate()?;
    Ok(spec.support(theta))
}

/// Inner parallel set of `spec` at distance `t`.
pub fn inner_parallel(spec: &ContainerSpec, t: f64) -> crate::Result<ContainerSpec> {
    spec.inner_parallel(t)
}
