//! Optimal convex subsets of a planar convex container.
//!
//! Given a container `Ω` and an area fraction `α`, find a convex `ω ⊂ Ω` with
//! `|ω| = α|Ω|` minimizing `‖h_Ω − h_ω‖_p`, the `L^p` distance between support
//! functions (`p = ∞` is the Hausdorff distance). Two discretizations are
//! provided: truncated Fourier series ([`fourier`]) and nodal support values
//! with an exact discrete convexity condition ([`nodal`]). Both are solved by
//! the augmented Lagrangian solver in [`nlp`].

pub mod error;
pub mod experiments;
pub mod fourier;
pub mod geometry;
pub mod io;
pub mod nlp;
pub mod nodal;
pub mod oracles;
pub mod solve;

pub use error::{Error, Result};
pub use geometry::{ContainerSpec, Point, PolygonChain, SupportSamples};
pub use solve::{Exponent, SolveOptions, SolveResult, SolveStatus};
