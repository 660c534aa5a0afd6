//! Independent reference solutions: the inner parallel optimum for `p = inf`,
//! the `p = 1` perimeter identity, an exhaustive small-grid search, and the
//! triangle candidate `MAB`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{perimeter_from_support, support_samples, ContainerSpec, Point, PolygonChain, SupportSamples};
use crate::nodal::area_of;
use crate::solve::{pow_real, Exponent};

/// Distance `d` with `|Omega_{-d}| = alpha |Omega|`, and the set `Omega_{-d}`.
///
/// Only defined while the radius of curvature of the container stays above
/// `d`, i.e. for `d <= r` when the container is `K + r B`; outside that range
/// the inner parallel set is not known to be optimal.
pub fn inner_parallel_optimum(container: &ContainerSpec, alpha: f64) -> Result<(f64, ContainerSpec)> {
    container.validate()?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok((0.0, container.clone()));
    }
    let nf = container.normal_form();
    let omega = nf.area();
    let target = alpha * omega;
    let d0 = nf.radius;
    let core_area = nf.area() - nf.perimeter() * d0 + PI * d0 * d0;
    // Steiner formula for K + s B, s = r - d
    let area_at = |d: f64| {
        let s = d0 - d;
        core_area + (nf.perimeter() - 2.0 * PI * d0) * s + PI * s * s
    };
    if d0 <= 0.0 || area_at(d0) > target {
        return Err(Error::NotApplicable(format!(
            "curvature radius {d0} of the container is too small for alpha = {alpha}"
        )));
    }
    let (mut lo, mut hi) = (0.0, d0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if area_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * d0 {
            break;
        }
    }
    let d = if (area_at(lo) - target).abs() <= (area_at(hi) - target).abs() { lo } else { hi };
    let shape = if d >= d0 {
        // the core itself; keep a vanishing radius so point cores stay valid specs
        container.inner_parallel(d0 * (1.0 - f64::EPSILON))?
    } else {
        container.inner_parallel(d)?
    };
    Ok((d, shape))
}

/// `|J_1(shape) - (P(Omega) - P(shape))|` with the rectangle rule on the
/// shape's grid for all three integrals.
pub fn perimeter_identity_check(container: &ContainerSpec, shape: &SupportSamples) -> Result<f64> {
    let outer = support_samples(container, shape.n())?;
    let j1 = shape.step()
        * outer
            .values()
            .iter()
            .zip(shape.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    Ok((j1 - (perimeter_from_support(&outer) - perimeter_from_support(shape))).abs())
}

/// Result of [`brute_force_nodal`].
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForce {
    pub shape: SupportSamples,
    /// `J_p` of the best grid point (the sup-gap for `p = inf`).
    pub energy: f64,
    pub powered: f64,
    /// Discrete area of the best point.
    pub area: f64,
    /// Area slack `delta_A` that was used.
    pub area_slack: f64,
    pub widened: bool,
    pub evaluated: u64,
}

/// Largest `G^N` the exhaustive search accepts.
pub const MAX_BRUTE_POINTS: f64 = 1e8;

/// Exhaustive search over `h_j in {0, delta_j, ..., h_Omega(theta_j)}` with
/// `G` levels per node, keeping discretely convex points whose area is within
/// `delta_A` of `alpha |Omega|`.
///
/// `delta_A` is the largest area change caused by lowering one node of the
/// container by one level; it is doubled once if nothing qualifies.
pub fn brute_force_nodal(container: &ContainerSpec, n: usize, p: Exponent, alpha: f64, levels: usize) -> Result<BruteForce> {
    p.validate()?;
    if !(3..=6).contains(&n) {
        return Err(Error::InvalidInput(format!("brute force needs 3 <= N <= 6, got {n}")));
    }
    if levels < 2 || (levels as f64).powi(n as i32) > MAX_BRUTE_POINTS {
        return Err(Error::InvalidInput(format!(
            "brute force needs G >= 2 and G^N <= 1e8, got G = {levels}, N = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let outer = support_samples(container, n)?;
    let top = outer.values().to_vec();
    if top.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput(
            "brute force grid starts at 0: the origin must be interior to the container".into(),
        ));
    }
    let steps: Vec<f64> = top.iter().map(|v| v / (levels - 1) as f64).collect();
    let omega = area_of(&top);
    let target = alpha * omega;
    let slack = (0..n)
        .map(|j| {
            let mut h = top.clone();
            h[j] -= steps[j];
            (omega - area_of(&h)).abs()
        })
        .fold(0.0, f64::max);

    let search = |slack: f64| scan(&top, &steps, levels, p, target, slack);
    let (best, evaluated, widened, used) = match search(slack) {
        (Some(b), count) => (b, count, false, slack),
        (None, count) => match search(2.0 * slack) {
            (Some(b), more) => (b, count + more, true, 2.0 * slack),
            (None, _) => {
                return Err(Error::Infeasible(format!(
                    "no convex grid point within area slack {:.3e} of the target",
                    2.0 * slack
                )))
            }
        },
    };
    let (powered, idx) = best;
    let h = decode(idx, &steps, levels);
    let energy = match p {
        Exponent::Finite(p) => powered.max(0.0).powf(1.0 / p),
        Exponent::Infinity => powered,
    };
    Ok(BruteForce {
        area: area_of(&h),
        shape: SupportSamples::new(h)?,
        energy,
        powered,
        area_slack: used,
        widened,
        evaluated,
    })
}

fn decode(mut idx: u64, steps: &[f64], levels: usize) -> Vec<f64> {
    // node 0 is the most significant digit
    let n = steps.len();
    let mut h = vec![0.0; n];
    for j in (0..n).rev() {
        h[j] = (idx % levels as u64) as f64 * steps[j];
        idx /= levels as u64;
    }
    h
}

/// Minimal (objective, linear index) over the grid; ties go to the lowest index.
fn scan(top: &[f64], steps: &[f64], levels: usize, p: Exponent, target: f64, slack: f64) -> (Option<(f64, u64)>, u64) {
    let n = top.len();
    let g = levels as u64;
    let per_first = g.pow(n as u32 - 1);
    let c2 = 2.0 * (2.0 * PI / n as f64).cos();
    let tol = 1e-12 * top.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let w = 2.0 * PI / n as f64;
    let blocks: Vec<(Option<(f64, u64)>, u64)> = (0..g)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, u64)> = None;
            let mut count = 0;
            let mut h = vec![0.0; n];
            for rest in 0..per_first {
                let idx = first * per_first + rest;
                let mut r = idx;
                for j in (0..n).rev() {
                    h[j] = (r % g) as f64 * steps[j];
                    r /= g;
                }
                count += 1;
                if (0..n).any(|j| h[(j + 1) % n] + h[(j + n - 1) % n] - c2 * h[j] < -tol) {
                    continue;
                }
                if (area_of(&h) - target).abs() > slack {
                    continue;
                }
                let value = match p {
                    Exponent::Finite(p) => w * (0..n).map(|j| pow_real((top[j] - h[j]).max(0.0), p)).sum::<f64>(),
                    Exponent::Infinity => (0..n).map(|j| top[j] - h[j]).fold(f64::NEG_INFINITY, f64::max),
                };
                if best.is_none_or(|(b, _)| value < b) {
                    best = Some((value, idx));
                }
            }
            (best, count)
        })
        .collect();
    let mut best: Option<(f64, u64)> = None;
    let mut total = 0;
    for (b, count) in blocks {
        total += count;
        if let Some((v, i)) = b {
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, i));
            }
        }
    }
    (best, total)
}

/// The candidate triangle `MAB` with `M = A + alpha (C - A)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleCandidate {
    /// `M, A, B`, counterclockwise.
    pub triangle: PolygonChain,
    pub m: Point,
    /// Labels after normalization: `|AB|` is the diameter and the angle at `A`
    /// is at least the angle at `B`.
    pub a: Point,
    pub b: Point,
    pub c: Point,
    /// Whether the input labels had to be changed.
    pub relabeled: bool,
}

pub fn triangle_conjecture_candidate(vertices: [[f64; 2]; 3], alpha: f64) -> Result<TriangleCandidate> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let pts: [Point; 3] = vertices.map(Point::from);
    if pts.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::NonFinite("triangle vertices"));
    }
    let (a0, b0, c0) = (pts[0], pts[1], pts[2]);
    let scale = (b0 - a0).norm().max((c0 - a0).norm()).max((c0 - b0).norm());
    if ((b0 - a0).cross(c0 - a0)).abs() <= 1e-12 * scale * scale {
        return Err(Error::Degenerate("triangle has zero area".into()));
    }
    let tol = 1e-12 * scale;
    let len = |i: usize, j: usize| (pts[i] - pts[j]).norm();
    // (a, b, c) index triples; the input order wins when it already qualifies
    let orders = [(0, 1, 2), (1, 0, 2), (0, 2, 1), (2, 0, 1), (1, 2, 0), (2, 1, 0)];
    let valid = |&(a, b, c): &(usize, usize, usize)| {
        let ab = len(a, b);
        // larger angle sits opposite the longer side: angle A >= angle B iff |BC| >= |AC|
        ab + tol >= len(a, c) && ab + tol >= len(b, c) && len(b, c) + tol >= len(a, c)
    };
    let (ia, ib, ic) = *orders.iter().find(|o| valid(o)).expect("some labeling qualifies");
    let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
    let m = a + (c - a).scale(alpha);
    let mut tri = vec![m, a, b];
    if (a - m).cross(b - m) < 0.0 {
        tri.reverse();
    }
    Ok(TriangleCandidate {
        triangle: PolygonChain::new(tri),
        m,
        a,
        b,
        c,
        relabeled: (ia, ib, ic) != (0, 1, 2),
    })
}
