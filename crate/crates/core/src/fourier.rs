//! Fourier discretization: the unknown support function is a trigonometric
//! polynomial `a_0 + sum_k (a_k cos k theta + b_k sin k theta)`.
//!
//! Inclusion and convexity are imposed at `M` uniform constraint angles, the
//! objective is integrated with a `Q`-point rectangle rule, and the area is
//! the exact quadratic form `pi a_0^2 + (pi/2) sum (1 - k^2)(a_k^2 + b_k^2)`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{grid_angle, support_samples, ContainerSpec, SupportSamples};
use crate::nlp::{solve_nlp, LinearConstraint, NlpProblem, SolverParams};
use crate::solve::{
    pick_best, run_starts, start_rng, status_of, Exponent, Method, ObjectiveForm, Residuals,
    SolveOptions, SolveResult, SolveStatus, StartOutcome,
};

/// Coefficients `a_0..a_n`, `b_1..b_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierShape {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FourierShape {
    pub fn zeros(order: usize) -> Self {
        Self {
            a: vec![0.0; order + 1],
            b: vec![0.0; order],
        }
    }

    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "Fourier shape needs len(a) = len(b) + 1, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Fourier coefficients"));
        }
        Ok(Self { a, b })
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.order() + 1
    }

    /// Packed as `[a_0, a_1..a_n, b_1..b_n]`.
    pub fn to_coeffs(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn from_coeffs(order: usize, x: &[f64]) -> Self {
        Self {
            a: x[..=order].to_vec(),
            b: x[order + 1..2 * order + 1].to_vec(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.a[0];
        for k in 1..=self.order() {
            let kt = k as f64 * theta;
            v += self.a[k] * kt.cos() + self.b[k - 1] * kt.sin();
        }
        v
    }

    /// Radius of curvature `h'' + h`.
    pub fn curvature_radius(&self, theta: f64) -> f64 {
        let mut v = self.a[0];
        for k in 2..=self.order() {
            let kt = k as f64 * theta;
            let w = 1.0 - (k * k) as f64;
            v += w * (self.a[k] * kt.cos() + self.b[k - 1] * kt.sin());
        }
        v
    }

    /// Least-squares (discrete Fourier) fit of uniform samples.
    pub fn fit(samples: &SupportSamples, order: usize) -> Result<Self> {
        let n = samples.n();
        if n < 2 * order + 1 {
            return Err(Error::InvalidInput(format!(
                "need at least {} samples to fit order {order}, got {n}",
                2 * order + 1
            )));
        }
        let v = samples.values();
        let mut shape = Self::zeros(order);
        shape.a[0] = v.iter().sum::<f64>() / n as f64;
        let trig = GridTrig::new(n);
        for k in 1..=order {
            let (mut ca, mut cb) = (0.0, 0.0);
            for (j, h) in v.iter().enumerate() {
                let (c, s) = trig.at(k * j);
                ca += h * c;
                cb += h * s;
            }
            let scale = if 2 * k == n { 1.0 } else { 2.0 } / n as f64;
            shape.a[k] = ca * scale;
            shape.b[k - 1] = cb * scale;
        }
        Ok(shape)
    }
}

/// Exact area quadratic form and its gradient in packed layout.
pub fn fourier_area(shape: &FourierShape) -> (f64, Vec<f64>) {
    let n = shape.order();
    let mut grad = vec![0.0; shape.dim()];
    let mut area = PI * shape.a[0] * shape.a[0];
    grad[0] = 2.0 * PI * shape.a[0];
    for k in 1..=n {
        let w = 1.0 - (k * k) as f64;
        area += 0.5 * PI * w * (shape.a[k] * shape.a[k] + shape.b[k - 1] * shape.b[k - 1]);
        grad[k] = PI * w * shape.a[k];
        grad[n + k] = PI * w * shape.b[k - 1];
    }
    (area, grad)
}

fn packed_area(order: usize, x: &[f64], grad: &mut [f64]) -> f64 {
    let mut area = PI * x[0] * x[0];
    grad[0] = 2.0 * PI * x[0];
    for k in 1..=order {
        let w = 1.0 - (k * k) as f64;
        let (a, b) = (x[k], x[order + k]);
        area += 0.5 * PI * w * (a * a + b * b);
        grad[k] = PI * w * a;
        grad[order + k] = PI * w * b;
    }
    area
}

pub const DEFAULT_ORDER: usize = 32;
pub const DEFAULT_CONSTRAINT_POINTS: usize = 720;
pub const DEFAULT_QUADRATURE: usize = 1024;
/// Total inner iteration budget per start unless the caller sets one.
pub const DEFAULT_INNER_BUDGET: usize = 20_000;

#[derive(Clone, Debug)]
pub struct FourierProblem {
    pub container: ContainerSpec,
    pub order: usize,
    /// Constraint angles `M`.
    pub m: usize,
    /// Objective quadrature nodes `Q`.
    pub q: usize,
    pub p: Exponent,
    pub alpha: f64,
    container_area: f64,
    container_at_m: Vec<f64>,
    container_at_q: Vec<f64>,
    /// Row-major `Q x dim` basis values.
    basis_q: Vec<f64>,
}

impl FourierProblem {
    pub fn new(container: ContainerSpec, order: usize, m: usize, q: usize, p: Exponent, alpha: f64) -> Result<Self> {
        container.validate()?;
        p.validate()?;
        if order == 0 {
            return Err(Error::InvalidInput("Fourier order must be >= 1".into()));
        }
        if m < 3 {
            return Err(Error::InvalidInput(format!("constraint grid needs M >= 3, got {m}")));
        }
        if q < 4 * order {
            return Err(Error::InvalidInput(format!(
                "quadrature needs Q >= 4 * order = {}, got {q}",
                4 * order
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {alpha}")));
        }
        let dim = 2 * order + 1;
        let container_at_m = support_samples(&container, m)?.into_values();
        let container_at_q = support_samples(&container, q)?.into_values();
        let trig = GridTrig::new(q);
        let mut basis_q = vec![0.0; q * dim];
        for j in 0..q {
            basis_row(order, j, &trig, &mut basis_q[j * dim..(j + 1) * dim]);
        }
        let container_area = container.area();
        Ok(Self {
            container,
            order,
            m,
            q,
            p,
            alpha,
            container_area,
            container_at_m,
            container_at_q,
            basis_q,
        })
    }

    pub fn with_defaults(container: ContainerSpec, p: Exponent, alpha: f64) -> Result<Self> {
        Self::new(container, DEFAULT_ORDER, DEFAULT_CONSTRAINT_POINTS, DEFAULT_QUADRATURE, p, alpha)
    }

    pub fn dim(&self) -> usize {
        2 * self.order + 1
    }

    pub fn container_area(&self) -> f64 {
        self.container_area
    }

    pub fn target_area(&self) -> f64 {
        self.alpha * self.container_area
    }

    fn check_shape(&self, shape: &FourierShape) -> Result<()> {
        if shape.order() != self.order {
            return Err(Error::SizeMismatch {
                expected: self.dim(),
                got: shape.dim(),
            });
        }
        Ok(())
    }

    fn powered(&self, p: f64, x: &[f64], grad: &mut [f64]) -> f64 {
        let dim = self.dim();
        let w = 2.0 * PI / self.q as f64;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut value = 0.0;
        for j in 0..self.q {
            let row = &self.basis_q[j * dim..(j + 1) * dim];
            let h: f64 = row.iter().zip(x).map(|(b, c)| b * c).sum();
            let gap = (self.container_at_q[j] - h).max(0.0);
            if gap > 0.0 {
                let pow = crate::solve::pow_real(gap, p - 1.0);
                value += pow * gap;
                let s = -w * p * pow;
                for (g, b) in grad.iter_mut().zip(row) {
                    *g += s * b;
                }
            }
        }
        w * value
    }

    /// Adds `scale * sum_q w p (p-1) gap^(p-2) b_q b_q^T` (row-major) to `out`;
    /// the gap is floored so that `p < 2` stays bounded.
    fn powered_curvature(&self, p: f64, x: &[f64], scale: f64, out: &mut [f64]) {
        if p <= 1.0 {
            return;
        }
        let dim = self.dim();
        let w = 2.0 * PI / self.q as f64;
        let floor = 1e-6 * self.container_at_q.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
        for j in 0..self.q {
            let row = &self.basis_q[j * dim..(j + 1) * dim];
            let h: f64 = row.iter().zip(x).map(|(b, c)| b * c).sum();
            let gap = self.container_at_q[j] - h;
            if gap <= 0.0 {
                continue;
            }
            let c = scale * w * p * (p - 1.0) * crate::solve::pow_real(gap.max(floor), p - 2.0);
            for (a, &ba) in row.iter().enumerate() {
                let line = &mut out[a * dim..(a + 1) * dim];
                for (o, &bb) in line.iter_mut().zip(row) {
                    *o += c * ba * bb;
                }
            }
        }
    }
}

/// `cos` and `sin` of the angles of an `n`-point grid. `k theta_j` is again
/// a grid angle, so Fourier bases on the grid are table lookups: exact
/// periodicity, and no `sin`/`cos` pairs that the compiler may or may not
/// fuse into a differently rounded `sincos` depending on inlining.
struct GridTrig {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl GridTrig {
    #[inline(never)]
    fn new(n: usize) -> Self {
        let cos = (0..n).map(|j| grid_angle(j, n).cos()).collect();
        let sin = (0..n).map(|j| grid_angle(j, n).sin()).collect();
        Self { cos, sin }
    }

    /// `(cos, sin)` of `theta_{i mod n}`.
    fn at(&self, i: usize) -> (f64, f64) {
        let i = i % self.cos.len();
        (self.cos[i], self.sin[i])
    }
}

/// Basis values at grid node `j`.
fn basis_row(order: usize, j: usize, trig: &GridTrig, out: &mut [f64]) {
    out[0] = 1.0;
    for k in 1..=order {
        let (c, s) = trig.at(k * j);
        out[k] = c;
        out[order + k] = s;
    }
}

/// Inclusion rows `h(theta_k) <= h_Omega(theta_k)` and convexity rows
/// `-(h'' + h)(theta_k) <= 0` over the packed coefficients.
pub fn assemble_linear_constraints(prob: &FourierProblem) -> (Vec<LinearConstraint>, Vec<LinearConstraint>) {
    let dim = prob.dim();
    let order = prob.order;
    let mut row = vec![0.0; dim];
    let mut inclusion = Vec::with_capacity(prob.m);
    let mut convexity = Vec::with_capacity(prob.m);
    let trig = GridTrig::new(prob.m);
    for k in 0..prob.m {
        basis_row(order, k, &trig, &mut row);
        inclusion.push(LinearConstraint::dense(&row, prob.container_at_m[k]));
        let mut curv = vec![0.0; dim];
        curv[0] = -1.0;
        for j in 1..=order {
            let w = 1.0 - (j * j) as f64;
            curv[j] = -w * row[j];
            curv[order + j] = -w * row[order + j];
        }
        convexity.push(LinearConstraint::dense(&curv, 0.0));
    }
    (inclusion, convexity)
}

/// Powered objective `integral max(h_Omega - h, 0)^p` over `Q` nodes and its gradient.
pub fn fourier_objective(shape: &FourierShape, prob: &FourierProblem) -> Result<(f64, Vec<f64>)> {
    prob.check_shape(shape)?;
    let p = prob.p.finite().ok_or(Error::InfiniteExponent)?;
    let mut grad = vec![0.0; prob.dim()];
    let v = prob.powered(p, &shape.to_coeffs(), &mut grad);
    Ok((v, grad))
}

/// Samples `h(theta_k)` on an `n`-point grid.
pub fn fourier_to_nodal(shape: &FourierShape, n: usize) -> Result<SupportSamples> {
    SupportSamples::from_fn(n, |t| shape.eval(t))
}

/// Plain truncation of the container's support function.
pub fn truncated_container(prob: &FourierProblem) -> Result<FourierShape> {
    let samples = support_samples(&prob.container, 4096.max(8 * prob.order))?;
    FourierShape::fit(&samples, prob.order)
}

struct Anchor {
    /// Translation coefficients `(a_1, b_1)` kept fixed during scaling.
    centered: Vec<f64>,
    shift: Vec<f64>,
}

impl Anchor {
    fn from_coeffs(order: usize, x: &[f64]) -> Self {
        let mut shift = vec![0.0; x.len()];
        shift[1] = x[1];
        shift[order + 1] = x[order + 1];
        let centered = x.iter().zip(&shift).map(|(c, s)| c - s).collect();
        Self { centered, shift }
    }

    fn at(&self, scale: f64) -> Vec<f64> {
        self.shift.iter().zip(&self.centered).map(|(s, c)| s + scale * c).collect()
    }
}

/// Largest scale keeping `shift + scale * centered` inside the container at the constraint angles.
fn max_inclusion_scale(prob: &FourierProblem, inclusion: &[LinearConstraint], anchor: &Anchor) -> f64 {
    let mut best = f64::INFINITY;
    for row in inclusion {
        let base = -row.value(&anchor.shift);
        let c = row.value(&anchor.centered) + row.rhs;
        if c > 0.0 {
            best = best.min(base / c);
        }
    }
    let _ = prob;
    best.max(0.0)
}

fn is_feasible(rows: &[LinearConstraint], x: &[f64], tol: f64) -> bool {
    rows.iter().all(|r| r.value(x) <= tol)
}

/// Fejer-smoothed container truncation, shrunk about its Steiner point until
/// included at the constraint angles and scaled to the target area.
fn anchor_coeffs(prob: &FourierProblem, inclusion: &[LinearConstraint]) -> Result<Vec<f64>> {
    let mut shape = truncated_container(prob)?;
    let order = prob.order;
    for k in 1..=order {
        let w = 1.0 - k as f64 / (order + 1) as f64;
        shape.a[k] *= w;
        shape.b[k - 1] *= w;
    }
    Ok(scale_to_target(prob, inclusion, &shape.to_coeffs()))
}

fn scale_to_target(prob: &FourierProblem, inclusion: &[LinearConstraint], x: &[f64]) -> Vec<f64> {
    let anchor = Anchor::from_coeffs(prob.order, x);
    let mut g = vec![0.0; x.len()];
    let area = packed_area(prob.order, &anchor.centered, &mut g);
    let limit = max_inclusion_scale(prob, inclusion, &anchor);
    let wanted = if area > 0.0 {
        (prob.target_area() / area).sqrt()
    } else {
        0.0
    };
    anchor.at(wanted.min(limit))
}

/// Anchor plus a random coefficient perturbation, halved until feasible.
fn random_coeffs(
    prob: &FourierProblem,
    inclusion: &[LinearConstraint],
    convexity: &[LinearConstraint],
    anchor: &[f64],
    rng: &mut impl Rng,
) -> Vec<f64> {
    let order = prob.order;
    let amp = 0.3 * anchor[0].abs().max(1e-3);
    let mut pert = vec![0.0; anchor.len()];
    for k in 2..=order {
        let s = amp / (k * k) as f64;
        pert[k] = rng.gen_range(-s..=s);
        pert[order + k] = rng.gen_range(-s..=s);
    }
    let tol = 1e-12 * anchor[0].abs().max(1.0);
    let mut t = 1.0;
    for _ in 0..30 {
        let x: Vec<f64> = anchor.iter().zip(&pert).map(|(a, d)| a + t * d).collect();
        if is_feasible(convexity, &x, tol) {
            let scaled = scale_to_target(prob, inclusion, &x);
            if is_feasible(inclusion, &scaled, tol) && is_feasible(convexity, &scaled, tol) {
                return scaled;
            }
        }
        t *= 0.5;
    }
    anchor.to_vec()
}

/// Multistart solve of the Fourier problem: start 0 is the anchor, the rest
/// are random feasible perturbations of it.
pub fn solve_fourier(prob: &FourierProblem, opts: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    let p = prob.p.finite().ok_or(Error::InfiniteExponent)?;
    let order = prob.order;
    let dim = prob.dim();
    if prob.alpha == 1.0 {
        let shape = truncated_container(prob)?;
        return Ok(SolveResult {
            method: Method::Fourier,
            p: prob.p,
            alpha: 1.0,
            shape: support_samples(&prob.container, prob.m)?,
            fourier: Some(shape),
            powered: 0.0,
            energy: 0.0,
            residuals: Residuals::default(),
            kkt: None,
            history: Vec::new(),
            status: SolveStatus::Converged,
            wall_time: started.elapsed(),
            base_seed: opts.base_seed,
            best_start: 0,
            starts: 0,
        });
    }
    let (inclusion, convexity) = assemble_linear_constraints(prob);
    let anchor = anchor_coeffs(prob, &inclusion)?;
    let mut scratch = vec![0.0; dim];
    let reference = prob.powered(p, &anchor, &mut scratch);
    let scale = if reference > 1e-300 { 1.0 / reference } else { 1.0 };
    let form = opts.objective_form;
    let target = prob.target_area();
    let omega = prob.container_area;

    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let v = prob.powered(p, x, g);
        match form {
            ObjectiveForm::Powered => {
                g.iter_mut().for_each(|gi| *gi *= scale);
                v * scale
            }
            ObjectiveForm::Rooted => {
                let s = v * scale;
                if s <= 0.0 {
                    g.iter_mut().for_each(|gi| *gi = 0.0);
                    return 0.0;
                }
                let r = s.powf(1.0 / p);
                let factor = r / (p * s) * scale;
                g.iter_mut().for_each(|gi| *gi *= factor);
                r
            }
        }
    };
    let equality = |x: &[f64], g: &mut [f64]| -> f64 {
        let a = packed_area(order, x, g);
        g.iter_mut().for_each(|gi| *gi /= omega);
        (a - target) / omega
    };
    let mut rows = inclusion.clone();
    rows.extend(convexity.iter().cloned());
    let problem = NlpProblem::new(dim, objective)
        .with_inequalities(rows)
        .with_equality(equality)
        .with_curvature(|x: &[f64], out: &mut [f64]| prob.powered_curvature(p, x, scale, out));

    // iterations here cost ~50x a nodal one; the slow saddle escapes seen on
    // polygonal containers would otherwise dominate the run time
    let params = SolverParams {
        max_total_inner: opts.solver.max_total_inner.or(Some(DEFAULT_INNER_BUDGET)),
        ..opts.solver.clone()
    };
    let starts = opts.seeds.max(1);
    let outcomes = run_starts(starts, |i| {
        let x0 = if i == 0 {
            anchor.clone()
        } else {
            random_coeffs(prob, &inclusion, &convexity, &anchor, &mut start_rng(opts.base_seed, i))
        };
        let nlp = solve_nlp(&problem, &x0, &params)?;
        let mut g = vec![0.0; dim];
        let powered = prob.powered(p, &nlp.x, &mut g);
        Ok(StartOutcome {
            index: i,
            nlp,
            score: powered.max(0.0).powf(1.0 / p),
            powered,
        })
    });
    let best = pick_best(outcomes)?;
    let shape = FourierShape::from_coeffs(order, &best.nlp.x);
    let samples = fourier_to_nodal(&shape, prob.m)?;
    let (area, _) = fourier_area(&shape);
    let residuals = Residuals {
        inclusion: inclusion.iter().map(|r| r.value(&best.nlp.x)).fold(0.0, f64::max),
        convexity: convexity
            .iter()
            .map(|r| -r.value(&best.nlp.x))
            .fold(f64::INFINITY, f64::min),
        area: (area - target) / omega,
    };
    Ok(SolveResult {
        method: Method::Fourier,
        p: prob.p,
        alpha: prob.alpha,
        shape: samples,
        fourier: Some(shape),
        powered: best.powered,
        energy: best.score,
        residuals,
        kkt: Some(best.nlp.kkt),
        status: status_of(&best.nlp),
        history: best.nlp.history,
        wall_time: started.elapsed(),
        base_seed: opts.base_seed,
        best_start: best.index,
        starts,
    })
}
