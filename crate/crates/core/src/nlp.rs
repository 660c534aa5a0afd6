//! Augmented Lagrangian solver for smooth problems with linear inequalities
//! and one smooth scalar equality.
//!
//! ```text
//! minimize f(x)  subject to  <a_i, x> <= b_i,  c(x) = 0
//! ```
//!
//! Inequalities enter through the squared-hinge (Powell-Hestenes-Rockafellar)
//! term `rho/2 max(0, g_i + lambda_i/rho)^2`, the equality through the
//! classical `mu c + rho/2 c^2`. Each subproblem is minimized by L-BFGS with
//! an Armijo backtracking line search.
//!
//! The L-BFGS initial matrix is the inverse of the penalty Hessian of the
//! currently active rows (plus an optional objective curvature hint),
//! refreshed periodically. Without it the convexity rows, which act like a second
//! difference operator, make the subproblems hopelessly ill-conditioned.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A deterministic smooth function writing its gradient into `grad`.
pub trait SmoothFn: Sync {
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

impl<F> SmoothFn for F
where
    F: Fn(&[f64], &mut [f64]) -> f64 + Sync,
{
    fn eval(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self(x, grad)
    }
}

/// Writes a Hessian estimate into a row-major buffer; see [`NlpProblem::curvature`].
pub type CurvatureHint<'a> = Box<dyn Fn(&[f64], &mut [f64]) + Sync + 'a>;

/// Sparse row meaning `<coeffs, x> <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }

    pub fn dense(row: &[f64], rhs: f64) -> Self {
        Self {
            coeffs: row.iter().copied().enumerate().filter(|(_, a)| *a != 0.0).collect(),
            rhs,
        }
    }

    /// `<a, x> - b`, nonpositive when satisfied.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, a)| a * x[i]).sum::<f64>() - self.rhs
    }

    fn add_scaled_to(&self, scale: f64, out: &mut [f64]) {
        for &(i, a) in &self.coeffs {
            out[i] += scale * a;
        }
    }
}

pub struct NlpProblem<'a> {
    pub dim: usize,
    pub objective: Box<dyn SmoothFn + 'a>,
    pub inequalities: Vec<LinearConstraint>,
    /// Scalar equality `c(x) = 0`.
    pub equality: Option<Box<dyn SmoothFn + 'a>>,
    /// Index of an epigraph slack variable, if the problem has one.
    pub slack: Option<usize>,
    /// Adds a positive semidefinite estimate of the objective Hessian into a
    /// row-major `dim x dim` buffer; used only to shape the preconditioner.
    pub curvature: Option<CurvatureHint<'a>>,
}

impl<'a> NlpProblem<'a> {
    pub fn new(dim: usize, objective: impl SmoothFn + 'a) -> Self {
        Self {
            dim,
            objective: Box::new(objective),
            inequalities: Vec::new(),
            equality: None,
            slack: None,
            curvature: None,
        }
    }

    pub fn with_inequalities(mut self, rows: Vec<LinearConstraint>) -> Self {
        self.inequalities = rows;
        self
    }

    pub fn with_equality(mut self, eq: impl SmoothFn + 'a) -> Self {
        self.equality = Some(Box::new(eq));
        self
    }

    pub fn with_slack(mut self, index: usize) -> Self {
        self.slack = Some(index);
        self
    }

    pub fn with_curvature(mut self, hint: impl Fn(&[f64], &mut [f64]) + Sync + 'a) -> Self {
        self.curvature = Some(Box::new(hint));
        self
    }

    /// `max(|c(x)|, max_i (<a_i,x> - b_i)^+)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .map(|r| r.value(x))
            .fold(0.0_f64, f64::max);
        let eq = match &self.equality {
            Some(c) => {
                let mut g = vec![0.0; self.dim];
                c.eval(x, &mut g).abs()
            }
            None => 0.0,
        };
        ineq.max(eq)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    /// The penalty grows unless the violation measure shrinks below this
    /// fraction of its previous value.
    pub required_decrease: f64,
    pub max_penalty: f64,
    /// Multipliers are clipped to `[-max_multiplier, max_multiplier]`.
    pub max_multiplier: f64,
    /// Inner tolerance at outer iteration `k` is
    /// `max(10^(-inner_tol_offset - k/2), inner_tol_floor)`.
    pub inner_tol_offset: f64,
    pub inner_tol_floor: f64,
    pub kkt_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Budget of inner iterations over the whole solve; `None` leaves only
    /// the per-outer `max_inner` limit. Methods may pick their own default.
    pub max_total_inner: Option<usize>,
    pub memory: usize,
    pub armijo: f64,
    pub backtrack: f64,
    /// Inner iterations between preconditioner rebuilds; 0 disables it.
    pub precondition_every: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            initial_penalty: 10.0,
            penalty_growth: 10.0,
            required_decrease: 0.25,
            max_penalty: 1e8,
            max_multiplier: 1e12,
            inner_tol_offset: 2.0,
            inner_tol_floor: 1e-9,
            kkt_tolerance: 1e-6,
            feasibility_tolerance: 1e-8,
            max_outer: 60,
            max_inner: 5000,
            max_total_inner: None,
            memory: 10,
            armijo: 1e-4,
            backtrack: 0.5,
            precondition_every: 25,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("initial_penalty", self.initial_penalty),
            ("max_penalty", self.max_penalty),
            ("max_multiplier", self.max_multiplier),
            ("inner_tol_floor", self.inner_tol_floor),
            ("kkt_tolerance", self.kkt_tolerance),
            ("feasibility_tolerance", self.feasibility_tolerance),
            ("armijo", self.armijo),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("solver.{name} must be > 0, got {v}")));
            }
        }
        if !(self.penalty_growth > 1.0) {
            return Err(Error::InvalidInput(format!(
                "solver.penalty_growth must be > 1, got {}",
                self.penalty_growth
            )));
        }
        if !(self.required_decrease > 0.0 && self.required_decrease < 1.0) {
            return Err(Error::InvalidInput("solver.required_decrease must be in (0,1)".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) || self.armijo >= 1.0 {
            return Err(Error::InvalidInput("solver line search constants out of range".into()));
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.max_total_inner == Some(0) || self.memory == 0 {
            return Err(Error::InvalidInput("solver iteration limits must be >= 1".into()));
        }
        Ok(())
    }

    fn inner_tolerance(&self, outer: usize) -> f64 {
        10f64
            .powf(-self.inner_tol_offset - outer as f64 / 2.0)
            .max(self.inner_tol_floor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlpStatus {
    Converged,
    MaxIter,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRow {
    pub outer_iter: usize,
    pub inner_iter: usize,
    pub objective: f64,
    pub equality_residual: f64,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Multipliers {
    pub inequalities: Vec<f64>,
    pub equality: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KktReport {
    /// `|grad f + sum lambda_i a_i + mu grad c| / max(1, |grad f|)`.
    pub stationarity: f64,
    pub gradient_norm: f64,
    pub primal_violation: f64,
    /// `max_i |lambda_i * slack_i|`.
    pub complementarity: f64,
}

#[derive(Clone, Debug)]
pub struct NlpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub multipliers: Multipliers,
    pub kkt: KktReport,
    pub max_violation: f64,
    pub history: Vec<HistoryRow>,
    pub status: NlpStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, a| m.max(a.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn check_kkt(problem: &NlpProblem<'_>, x: &[f64], multipliers: &Multipliers) -> KktReport {
    let n = problem.dim;
    let mut grad_f = vec![0.0; n];
    problem.objective.eval(x, &mut grad_f);
    let mut lag = grad_f.clone();
    let mut primal = 0.0_f64;
    let mut complementarity = 0.0_f64;
    for (i, row) in problem.inequalities.iter().enumerate() {
        let g = row.value(x);
        primal = primal.max(g);
        let lambda = multipliers.inequalities.get(i).copied().unwrap_or(0.0);
        if lambda != 0.0 {
            row.add_scaled_to(lambda, &mut lag);
        }
        complementarity = complementarity.max((lambda * g).abs());
    }
    if let Some(eq) = &problem.equality {
        let mut grad_c = vec![0.0; n];
        let c = eq.eval(x, &mut grad_c);
        primal = primal.max(c.abs());
        for (l, gc) in lag.iter_mut().zip(&grad_c) {
            *l += multipliers.equality * gc;
        }
    }
    let gradient_norm = norm2(&grad_f);
    KktReport {
        stationarity: norm2(&lag) / gradient_norm.max(1.0),
        gradient_norm,
        primal_violation: primal,
        complementarity,
    }
}

struct Lagrangian<'p, 'a> {
    problem: &'p NlpProblem<'a>,
    lambda: Vec<f64>,
    mu: f64,
    rho: f64,
    scratch: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Parts {
    objective: f64,
    equality: f64,
    violation: f64,
}

impl Lagrangian<'_, '_> {
    fn eval(&mut self, x: &[f64], grad: &mut [f64]) -> (f64, Parts) {
        let p = self.problem;
        let f = p.objective.eval(x, grad);
        let mut value = f;
        let mut violation = 0.0_f64;
        for (row, &lambda) in p.inequalities.iter().zip(&self.lambda) {
            let g = row.value(x);
            violation = violation.max(g);
            let shifted = g + lambda / self.rho;
            if shifted > 0.0 {
                value += 0.5 * self.rho * shifted * shifted;
                row.add_scaled_to(self.rho * shifted, grad);
            }
            value -= 0.5 * lambda * lambda / self.rho;
        }
        let mut c = 0.0;
        if let Some(eq) = &p.equality {
            self.scratch.iter_mut().for_each(|v| *v = 0.0);
            c = eq.eval(x, &mut self.scratch);
            value += self.mu * c + 0.5 * self.rho * c * c;
            let w = self.mu + self.rho * c;
            for (gi, ci) in grad.iter_mut().zip(&self.scratch) {
                *gi += w * ci;
            }
            violation = violation.max(c.abs());
        }
        (
            value,
            Parts {
                objective: f,
                equality: c,
                violation,
            },
        )
    }
}

/// Cholesky factor of `D + rho * sum_active a a^T + rho * grad c grad c^T`.
struct Preconditioner {
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Preconditioner {
    fn build(lag: &mut Lagrangian<'_, '_>, x: &[f64]) -> Option<Self> {
        let p = lag.problem;
        let n = p.dim;
        let rho = lag.rho;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (row, &lambda) in p.inequalities.iter().zip(&lag.lambda) {
            if row.value(x) + lambda / rho > 0.0 {
                for &(i, a) in &row.coeffs {
                    for &(j, b) in &row.coeffs {
                        m[(i, j)] += rho * a * b;
                    }
                }
            }
        }
        if let Some(eq) = &p.equality {
            lag.scratch.iter_mut().for_each(|v| *v = 0.0);
            eq.eval(x, &mut lag.scratch);
            let gc = DVector::from_column_slice(&lag.scratch);
            m.ger(rho, &gc, &gc, 1.0);
        }
        if let Some(curv) = &p.curvature {
            let mut hint = vec![0.0; n * n];
            curv(x, &mut hint);
            // symmetric, so row-major and column-major agree
            m += DMatrix::from_column_slice(n, n, &hint);
        }
        let top = (0..n).map(|i| m[(i, i)]).fold(0.0_f64, f64::max);
        if !(top > 0.0) || !top.is_finite() {
            return None;
        }
        let floor = 1e-6 * top;
        for i in 0..n {
            m[(i, i)] += floor;
        }
        m.cholesky().map(|factor| Self { factor })
    }

    fn apply(&self, v: &mut [f64]) {
        let mut w = DVector::from_column_slice(v);
        self.factor.solve_mut(&mut w);
        v.copy_from_slice(w.as_slice());
    }
}

enum InnerExit {
    Converged,
    Stalled,
    MaxIter,
}

/// L-BFGS with Armijo backtracking on the current augmented Lagrangian.
fn minimize_inner(
    lag: &mut Lagrangian<'_, '_>,
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    params: &SolverParams,
    outer: usize,
    history: &mut Vec<HistoryRow>,
) -> Result<(InnerExit, usize)> {
    let n = x.len();
    let mut grad = vec![0.0; n];
    let (mut value, mut parts) = lag.eval(x, &mut grad);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("augmented Lagrangian at start of inner solve"));
    }
    let m = params.memory;
    let mut s_hist: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut y_hist: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rho_hist: Vec<f64> = Vec::with_capacity(m);
    let mut alpha_buf = vec![0.0; m];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_grad = vec![0.0; n];
    let mut stall = 0usize;
    let mut precond: Option<Preconditioner> = None;
    let mut hy = vec![0.0; n];

    for it in 0..max_iter {
        if norm_inf(&grad) <= tol {
            return Ok((InnerExit::Converged, it));
        }
        // the curvature pairs stay valid across rebuilds; only H0 changes
        if params.precondition_every > 0 && it % params.precondition_every == 0 {
            precond = Preconditioner::build(lag, x);
        }
        // two-loop recursion
        dir.copy_from_slice(&grad);
        let k = s_hist.len();
        for i in (0..k).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &dir);
            alpha_buf[i] = a;
            for (d, y) in dir.iter_mut().zip(&y_hist[i]) {
                *d -= a * y;
            }
        }
        if let Some(pc) = &precond {
            pc.apply(&mut dir);
            if k > 0 {
                hy.copy_from_slice(&y_hist[k - 1]);
                pc.apply(&mut hy);
                let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &hy);
                dir.iter_mut().for_each(|d| *d *= gamma);
            }
        } else if k > 0 {
            let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for i in 0..k {
            let b = rho_hist[i] * dot(&y_hist[i], &dir);
            for (d, s) in dir.iter_mut().zip(&s_hist[i]) {
                *d += (alpha_buf[i] - b) * s;
            }
        }
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut slope = dot(&grad, &dir);
        let mut steepest = s_hist.is_empty() && precond.is_none();
        if !(slope < 0.0) || !slope.is_finite() {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            precond = None;
            for (d, g) in dir.iter_mut().zip(&grad) {
                *d = -g;
            }
            slope = dot(&grad, &dir);
            steepest = true;
        }
        let mut step = if steepest {
            (1.0 / norm_inf(&grad)).min(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        while step > 1e-20 {
            for i in 0..n {
                trial[i] = x[i] + step * dir[i];
            }
            trial_grad.iter_mut().for_each(|g| *g = 0.0);
            let (tv, tp) = lag.eval(&trial, &mut trial_grad);
            if tv.is_finite() && tv <= value + params.armijo * step * slope {
                accepted = Some((tv, tp));
                break;
            }
            // approximate Wolfe: once decreases drown in roundoff, accept a
            // step whose directional derivative shows progress
            if tv.is_finite() && tv <= value + 1e-13 * value.abs() {
                let trial_slope = dot(&trial_grad, &dir);
                if trial_slope >= 0.9 * slope && trial_slope <= -0.8 * slope {
                    accepted = Some((tv, tp));
                    break;
                }
            }
            step *= params.backtrack;
        }
        let Some((new_value, new_parts)) = accepted else {
            if s_hist.is_empty() {
                return Ok((InnerExit::Stalled, it));
            }
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            continue;
        };
        if trial_grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("objective or constraint gradient"));
        }
        let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| trial_grad[i] - grad[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm2(&s) * norm2(&y) && sy > 0.0 {
            if s_hist.len() == m {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
        }
        let decrease = value - new_value;
        x.copy_from_slice(&trial);
        grad.copy_from_slice(&trial_grad);
        value = new_value;
        parts = new_parts;
        history.push(HistoryRow {
            outer_iter: outer,
            inner_iter: it + 1,
            objective: parts.objective,
            equality_residual: parts.equality,
            max_violation: parts.violation,
        });
        if decrease <= 1e-16 * value.abs().max(1.0) {
            stall += 1;
            if stall >= 5 {
                return Ok((InnerExit::Stalled, it + 1));
            }
        } else {
            stall = 0;
        }
    }
    let _ = parts;
    Ok((InnerExit::MaxIter, max_iter))
}

/// Inner iteration cap per outer step after the total budget is spent.
const RECOVERY_INNER: usize = 200;

/// Augmented Lagrangian outer loop starting from `x0`.
pub fn solve_nlp(problem: &NlpProblem<'_>, x0: &[f64], params: &SolverParams) -> Result<NlpResult> {
    params.validate()?;
    if x0.len() != problem.dim {
        return Err(Error::SizeMismatch {
            expected: problem.dim,
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial point"));
    }
    let n = problem.dim;
    let mut x = x0.to_vec();
    let mut grad0 = vec![0.0; n];
    let f0 = problem.objective.eval(&x, &mut grad0);
    if !f0.is_finite() || grad0.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("objective at initial point"));
    }
    let scale = norm_inf(&grad0).max(1.0);
    let mut lag = Lagrangian {
        problem,
        lambda: vec![0.0; problem.inequalities.len()],
        mu: 0.0,
        rho: params.initial_penalty,
        scratch: vec![0.0; n],
    };
    let mut history = Vec::new();
    let mut prev_measure = f64::INFINITY;
    let mut prev_violation = f64::INFINITY;
    let mut inner_total = 0;
    let mut status = NlpStatus::MaxIter;
    let mut outer_done = 0;
    let mut kkt = check_kkt(problem, &x, &Multipliers::default());
    // lowest-merit feasible iterate, returned if the loop never converges
    let mut best: Option<(f64, Vec<f64>, Multipliers, KktReport)> = None;
    let mut grad_scratch = vec![0.0; n];

    for outer in 0..params.max_outer {
        outer_done = outer + 1;
        let tol = params.inner_tolerance(outer) * scale;
        // once the budget is spent, short solves only to restore feasibility
        let total = params.max_total_inner.unwrap_or(usize::MAX);
        let budget = match total.checked_sub(inner_total) {
            Some(left) if left > 0 => params.max_inner.min(left),
            _ => params.max_inner.min(RECOVERY_INNER),
        };
        let (_, iters) = minimize_inner(&mut lag, &mut x, tol, budget, params, outer, &mut history)?;
        inner_total += iters;
        // Safeguard: an outer step may not increase the violation. Raise the
        // penalty and re-minimize (multipliers unchanged) until it does not.
        let mut violation = problem.max_violation(&x);
        while outer > 0
            && violation > (1.01 * prev_violation).max(params.feasibility_tolerance)
            && lag.rho < params.max_penalty
        {
            lag.rho = (lag.rho * params.penalty_growth).min(params.max_penalty);
            let left = total.saturating_sub(inner_total).max(RECOVERY_INNER);
            let (_, iters) = minimize_inner(&mut lag, &mut x, tol, budget.min(left), params, outer, &mut history)?;
            inner_total += iters;
            violation = problem.max_violation(&x);
        }
        prev_violation = violation;

        let rho = lag.rho;
        let mut measure = 0.0_f64;
        for (row, lambda) in problem.inequalities.iter().zip(lag.lambda.iter_mut()) {
            let g = row.value(&x);
            measure = measure.max(g.max(-*lambda / rho).abs());
            *lambda = (*lambda + rho * g).clamp(0.0, params.max_multiplier);
        }
        if let Some(eq) = &problem.equality {
            lag.scratch.iter_mut().for_each(|v| *v = 0.0);
            let c = eq.eval(&x, &mut lag.scratch);
            measure = measure.max(c.abs());
            lag.mu = (lag.mu + rho * c).clamp(-params.max_multiplier, params.max_multiplier);
        }
        let multipliers = Multipliers {
            inequalities: lag.lambda.clone(),
            equality: lag.mu,
        };
        kkt = check_kkt(problem, &x, &multipliers);
        let feasible = kkt.primal_violation <= params.feasibility_tolerance;
        if feasible {
            // Exact-penalty merit, so iterates that are cheaper only because
            // they sit slightly outside the feasible set do not win; near ties
            // go to the later (better converged) iterate.
            let mut merit = problem.objective.eval(&x, &mut grad_scratch);
            for (row, lambda) in problem.inequalities.iter().zip(&multipliers.inequalities) {
                merit += lambda * row.value(&x).max(0.0);
            }
            if let Some(eq) = &problem.equality {
                merit += multipliers.equality.abs() * eq.eval(&x, &mut grad_scratch).abs();
            }
            if best.as_ref().is_none_or(|b| merit <= b.0 + 1e-10 * b.0.abs().max(1.0)) {
                best = Some((merit, x.clone(), multipliers.clone(), kkt));
            }
        }
        let comp_scale = kkt.gradient_norm.max(1.0);
        if feasible
            && kkt.stationarity <= params.kkt_tolerance
            && kkt.complementarity <= params.kkt_tolerance * comp_scale
        {
            status = NlpStatus::Converged;
            break;
        }
        if outer > 0
            && measure > params.feasibility_tolerance
            && measure > params.required_decrease * prev_measure
        {
            lag.rho = (lag.rho * params.penalty_growth).min(params.max_penalty);
        }
        prev_measure = measure;
        if inner_total >= total && feasible {
            break;
        }
    }
    if status != NlpStatus::Converged {
        if let Some((_, bx, bm, bk)) = best {
            x = bx;
            lag.lambda = bm.inequalities;
            lag.mu = bm.equality;
            kkt = bk;
        }
        if kkt.primal_violation > params.feasibility_tolerance {
            status = NlpStatus::Infeasible;
        }
    }
    let mut g = vec![0.0; n];
    let objective = problem.objective.eval(&x, &mut g);
    Ok(NlpResult {
        objective,
        max_violation: kkt.primal_violation,
        multipliers: Multipliers {
            inequalities: lag.lambda,
            equality: lag.mu,
        },
        kkt,
        x,
        history,
        status,
        outer_iterations: outer_done,
        inner_iterations: inner_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_quadratic() {
        let c = [1.0, 2.0];
        let prob = NlpProblem::new(2, move |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * (x[0] - c[0]);
            g[1] = 2.0 * (x[1] - c[1]);
            (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)
        });
        let res = solve_nlp(&prob, &[0.0, 0.0], &SolverParams::default()).unwrap();
        assert_eq!(res.status, NlpStatus::Converged);
        assert!((res.x[0] - 1.0).abs() < 1e-10 && (res.x[1] - 2.0).abs() < 1e-10);
        assert!(res.kkt.stationarity <= 1e-10);
    }

    #[test]
    fn active_bound_has_unit_multiplier() {
        let prob = NlpProblem::new(1, |x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            x[0]
        })
        .with_inequalities(vec![LinearConstraint::new(vec![(0, -1.0)], 0.0)]);
        let params = SolverParams {
            kkt_tolerance: 1e-10,
            ..Default::default()
        };
        let res = solve_nlp(&prob, &[3.0], &params).unwrap();
        assert_eq!(res.status, NlpStatus::Converged);
        assert!(res.x[0].abs() < 1e-9, "x = {}", res.x[0]);
        assert!((res.multipliers.inequalities[0] - 1.0).abs() < 1e-6);
    }

    fn projection_problem() -> NlpProblem<'static> {
        NlpProblem::new(2, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            g[1] = 2.0 * x[1];
            x[0] * x[0] + x[1] * x[1]
        })
        .with_equality(|x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            g[1] = 1.0;
            x[0] + x[1] - 1.0
        })
    }

    #[test]
    fn symmetric_projection_onto_line() {
        let prob = projection_problem();
        let params = SolverParams {
            kkt_tolerance: 1e-10,
            ..Default::default()
        };
        let res = solve_nlp(&prob, &[2.0, -3.0], &params).unwrap();
        assert_eq!(res.status, NlpStatus::Converged);
        assert!((res.x[0] - 0.5).abs() < 1e-8 && (res.x[1] - 0.5).abs() < 1e-8);
        let report = check_kkt(&prob, &res.x, &res.multipliers);
        assert!(report.stationarity <= 1e-8);
        assert!(report.primal_violation <= 1e-8);
        assert!(report.complementarity <= 1e-8);
    }

    #[test]
    fn kkt_flags_interior_point_of_active_bound_problem() {
        let prob = NlpProblem::new(1, |x: &[f64], g: &mut [f64]| {
            g[0] = 1.0;
            x[0]
        })
        .with_inequalities(vec![LinearConstraint::new(vec![(0, -1.0)], 0.0)]);
        let report = check_kkt(&prob, &[0.731], &Multipliers::default());
        assert!((report.stationarity - 1.0).abs() < 1e-15);
        assert_eq!(report.primal_violation, 0.0);
    }

    #[test]
    fn kkt_residual_equals_small_gradient_norm() {
        // f = 0.1 |x|^2 at a feasible point with zero multipliers
        let prob = NlpProblem::new(2, |x: &[f64], g: &mut [f64]| {
            g[0] = 0.2 * x[0];
            g[1] = 0.2 * x[1];
            0.1 * (x[0] * x[0] + x[1] * x[1])
        })
        .with_inequalities(vec![LinearConstraint::new(vec![(0, 1.0), (1, 1.0)], 5.0)]);
        let x = [1.0, 2.0];
        let report = check_kkt(&prob, &x, &Multipliers::default());
        let expected = (0.2f64 * 0.2 + 0.4 * 0.4).sqrt();
        assert!((report.stationarity - expected).abs() < 1e-15);
        assert!(report.stationarity > 0.0);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let prob = projection_problem();
        assert!(matches!(
            solve_nlp(&prob, &[f64::NAN, 0.0], &SolverParams::default()),
            Err(Error::NonFinite(_))
        ));
        let bad = NlpProblem::new(1, |x: &[f64], g: &mut [f64]| {
            g[0] = f64::NAN;
            x[0]
        });
        assert!(matches!(
            solve_nlp(&bad, &[1.0], &SolverParams::default()),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn infeasible_constraints_reported() {
        let prob = NlpProblem::new(1, |x: &[f64], g: &mut [f64]| {
            g[0] = 2.0 * x[0];
            x[0] * x[0]
        })
        .with_inequalities(vec![
            LinearConstraint::new(vec![(0, 1.0)], -1.0),
            LinearConstraint::new(vec![(0, -1.0)], -1.0),
        ]);
        let params = SolverParams {
            max_outer: 15,
            ..Default::default()
        };
        let res = solve_nlp(&prob, &[0.0], &params).unwrap();
        assert_eq!(res.status, NlpStatus::Infeasible);
    }

    #[test]
    fn history_is_deterministic() {
        let prob = projection_problem();
        let a = solve_nlp(&prob, &[2.0, -3.0], &SolverParams::default()).unwrap();
        let b = solve_nlp(&prob, &[2.0, -3.0], &SolverParams::default()).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.x, b.x);
    }

    #[test]
    fn params_validation() {
        let p = SolverParams {
            penalty_growth: 1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(SolverParams::default().validate().is_ok());
    }
}
