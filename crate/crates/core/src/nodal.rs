//! Nodal discretization: the unknowns are support values `h_k` on the
//! uniform grid, with the exact discrete convexity condition
//! `h_{k+1} + h_{k-1} - 2 h_k cos(2 pi / N) >= 0` and the discrete area
//!
//! ```text
//! |w| = (pi/N) / (2 - 2 cos(2 pi/N)) * sum_k h_k (h_{k+1} + h_{k-1} - 2 h_k cos(2 pi/N))
//! ```
//!
//! which is `(step/2) cot(step/2)` times the area of the circumscribed polygon
//! with normals `u(theta_k)`, so it is monotone under inclusion of convex samples.
//!
//! `|Omega|` is the discrete area of the container samples: `alpha = 1` then
//! means exactly `omega = Omega` on the grid, and every target is attainable.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{grid_angle, support_samples, ContainerSpec, SupportSamples};
use crate::nlp::{solve_nlp, LinearConstraint, NlpProblem};
use crate::solve::{
    pick_best, run_starts, start_rng, status_of, Exponent, Method, ObjectiveForm, Residuals,
    SolveOptions, SolveResult, SolveStatus, StartOutcome,
};

/// Scaled area residual accepted as satisfying the equality.
pub const AREA_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct NodalProblem {
    pub container: ContainerSpec,
    pub n: usize,
    pub p: Exponent,
    pub alpha: f64,
    container_samples: SupportSamples,
    container_area: f64,
}

impl NodalProblem {
    pub fn new(container: ContainerSpec, n: usize, p: Exponent, alpha: f64) -> Result<Self> {
        container.validate()?;
        p.validate()?;
        if n < 3 {
            return Err(Error::InvalidInput(format!("nodal grid needs N >= 3, got {n}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {alpha}")));
        }
        let container_samples = support_samples(&container, n)?;
        let container_area = area_of(container_samples.values());
        Ok(Self {
            container,
            n,
            p,
            alpha,
            container_samples,
            container_area,
        })
    }

    pub fn container_samples(&self) -> &SupportSamples {
        &self.container_samples
    }

    /// Discrete container area `|Omega|` on this grid.
    pub fn container_area(&self) -> f64 {
        self.container_area
    }

    pub fn target_area(&self) -> f64 {
        self.alpha * self.container_area
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.container.clone(), self.n, self.p, alpha)
    }

    pub fn with_p(&self, p: Exponent) -> Result<Self> {
        Self::new(self.container.clone(), self.n, p, self.alpha)
    }
}

fn check_len(h: &SupportSamples, prob: &NodalProblem) -> Result<()> {
    if h.n() != prob.n {
        return Err(Error::SizeMismatch {
            expected: prob.n,
            got: h.n(),
        });
    }
    Ok(())
}

/// `(2 pi / N) sum max(H_k - h_k, 0)^p` and its gradient.
pub(crate) fn powered_gap(container: &[f64], h: &[f64], p: f64, grad: &mut [f64]) -> f64 {
    let w = 2.0 * PI / h.len() as f64;
    let mut value = 0.0;
    for k in 0..h.len() {
        let gap = (container[k] - h[k]).max(0.0);
        if gap > 0.0 {
            let pow = crate::solve::pow_real(gap, p - 1.0);
            value += pow * gap;
            grad[k] = -w * p * pow;
        } else {
            grad[k] = 0.0;
        }
    }
    w * value
}

/// Discrete area and its gradient `K (2 h_{k+1} + 2 h_{k-1} - 4 cos h_k)`.
pub(crate) fn area_with_grad(h: &[f64], grad: &mut [f64]) -> f64 {
    let n = h.len();
    let c = (2.0 * PI / n as f64).cos();
    let k = (PI / n as f64) / (2.0 - 2.0 * c);
    let mut sum = 0.0;
    for j in 0..n {
        let (next, prev) = (h[(j + 1) % n], h[(j + n - 1) % n]);
        sum += h[j] * (next + prev - 2.0 * c * h[j]);
        grad[j] = k * (2.0 * next + 2.0 * prev - 4.0 * c * h[j]);
    }
    k * sum
}

pub(crate) fn area_of(h: &[f64]) -> f64 {
    let mut g = vec![0.0; h.len()];
    area_with_grad(h, &mut g)
}

/// Powered objective and gradient; `p = inf` must go through [`solve_minimax`].
pub fn nodal_objective(h: &SupportSamples, prob: &NodalProblem) -> Result<(f64, Vec<f64>)> {
    check_len(h, prob)?;
    let p = prob.p.finite().ok_or(Error::InfiniteExponent)?;
    let mut grad = vec![0.0; prob.n];
    let v = powered_gap(prob.container_samples.values(), h.values(), p, &mut grad);
    Ok((v, grad))
}

pub fn nodal_area(h: &SupportSamples) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; h.n()];
    let a = area_with_grad(h.values(), &mut grad);
    (a, grad)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodalResiduals {
    /// `h_Omega(theta_k) - h_k`, nonnegative when included.
    pub inclusion: Vec<f64>,
    pub convexity: Vec<f64>,
    /// `(area - target) / |Omega|`.
    pub area: f64,
}

impl NodalResiduals {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.inclusion.iter().all(|&r| r >= -tol)
            && self.convexity.iter().all(|&c| c >= -tol)
            && self.area.abs() <= AREA_TOLERANCE.max(tol)
    }

    pub fn summary(&self) -> Residuals {
        Residuals {
            inclusion: self.inclusion.iter().fold(0.0_f64, |m, &r| m.max(-r)),
            convexity: self.convexity.iter().copied().fold(f64::INFINITY, f64::min),
            area: self.area,
        }
    }
}

pub fn nodal_constraints(h: &SupportSamples, prob: &NodalProblem) -> Result<NodalResiduals> {
    check_len(h, prob)?;
    let inclusion = prob
        .container_samples
        .values()
        .iter()
        .zip(h.values())
        .map(|(c, v)| c - v)
        .collect();
    let area = (area_of(h.values()) - prob.target_area()) / prob.container_area;
    Ok(NodalResiduals {
        inclusion,
        convexity: h.convexity_residuals(),
        area,
    })
}

/// How multistart initial shapes are produced.
#[derive(Clone, Debug, PartialEq)]
pub enum InitPolicy {
    /// `seeds` random feasible shapes.
    Random,
    /// The container scaled about its Steiner point, then `seeds - 1` random shapes.
    AnchorAndRandom,
    /// A single given start.
    Warm(SupportSamples),
    /// The given starts followed by the same `seeds` random shapes that
    /// `Random` draws, so the result is never worse than a cold solve.
    WarmAndRandom(Vec<SupportSamples>),
}

/// Translation part `<s, u_k>` with `s` the discrete Steiner point.
fn steiner_part(container: &[f64]) -> Vec<f64> {
    let n = container.len();
    let (mut sx, mut sy) = (0.0, 0.0);
    for (k, h) in container.iter().enumerate() {
        let t = grid_angle(k, n);
        sx += h * t.cos();
        sy += h * t.sin();
    }
    sx *= 2.0 / n as f64;
    sy *= 2.0 / n as f64;
    (0..n)
        .map(|k| {
            let t = grid_angle(k, n);
            sx * t.cos() + sy * t.sin()
        })
        .collect()
}

/// Container scaled about its Steiner point to the target area.
pub fn anchor_start(prob: &NodalProblem) -> SupportSamples {
    let container = prob.container_samples.values();
    let shift = steiner_part(container);
    let centered: Vec<f64> = container.iter().zip(&shift).map(|(h, s)| h - s).collect();
    let area = area_of(&centered);
    let scale = if area > 0.0 {
        (prob.target_area() / area).sqrt().min(1.0)
    } else {
        0.0
    };
    let values = shift.iter().zip(&centered).map(|(s, c)| s + scale * c).collect();
    SupportSamples::new(values).expect("finite container samples")
}

/// Random feasible start: `u_k h_Omega(theta_k)` with `u_k ~ U[0.3, 1]` (about
/// the Steiner point), convexified by local averaging, then brought to the
/// target area by shrinking or by blending towards the container.
pub fn random_start(prob: &NodalProblem, rng: &mut impl Rng) -> SupportSamples {
    let container = prob.container_samples.values();
    let n = container.len();
    let shift = steiner_part(container);
    let outer: Vec<f64> = container.iter().zip(&shift).map(|(h, s)| h - s).collect();
    let mut g: Vec<f64> = outer.iter().map(|o| rng.gen_range(0.3..=1.0) * o).collect();
    let cos = (2.0 * PI / n as f64).cos();
    if cos > 0.0 {
        for _ in 0..10 * n {
            let mut changed = false;
            for k in 0..n {
                let avg = (g[(k + 1) % n] + g[(k + n - 1) % n]) / (2.0 * cos);
                if avg < g[k] {
                    g[k] = avg;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    let convex = |v: &[f64]| SupportSamples::new(v.to_vec()).map(|s| s.is_convex()).unwrap_or(false);
    if !convex(&g) {
        // fall back towards the (convex) container
        let mut w = 0.0;
        while !convex(&g) && w < 1.0 {
            w = (w + 0.1_f64).min(1.0);
            g = g.iter().zip(&outer).map(|(a, o)| (1.0 - w) * a + w * o).collect();
        }
    }
    let target = prob.target_area();
    let area = area_of(&g);
    if area > target {
        let s = if area > 0.0 { (target / area).sqrt() } else { 0.0 };
        g.iter_mut().for_each(|v| *v *= s);
    } else if area < target {
        let blend = |w: f64| -> Vec<f64> { g.iter().zip(&outer).map(|(a, o)| (1.0 - w) * a + w * o).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        if area_of(&blend(1.0)) <= target {
            lo = 1.0;
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if area_of(&blend(mid)) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        g = blend(if lo == 1.0 { 1.0 } else { 0.5 * (lo + hi) });
    }
    let values = g.iter().zip(&shift).map(|(a, s)| a + s).collect();
    SupportSamples::new(values).expect("finite random start")
}

fn starts_for(prob: &NodalProblem, init: &InitPolicy, seeds: usize) -> Result<Vec<StartSpec>> {
    let seeds = seeds.max(1);
    let starts = match init {
        InitPolicy::Random => (0..seeds).map(StartSpec::Random).collect(),
        InitPolicy::AnchorAndRandom => std::iter::once(StartSpec::Anchor)
            .chain((1..seeds).map(StartSpec::Random))
            .collect(),
        InitPolicy::Warm(h) => {
            check_len(h, prob)?;
            vec![StartSpec::Given(h.clone())]
        }
        InitPolicy::WarmAndRandom(hs) => {
            for h in hs {
                check_len(h, prob)?;
            }
            hs.iter()
                .cloned()
                .map(StartSpec::Given)
                .chain((0..seeds).map(StartSpec::Random))
                .collect()
        }
    };
    Ok(starts)
}

#[derive(Clone, Debug)]
enum StartSpec {
    Anchor,
    Random(usize),
    Given(SupportSamples),
}

impl StartSpec {
    fn realize(&self, prob: &NodalProblem, base_seed: u64) -> SupportSamples {
        match self {
            StartSpec::Anchor => anchor_start(prob),
            StartSpec::Random(i) => random_start(prob, &mut start_rng(base_seed, *i)),
            StartSpec::Given(h) => h.clone(),
        }
    }
}

pub(crate) fn inclusion_rows(container: &[f64]) -> Vec<LinearConstraint> {
    container
        .iter()
        .enumerate()
        .map(|(k, &hk)| LinearConstraint::new(vec![(k, 1.0)], hk))
        .collect()
}

/// Weight of the convexity rows: the solver's feasibility tolerance then
/// bounds `-c_k` by a tenth of itself, inside the convexity acceptance
/// tolerance of [`SupportSamples::is_convex`].
const CONVEXITY_ROW_WEIGHT: f64 = 10.0;

pub(crate) fn convexity_rows(n: usize) -> Vec<LinearConstraint> {
    let w = CONVEXITY_ROW_WEIGHT;
    let c2 = 2.0 * (2.0 * PI / n as f64).cos();
    (0..n)
        .map(|k| {
            LinearConstraint::new(
                vec![((k + 1) % n, -w), ((k + n - 1) % n, -w), (k, w * c2)],
                0.0,
            )
        })
        .collect()
}

fn trivial_full_result(prob: &NodalProblem, method: Method, started: Instant) -> SolveResult {
    SolveResult {
        method,
        p: prob.p,
        alpha: prob.alpha,
        shape: prob.container_samples.clone(),
        fourier: None,
        powered: 0.0,
        energy: 0.0,
        residuals: nodal_constraints(&prob.container_samples, prob)
            .map(|r| r.summary())
            .unwrap_or_default(),
        kkt: None,
        history: Vec::new(),
        status: SolveStatus::Converged,
        wall_time: started.elapsed(),
        base_seed: 0,
        best_start: 0,
        starts: 0,
    }
}

/// Multistart solve of the nodal problem for finite `p`.
pub fn solve_nodal(prob: &NodalProblem, init: &InitPolicy, opts: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    let p = prob.p.finite().ok_or(Error::InfiniteExponent)?;
    if prob.alpha == 1.0 {
        let mut r = trivial_full_result(prob, Method::Nodal, started);
        r.base_seed = opts.base_seed;
        return Ok(r);
    }
    let n = prob.n;
    let container = prob.container_samples.values().to_vec();
    let target = prob.target_area();
    let omega = prob.container_area;
    let anchor = anchor_start(prob);
    let mut scratch = vec![0.0; n];
    let reference = powered_gap(&container, anchor.values(), p, &mut scratch);
    let scale = if reference > 1e-300 { 1.0 / reference } else { 1.0 };
    let form = opts.objective_form;

    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let v = powered_gap(&container, x, p, g);
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
        let a = area_with_grad(x, g);
        g.iter_mut().for_each(|gi| *gi /= omega);
        (a - target) / omega
    };
    let mut rows = inclusion_rows(&container);
    rows.extend(convexity_rows(n));
    let problem = NlpProblem::new(n, objective)
        .with_inequalities(rows)
        .with_equality(equality);

    let starts = starts_for(prob, init, opts.seeds)?;
    let outcomes = run_starts(starts.len(), |i| {
        let x0 = starts[i].realize(prob, opts.base_seed);
        let nlp = solve_nlp(&problem, x0.values(), &opts.solver)?;
        let mut g = vec![0.0; n];
        let powered = powered_gap(&container, &nlp.x, p, &mut g);
        Ok(StartOutcome {
            index: i,
            nlp,
            score: powered.max(0.0).powf(1.0 / p),
            powered,
        })
    });
    let best = pick_best(outcomes)?;
    let shape = SupportSamples::new(best.nlp.x.clone())?;
    let residuals = nodal_constraints(&shape, prob)?.summary();
    Ok(SolveResult {
        method: Method::Nodal,
        p: prob.p,
        alpha: prob.alpha,
        powered: best.powered,
        energy: best.score,
        shape,
        fourier: None,
        residuals,
        kkt: Some(best.nlp.kkt),
        status: status_of(&best.nlp),
        history: best.nlp.history,
        wall_time: started.elapsed(),
        base_seed: opts.base_seed,
        best_start: best.index,
        starts: starts.len(),
    })
}

/// Epigraph formulation of the `p = inf` problem: minimize `t` subject to
/// `h_Omega(theta_k) - h_k <= t`, inclusion, convexity and area.
pub fn solve_minimax(prob: &NodalProblem, init: &InitPolicy, opts: &SolveOptions) -> Result<SolveResult> {
    let started = Instant::now();
    if prob.alpha == 1.0 {
        let mut r = trivial_full_result(prob, Method::Minimax, started);
        r.base_seed = opts.base_seed;
        return Ok(r);
    }
    let n = prob.n;
    let container = prob.container_samples.values().to_vec();
    let target = prob.target_area();
    let omega = prob.container_area;

    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[n] = 1.0;
        x[n]
    };
    let equality = |x: &[f64], g: &mut [f64]| -> f64 {
        let a = area_with_grad(&x[..n], &mut g[..n]);
        g[..n].iter_mut().for_each(|gi| *gi /= omega);
        g[n] = 0.0;
        (a - target) / omega
    };
    let mut rows = inclusion_rows(&container);
    rows.extend(convexity_rows(n));
    rows.extend(
        container
            .iter()
            .enumerate()
            .map(|(k, &hk)| LinearConstraint::new(vec![(k, -1.0), (n, -1.0)], -hk)),
    );
    let problem = NlpProblem::new(n + 1, objective)
        .with_inequalities(rows)
        .with_equality(equality)
        .with_slack(n);

    let starts = starts_for(prob, init, opts.seeds)?;
    let outcomes = run_starts(starts.len(), |i| {
        let h0 = starts[i].realize(prob, opts.base_seed);
        let mut x0 = h0.values().to_vec();
        let t0 = container
            .iter()
            .zip(h0.values())
            .fold(f64::NEG_INFINITY, |m, (c, h)| m.max(c - h));
        x0.push(t0);
        let nlp = solve_nlp(&problem, &x0, &opts.solver)?;
        let score = container
            .iter()
            .zip(&nlp.x[..n])
            .fold(f64::NEG_INFINITY, |m, (c, h)| m.max(c - h));
        let powered = nlp.x[n];
        Ok(StartOutcome {
            index: i,
            nlp,
            score,
            powered,
        })
    });
    let best = pick_best(outcomes)?;
    let shape = SupportSamples::new(best.nlp.x[..n].to_vec())?;
    let residuals = nodal_constraints(&shape, prob)?.summary();
    Ok(SolveResult {
        method: Method::Minimax,
        p: Exponent::Infinity,
        alpha: prob.alpha,
        powered: best.powered,
        energy: best.score,
        shape,
        fourier: None,
        residuals,
        kkt: Some(best.nlp.kkt),
        status: status_of(&best.nlp),
        history: best.nlp.history,
        wall_time: started.elapsed(),
        base_seed: opts.base_seed,
        best_start: best.index,
        starts: starts.len(),
    })
}

/// Powered objective of `h` for a finite exponent, on the problem's grid.
pub fn powered_energy(prob: &NodalProblem, h: &SupportSamples, p: f64) -> Result<f64> {
    check_len(h, prob)?;
    let mut g = vec![0.0; prob.n];
    Ok(powered_gap(prob.container_samples.values(), h.values(), p, &mut g))
}

/// Largest gap `max_k (h_Omega(theta_k) - h_k)`.
pub fn sup_gap(prob: &NodalProblem, h: &SupportSamples) -> Result<f64> {
    check_len(h, prob)?;
    Ok(prob
        .container_samples
        .values()
        .iter()
        .zip(h.values())
        .fold(f64::NEG_INFINITY, |m, (c, v)| m.max(c - v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_problem(n: usize, p: Exponent, alpha: f64) -> NodalProblem {
        NodalProblem::new(ContainerSpec::disk(1.0), n, p, alpha).unwrap()
    }

    #[test]
    fn objective_vanishes_on_container() {
        let prob = NodalProblem::new(ContainerSpec::square(1.0), 64, Exponent::Finite(2.0), 0.5).unwrap();
        let (v, g) = nodal_objective(prob.container_samples(), &prob).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_gap_objectives() {
        let prob = disk_problem(100, Exponent::Finite(2.0), 0.25);
        let h = SupportSamples::constant(100, 0.5).unwrap();
        let (v, _) = nodal_objective(&h, &prob).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-12);
        let prob1 = disk_problem(100, Exponent::Finite(1.0), 0.25);
        let (v1, _) = nodal_objective(&h, &prob1).unwrap();
        assert!((v1 - PI).abs() < 1e-12);
    }

    #[test]
    fn infinite_exponent_rejected_by_objective() {
        let prob = disk_problem(16, Exponent::Infinity, 0.25);
        let h = SupportSamples::constant(16, 0.5).unwrap();
        assert!(matches!(nodal_objective(&h, &prob), Err(Error::InfiniteExponent)));
        assert!(matches!(
            solve_nodal(&prob, &InitPolicy::Random, &SolveOptions::default()),
            Err(Error::InfiniteExponent)
        ));
    }

    #[test]
    fn discrete_area_of_constants() {
        for n in [3, 5, 8, 64, 257] {
            let (a, _) = nodal_area(&SupportSamples::constant(n, 1.0).unwrap());
            assert!((a - PI).abs() < 1e-12, "n = {n}");
            let (a, _) = nodal_area(&SupportSamples::constant(n, 0.7).unwrap());
            assert!((a - PI * 0.49).abs() < 1e-12);
        }
    }

    #[test]
    fn discrete_area_of_square() {
        let h = support_samples(&ContainerSpec::square(1.0), 512).unwrap();
        assert!((nodal_area(&h).0 - 4.0).abs() < 5e-4);
    }

    #[test]
    fn residuals_at_known_points() {
        let prob = NodalProblem::new(ContainerSpec::square(1.0), 64, Exponent::Finite(2.0), 1.0).unwrap();
        let r = nodal_constraints(prob.container_samples(), &prob).unwrap();
        assert!(r.inclusion.iter().all(|&x| x.abs() < 1e-15));
        assert!(r.convexity.iter().all(|&c| c >= -1e-12));
        assert!(r.area.abs() < 1e-12);

        let prob = disk_problem(128, Exponent::Finite(2.0), 0.25);
        let h = SupportSamples::constant(128, 0.5).unwrap();
        let r = nodal_constraints(&h, &prob).unwrap();
        assert!(r.inclusion.iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert!(r.convexity.iter().all(|&c| c > 0.0));
        assert!(r.area.abs() < 1e-14);
        assert!(r.is_feasible(1e-12));

        let mut v = vec![0.5; 128];
        v[10] = 0.6;
        let r = nodal_constraints(&SupportSamples::new(v).unwrap(), &prob).unwrap();
        assert!(r.convexity[10] < 0.0);
        assert!(!r.is_feasible(1e-12));
    }

    #[test]
    fn starts_are_feasible() {
        for spec in [
            ContainerSpec::disk(1.0),
            ContainerSpec::square(1.0),
            ContainerSpec::stadium(1.0, 1.0),
        ] {
            let prob = NodalProblem::new(spec, 128, Exponent::Finite(2.0), 0.4).unwrap();
            let anchor = anchor_start(&prob);
            assert!(nodal_constraints(&anchor, &prob).unwrap().is_feasible(1e-9));
            for i in 0..5 {
                let h = random_start(&prob, &mut start_rng(3, i));
                let r = nodal_constraints(&h, &prob).unwrap();
                assert!(r.is_feasible(1e-9), "{:?}", r.summary());
            }
        }
    }

    #[test]
    fn full_area_returns_container() {
        let prob = NodalProblem::new(ContainerSpec::square(1.0), 64, Exponent::Finite(3.0), 1.0).unwrap();
        let r = solve_nodal(&prob, &InitPolicy::Random, &SolveOptions::default()).unwrap();
        assert_eq!(r.energy, 0.0);
        assert_eq!(&r.shape, prob.container_samples());
        let rm = solve_minimax(&prob.with_p(Exponent::Infinity).unwrap(), &InitPolicy::Random, &SolveOptions::default()).unwrap();
        assert_eq!(rm.energy, 0.0);
    }

    #[test]
    fn size_mismatch_rejected() {
        let prob = disk_problem(16, Exponent::Finite(2.0), 0.25);
        let h = SupportSamples::constant(17, 0.5).unwrap();
        assert!(matches!(nodal_objective(&h, &prob), Err(Error::SizeMismatch { .. })));
        assert!(NodalProblem::new(ContainerSpec::disk(1.0), 16, Exponent::Finite(2.0), 1.5).is_err());
    }
}
