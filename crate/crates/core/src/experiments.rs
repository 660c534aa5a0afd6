//! Scripted studies: the `p -> inf` sweep, Fourier-vs-nodal comparison, the
//! `f(alpha)` curve, the area/energy dual problem, polygonality of free
//! boundaries and the triangle candidate probe.
//!
//! Every study is a pure function of its configuration and base seed; grid
//! cells run concurrently and are collected in input order.

use std::fmt;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{fourier_to_nodal, FourierProblem, DEFAULT_CONSTRAINT_POINTS, DEFAULT_ORDER, DEFAULT_QUADRATURE};
use crate::geometry::{
    hausdorff_from_supports, perimeter_from_support, support_samples, ContainerSpec, SupportSamples,
};
use crate::io::{fmt_float, StudyTable};
use crate::nlp::{solve_nlp, NlpProblem, NlpResult, NlpStatus};
use crate::nodal::{
    area_of, area_with_grad, convexity_rows, inclusion_rows, powered_energy, powered_gap, solve_minimax,
    random_start, solve_nodal, sup_gap, InitPolicy, NodalProblem,
};
use crate::oracles::{triangle_conjecture_candidate, TriangleCandidate};
use crate::solve::{normalized_energy, start_rng, Exponent, Method, SolveOptions, SolveResult, SolveStatus};

/// Grid sizes of both methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Discretization {
    /// Nodal grid size.
    pub n: usize,
    /// Fourier order.
    pub n_f: usize,
    /// Fourier constraint angles.
    pub m: usize,
    /// Fourier quadrature points.
    pub q: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Self {
            n: 256,
            n_f: DEFAULT_ORDER,
            m: DEFAULT_CONSTRAINT_POINTS,
            q: DEFAULT_QUADRATURE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StudyKind {
    GammaSweep,
    AlphaSweep,
    CompareMethods,
    FCurve,
    Equivalence,
    Polygonality,
    Triangle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub container: ContainerSpec,
    pub alphas: Vec<f64>,
    pub ps: Vec<Exponent>,
    pub grid: Discretization,
    pub options: SolveOptions,
    pub output_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(kind: StudyKind, container: ContainerSpec, alphas: Vec<f64>, ps: Vec<Exponent>) -> Self {
        Self {
            kind,
            container,
            alphas,
            ps,
            grid: Discretization::default(),
            options: SolveOptions::default(),
            output_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.container.validate()?;
        if self.alphas.is_empty() || self.ps.is_empty() {
            return Err(Error::InvalidInput("study needs at least one alpha and one p".into()));
        }
        for &a in &self.alphas {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidInput(format!("alpha must lie in [0,1], got {a}")));
            }
        }
        for p in &self.ps {
            p.validate()?;
        }
        if self.grid.n < 3 || self.grid.n_f == 0 || self.grid.m < 3 || self.grid.q < 3 {
            return Err(Error::InvalidInput(format!("discretization out of range: {:?}", self.grid)));
        }
        self.options.solver.validate()?;
        if let Some(dir) = &self.output_dir {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            tempfile::tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
        }
        Ok(())
    }
}

/// Outcome of one grid cell; failures are kept so a sweep can continue.
#[derive(Clone, Debug, PartialEq)]
pub enum CellStatus {
    Converged,
    MaxIter,
    Failed(String),
}

impl CellStatus {
    fn of<T>(r: &std::result::Result<T, String>, status: impl Fn(&T) -> SolveStatus) -> Self {
        match r {
            Ok(v) => match status(v) {
                SolveStatus::Converged => CellStatus::Converged,
                SolveStatus::MaxIter => CellStatus::MaxIter,
            },
            Err(e) => CellStatus::Failed(e.clone()),
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Converged => f.write_str("converged"),
            CellStatus::MaxIter => f.write_str("max_iter"),
            // keep the CSV cell free of separators
            CellStatus::Failed(e) => write!(f, "failed: {}", e.replace([',', '\n', '"'], " ")),
        }
    }
}

/// Fixed replication containers: unit disk, `[-1,1]^2`, stadium(1,1), an
/// equilateral triangle with circumradius 1, and an irregular pentagon.
pub fn replication_containers() -> Vec<(&'static str, ContainerSpec)> {
    let s = 3f64.sqrt();
    vec![
        ("disk", ContainerSpec::disk(1.0)),
        ("square", ContainerSpec::square(1.0)),
        ("stadium", ContainerSpec::stadium(1.0, 1.0)),
        ("triangle", ContainerSpec::polygon(&[[1.0, 0.0], [-0.5, 0.5 * s], [-0.5, -0.5 * s]])),
        (
            "pentagon",
            ContainerSpec::polygon(&[[1.0, 0.0], [0.4, 0.9], [-0.7, 0.8], [-0.9, -0.3], [0.2, -1.0]]),
        ),
    ]
}

/// One solve: Fourier, nodal (minimax when `p = inf`) or minimax.
pub fn solve_cell(
    container: &ContainerSpec,
    p: Exponent,
    alpha: f64,
    method: Method,
    grid: &Discretization,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    match (method, p) {
        (Method::Fourier, _) => {
            let prob = FourierProblem::new(container.clone(), grid.n_f, grid.m, grid.q, p, alpha)?;
            crate::fourier::solve_fourier(&prob, opts)
        }
        (Method::Minimax, _) | (Method::Nodal, Exponent::Infinity) => {
            let prob = NodalProblem::new(container.clone(), grid.n, Exponent::Infinity, alpha)?;
            solve_minimax(&prob, &InitPolicy::AnchorAndRandom, opts)
        }
        (Method::Nodal, Exponent::Finite(_)) => {
            let prob = NodalProblem::new(container.clone(), grid.n, p, alpha)?;
            solve_nodal(&prob, &InitPolicy::AnchorAndRandom, opts)
        }
    }
}

/// A solved `(p, alpha)` cell.
#[derive(Clone, Debug)]
pub struct Cell {
    pub p: Exponent,
    pub alpha: f64,
    pub result: std::result::Result<SolveResult, String>,
}

/// Nodal solves over the `ps x alphas` grid (alpha varies fastest).
pub fn solve_grid(cfg: &StudyConfig) -> Result<Vec<Cell>> {
    cfg.validate()?;
    let pairs: Vec<(Exponent, f64)> = cfg
        .ps
        .iter()
        .flat_map(|&p| cfg.alphas.iter().map(move |&a| (p, a)))
        .collect();
    Ok(pairs
        .par_iter()
        .map(|&(p, alpha)| Cell {
            p,
            alpha,
            result: solve_cell(&cfg.container, p, alpha, Method::Nodal, &cfg.grid, &cfg.options)
                .map_err(|e| e.to_string()),
        })
        .collect())
}

pub fn cells_table(cells: &[Cell]) -> StudyTable {
    let mut t = StudyTable::new(&["p", "alpha", "energy", "powered", "sigma_normalized", "status"]);
    for c in cells {
        let (e, pw, s) = match &c.result {
            Ok(r) => (r.energy, r.powered, normalized_energy(r.powered, r.p)),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        t.push(vec![
            c.p.to_string(),
            fmt_float(c.alpha),
            fmt_float(e),
            fmt_float(pw),
            fmt_float(s),
            CellStatus::of(&c.result, |r| r.status).to_string(),
        ]);
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaRow {
    pub p: f64,
    /// Lowest powered value over all candidate shapes.
    pub powered: f64,
    /// `((1/2pi) powered)^(1/p)`.
    pub sigma: f64,
    /// Normalized energy of this cell's own solve.
    pub solver_sigma: f64,
    /// Distance from the best shape to the `p = inf` shape.
    pub hausdorff: f64,
    pub status: CellStatus,
}

#[derive(Clone, Debug)]
pub struct GammaSweep {
    pub alpha: f64,
    pub sigma_inf: f64,
    pub inf_status: CellStatus,
    pub rows: Vec<GammaRow>,
    /// Best shape per row, `None` when no candidate was available.
    pub shapes: Vec<Option<SupportSamples>>,
    pub inf_shape: Option<SupportSamples>,
}

/// Normalized energies `sigma_p` for each finite `p` of `cfg.ps` at
/// `cfg.alphas[0]`, and `sigma_inf` from the minimax solve.
///
/// Each `sigma_p` is the best value over every shape the sweep produced (all
/// are feasible for the same area), so a shape found at one `p` improves the
/// estimate at another; the per-cell solver value is reported alongside.
pub fn gamma_sweep(cfg: &StudyConfig) -> Result<GammaSweep> {
    cfg.validate()?;
    let alpha = cfg.alphas[0];
    let ps: Vec<f64> = cfg.ps.iter().filter_map(|p| p.finite()).collect();
    let base = NodalProblem::new(cfg.container.clone(), cfg.grid.n, Exponent::Infinity, alpha)?;

    let inf = solve_minimax(&base, &InitPolicy::AnchorAndRandom, &cfg.options).map_err(|e| e.to_string());
    let cells: Vec<std::result::Result<SolveResult, String>> = ps
        .par_iter()
        .map(|&p| {
            let prob = base.with_p(Exponent::Finite(p)).map_err(|e| e.to_string())?;
            solve_nodal(&prob, &InitPolicy::AnchorAndRandom, &cfg.options).map_err(|e| e.to_string())
        })
        .collect();

    let mut candidates: Vec<&SupportSamples> = cells.iter().filter_map(|c| c.as_ref().ok()).map(|r| &r.shape).collect();
    if let Ok(r) = &inf {
        candidates.push(&r.shape);
    }
    let inf_shape = inf.as_ref().ok().map(|r| r.shape.clone());
    let mut rows = Vec::with_capacity(ps.len());
    let mut shapes = Vec::with_capacity(ps.len());
    for (&p, cell) in ps.iter().zip(&cells) {
        let mut best: Option<(f64, &SupportSamples)> = None;
        for c in &candidates {
            let v = powered_energy(&base, c, p)?;
            if best.is_none_or(|(b, _)| v < b) {
                best = Some((v, c));
            }
        }
        let powered = best.map_or(f64::NAN, |b| b.0);
        let hausdorff = match (best, &inf_shape) {
            (Some((_, s)), Some(h)) => hausdorff_from_supports(s, h)?,
            _ => f64::NAN,
        };
        rows.push(GammaRow {
            p,
            powered,
            sigma: normalized_energy(powered, Exponent::Finite(p)),
            solver_sigma: cell
                .as_ref()
                .map_or(f64::NAN, |r| normalized_energy(r.powered, Exponent::Finite(p))),
            hausdorff,
            status: CellStatus::of(cell, |r| r.status),
        });
        shapes.push(best.map(|b| b.1.clone()));
    }
    Ok(GammaSweep {
        alpha,
        sigma_inf: inf.as_ref().map_or(f64::NAN, |r| r.energy),
        inf_status: CellStatus::of(&inf, |r| r.status),
        rows,
        shapes,
        inf_shape,
    })
}

impl GammaSweep {
    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&[
            "p",
            "powered",
            "sigma_normalized",
            "sigma_cell",
            "sigma_inf",
            "hausdorff_to_inf",
            "status",
        ]);
        for r in &self.rows {
            t.push(vec![
                fmt_float(r.p),
                fmt_float(r.powered),
                fmt_float(r.sigma),
                fmt_float(r.solver_sigma),
                fmt_float(self.sigma_inf),
                fmt_float(r.hausdorff),
                r.status.to_string(),
            ]);
        }
        t.push(vec![
            "inf".into(),
            fmt_float(self.sigma_inf),
            fmt_float(self.sigma_inf),
            fmt_float(self.sigma_inf),
            fmt_float(self.sigma_inf),
            fmt_float(0.0),
            self.inf_status.to_string(),
        ]);
        t
    }
}

/// One branch of [`compare_methods`].
#[derive(Clone, Debug)]
pub struct Branch {
    pub result: std::result::Result<SolveResult, String>,
    /// `J_p` of the branch's shape on the common nodal grid.
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct MethodComparison {
    pub p: Exponent,
    pub alpha: f64,
    /// Fourier method.
    pub m1: Branch,
    /// Nodal method from random starts.
    pub m2_cold: Branch,
    /// Nodal method started from the Fourier optimum, plus the cold starts.
    pub m2_warm: Branch,
}

fn grid_energy(prob: &NodalProblem, h: &SupportSamples) -> Result<f64> {
    match prob.p {
        Exponent::Finite(p) => Ok(powered_energy(prob, h, p)?.max(0.0).powf(1.0 / p)),
        Exponent::Infinity => sup_gap(prob, h),
    }
}

/// Fourier method, cold nodal method and warm-started nodal method at
/// `(cfg.ps[0], cfg.alphas[0])`; all energies on the nodal grid.
pub fn compare_methods(cfg: &StudyConfig) -> Result<MethodComparison> {
    cfg.validate()?;
    let (p, alpha) = (cfg.ps[0], cfg.alphas[0]);
    let prob = NodalProblem::new(cfg.container.clone(), cfg.grid.n, p, alpha)?;
    let nodal = |init: &InitPolicy| match p {
        Exponent::Finite(_) => solve_nodal(&prob, init, &cfg.options),
        Exponent::Infinity => solve_minimax(&prob, init, &cfg.options),
    };

    let m1 = solve_cell(&cfg.container, p, alpha, Method::Fourier, &cfg.grid, &cfg.options);
    let m1_nodal = m1
        .as_ref()
        .ok()
        .and_then(|r| r.fourier.as_ref())
        .map(|f| fourier_to_nodal(f, cfg.grid.n))
        .transpose()?;
    let m1_energy = match &m1_nodal {
        Some(h) => grid_energy(&prob, h)?,
        None => f64::NAN,
    };
    let cold = nodal(&InitPolicy::Random);
    let warm = nodal(&InitPolicy::WarmAndRandom(m1_nodal.into_iter().collect()));
    let branch = |r: Result<SolveResult>| -> Result<Branch> {
        let energy = match &r {
            Ok(res) => grid_energy(&prob, &res.shape)?,
            Err(_) => f64::NAN,
        };
        Ok(Branch {
            result: r.map_err(|e| e.to_string()),
            energy,
        })
    };
    Ok(MethodComparison {
        p,
        alpha,
        m1: Branch {
            result: m1.map_err(|e| e.to_string()),
            energy: m1_energy,
        },
        m2_cold: branch(cold)?,
        m2_warm: branch(warm)?,
    })
}

impl MethodComparison {
    pub fn branches(&self) -> [(&'static str, &Branch); 3] {
        [("m1_fourier", &self.m1), ("m2_cold", &self.m2_cold), ("m2_warm", &self.m2_warm)]
    }

    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&["branch", "p", "alpha", "energy", "method_energy", "best_start", "status"]);
        for (name, b) in self.branches() {
            let (own, start) = match &b.result {
                Ok(r) => (r.energy, r.best_start.to_string()),
                Err(_) => (f64::NAN, String::new()),
            };
            t.push(vec![
                name.into(),
                self.p.to_string(),
                fmt_float(self.alpha),
                fmt_float(b.energy),
                fmt_float(own),
                start,
                CellStatus::of(&b.result, |r| r.status).to_string(),
            ]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FCurve {
    pub p: Exponent,
    pub alphas: Vec<f64>,
    /// Best energy per alpha (NaN for failed cells).
    pub f: Vec<f64>,
    pub status: Vec<CellStatus>,
    /// `max_i (f(alpha_{i+1}) - f(alpha_i))^+` over consecutive solved cells.
    pub max_upward_violation: f64,
}

/// `f(alpha)` for increasing `cfg.alphas` at `p = cfg.ps[0]`.
pub fn f_curve(cfg: &StudyConfig) -> Result<FCurve> {
    cfg.validate()?;
    if cfg.alphas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("f-curve alphas must be strictly increasing".into()));
    }
    let p = cfg.ps[0];
    let cells: Vec<std::result::Result<SolveResult, String>> = cfg
        .alphas
        .par_iter()
        .map(|&a| solve_cell(&cfg.container, p, a, Method::Nodal, &cfg.grid, &cfg.options).map_err(|e| e.to_string()))
        .collect();
    let f: Vec<f64> = cells.iter().map(|c| c.as_ref().map_or(f64::NAN, |r| r.energy)).collect();
    let max_upward_violation = f
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max);
    Ok(FCurve {
        p,
        alphas: cfg.alphas.clone(),
        f,
        status: cells.iter().map(|c| CellStatus::of(c, |r| r.status)).collect(),
        max_upward_violation,
    })
}

impl FCurve {
    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&["alpha", "f", "max_upward_violation", "status"]);
        for ((a, f), s) in self.alphas.iter().zip(&self.f).zip(&self.status) {
            t.push(vec![
                fmt_float(*a),
                fmt_float(*f),
                fmt_float(self.max_upward_violation),
                s.to_string(),
            ]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub p: Exponent,
    pub alpha: f64,
    /// Optimal energy of the area-constrained problem.
    pub f: f64,
    /// Area found by the energy-constrained area minimization.
    pub recovered_area: f64,
    /// `alpha |Omega|` on the nodal grid.
    pub target_area: f64,
    pub container_area: f64,
    /// `|recovered - target| / |Omega|`.
    pub relative_residual: f64,
    pub forward_status: CellStatus,
    pub inverse_status: CellStatus,
    pub shape: Option<SupportSamples>,
}

/// Solves `min J_p` at area `alpha |Omega|` to get `f(alpha)`, then the dual
/// problem `min |w|` subject to `J_p(w) = f(alpha)` (for `p = inf`: every gap
/// `<= f(alpha)`), and compares the recovered area to `alpha |Omega|`.
pub fn equivalence_probe(
    container: &ContainerSpec,
    p: Exponent,
    alpha: f64,
    grid: &Discretization,
    opts: &SolveOptions,
) -> Result<EquivalenceReport> {
    let prob = NodalProblem::new(container.clone(), grid.n, p, alpha)?;
    let omega = prob.container_area();
    let forward = solve_cell(container, p, alpha, Method::Nodal, grid, opts);
    let mut report = EquivalenceReport {
        p,
        alpha,
        f: f64::NAN,
        recovered_area: f64::NAN,
        target_area: prob.target_area(),
        container_area: omega,
        relative_residual: f64::NAN,
        forward_status: CellStatus::Failed(String::new()),
        inverse_status: CellStatus::Failed("not run".into()),
        shape: None,
    };
    let forward = match forward {
        Ok(r) => r,
        Err(e) => {
            report.forward_status = CellStatus::Failed(e.to_string());
            return Ok(report);
        }
    };
    report.forward_status = CellStatus::of(&Ok::<_, String>(forward.status), |s| *s);
    report.f = forward.energy;

    let n = grid.n;
    let outer = prob.container_samples().values().to_vec();
    let objective = |x: &[f64], g: &mut [f64]| -> f64 {
        let a = area_with_grad(x, g);
        g.iter_mut().for_each(|gi| *gi /= omega);
        a / omega
    };
    let mut rows = inclusion_rows(&outer);
    rows.extend(convexity_rows(n));
    let x0 = outer.clone();
    // the container itself plus random convex shapes between the target area
    // and the container's
    let mut starts = vec![x0.clone()];
    if alpha < 1.0 {
        for k in 1..opts.seeds.max(1) {
            let mut rng = start_rng(opts.base_seed, k);
            let a = rng.gen_range(alpha..1.0);
            starts.push(random_start(&prob.with_alpha(a)?, &mut rng).into_values());
        }
    }
    let inverse = match p {
        Exponent::Infinity => {
            let d = forward.energy;
            rows.extend(
                outer
                    .iter()
                    .enumerate()
                    .map(|(k, &hk)| crate::nlp::LinearConstraint::new(vec![(k, -1.0)], d - hk)),
            );
            let problem = NlpProblem::new(n, objective).with_inequalities(rows);
            smallest_area(&problem, &starts, opts)
        }
        Exponent::Finite(q) => {
            let level = forward.powered;
            if level <= 0.0 {
                // J = 0 forces w = Omega
                Ok(crate::nlp::NlpResult {
                    objective: area_of(&x0) / omega,
                    x: x0.clone(),
                    multipliers: Default::default(),
                    kkt: crate::nlp::KktReport {
                        stationarity: 0.0,
                        gradient_norm: 0.0,
                        primal_violation: 0.0,
                        complementarity: 0.0,
                    },
                    max_violation: 0.0,
                    history: Vec::new(),
                    status: NlpStatus::Converged,
                    outer_iterations: 0,
                    inner_iterations: 0,
                })
            } else {
                let equality = |x: &[f64], g: &mut [f64]| -> f64 {
                    let v = powered_gap(&outer, x, q, g);
                    g.iter_mut().for_each(|gi| *gi /= level);
                    (v - level) / level
                };
                let problem = NlpProblem::new(n, objective)
                    .with_inequalities(rows)
                    .with_equality(equality);
                smallest_area(&problem, &starts, opts)
            }
        }
    };
    match inverse {
        Ok(r) => {
            report.inverse_status = match r.status {
                NlpStatus::Converged => CellStatus::Converged,
                NlpStatus::MaxIter => CellStatus::MaxIter,
                NlpStatus::Infeasible => {
                    CellStatus::Failed(format!("infeasible, violation {:.3e}", r.max_violation))
                }
            };
            report.recovered_area = area_of(&r.x);
            report.relative_residual = (report.recovered_area - report.target_area).abs() / omega;
            report.shape = SupportSamples::new(r.x).ok();
        }
        Err(e) => report.inverse_status = CellStatus::Failed(e.to_string()),
    }
    Ok(report)
}

/// Multistart for the area minimization: the smallest area among feasible
/// results, ties to the lowest start index.
fn smallest_area(problem: &NlpProblem<'_>, starts: &[Vec<f64>], opts: &SolveOptions) -> Result<NlpResult> {
    let runs: Vec<Result<NlpResult>> = starts.par_iter().map(|x0| solve_nlp(problem, x0, &opts.solver)).collect();
    let mut best: Option<NlpResult> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let (rf, bf) = (r.status != NlpStatus::Infeasible, b.status != NlpStatus::Infeasible);
                        (rf && !bf) || (rf == bf && r.objective < b.objective - 1e-12)
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some(b), _) => Ok(b),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::InvalidInput("no starts".into())),
    }
}

impl EquivalenceReport {
    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&[
            "p",
            "alpha",
            "f",
            "recovered_area",
            "target_area",
            "relative_residual",
            "forward_status",
            "inverse_status",
        ]);
        t.push(vec![
            self.p.to_string(),
            fmt_float(self.alpha),
            fmt_float(self.f),
            fmt_float(self.recovered_area),
            fmt_float(self.target_area),
            fmt_float(self.relative_residual),
            self.forward_status.to_string(),
            self.inverse_status.to_string(),
        ]);
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonalityThresholds {
    /// A node is free when its gap exceeds `free_rel * diam(Omega)`.
    pub free_rel: f64,
    /// A free node is flat when `r_j <= curvature_rel * (reference radius)`.
    pub curvature_rel: f64,
}

impl Default for PolygonalityThresholds {
    fn default() -> Self {
        Self {
            free_rel: 1e-4,
            curvature_rel: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalityReport {
    pub nodes: usize,
    pub free_nodes: usize,
    pub contact_nodes: usize,
    /// Free nodes with near-zero discrete radius of curvature.
    pub flat_free_nodes: usize,
    /// `flat_free_nodes / free_nodes`, 0 when there are no free nodes.
    pub flat_fraction: f64,
    /// Maximal cyclic runs of flat free nodes.
    pub segments: usize,
    /// Radius the flatness threshold is relative to.
    pub reference_radius: f64,
}

/// Discrete radius of curvature `h_j + (h_{j+1} - 2h_j + h_{j-1}) / (2 - 2cos step)`.
pub fn curvature_radii(h: &SupportSamples) -> Vec<f64> {
    let n = h.n();
    let v = h.values();
    let denom = 2.0 - 2.0 * h.step().cos();
    (0..n)
        .map(|j| v[j] + (v[(j + 1) % n] - 2.0 * v[j] + v[(j + n - 1) % n]) / denom)
        .collect()
}

/// Classifies nodes as free or in contact and measures how much of the free
/// boundary is straight.
///
/// The reference radius is the median radius of curvature over contact nodes;
/// when that is not positive (no contact, or contact only at corners) the
/// mean radius `P(w) / 2pi` is used.
pub fn polygonality_report(
    shape: &SupportSamples,
    container: &ContainerSpec,
    thresholds: &PolygonalityThresholds,
) -> Result<PolygonalityReport> {
    let n = shape.n();
    let outer = support_samples(container, n)?;
    let eps_free = thresholds.free_rel * container.diameter();
    let r = curvature_radii(shape);
    let free: Vec<bool> = outer
        .values()
        .iter()
        .zip(shape.values())
        .map(|(a, b)| a - b > eps_free)
        .collect();
    let mut contact_r: Vec<f64> = (0..n).filter(|&j| !free[j]).map(|j| r[j]).collect();
    contact_r.sort_by(f64::total_cmp);
    let median = match contact_r.len() {
        0 => 0.0,
        m if m % 2 == 1 => contact_r[m / 2],
        m => 0.5 * (contact_r[m / 2 - 1] + contact_r[m / 2]),
    };
    let reference_radius = if median > 0.0 {
        median
    } else {
        perimeter_from_support(shape) / (2.0 * std::f64::consts::PI)
    };
    let eps_r = thresholds.curvature_rel * reference_radius;
    let flat: Vec<bool> = (0..n).map(|j| free[j] && r[j] <= eps_r).collect();
    let free_nodes = free.iter().filter(|&&f| f).count();
    let flat_free_nodes = flat.iter().filter(|&&f| f).count();
    let segments = if flat.iter().all(|&f| f) {
        1
    } else {
        (0..n).filter(|&j| flat[j] && !flat[(j + n - 1) % n]).count()
    };
    Ok(PolygonalityReport {
        nodes: n,
        free_nodes,
        contact_nodes: n - free_nodes,
        flat_free_nodes,
        flat_fraction: if free_nodes == 0 {
            0.0
        } else {
            flat_free_nodes as f64 / free_nodes as f64
        },
        segments,
        reference_radius,
    })
}

impl PolygonalityReport {
    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&[
            "nodes",
            "free_nodes",
            "contact_nodes",
            "flat_free_nodes",
            "flat_fraction",
            "segments",
            "reference_radius",
        ]);
        t.push(vec![
            self.nodes.to_string(),
            self.free_nodes.to_string(),
            self.contact_nodes.to_string(),
            self.flat_free_nodes.to_string(),
            fmt_float(self.flat_fraction),
            self.segments.to_string(),
            fmt_float(self.reference_radius),
        ]);
        t
    }
}

#[derive(Clone, Debug)]
pub struct TriangleProbe {
    pub candidate: TriangleCandidate,
    /// `J_p` of the candidate sampled on the nodal grid.
    pub candidate_energy: f64,
    /// `(|candidate| - alpha |Omega|) / |Omega|` on the nodal grid.
    pub candidate_area_residual: f64,
    pub solver: std::result::Result<SolveResult, String>,
    /// `solver energy - candidate energy`; no verdict is attached.
    pub gap: f64,
}

/// Solver optimum in a triangle versus the candidate `MAB`.
pub fn triangle_probe(
    vertices: [[f64; 2]; 3],
    p: Exponent,
    alpha: f64,
    grid: &Discretization,
    opts: &SolveOptions,
) -> Result<TriangleProbe> {
    let container = ContainerSpec::polygon(&vertices);
    let candidate = triangle_conjecture_candidate(vertices, alpha)?;
    let prob = NodalProblem::new(container.clone(), grid.n, p, alpha)?;
    let cand_spec = ContainerSpec::polygon(
        &candidate.triangle.points.iter().map(|q| [q.x, q.y]).collect::<Vec<_>>(),
    );
    let (candidate_energy, candidate_area_residual) = if alpha > 0.0 {
        let h = support_samples(&cand_spec, grid.n)?;
        (
            grid_energy(&prob, &h)?,
            (area_of(h.values()) - prob.target_area()) / prob.container_area(),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let solver = solve_cell(&container, p, alpha, Method::Nodal, grid, opts).map_err(|e| e.to_string());
    let gap = solver.as_ref().map_or(f64::NAN, |r| r.energy - candidate_energy);
    Ok(TriangleProbe {
        candidate,
        candidate_energy,
        candidate_area_residual,
        solver,
        gap,
    })
}

impl TriangleProbe {
    pub fn table(&self) -> StudyTable {
        let mut t = StudyTable::new(&[
            "m_x",
            "m_y",
            "relabeled",
            "candidate_energy",
            "candidate_area_residual",
            "solver_energy",
            "gap",
            "status",
        ]);
        t.push(vec![
            fmt_float(self.candidate.m.x),
            fmt_float(self.candidate.m.y),
            self.candidate.relabeled.to_string(),
            fmt_float(self.candidate_energy),
            fmt_float(self.candidate_area_residual),
            fmt_float(self.solver.as_ref().map_or(f64::NAN, |r| r.energy)),
            fmt_float(self.gap),
            CellStatus::of(&self.solver, |r| r.status).to_string(),
        ]);
        t
    }
}
