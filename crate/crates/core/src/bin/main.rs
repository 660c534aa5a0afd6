use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use convex_sensor::error::{Error, Result};
use convex_sensor::experiments::{
    cells_table, compare_methods, equivalence_probe, f_curve, gamma_sweep, solve_cell, solve_grid, CellStatus,
    StudyConfig, StudyKind,
};
use convex_sensor::fourier::fourier_to_nodal;
use convex_sensor::io::{
    self, exit_code, export_csv, export_fourier_csv, export_history_csv, export_study_csv, fixtures_table,
    fmt_float, load_config, read_samples_csv, MethodChoice, OracleFixture, RunConfig, StudyTable, OUTPUT_DIR_ENV,
};
use convex_sensor::nodal::NodalProblem;
use convex_sensor::oracles::brute_force_nodal;
use convex_sensor::solve::{Method, SolveResult};
use convex_sensor::SupportSamples;

/// Optimal convex subsets of a planar convex container.
#[derive(Parser, Debug)]
#[command(name = "convex-sensor", version, about)]
struct Cli {
    /// Base seed for multistart initializations (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory (default: config `output.dir`, then $CONVEX_SENSOR_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// TOML run configuration.
    config: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem with the configured method.
    Solve(ConfigArg),
    /// Sweep p at fixed alpha (finite p and p = inf).
    SweepP(ConfigArg),
    /// Sweep study.alphas at fixed p.
    SweepAlpha(ConfigArg),
    /// Fourier method vs. nodal method, cold and warm-started.
    CompareMethods(ConfigArg),
    /// Optimal energy as a function of alpha.
    FCurve(ConfigArg),
    /// Recover the area from the energy-constrained dual problem.
    Equivalence(ConfigArg),
    /// Exhaustive small-grid search (N <= 6) and comparison with the solver.
    Oracle {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Levels per node.
        #[arg(long, default_value_t = 25)]
        grid: usize,
        /// Fixture name written to the output.
        #[arg(long, default_value = "oracle")]
        name: String,
    },
    /// Check a configuration and print it fully resolved.
    Validate(ConfigArg),
    /// Draw the container and shapes read from `theta,h` files.
    ExportSvg {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Shape sample files.
        #[arg(long = "shape")]
        shapes: Vec<PathBuf>,
        /// Output file (default: <out>/figure.svg).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn load(path: &Path, cli: &Cli, command: &str) -> Result<Self> {
        let mut cfg = load_config(path)?;
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(Error::Config(format!("command: config is for `{c}`, not `{command}`")));
            }
        }
        if let Some(seed) = cli.seed {
            cfg.base_seed = seed;
        }
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self { cfg, out })
    }

    fn study(&self, kind: StudyKind) -> StudyConfig {
        StudyConfig {
            grid: self.cfg.grid,
            options: self.cfg.solve_options(),
            output_dir: Some(self.out.clone()),
            ..StudyConfig::new(kind, self.cfg.container.clone(), self.cfg.study.alphas.clone(), self.cfg.study.ps.clone())
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn table(&self, name: &str, table: &StudyTable) -> Result<()> {
        let path = self.path(name);
        export_study_csv(table, &path)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    /// Figure with every reconstructable shape; others are reported and left out.
    fn svg(&self, name: &str, shapes: &[&SupportSamples]) -> Result<()> {
        let mut keep = Vec::new();
        for s in shapes {
            match convex_sensor::geometry::reconstruct_boundary(s) {
                Ok(_) => keep.push((*s).clone()),
                Err(e) => eprintln!("warning: {name}: shape left out of the figure: {e}"),
            }
        }
        let path = self.path(name);
        io::export_svg(&self.cfg.container, &keep, &path)?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Validate(a) => {
            let ctx = Ctx::load(&a.config, &cli, "validate")?;
            print!("{}", ctx.cfg.to_toml()?);
            if !ctx.cfg.defaults.0.is_empty() {
                eprintln!("defaults applied: {}", ctx.cfg.defaults.0.join(", "));
            }
            Ok(0)
        }
        Command::Solve(a) => solve(&Ctx::load(&a.config, &cli, "solve")?),
        Command::SweepP(a) => sweep_p(&Ctx::load(&a.config, &cli, "sweep-p")?),
        Command::SweepAlpha(a) => sweep_alpha(&Ctx::load(&a.config, &cli, "sweep-alpha")?),
        Command::CompareMethods(a) => compare(&Ctx::load(&a.config, &cli, "compare-methods")?),
        Command::FCurve(a) => {
            let ctx = Ctx::load(&a.config, &cli, "f-curve")?;
            let mut study = ctx.study(StudyKind::FCurve);
            study.ps = vec![ctx.cfg.p];
            let fc = f_curve(&study)?;
            ctx.table("f_curve.csv", &fc.table())?;
            println!("max upward violation {:.3e}", fc.max_upward_violation);
            Ok(failed(fc.status.iter()))
        }
        Command::Equivalence(a) => {
            let ctx = Ctx::load(&a.config, &cli, "equivalence")?;
            let rep = equivalence_probe(&ctx.cfg.container, ctx.cfg.p, ctx.cfg.alpha, &ctx.cfg.grid, &ctx.cfg.solve_options())?;
            ctx.table("equivalence.csv", &rep.table())?;
            if let Some(s) = &rep.shape {
                ctx.svg("equivalence.svg", &[s])?;
            }
            println!("f = {:.9}, area residual {:.3e} of |Omega|", rep.f, rep.relative_residual);
            Ok(failed([&rep.forward_status, &rep.inverse_status].into_iter()))
        }
        Command::Oracle { cfg, grid, name } => oracle(&Ctx::load(&cfg.config, &cli, "oracle")?, *grid, name),
        Command::ExportSvg { cfg, shapes, output } => {
            let ctx = Ctx::load(&cfg.config, &cli, "export-svg")?;
            let shapes = shapes.iter().map(|p| read_samples_csv(p)).collect::<Result<Vec<_>>>()?;
            let path = output.clone().unwrap_or_else(|| ctx.path("figure.svg"));
            io::export_svg(&ctx.cfg.container, &shapes, &path)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
    }
}

fn failed<'a>(mut statuses: impl Iterator<Item = &'a CellStatus>) -> u8 {
    if statuses.any(|s| matches!(s, CellStatus::Failed(_))) {
        1
    } else {
        0
    }
}

fn summary_row(r: &SolveResult) -> Vec<String> {
    vec![
        r.method.to_string(),
        r.p.to_string(),
        fmt_float(r.alpha),
        fmt_float(r.energy),
        fmt_float(r.powered),
        fmt_float(r.residuals.area),
        fmt_float(r.residuals.inclusion),
        fmt_float(r.residuals.convexity),
        r.best_start.to_string(),
        format!("{:?}", r.status).to_lowercase(),
    ]
}

fn solve(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.cfg;
    let methods: &[Method] = match cfg.method {
        MethodChoice::Fourier => &[Method::Fourier],
        MethodChoice::Nodal => &[Method::Nodal],
        MethodChoice::Minimax => &[Method::Minimax],
        MethodChoice::Both => &[Method::Fourier, Method::Nodal],
    };
    let mut summary = StudyTable::new(&[
        "method",
        "p",
        "alpha",
        "energy",
        "powered",
        "area_residual",
        "inclusion_violation",
        "min_convexity",
        "best_start",
        "status",
    ]);
    let mut shapes = Vec::new();
    for &m in methods {
        let r = solve_cell(&cfg.container, cfg.p, cfg.alpha, m, &cfg.grid, &cfg.solve_options())?;
        export_csv(&r, &ctx.path(&format!("solve_{m}_samples.csv")))?;
        export_history_csv(&r.history, &ctx.path(&format!("solve_{m}_history.csv")))?;
        if let Some(f) = &r.fourier {
            export_fourier_csv(f, &ctx.path(&format!("solve_{m}_fourier.csv")))?;
        }
        println!("{m}: energy {:.9} ({:?}, {:.2?})", r.energy, r.status, r.wall_time);
        summary.push(summary_row(&r));
        shapes.push(match &r.fourier {
            Some(f) => fourier_to_nodal(f, cfg.grid.n)?,
            None => r.shape.clone(),
        });
    }
    ctx.table("solve_summary.csv", &summary)?;
    ctx.svg("solve.svg", &shapes.iter().collect::<Vec<_>>())?;
    Ok(0)
}

fn sweep_p(ctx: &Ctx) -> Result<u8> {
    let mut study = ctx.study(StudyKind::GammaSweep);
    study.alphas = vec![ctx.cfg.alpha];
    let sweep = gamma_sweep(&study)?;
    ctx.table("sweep_p.csv", &sweep.table())?;
    for (row, shape) in sweep.rows.iter().zip(&sweep.shapes) {
        if let Some(s) = shape {
            ctx.svg(&format!("sweep_p_{}.svg", row.p), &[s])?;
        }
    }
    if let Some(s) = &sweep.inf_shape {
        ctx.svg("sweep_p_inf.svg", &[s])?;
    }
    Ok(failed(sweep.rows.iter().map(|r| &r.status).chain([&sweep.inf_status])))
}

fn sweep_alpha(ctx: &Ctx) -> Result<u8> {
    let mut study = ctx.study(StudyKind::AlphaSweep);
    study.ps = vec![ctx.cfg.p];
    let cells = solve_grid(&study)?;
    ctx.table("sweep_alpha.csv", &cells_table(&cells))?;
    let mut any_failed = false;
    for (i, c) in cells.iter().enumerate() {
        match &c.result {
            Ok(r) => ctx.svg(&format!("sweep_alpha_{i}.svg"), &[&r.shape])?,
            Err(e) => {
                eprintln!("alpha {}: {e}", c.alpha);
                any_failed = true;
            }
        }
    }
    Ok(u8::from(any_failed))
}

fn compare(ctx: &Ctx) -> Result<u8> {
    let mut study = ctx.study(StudyKind::CompareMethods);
    study.ps = vec![ctx.cfg.p];
    study.alphas = vec![ctx.cfg.alpha];
    let cmp = compare_methods(&study)?;
    ctx.table("compare_methods.csv", &cmp.table())?;
    let mut shapes = Vec::new();
    let mut any_failed = false;
    for (name, b) in cmp.branches() {
        match &b.result {
            Ok(r) => {
                export_history_csv(&r.history, &ctx.path(&format!("compare_history_{name}.csv")))?;
                shapes.push(match &r.fourier {
                    Some(f) => fourier_to_nodal(f, ctx.cfg.grid.n)?,
                    None => r.shape.clone(),
                });
                println!("{name}: energy {:.9}", b.energy);
            }
            Err(e) => {
                eprintln!("{name}: {e}");
                any_failed = true;
            }
        }
    }
    ctx.svg("compare_methods.svg", &shapes.iter().collect::<Vec<_>>())?;
    Ok(u8::from(any_failed))
}

fn oracle(ctx: &Ctx, levels: usize, name: &str) -> Result<u8> {
    let cfg = &ctx.cfg;
    let bf = brute_force_nodal(&cfg.container, cfg.grid.n, cfg.p, cfg.alpha, levels)?;
    let fixture = OracleFixture {
        name: name.to_string(),
        n: cfg.grid.n,
        p: cfg.p,
        alpha: cfg.alpha,
        levels,
        energy: bf.energy,
    };
    ctx.table("oracle.csv", &fixtures_table(&[fixture]))?;
    // the solver is held to the area the oracle actually reached
    let prob = NodalProblem::new(cfg.container.clone(), cfg.grid.n, cfg.p, cfg.alpha)?;
    let alpha_eff = (bf.area / prob.container_area()).min(1.0);
    let solved = solve_cell(&cfg.container, cfg.p, alpha_eff, Method::Nodal, &cfg.grid, &cfg.solve_options())?;
    let mut t = StudyTable::new(&["name", "oracle_energy", "oracle_alpha", "area_slack", "solver_energy", "ratio"]);
    t.push(vec![
        name.to_string(),
        fmt_float(bf.energy),
        fmt_float(alpha_eff),
        fmt_float(bf.area_slack),
        fmt_float(solved.energy),
        fmt_float(if bf.energy > 0.0 { solved.energy / bf.energy } else { f64::NAN }),
    ]);
    ctx.table("oracle_comparison.csv", &t)?;
    println!("oracle energy {:.9}, solver {:.9}", bf.energy, solved.energy);
    Ok(0)
}
