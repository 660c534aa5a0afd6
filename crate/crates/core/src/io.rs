//! Run configuration (TOML) and exporters: CSV tables and SVG figures.
//!
//! Every file is written to a temporary file in the target directory and
//! renamed into place, so an error never leaves a partial output behind.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::Discretization;
use crate::fourier::FourierShape;
use crate::geometry::{grid_angle, reconstruct_boundary, ContainerSpec, Point, SupportSamples};
use crate::nlp::{HistoryRow, SolverParams};
use crate::solve::{Exponent, SolveOptions, SolveResult};

/// Current configuration schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "CONVEX_SENSOR_OUT";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StudyTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl StudyTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidInput(format!("csv encoding: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| Error::InvalidInput(format!("csv encoding: {e}")))
    }
}

/// Writes `bytes` to `path` through a temporary file and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn samples_table(h: &SupportSamples) -> StudyTable {
    let mut t = StudyTable::new(&["theta", "h"]);
    for (k, v) in h.values().iter().enumerate() {
        t.push(vec![fmt_float(h.theta(k)), fmt_float(*v)]);
    }
    t
}

pub fn fourier_table(shape: &FourierShape) -> StudyTable {
    let mut t = StudyTable::new(&["k", "a", "b"]);
    for (k, a) in shape.a.iter().enumerate() {
        let b = if k == 0 { String::new() } else { fmt_float(shape.b[k - 1]) };
        t.push(vec![k.to_string(), fmt_float(*a), b]);
    }
    t
}

pub fn history_table(history: &[HistoryRow]) -> StudyTable {
    let mut t = StudyTable::new(&["outer_iter", "inner_iter", "objective", "area_residual", "max_violation"]);
    for r in history {
        t.push(vec![
            r.outer_iter.to_string(),
            r.inner_iter.to_string(),
            fmt_float(r.objective),
            fmt_float(r.equality_residual),
            fmt_float(r.max_violation),
        ]);
    }
    t
}

/// `theta,h` samples of the solved shape.
pub fn export_csv(result: &SolveResult, path: &Path) -> Result<()> {
    export_study_csv(&samples_table(&result.shape), path)
}

pub fn export_fourier_csv(shape: &FourierShape, path: &Path) -> Result<()> {
    export_study_csv(&fourier_table(shape), path)
}

pub fn export_history_csv(history: &[HistoryRow], path: &Path) -> Result<()> {
    export_study_csv(&history_table(history), path)
}

pub fn export_study_csv(table: &StudyTable, path: &Path) -> Result<()> {
    write_atomic(path, &table.to_csv()?)
}

fn read_table(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_read_error(path, e))?;
    let got = r.headers().map_err(|e| csv_read_error(path, e))?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "{}: expected header `{}`, got `{}`",
            path.display(),
            header.join(","),
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_read_error(path, e))
}

fn csv_read_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::InvalidInput(format!("{}: {other:?}", path.display())),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{}:{line}: cannot parse `{field}`", path.display())))
}

/// Reads a `theta,h` file; the angles must be the uniform grid `2 pi k / N`.
pub fn read_samples_csv(path: &Path) -> Result<SupportSamples> {
    let records = read_table(path, &["theta", "h"])?;
    let n = records.len();
    let mut values = Vec::with_capacity(n);
    for (k, rec) in records.iter().enumerate() {
        let line = k + 2;
        let theta: f64 = parse_field(path, line, &rec[0])?;
        if (theta - grid_angle(k, n)).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "{}:{line}: theta {theta} is not the grid angle 2 pi {k} / {n}",
                path.display()
            )));
        }
        values.push(parse_field(path, line, &rec[1])?);
    }
    SupportSamples::new(values)
}

/// One row of the oracle fixture file.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleFixture {
    pub name: String,
    pub n: usize,
    pub p: Exponent,
    pub alpha: f64,
    pub levels: usize,
    pub energy: f64,
}

pub fn fixtures_table(fixtures: &[OracleFixture]) -> StudyTable {
    let mut t = StudyTable::new(&["name", "N", "p", "alpha", "G", "energy"]);
    for f in fixtures {
        t.push(vec![
            f.name.clone(),
            f.n.to_string(),
            f.p.to_string(),
            fmt_float(f.alpha),
            f.levels.to_string(),
            fmt_float(f.energy),
        ]);
    }
    t
}

pub fn read_fixtures(path: &Path) -> Result<Vec<OracleFixture>> {
    read_table(path, &["name", "N", "p", "alpha", "G", "energy"])?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let line = i + 2;
            Ok(OracleFixture {
                name: r[0].to_string(),
                n: parse_field(path, line, &r[1])?,
                p: parse_field(path, line, &r[2])?,
                alpha: parse_field(path, line, &r[3])?,
                levels: parse_field(path, line, &r[4])?,
                energy: parse_field(path, line, &r[5])?,
            })
        })
        .collect()
}

const SVG_SIZE: f64 = 600.0;
const SHAPE_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn svg_points(pts: &[Point]) -> String {
    let mut s = String::new();
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        // SVG's y axis points down
        let _ = write!(s, "{:.6},{:.6}", p.x, -p.y);
    }
    s
}

/// Container outline with the reconstructed shapes on top; the view box is
/// the container's bounding box plus a 5% margin.
pub fn svg_string(container: &ContainerSpec, shapes: &[SupportSamples]) -> Result<String> {
    container.validate()?;
    let (lo, hi) = container.bounds();
    let (w, h) = (hi.x - lo.x, hi.y - lo.y);
    let margin = 0.05 * w.max(h);
    let (vx, vy, vw, vh) = (lo.x - margin, -hi.y - margin, w + 2.0 * margin, h + 2.0 * margin);
    let stroke = 0.004 * vw.max(vh);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{vx:.6} {vy:.6} {vw:.6} {vh:.6}\" width=\"{:.0}\" height=\"{:.0}\">",
        SVG_SIZE,
        SVG_SIZE * vh / vw
    );
    let outline = container.normal_form().boundary(720);
    let _ = writeln!(
        s,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"{stroke:.6}\"/>",
        svg_points(&outline)
    );
    for (i, shape) in shapes.iter().enumerate() {
        let chain = reconstruct_boundary(shape)?;
        let color = SHAPE_COLORS[i % SHAPE_COLORS.len()];
        let _ = writeln!(
            s,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"{color}\" stroke-width=\"{stroke:.6}\"/>",
            svg_points(&chain.points)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn export_svg(container: &ContainerSpec, shapes: &[SupportSamples], path: &Path) -> Result<()> {
    write_atomic(path, svg_string(container, shapes)?.as_bytes())
}

/// Which discretization `solve` runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Fourier,
    Nodal,
    Minimax,
    Both,
}

/// Study lists used by the sweep and comparison commands.
#[derive(Clone, Debug, PartialEq)]
pub struct StudySettings {
    pub alphas: Vec<f64>,
    pub ps: Vec<Exponent>,
}

/// Names of keys that were filled with defaults. Bookkeeping only: it takes
/// no part in equality, so a serialized config reparses to an equal one.
#[derive(Clone, Debug, Default)]
pub struct Provenance(pub Vec<String>);

impl PartialEq for Provenance {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Provenance {
    pub fn is_default(&self, key: &str) -> bool {
        self.0.iter().any(|k| k == key)
    }
}

/// Validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Subcommand the file is meant for, if it names one.
    pub command: Option<String>,
    pub container: ContainerSpec,
    pub p: Exponent,
    pub alpha: f64,
    pub method: MethodChoice,
    pub grid: Discretization,
    pub seeds: usize,
    pub base_seed: u64,
    pub solver: SolverParams,
    pub study: StudySettings,
    pub output_dir: Option<PathBuf>,
    pub defaults: Provenance,
}

impl RunConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            seeds: self.seeds,
            base_seed: self.base_seed,
            solver: self.solver.clone(),
            ..SolveOptions::default()
        }
    }

    /// Fully resolved TOML document (every key explicit).
    pub fn to_toml(&self) -> Result<String> {
        let raw = RawConfig {
            schema_version: Some(self.schema_version),
            command: self.command.clone(),
            container: Some(self.container.clone()),
            container_file: None,
            p: Some(self.p),
            alpha: Some(self.alpha),
            method: Some(self.method),
            seeds: Some(self.seeds),
            base_seed: Some(self.base_seed),
            grid: Some(RawGrid {
                n: Some(self.grid.n),
                n_f: Some(self.grid.n_f),
                m: Some(self.grid.m),
                q: Some(self.grid.q),
            }),
            solver: Some(self.solver.clone()),
            study: Some(RawStudy {
                alphas: Some(self.study.alphas.clone()),
                ps: Some(self.study.ps.clone()),
            }),
            output: self.output_dir.clone().map(|dir| RawOutput { dir: Some(dir) }),
        };
        toml::to_string(&raw).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<MethodChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    container_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    container: Option<ContainerSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<RawGrid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<SolverParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    study: Option<RawStudy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: Option<usize>,
    n_f: Option<usize>,
    m: Option<usize>,
    q: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    alphas: Option<Vec<f64>>,
    ps: Option<Vec<Exponent>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parses and validates a configuration document; `container_file` is
/// resolved against `base_dir` (or the working directory).
pub fn parse_config_in(text: &str, base_dir: Option<&Path>) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                Error::Config(format!("parse error at line {line}, column {col}: {msg}"))
            }
            None => Error::Config(format!("parse error: {msg}")),
        }
    })?;
    let mut defaults = Vec::new();
    let mut default = |key: &str| defaults.push(key.to_string());
    let range = |key: &str, msg: String| Error::Config(format!("{key}: {msg}"));

    let schema_version = raw.schema_version.unwrap_or_else(|| {
        default("schema_version");
        SCHEMA_VERSION
    });
    if schema_version != SCHEMA_VERSION {
        return Err(range(
            "schema_version",
            format!("unsupported version {schema_version}, expected {SCHEMA_VERSION}"),
        ));
    }
    let container = match (raw.container, raw.container_file) {
        (Some(c), None) => c,
        (None, Some(file)) => {
            let path = match base_dir {
                Some(dir) if file.is_relative() => dir.join(&file),
                _ => file,
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("container_file {}: {}", path.display(), e.message())))?
        }
        (Some(_), Some(_)) => {
            return Err(range("container", "give either [container] or container_file, not both".into()))
        }
        (None, None) => return Err(range("container", "missing".into())),
    };
    container.validate().map_err(|e| range("container", e.to_string()))?;

    let p = raw.p.unwrap_or_else(|| {
        default("p");
        Exponent::Finite(2.0)
    });
    p.validate().map_err(|e| range("p", e.to_string()))?;
    let alpha = raw.alpha.unwrap_or_else(|| {
        default("alpha");
        0.5
    });
    if !(0.0..=1.0).contains(&alpha) {
        return Err(range("alpha", format!("must lie in [0,1], got {alpha}")));
    }
    let method = raw.method.unwrap_or_else(|| {
        default("method");
        MethodChoice::Nodal
    });
    let seeds = raw.seeds.unwrap_or_else(|| {
        default("seeds");
        SolveOptions::default().seeds
    });
    if seeds == 0 {
        return Err(range("seeds", "must be >= 1".into()));
    }
    let base_seed = raw.base_seed.unwrap_or_else(|| {
        default("base_seed");
        0
    });

    let g = raw.grid.unwrap_or_default();
    let dg = Discretization::default();
    let mut pick = |key: &str, v: Option<usize>, d: usize, min: usize| -> Result<usize> {
        let v = v.unwrap_or_else(|| {
            default(key);
            d
        });
        if v < min {
            return Err(range(key, format!("must be >= {min}, got {v}")));
        }
        Ok(v)
    };
    let grid = Discretization {
        n: pick("grid.n", g.n, dg.n, 3)?,
        n_f: pick("grid.n_f", g.n_f, dg.n_f, 1)?,
        m: pick("grid.m", g.m, dg.m, 3)?,
        q: pick("grid.q", g.q, dg.q, 3)?,
    };

    let solver = raw.solver.unwrap_or_else(|| {
        defaults.push("solver".into());
        SolverParams::default()
    });
    solver.validate().map_err(|e| range("solver", e.to_string()))?;

    let st = raw.study.unwrap_or_default();
    let alphas = st.alphas.unwrap_or_else(|| {
        defaults.push("study.alphas".into());
        vec![alpha]
    });
    if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(range("study.alphas", "must be a non-empty list of values in [0,1]".into()));
    }
    let ps = st.ps.unwrap_or_else(|| {
        defaults.push("study.ps".into());
        [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0].map(Exponent::Finite).to_vec()
    });
    if ps.is_empty() {
        return Err(range("study.ps", "must be non-empty".into()));
    }
    for q in &ps {
        q.validate().map_err(|e| range("study.ps", e.to_string()))?;
    }
    let output_dir = raw.output.and_then(|o| o.dir);
    if output_dir.is_none() {
        defaults.push("output.dir".into());
    }

    Ok(RunConfig {
        schema_version,
        command: raw.command,
        container,
        p,
        alpha,
        method,
        grid,
        seeds,
        base_seed,
        solver,
        study: StudySettings { alphas, ps },
        output_dir,
        defaults: Provenance(defaults),
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_in(text, None)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_in(&text, path.parent())
}

/// Process exit code for an error: 1 when a computation failed, 2 when the
/// request itself is invalid.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidInput(_)
        | Error::InvalidContainer(_)
        | Error::SizeMismatch { .. }
        | Error::InfiniteExponent
        | Error::NotApplicable(_) => 2,
        Error::Infeasible(_)
        | Error::EmptyInterior { .. }
        | Error::NotConvex { .. }
        | Error::Degenerate(_)
        | Error::NonFinite(_)
        | Error::Io { .. } => 1,
    }
}
