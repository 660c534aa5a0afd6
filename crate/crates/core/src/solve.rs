//! Types shared by the Fourier and nodal methods: exponents, options,
//! results, and the deterministic multistart driver.

use std::fmt;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fourier::FourierShape;
use crate::geometry::SupportSamples;
use crate::nlp::{HistoryRow, KktReport, NlpResult, NlpStatus, SolverParams};

/// Exponent `p` of the `L^p` distance between support functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidInput(format!("exponent p must be >= 1, got {p}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Exponent::Infinity),
            other => other
                .parse::<f64>()
                .map(Exponent::Finite)
                .map_err(|_| Error::InvalidInput(format!("cannot parse exponent `{s}`"))),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Ok(Exponent::Finite(p as f64)),
            Raw::Float(p) => Ok(Exponent::Finite(p)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Whether the solver sees `integral gap^p` or its `1/p` root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ObjectiveForm {
    #[default]
    Powered,
    Rooted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Number of multistart initializations.
    pub seeds: usize,
    pub base_seed: u64,
    pub solver: SolverParams,
    pub objective_form: ObjectiveForm,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            seeds: 4,
            base_seed: 0,
            solver: SolverParams::default(),
            objective_form: ObjectiveForm::Powered,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Fourier,
    Nodal,
    Minimax,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Fourier => "fourier",
            Method::Nodal => "nodal",
            Method::Minimax => "minimax",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
}

/// Constraint residuals of a returned shape.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Residuals {
    /// `max_k (h_k - h_Omega(theta_k))^+` over the constraint grid.
    pub inclusion: f64,
    /// `min_k c_k` (negative means nonconvex).
    pub convexity: f64,
    /// `(area - target) / |Omega|`.
    pub area: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub method: Method,
    pub p: Exponent,
    pub alpha: f64,
    /// Nodal samples of the optimal support function.
    pub shape: SupportSamples,
    pub fourier: Option<FourierShape>,
    /// Powered value `integral (h_Omega - h)^p`; the slack `t*` for `p = inf`.
    pub powered: f64,
    /// `J_p = powered^(1/p)`; the sup-gap for `p = inf`.
    pub energy: f64,
    pub residuals: Residuals,
    pub kkt: Option<KktReport>,
    pub history: Vec<HistoryRow>,
    pub status: SolveStatus,
    pub wall_time: Duration,
    pub base_seed: u64,
    pub best_start: usize,
    pub starts: usize,
}

pub(crate) fn start_rng(base_seed: u64, start: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(start as u64);
    rng
}

pub(crate) struct StartOutcome {
    pub index: usize,
    pub nlp: NlpResult,
    /// Reported energy, used for ranking.
    pub score: f64,
    /// Unscaled objective before the root is taken.
    pub powered: f64,
}

/// Largest constraint violation still accepted as a feasible local solution.
pub(crate) const ACCEPT_VIOLATION: f64 = 1e-6;

/// Runs `starts` independent solves concurrently, in index order.
pub(crate) fn run_starts<F>(starts: usize, solve_one: F) -> Vec<Result<StartOutcome>>
where
    F: Fn(usize) -> Result<StartOutcome> + Sync,
{
    (0..starts).into_par_iter().map(&solve_one).collect()
}

/// Lowest score among acceptably feasible starts; ties within 1e-12 go to the
/// lowest start index.
pub(crate) fn pick_best(outcomes: Vec<Result<StartOutcome>>) -> Result<StartOutcome> {
    let mut best: Option<StartOutcome> = None;
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(o) if o.nlp.max_violation <= ACCEPT_VIOLATION && o.score.is_finite() => {
                let better = match &best {
                    None => true,
                    Some(b) => o.score < b.score - 1e-12,
                };
                if better {
                    best = Some(o);
                }
            }
            Ok(o) => failures.push(format!(
                "start {}: status {:?}, violation {:.3e}",
                o.index, o.nlp.status, o.nlp.max_violation
            )),
            Err(e) => failures.push(e.to_string()),
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no feasible start: {}", failures.join("; "))))
}

pub(crate) fn status_of(nlp: &NlpResult) -> SolveStatus {
    match nlp.status {
        NlpStatus::Converged => SolveStatus::Converged,
        _ => SolveStatus::MaxIter,
    }
}

/// `x^e`, by repeated squaring when the exponent is a small integer.
///
/// Not `powi`: its precision is unspecified and its lowering depends on
/// inlining, which made results differ between build profiles.
#[inline]
pub(crate) fn pow_real(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() <= 256.0 {
        let mut n = e.abs() as u32;
        let (mut base, mut acc) = (x, 1.0);
        while n > 0 {
            if n & 1 == 1 {
                acc *= base;
            }
            base *= base;
            n >>= 1;
        }
        if e < 0.0 {
            1.0 / acc
        } else {
            acc
        }
    } else {
        x.powf(e)
    }
}

/// `(1/N) sum gap^p)^(1/p)` style normalized mean used for cross-p comparison.
pub fn normalized_energy(powered: f64, p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => (powered.max(0.0) / (2.0 * std::f64::consts::PI)).powf(1.0 / p),
        Exponent::Infinity => powered,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_parsing_and_display() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("abc".parse::<Exponent>().is_err());
        assert!(Exponent::Finite(0.5).validate().is_err());
        assert_eq!(Exponent::Infinity.to_string(), "inf");
    }

    #[test]
    fn rng_streams_are_independent_and_reproducible() {
        use rand::Rng;
        let a: u64 = start_rng(7, 0).gen();
        let b: u64 = start_rng(7, 1).gen();
        let a2: u64 = start_rng(7, 0).gen();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
