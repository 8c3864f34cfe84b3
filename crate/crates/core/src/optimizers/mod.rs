//! Phase-factor search strategies.
//!
//! Every strategy consumes an [`Objective`] and returns an
//! [`OptimizerReport`]. All of them evaluate the all-ones vector, so none
//! ever reports a PAPR above that of the unmodified signal. Ties keep the
//! incumbent.

mod abc;
mod baselines;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;

pub use abc::{
    abc_pts, neighbor_candidate, perturb_coordinate, roulette_select, scout_replace, AbcConfig,
    Colony, FoodSource, MoveRule,
};
pub use baselines::{
    exhaustive, gd_search, identity, ipts, random_search, GdConfig, DEFAULT_EXHAUSTIVE_CAP,
};

use crate::error::Result;
use crate::pts::{Objective, PhaseSet, PhaseVector};
use crate::signal::papr_db;

/// Outcome of one phase search on one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerReport {
    pub best_b: PhaseVector,
    /// Linear PAPR of the best vector.
    pub best_papr: f64,
    pub best_papr_db: f64,
    /// Objective calls made, including the all-ones evaluation.
    pub evaluations: u64,
    /// Best value so far after each iteration, for iterative strategies.
    pub trajectory: Option<Vec<f64>>,
}

impl OptimizerReport {
    pub(crate) fn new(
        best_b: PhaseVector,
        best_papr: f64,
        evaluations: u64,
        trajectory: Option<Vec<f64>>,
    ) -> Result<Self> {
        Ok(OptimizerReport {
            best_b,
            best_papr,
            best_papr_db: papr_db(best_papr)?,
            evaluations,
            trajectory,
        })
    }
}

/// Nearest element of `set` in angle, or `None` for `z = 0`.
///
/// Decision sectors are half-open, `[(2l - 1)π/W, (2l + 1)π/W)`, so a point
/// on a boundary goes to the element counter-clockwise of it.
pub fn quantize_phase(z: Complex64, set: &PhaseSet) -> Option<usize> {
    if z.re == 0.0 && z.im == 0.0 {
        return None;
    }
    let w = set.w();
    let mut angle = z.im.atan2(z.re);
    if angle < 0.0 {
        angle += 2.0 * PI;
    }
    let sector = (angle * w as f64 / (2.0 * PI) + 0.5).floor() as usize;
    Some(sector % w)
}

/// Selects a strategy and its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum OptimizerConfig {
    /// No search: the unmodified signal.
    None,
    Abc(AbcConfig),
    Ipts { fixed_first: bool },
    RandomSearch { trials: usize, fixed_first: bool },
    Gd(GdConfig),
    Exhaustive { cap: u64 },
}

impl OptimizerConfig {
    pub fn id(&self) -> &'static str {
        match self {
            OptimizerConfig::None => "none",
            OptimizerConfig::Abc(_) => "abc",
            OptimizerConfig::Ipts { .. } => "ipts",
            OptimizerConfig::RandomSearch { .. } => "rs",
            OptimizerConfig::Gd(_) => "gd",
            OptimizerConfig::Exhaustive { .. } => "opts",
        }
    }

    /// Whether runs carry a per-iteration trajectory.
    pub fn has_trajectory(&self) -> bool {
        matches!(self, OptimizerConfig::Abc(_) | OptimizerConfig::Gd(_))
    }

    pub fn run<O, R>(&self, objective: &mut O, rng: &mut R) -> Result<OptimizerReport>
    where
        O: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        match self {
            OptimizerConfig::None => identity(objective),
            OptimizerConfig::Abc(cfg) => abc_pts(objective, cfg, rng),
            OptimizerConfig::Ipts { fixed_first } => ipts(objective, *fixed_first),
            OptimizerConfig::RandomSearch {
                trials,
                fixed_first,
            } => random_search(objective, *trials, *fixed_first, rng),
            OptimizerConfig::Gd(cfg) => gd_search(objective, cfg),
            OptimizerConfig::Exhaustive { cap } => exhaustive(objective, *cap),
        }
    }
}

impl fmt::Display for OptimizerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizerConfig::Abc(c) => write!(
                f,
                "abc(S={}, limit={}, K={})",
                c.population, c.limit, c.max_iterations
            ),
            OptimizerConfig::RandomSearch { trials, .. } => write!(f, "rs({trials})"),
            OptimizerConfig::Gd(c) => write!(f, "gd(r={}, I={})", c.radius, c.iterations),
            other => f.write_str(other.id()),
        }
    }
}

/// Tracks the best vector seen, keeping the first on ties.
#[derive(Clone, Debug)]
pub(crate) struct BestSoFar {
    pub b: PhaseVector,
    pub f: f64,
}

impl BestSoFar {
    pub fn offer(&mut self, b: &PhaseVector, f: f64) -> bool {
        if f < self.f {
            self.b.clone_from(b);
            self.f = f;
            true
        } else {
            false
        }
    }
}
