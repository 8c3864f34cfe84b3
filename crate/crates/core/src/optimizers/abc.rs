//! Artificial bee colony search over discrete phase vectors.
//!
//! Each food source is a phase vector. Per iteration every source spawns one
//! neighbour (employed phase), `S` onlookers pick sources in proportion to
//! fitness and spawn one neighbour each, and the most-stale source is
//! abandoned to a scout once its trial counter passes `limit`. A neighbour
//! differs from its source in one coordinate: the continuous ABC move
//! `b + φ(b - b_partner)` followed by quantization back onto the phase set.

use num_complex::Complex64;
use rand::{Rng, RngExt};

use super::{quantize_phase, BestSoFar, OptimizerReport};
use crate::error::{Error, Result};
use crate::pts::{fitness, Objective, PhaseSet, PhaseVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbcConfig {
    /// Number of food sources `S` (also the employed and onlooker counts).
    pub population: usize,
    /// Trials without improvement after which a source is abandoned.
    pub limit: usize,
    /// Iteration count `K`.
    pub max_iterations: usize,
    pub fixed_first: bool,
    pub moves: MoveRule,
}

/// How many coordinates one neighbour move touches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MoveRule {
    /// One uniformly chosen free coordinate.
    Single,
    /// Every free coordinate, each with its own `φ`.
    #[default]
    All,
}

impl Default for AbcConfig {
    fn default() -> Self {
        AbcConfig {
            population: 30,
            limit: 5,
            max_iterations: 30,
            fixed_first: true,
            moves: MoveRule::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoodSource {
    pub b: PhaseVector,
    pub f_value: f64,
    pub fitness: f64,
    pub trial: usize,
}

impl FoodSource {
    pub fn new(b: PhaseVector, f_value: f64) -> Result<Self> {
        Ok(FoodSource {
            b,
            fitness: fitness(f_value)?,
            f_value,
            trial: 0,
        })
    }

    fn evaluate<O: Objective + ?Sized>(b: PhaseVector, objective: &mut O) -> Result<Self> {
        let f = objective.evaluate(&b)?;
        Self::new(b, f)
    }
}

/// One move of a single coordinate: `b_i + φ (b_i - b_k)` quantized onto
/// the set, or `b_i` unchanged when the move lands on the origin.
pub fn perturb_coordinate(own: usize, partner: usize, phi: f64, set: &PhaseSet) -> usize {
    let (bi, bk) = (set.element(own), set.element(partner));
    let moved: Complex64 = bi + (bi - bk) * phi;
    quantize_phase(moved, set).unwrap_or(own)
}

/// Neighbour of `sources[i]` using `sources[k]` as partner.
pub fn neighbor_candidate<R: Rng + ?Sized>(
    sources: &[FoodSource],
    i: usize,
    k: usize,
    rng: &mut R,
    set: &PhaseSet,
    fixed_first: bool,
    moves: MoveRule,
) -> Result<PhaseVector> {
    if i == k {
        return Err(Error::InvalidInput(format!("food source {i} cannot be its own partner")));
    }
    let (source, partner) = match (sources.get(i), sources.get(k)) {
        (Some(s), Some(p)) => (s, p),
        _ => {
            return Err(Error::InvalidInput(format!(
                "food source index out of range ({i}, {k}) for {} sources",
                sources.len()
            )))
        }
    };
    let m = source.b.len();
    let first = usize::from(fixed_first);
    let mut candidate = source.b.clone();
    if first >= m {
        return Ok(candidate);
    }
    match moves {
        MoveRule::Single => {
            let l = rng.random_range(first..m);
            let phi: f64 = rng.random_range(-1.0..=1.0);
            candidate.set_index(l, perturb_coordinate(source.b.index(l), partner.b.index(l), phi, set));
        }
        MoveRule::All => {
            for l in first..m {
                let phi: f64 = rng.random_range(-1.0..=1.0);
                candidate.set_index(l, perturb_coordinate(source.b.index(l), partner.b.index(l), phi, set));
            }
        }
    }
    Ok(candidate)
}

/// Fitness-proportional choice of a source index.
pub fn roulette_select<R: Rng + ?Sized>(sources: &[FoodSource], rng: &mut R) -> Result<usize> {
    if sources.is_empty() {
        return Err(Error::InvalidInput("roulette over an empty population".into()));
    }
    let total: f64 = sources.iter().map(|s| s.fitness).sum();
    let mut r = rng.random::<f64>() * total;
    for (i, s) in sources.iter().enumerate() {
        if r < s.fitness {
            return Ok(i);
        }
        r -= s.fitness;
    }
    Ok(sources.len() - 1)
}

/// Replaces an exhausted source with a fresh uniform draw.
pub fn scout_replace<O, R>(objective: &mut O, rng: &mut R, fixed_first: bool) -> Result<FoodSource>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let w = objective.phase_set().w();
    let b = PhaseVector::random(w, objective.subblock_count(), fixed_first, rng);
    FoodSource::evaluate(b, objective)
}

/// Colony state between iterations.
#[derive(Clone, Debug)]
pub struct Colony {
    sources: Vec<FoodSource>,
    best: BestSoFar,
    config: AbcConfig,
    evaluations: u64,
}

impl Colony {
    /// Source 0 is the all-ones vector; the rest are uniform draws.
    pub fn initialize<O, R>(objective: &mut O, config: &AbcConfig, rng: &mut R) -> Result<Self>
    where
        O: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        if config.population < 2 {
            return Err(Error::InvalidConfig("ABC needs at least 2 food sources".into()));
        }
        if config.limit < 1 || config.max_iterations < 1 {
            return Err(Error::InvalidConfig("ABC needs limit >= 1 and at least one iteration".into()));
        }
        let w = objective.phase_set().w();
        let m = objective.subblock_count();
        let mut sources = Vec::with_capacity(config.population);
        sources.push(FoodSource::evaluate(PhaseVector::identity(w, m), objective)?);
        for _ in 1..config.population {
            let b = PhaseVector::random(w, m, config.fixed_first, rng);
            sources.push(FoodSource::evaluate(b, objective)?);
        }
        let mut best = BestSoFar {
            b: sources[0].b.clone(),
            f: sources[0].f_value,
        };
        for s in &sources[1..] {
            best.offer(&s.b, s.f_value);
        }
        Ok(Colony {
            evaluations: sources.len() as u64,
            sources,
            best,
            config: config.clone(),
        })
    }

    pub fn sources(&self) -> &[FoodSource] {
        &self.sources
    }

    pub fn best(&self) -> (&PhaseVector, f64) {
        (&self.best.b, self.best.f)
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Greedy trial of one neighbour of source `i`.
    fn explore<O, R>(&mut self, i: usize, objective: &mut O, rng: &mut R) -> Result<()>
    where
        O: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        let s = self.sources.len();
        let mut k = rng.random_range(0..s - 1);
        if k >= i {
            k += 1;
        }
        let candidate = neighbor_candidate(
            &self.sources,
            i,
            k,
            rng,
            objective.phase_set(),
            self.config.fixed_first,
            self.config.moves,
        )?;
        let f = objective.evaluate(&candidate)?;
        self.evaluations += 1;
        self.best.offer(&candidate, f);
        let source = &mut self.sources[i];
        if f < source.f_value {
            *source = FoodSource::new(candidate, f)?;
        } else {
            source.trial += 1;
        }
        Ok(())
    }

    /// Runs employed, onlooker and scout phases once. Returns the index of
    /// the source handed to a scout, if any.
    pub fn step<O, R>(&mut self, objective: &mut O, rng: &mut R) -> Result<Option<usize>>
    where
        O: Objective + ?Sized,
        R: Rng + ?Sized,
    {
        let s = self.sources.len();
        for i in 0..s {
            self.explore(i, objective, rng)?;
        }
        for _ in 0..s {
            let i = roulette_select(&self.sources, rng)?;
            self.explore(i, objective, rng)?;
        }
        let (stale, trial) = self
            .sources
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (i, src)| if src.trial > acc.1 { (i, src.trial) } else { acc });
        if trial > self.config.limit {
            let fresh = scout_replace(objective, rng, self.config.fixed_first)?;
            self.evaluations += 1;
            self.best.offer(&fresh.b, fresh.f_value);
            self.sources[stale] = fresh;
            return Ok(Some(stale));
        }
        Ok(None)
    }
}

pub fn abc_pts<O, R>(objective: &mut O, config: &AbcConfig, rng: &mut R) -> Result<OptimizerReport>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let mut colony = Colony::initialize(objective, config, rng)?;
    let mut trajectory = Vec::with_capacity(config.max_iterations);
    for _ in 0..config.max_iterations {
        colony.step(objective, rng)?;
        trajectory.push(colony.best.f);
    }
    let Colony {
        best, evaluations, ..
    } = colony;
    OptimizerReport::new(best.b, best.f, evaluations, Some(trajectory))
}
