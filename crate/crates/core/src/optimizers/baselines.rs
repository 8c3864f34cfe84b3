//! Reference strategies: identity, iterative flipping, random search,
//! radius-`r` neighbourhood descent and exhaustive enumeration.

use rand::Rng;

use super::{BestSoFar, OptimizerReport};
use crate::error::{Error, Result};
use crate::pts::{Objective, PhaseVector};

/// Largest `W^(M-1)` the exhaustive search will enumerate by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u64 = 1 << 20;

fn start<O: Objective + ?Sized>(objective: &mut O) -> Result<BestSoFar> {
    let b = PhaseVector::identity(objective.phase_set().w(), objective.subblock_count());
    let f = objective.evaluate(&b)?;
    Ok(BestSoFar { b, f })
}

fn free_coordinates(m: usize, fixed_first: bool) -> std::ops::Range<usize> {
    usize::from(fixed_first).min(m)..m
}

/// The unmodified signal: one evaluation of the all-ones vector.
pub fn identity<O: Objective + ?Sized>(objective: &mut O) -> Result<OptimizerReport> {
    let best = start(objective)?;
    OptimizerReport::new(best.b, best.f, 1, None)
}

/// Iterative flipping: one pass over the free coordinates, trying every
/// phase on each while holding the others.
pub fn ipts<O: Objective + ?Sized>(objective: &mut O, fixed_first: bool) -> Result<OptimizerReport> {
    let w = objective.phase_set().w();
    let m = objective.subblock_count();
    let mut best = start(objective)?;
    let mut evaluations = 1;
    let mut candidate = best.b.clone();
    for coord in free_coordinates(m, fixed_first) {
        candidate.clone_from(&best.b);
        for phase in 0..w {
            candidate.set_index(coord, phase);
            let f = objective.evaluate(&candidate)?;
            evaluations += 1;
            best.offer(&candidate, f);
        }
    }
    OptimizerReport::new(best.b, best.f, evaluations, None)
}

/// Best of `trials` uniform phase vectors and the all-ones vector.
pub fn random_search<O, R>(
    objective: &mut O,
    trials: usize,
    fixed_first: bool,
    rng: &mut R,
) -> Result<OptimizerReport>
where
    O: Objective + ?Sized,
    R: Rng + ?Sized,
{
    let w = objective.phase_set().w();
    let m = objective.subblock_count();
    let mut best = start(objective)?;
    for _ in 0..trials {
        let b = PhaseVector::random(w, m, fixed_first, rng);
        let f = objective.evaluate(&b)?;
        best.offer(&b, f);
    }
    OptimizerReport::new(best.b, best.f, trials as u64 + 1, None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GdConfig {
    /// Neighbourhood radius: how many coordinates a move may change.
    pub radius: usize,
    /// Maximum number of moves.
    pub iterations: usize,
    pub fixed_first: bool,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            radius: 2,
            iterations: 3,
            fixed_first: true,
        }
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let r = combo.len();
    for i in (0..r).rev() {
        if combo[i] < n - r + i {
            combo[i] += 1;
            for j in i + 1..r {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Advances a base-`w` counter; false once it wraps to zero.
fn next_digits(digits: &mut [usize], w: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < w {
            return true;
        }
        *d = 0;
    }
    false
}

/// Neighbourhood descent from the all-ones vector. Each round scores every
/// assignment of all `W` phases to every `r`-subset of the free coordinates
/// (`C(M-1, r) * W^r` candidates) and moves to the best if it improves.
/// Stops early at a local minimum; the trajectory is padded to `iterations`.
pub fn gd_search<O: Objective + ?Sized>(objective: &mut O, config: &GdConfig) -> Result<OptimizerReport> {
    let w = objective.phase_set().w();
    let m = objective.subblock_count();
    let free: Vec<usize> = free_coordinates(m, config.fixed_first).collect();
    if config.radius < 1 || config.radius > free.len() {
        return Err(Error::InvalidInput(format!(
            "search radius {} outside 1..={} free coordinates",
            config.radius,
            free.len()
        )));
    }
    let mut current = start(objective)?;
    let mut evaluations = 1u64;
    let mut trajectory = Vec::with_capacity(config.iterations);
    let mut candidate = current.b.clone();
    for _ in 0..config.iterations {
        let mut round = BestSoFar {
            b: current.b.clone(),
            f: f64::INFINITY,
        };
        let mut combo: Vec<usize> = (0..config.radius).collect();
        loop {
            let mut digits = vec![0; config.radius];
            loop {
                candidate.clone_from(&current.b);
                for (&slot, &phase) in combo.iter().zip(&digits) {
                    candidate.set_index(free[slot], phase);
                }
                let f = objective.evaluate(&candidate)?;
                evaluations += 1;
                round.offer(&candidate, f);
                if !next_digits(&mut digits, w) {
                    break;
                }
            }
            if !next_combination(&mut combo, free.len()) {
                break;
            }
        }
        if !current.offer(&round.b, round.f) {
            break;
        }
        trajectory.push(current.f);
    }
    trajectory.resize(config.iterations, current.f);
    OptimizerReport::new(current.b, current.f, evaluations, Some(trajectory))
}

/// Every phase vector with the first factor fixed to 1, `W^(M-1)` in all.
pub fn exhaustive<O: Objective + ?Sized>(objective: &mut O, cap: u64) -> Result<OptimizerReport> {
    let w = objective.phase_set().w();
    let m = objective.subblock_count();
    let free = m.saturating_sub(1);
    let candidates = (w as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    if candidates > cap as u128 {
        return Err(Error::SearchCapExceeded { candidates, cap });
    }
    let mut b = PhaseVector::identity(w, m);
    let mut best = BestSoFar {
        b: b.clone(),
        f: f64::INFINITY,
    };
    let mut digits = vec![0; free];
    let mut evaluations = 0u64;
    loop {
        for (i, &d) in digits.iter().enumerate() {
            b.set_index(i + 1, d);
        }
        let f = objective.evaluate(&b)?;
        evaluations += 1;
        best.offer(&b, f);
        if !next_digits(&mut digits, w) {
            break;
        }
    }
    OptimizerReport::new(best.b, best.f, evaluations, None)
}
