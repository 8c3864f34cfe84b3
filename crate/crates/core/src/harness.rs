//! Seeded Monte-Carlo experiments: CCDF curves, convergence statistics,
//! optimizer comparisons and the brute-force oracle check.
//!
//! # Random streams
//!
//! Every random draw comes from a ChaCha8 generator whose key is expanded
//! from the master seed (`ChaCha8Rng::seed_from_u64`) and whose 64-bit
//! stream id is `tag << 56 | index`, with one tag per purpose:
//!
//! | tag | purpose                         | index        |
//! |-----|---------------------------------|--------------|
//! | 0   | constellation indices of symbol | symbol index |
//! | 1   | optimizer randomness on symbol  | symbol index |
//! | 2   | the shared partition            | 0            |
//! | 3   | per-symbol partition            | symbol index |
//! | 4   | convergence run                 | run index    |
//!
//! A symbol's result therefore depends only on the configuration and its
//! index, never on which worker ran it or in what order.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizers::{
    abc_pts, exhaustive, gd_search, ipts, random_search, AbcConfig, GdConfig, OptimizerConfig,
    DEFAULT_EXHAUSTIVE_CAP,
};
use crate::pts::{make_partition, split_and_transform, Partition, PartitionScheme, PtsObjective};
use crate::signal::{
    direct_idft, map_symbols, papr, papr_db, papr_of, Constellation, Modulation, Modulator, OfdmBlock,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Symbol = 0,
    Optimizer = 1,
    Partition = 2,
    SymbolPartition = 3,
    ConvergenceRun = 4,
}

/// Generator for one (purpose, index) pair under `master_seed`.
pub fn substream(master_seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((stream as u64) << 56 | index);
    rng
}

/// 5.0 to 13.0 dB in 0.05 dB steps.
pub fn default_thresholds() -> Vec<f64> {
    (0..=160).map(|i| (500 + 5 * i) as f64 / 100.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub oversampling: usize,
    pub w: usize,
    pub modulation: Modulation,
    pub partition: PartitionScheme,
    /// Draw a new partition for every symbol instead of one per experiment.
    pub per_symbol_partition: bool,
    pub optimizer: OptimizerConfig,
    pub symbols: usize,
    pub master_seed: u64,
    pub thresholds_db: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 256,
            m: 16,
            oversampling: 4,
            w: 2,
            modulation: Modulation::Qam16,
            partition: PartitionScheme::Random,
            per_symbol_partition: false,
            optimizer: OptimizerConfig::None,
            symbols: 100_000,
            master_seed: 0,
            thresholds_db: default_thresholds(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("subcarrier count must be positive".into());
        }
        if self.m == 0 || self.m > self.n {
            return bad(format!("sub-block count {} must lie in 1..={}", self.m, self.n));
        }
        if self.oversampling == 0 {
            return bad("oversampling factor must be at least 1".into());
        }
        if self.w < 2 {
            return bad(format!("phase set size {} must be at least 2", self.w));
        }
        if self.symbols == 0 {
            return bad("need at least one symbol".into());
        }
        if self.thresholds_db.is_empty() || self.thresholds_db.windows(2).any(|p| !(p[0] < p[1])) {
            return bad("threshold grid must be non-empty and strictly ascending".into());
        }
        match &self.optimizer {
            OptimizerConfig::Abc(c) => {
                if c.population < 2 || c.limit < 1 || c.max_iterations < 1 {
                    return bad("ABC needs S >= 2, limit >= 1 and K >= 1".into());
                }
            }
            OptimizerConfig::Gd(c) => {
                let free = self.m - usize::from(c.fixed_first);
                if c.radius < 1 || c.radius > free {
                    return bad(format!("GD radius {} must lie in 1..={free}", c.radius));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn same_model(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.oversampling == other.oversampling
            && self.w == other.w
            && self.modulation == other.modulation
            && self.partition == other.partition
            && self.per_symbol_partition == other.per_symbol_partition
            && self.symbols == other.symbols
            && self.master_seed == other.master_seed
            && self.thresholds_db == other.thresholds_db
    }
}

/// Per-symbol result of a CCDF run.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolOutcome {
    pub index: usize,
    pub papr_db: f64,
    pub evaluations: u64,
}

fn draw_block(config: &ExperimentConfig, constellation: &Constellation, index: usize) -> Result<OfdmBlock> {
    let mut rng = substream(config.master_seed, Stream::Symbol, index as u64);
    let q = constellation.len();
    let idx: Vec<usize> = (0..config.n).map(|_| rng.random_range(0..q)).collect();
    map_symbols(&idx, constellation)
}

fn shared_partition(config: &ExperimentConfig) -> Result<Partition> {
    let mut rng = substream(config.master_seed, Stream::Partition, 0);
    make_partition(config.n, config.m, config.partition, &mut rng)
}

fn symbol_partition(config: &ExperimentConfig, shared: &Partition, index: usize) -> Result<Partition> {
    if config.per_symbol_partition {
        let mut rng = substream(config.master_seed, Stream::SymbolPartition, index as u64);
        make_partition(config.n, config.m, config.partition, &mut rng)
    } else {
        Ok(shared.clone())
    }
}

/// Runs the configured optimizer on every symbol, in symbol order.
pub fn run_symbols(config: &ExperimentConfig) -> Result<Vec<SymbolOutcome>> {
    config.validate()?;
    let constellation = Constellation::new(config.modulation);
    let modulator = Modulator::new(config.n, config.oversampling)?;
    let partition = shared_partition(config)?;
    (0..config.symbols)
        .into_par_iter()
        .map(|index| {
            let block = draw_block(config, &constellation, index)?;
            if config.optimizer == OptimizerConfig::None {
                let ratio = papr(&modulator.modulate(&block)?)?;
                return Ok(SymbolOutcome {
                    index,
                    papr_db: papr_db(ratio)?,
                    evaluations: 1,
                });
            }
            let partition = symbol_partition(config, &partition, index)?;
            let subblocks = split_and_transform(&block, &partition, &modulator)?;
            let mut objective = PtsObjective::new(&subblocks, config.w)?;
            let mut rng = substream(config.master_seed, Stream::Optimizer, index as u64);
            let report = config.optimizer.run(&mut objective, &mut rng)?;
            Ok(SymbolOutcome {
                index,
                papr_db: report.best_papr_db,
                evaluations: report.evaluations,
            })
        })
        .collect()
}

/// Empirical `Pr(PAPR > threshold)` over a threshold grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub sample_count: usize,
}

impl CcdfCurve {
    pub fn from_samples(samples_db: &[f64], thresholds_db: &[f64]) -> Result<Self> {
        if samples_db.is_empty() {
            return Err(Error::InvalidInput("CCDF of an empty sample".into()));
        }
        let mut sorted = samples_db.to_vec();
        sorted.sort_by(f64::total_cmp);
        let total = sorted.len();
        let probabilities = thresholds_db
            .iter()
            .map(|&t| (total - sorted.partition_point(|&x| x <= t)) as f64 / total as f64)
            .collect();
        Ok(CcdfCurve {
            thresholds_db: thresholds_db.to_vec(),
            probabilities,
            sample_count: total,
        })
    }

    /// Threshold (dB) at which the curve falls to `target`, interpolated
    /// linearly between grid points.
    pub fn crossing_db(&self, target: f64) -> Result<f64> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::InvalidInput(format!("target probability {target} outside (0, 1)")));
        }
        if target < 1.0 / self.sample_count as f64 {
            return Err(Error::InsufficientSamples {
                target,
                symbols: self.sample_count,
            });
        }
        let i = self
            .probabilities
            .iter()
            .position(|&p| p <= target)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "CCDF stays above {target} up to {} dB; extend the threshold grid",
                    self.thresholds_db.last().copied().unwrap_or(f64::NAN)
                ))
            })?;
        if i == 0 {
            return Ok(self.thresholds_db[0]);
        }
        let (t0, t1) = (self.thresholds_db[i - 1], self.thresholds_db[i]);
        let (p0, p1) = (self.probabilities[i - 1], self.probabilities[i]);
        Ok(t0 + (p0 - target) / (p0 - p1) * (t1 - t0))
    }
}

pub fn run_ccdf(config: &ExperimentConfig) -> Result<CcdfCurve> {
    let samples: Vec<f64> = run_symbols(config)?.into_iter().map(|s| s.papr_db).collect();
    CcdfCurve::from_samples(&samples, &config.thresholds_db)
}

/// Mean best PAPR (dB) per iteration over repeated runs on one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStat {
    pub mean_best_db: Vec<f64>,
    pub run_count: usize,
}

/// Repeats the optimizer `run_count` times on symbol 0, each run with its
/// own random stream.
pub fn run_convergence(config: &ExperimentConfig, run_count: usize) -> Result<ConvergenceStat> {
    config.validate()?;
    if !config.optimizer.has_trajectory() {
        return Err(Error::InvalidConfig(format!(
            "optimizer {} has no per-iteration trajectory",
            config.optimizer.id()
        )));
    }
    if run_count == 0 {
        return Err(Error::InvalidConfig("need at least one run".into()));
    }
    let constellation = Constellation::new(config.modulation);
    let modulator = Modulator::new(config.n, config.oversampling)?;
    let block = draw_block(config, &constellation, 0)?;
    let partition = symbol_partition(config, &shared_partition(config)?, 0)?;
    let subblocks = split_and_transform(&block, &partition, &modulator)?;
    let trajectories: Vec<Vec<f64>> = (0..run_count)
        .into_par_iter()
        .map(|run| {
            let mut objective = PtsObjective::new(&subblocks, config.w)?;
            let mut rng = substream(config.master_seed, Stream::ConvergenceRun, run as u64);
            let report = config.optimizer.run(&mut objective, &mut rng)?;
            report
                .trajectory
                .unwrap_or_default()
                .into_iter()
                .map(papr_db)
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let len = trajectories[0].len();
    let mean_best_db = (0..len)
        .map(|i| trajectories.iter().map(|t| t[i]).sum::<f64>() / run_count as f64)
        .collect();
    Ok(ConvergenceStat {
        mean_best_db,
        run_count,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub optimizer: String,
    /// Objective calls per symbol, averaged over symbols.
    pub evaluations: f64,
    pub papr_db: f64,
    pub curve: CcdfCurve,
    pub samples_db: Vec<f64>,
}

/// One row per configuration: mean evaluations per symbol and the PAPR
/// where the CCDF crosses `target`.
pub fn run_compare(configs: &[ExperimentConfig], target: f64) -> Result<Vec<CompareRow>> {
    let first = configs
        .first()
        .ok_or_else(|| Error::InvalidConfig("nothing to compare".into()))?;
    if configs.iter().any(|c| !c.same_model(first)) {
        return Err(Error::InvalidConfig(
            "compared configurations must share model parameters, symbol count and seed".into(),
        ));
    }
    if target < 1.0 / first.symbols as f64 {
        return Err(Error::InsufficientSamples {
            target,
            symbols: first.symbols,
        });
    }
    configs
        .iter()
        .map(|config| {
            let outcomes = run_symbols(config)?;
            let samples_db: Vec<f64> = outcomes.iter().map(|s| s.papr_db).collect();
            let curve = CcdfCurve::from_samples(&samples_db, &config.thresholds_db)?;
            let evaluations =
                outcomes.iter().map(|s| s.evaluations as f64).sum::<f64>() / outcomes.len() as f64;
            Ok(CompareRow {
                optimizer: config.optimizer.id().to_string(),
                evaluations,
                papr_db: curve.crossing_db(target)?,
                curve,
                samples_db,
            })
        })
        .collect()
}

/// Global optimum by brute force: every fixed-first phase vector is applied
/// in the frequency domain and synthesized with the direct summation.
/// Shares nothing with the sub-block/FFT path. Returns the linear PAPR.
pub fn brute_force_optimum(block: &OfdmBlock, partition: &Partition, w: usize, oversampling: usize) -> Result<f64> {
    let m = partition.m();
    let rotations: Vec<num_complex::Complex64> = (0..w)
        .map(|l| num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / w as f64))
        .collect();
    let total = w.pow(m.saturating_sub(1) as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut phases = vec![0usize; m];
        let mut rest = code;
        for p in phases.iter_mut().skip(1) {
            *p = rest % w;
            rest /= w;
        }
        let rotated: Vec<_> = block
            .symbols()
            .iter()
            .zip(partition.assignment())
            .map(|(&x, &id)| x * rotations[phases[id]])
            .collect();
        let f = papr_of(direct_idft(&rotated, oversampling)?.samples())?;
        best = best.min(f);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleEntry {
    pub seed: u64,
    pub optimum_db: f64,
    pub exhaustive_db: f64,
    /// (optimizer id, best dB) for each heuristic.
    pub heuristics: Vec<(String, f64)>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub n: usize,
    pub m: usize,
    pub w: usize,
    pub entries: Vec<OracleEntry>,
}

impl OracleReport {
    pub fn passed(&self) -> usize {
        self.entries.iter().filter(|e| e.pass).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.entries.len()
    }
}

const ORACLE_LIMIT: usize = 4096;
const ORACLE_RTOL: f64 = 1e-9;

/// Cross-checks exhaustive search against [`brute_force_optimum`] and every
/// heuristic against that optimum, one random 16-QAM symbol and random
/// partition per seed (`L = 4`).
pub fn oracle_check(n: usize, m: usize, w: usize, seeds: impl IntoIterator<Item = u64>) -> Result<OracleReport> {
    if m == 0 || m > n || w < 2 {
        return Err(Error::InvalidConfig(format!("oracle check needs 1 <= M <= N and W >= 2 (N={n}, M={m}, W={w})")));
    }
    let space = (w as u128).checked_pow(m as u32 - 1).unwrap_or(u128::MAX);
    if space > ORACLE_LIMIT as u128 {
        return Err(Error::InvalidConfig(format!(
            "W^(M-1) = {space} exceeds the brute-force limit {ORACLE_LIMIT}"
        )));
    }
    let oversampling = 4;
    let modulator = Modulator::new(n, oversampling)?;
    let constellation = Constellation::qam16();
    let seeds: Vec<u64> = seeds.into_iter().collect();
    let entries = seeds
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..constellation.len())).collect();
            let block = map_symbols(&idx, &constellation)?;
            let partition = make_partition(n, m, PartitionScheme::Random, &mut rng)?;
            let optimum = brute_force_optimum(&block, &partition, w, oversampling)?;
            let subblocks = split_and_transform(&block, &partition, &modulator)?;
            let mut objective = PtsObjective::new(&subblocks, w)?;
            let ex = exhaustive(&mut objective, DEFAULT_EXHAUSTIVE_CAP)?;

            let abc = AbcConfig {
                population: 8,
                limit: 3,
                max_iterations: 10,
                fixed_first: true,
                ..AbcConfig::default()
            };
            let gd = GdConfig {
                radius: 1,
                iterations: 3,
                fixed_first: true,
            };
            let heuristics = vec![
                ("ipts".to_string(), ipts(&mut objective, true)?.best_papr),
                ("rs".to_string(), random_search(&mut objective, 50, true, &mut rng)?.best_papr),
                ("gd".to_string(), gd_search(&mut objective, &gd)?.best_papr),
                ("abc".to_string(), abc_pts(&mut objective, &abc, &mut rng)?.best_papr),
            ];

            let mut detail = Vec::new();
            if (ex.best_papr - optimum).abs() > ORACLE_RTOL * optimum {
                detail.push(format!("exhaustive {} != brute force {}", ex.best_papr, optimum));
            }
            for (id, f) in &heuristics {
                if *f < optimum * (1.0 - ORACLE_RTOL) {
                    detail.push(format!("{id} {f} below optimum {optimum}"));
                }
            }
            Ok(OracleEntry {
                seed,
                optimum_db: papr_db(optimum)?,
                exhaustive_db: ex.best_papr_db,
                heuristics: heuristics
                    .into_iter()
                    .map(|(id, f)| Ok((id, papr_db(f)?)))
                    .collect::<Result<_>>()?,
                pass: detail.is_empty(),
                detail: detail.join("; "),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OracleReport { n, m, w, entries })
}
