//! End-to-end checks at the reference operating points.
//!
//! Runs as a plain binary so every criterion reports one line, pass or fail,
//! and the process exits non-zero if any failed. Scale knobs: none; the
//! sample counts are the ones the tolerances were set for.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use papr_pts::cli::{execute, parse_args};
use papr_pts::harness::{
    oracle_check, run_compare, run_convergence, run_symbols, CcdfCurve, ExperimentConfig,
};
use papr_pts::optimizers::{quantize_phase, AbcConfig, GdConfig, OptimizerConfig};
use papr_pts::pts::{
    combine, make_partition, split_and_transform, PartitionScheme, PhaseSet, PhaseVector,
};
use papr_pts::signal::{
    direct_idft, map_symbols, oversampled_idft, Constellation, Modulation, OfdmBlock,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn model(symbols: usize, optimizer: OptimizerConfig) -> ExperimentConfig {
    ExperimentConfig {
        n: 256,
        m: 16,
        oversampling: 4,
        w: 2,
        modulation: Modulation::Qam16,
        partition: PartitionScheme::Random,
        symbols,
        master_seed: 2024,
        optimizer,
        ..ExperimentConfig::default()
    }
}

fn abc(limit: usize, k: usize) -> OptimizerConfig {
    OptimizerConfig::Abc(AbcConfig {
        population: 30,
        limit,
        max_iterations: k,
        ..AbcConfig::default()
    })
}

fn rs(trials: usize) -> OptimizerConfig {
    OptimizerConfig::RandomSearch {
        trials,
        fixed_first: true,
    }
}

fn crossing(symbols: usize, optimizer: OptimizerConfig, target: f64) -> Result<f64, String> {
    let rows = run_compare(&[model(symbols, optimizer)], target).map_err(|e| e.to_string())?;
    Ok(rows[0].papr_db)
}

fn within(label: &str, got: f64, want: f64, tol: f64) -> Outcome {
    let msg = format!("{label} = {got:.3} dB (want {want} ± {tol})");
    if (got - want).abs() <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn original_ccdf() -> Outcome {
    let db = crossing(100_000, OptimizerConfig::None, 1e-3)?;
    within("unmodified PAPR at 1e-3", db, 11.3, 0.3)
}

fn ipts_ccdf() -> Outcome {
    let db = crossing(100_000, OptimizerConfig::Ipts { fixed_first: true }, 1e-3)?;
    within("IPTS PAPR at 1e-3", db, 7.95, 0.3)
}

fn abc_table_point() -> Outcome {
    let rows = run_compare(&[model(20_000, abc(5, 30))], 1e-3).map_err(|e| e.to_string())?;
    let r = &rows[0];
    within(
        &format!("ABC S=30 limit=5 K=30 ({:.0} evals/symbol) at 1e-3", r.evaluations),
        r.papr_db,
        6.8,
        0.4,
    )
}

fn iteration_sweep() -> Outcome {
    let rows = run_compare(
        &[model(10_000, abc(5, 40)), model(10_000, abc(5, 20)), model(10_000, rs(600))],
        1e-2,
    )
    .map_err(|e| e.to_string())?;
    let (k40, k20, rs600) = (rows[0].papr_db, rows[1].papr_db, rows[2].papr_db);
    let msg = format!("at 1e-2: K=40 {k40:.3}, K=20 {k20:.3}, RS(600) {rs600:.3} dB; gap {:.3}", k20 - k40);
    if k40 <= k20 && k20 <= rs600 && k20 - k40 <= 0.3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn limit_insensitivity() -> Outcome {
    let rows = run_compare(&[model(10_000, abc(3, 30)), model(10_000, abc(8, 30))], 1e-2)
        .map_err(|e| e.to_string())?;
    let delta = rows[0].papr_db - rows[1].papr_db;
    let msg = format!(
        "at 1e-2: limit=3 {:.3}, limit=8 {:.3} dB; |Δ| = {:.3} (want ≤ 0.15)",
        rows[0].papr_db,
        rows[1].papr_db,
        delta.abs()
    );
    if delta.abs() <= 0.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn convergence() -> Outcome {
    let stat = run_convergence(&model(1, abc(5, 60)), 100).map_err(|e| e.to_string())?;
    let t = &stat.mean_best_db;
    let monotone = t.windows(2).all(|w| w[1] <= w[0]);
    let drop = t[29] - t[59];
    let msg = format!(
        "mean best {:.3} dB at iteration 30, {:.3} dB at 60; drop {drop:.3} (want ≤ 0.15), non-increasing: {monotone}",
        t[29], t[59]
    );
    if t.len() == 60 && monotone && drop <= 0.15 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn exhaustive_dominance() -> Outcome {
    let symbols = 500;
    let exact = run_symbols(&model(symbols, OptimizerConfig::Exhaustive { cap: 1 << 20 }))
        .map_err(|e| e.to_string())?;
    let heuristics = [
        OptimizerConfig::Ipts { fixed_first: true },
        rs(600),
        OptimizerConfig::Gd(GdConfig::default()),
        abc(5, 30),
    ];
    let mut worst = 0usize;
    let mut names = Vec::new();
    for h in heuristics {
        let got = run_symbols(&model(symbols, h.clone())).map_err(|e| e.to_string())?;
        let ok = exact.iter().zip(&got).filter(|(e, g)| e.papr_db <= g.papr_db).count();
        worst = worst.max(symbols - ok);
        names.push(format!("{h} {ok}/{symbols}"));
    }
    let msg = format!("exhaustive ≤ heuristic per symbol: {}", names.join(", "));
    if worst == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn oracle() -> Outcome {
    let mut lines = Vec::new();
    let mut failed = 0;
    for n in [8, 16] {
        for m in [2, 4] {
            for w in [2, 4] {
                let report = oracle_check(n, m, w, 0..50).map_err(|e| e.to_string())?;
                failed += report.entries.len() - report.passed();
                lines.push(format!("N{n}M{m}W{w} {}/{}", report.passed(), report.entries.len()));
            }
        }
    }
    let msg = lines.join(", ");
    if failed == 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_block(n: usize, rng: &mut ChaCha8Rng) -> OfdmBlock {
    let c = Constellation::qam16();
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..c.len())).collect();
    map_symbols(&idx, &c).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn numeric_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_parseval = 0.0f64;
    let mut worst_linear = 0.0f64;
    let mut worst_direct = 0.0f64;
    for n in [4, 8, 16, 32, 64, 128, 256] {
        for l in [1, 2, 4] {
            let x = random_block(n, &mut rng);
            let y = random_block(n, &mut rng);
            let tx = oversampled_idft(&x, l).unwrap();
            worst_parseval = worst_parseval.max(rel(tx.mean_power(), x.mean_energy()));

            let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-0.2, 0.4));
            let mix: Vec<Complex64> = x.symbols().iter().zip(y.symbols()).map(|(p, q)| a * p + b * q).collect();
            let tmix = oversampled_idft(&OfdmBlock::from_symbols(mix.clone()).unwrap(), l).unwrap();
            let ty = oversampled_idft(&y, l).unwrap();
            let scale = tmix.samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
            for ((m, p), q) in tmix.samples().iter().zip(tx.samples()).zip(ty.samples()) {
                worst_linear = worst_linear.max((m - (a * p + b * q)).norm() / scale);
            }
            if n <= 64 {
                let d = direct_idft(&mix, l).unwrap();
                for (f, s) in tmix.samples().iter().zip(d.samples()) {
                    worst_direct = worst_direct.max((f - s).norm() / scale);
                }
            }
        }
    }

    let block = random_block(256, &mut rng);
    let partition = make_partition(256, 16, PartitionScheme::Random, &mut rng).unwrap();
    let modulator = papr_pts::signal::Modulator::new(256, 4).unwrap();
    let sub = split_and_transform(&block, &partition, &modulator).unwrap();
    let powers: Vec<f64> = (0..100)
        .map(|_| combine(&sub, &PhaseVector::random(4, 16, false, &mut rng)).unwrap().mean_power())
        .collect();
    let hi = powers.iter().copied().fold(0.0, f64::max);
    let lo = powers.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi;

    let idempotent = (2..=64).all(|w| {
        let set = PhaseSet::new(w).unwrap();
        set.elements().iter().enumerate().all(|(i, &p)| quantize_phase(p, &set) == Some(i))
    });

    let samples: Vec<f64> = (0..5000).map(|_| 5.0 + 8.0 * rng.random::<f64>()).collect();
    let curve = CcdfCurve::from_samples(&samples, &papr_pts::harness::default_thresholds()).unwrap();
    let monotone = curve.probabilities.windows(2).all(|w| w[1] <= w[0])
        && curve.probabilities.iter().all(|p| (0.0..=1.0).contains(p));

    let csv = |args: &str, workers: usize| -> Result<String, String> {
        let argv = std::iter::once("papr-pts").chain(args.split_whitespace());
        let inv = parse_args(argv).map_err(|e| e.message)?;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| execute(&inv)).map(|(csv, _, _)| csv).map_err(|e| e.to_string())
    };
    let mut identical = true;
    for args in [
        "ccdf --optimizer abc --symbols 200 --seed 5 --k 5",
        "compare --optimizer none,ipts,rs,gd,abc --symbols 300 --trials 50 --k 4 --r 1 --target-ccdf 0.01 --seed 8",
        "convergence --runs 12 --k 8 --seed 3",
        "ccdf --symbols 400 --per-symbol-partition true --optimizer ipts --seed 1",
    ] {
        let reference = csv(args, 1)?;
        for workers in [1, 2, 4] {
            identical &= csv(args, workers)? == reference;
        }
    }

    let msg = format!(
        "Parseval {worst_parseval:.1e}, linearity {worst_linear:.1e}, fast-vs-direct {worst_direct:.1e}, \
         power spread {spread:.1e} (all ≤ 1e-9); quantize idempotent {idempotent}; CCDF monotone {monotone}; \
         CSV byte-identical {identical}"
    );
    let tight = [worst_parseval, worst_linear, worst_direct, spread].iter().all(|&e| e <= 1e-9);
    if tight && idempotent && monotone && identical {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Check; 9] = [
        ("original-signal CCDF", original_ccdf),
        ("IPTS CCDF", ipts_ccdf),
        ("ABC table point", abc_table_point),
        ("iteration sweep ordering", iteration_sweep),
        ("limit insensitivity", limit_insensitivity),
        ("convergence", convergence),
        ("exhaustive dominance", exhaustive_dominance),
        ("oracle equivalence", oracle),
        ("numeric invariants", numeric_invariants),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {}: PASS {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
