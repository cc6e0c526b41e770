//! The three counting experiments and their statistics.
//!
//! 1. Fix M, vary the exponent: the solution count does not change, only the
//!    per-plane count list is permuted.
//! 2. Fix the exponent, vary M: distribution of log2 solution counts.
//! 3. Fix the exponent, vary M, also counting the principal ideal of A:
//!    Spearman correlation and regularity rates.
//!
//! Trials are independently seeded from a master seed through a fixed
//! splitting rule, so serial and parallel runs produce identical records.

use std::io::Write;
use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automorphism::CycleAutomorphism;
use crate::boolmat::{mat_mul, BitMatrix};
use crate::error::{MobsError, Result};
use crate::protocol::generate_a;
use crate::telescoping::{count_orbit, count_solutions};

/// One trial of any experiment. Orbit and regularity fields are only present
/// for the third experiment.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub exponent: u128,
    pub per_plane: Vec<u64>,
    pub solution_total: BigUint,
    pub log2_solutions: f64,
    pub log2_orbit: Option<f64>,
    pub regular: Option<bool>,
    pub ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub trials: u64,
    pub min_log2_solutions: f64,
    pub max_log2_solutions: f64,
    pub mean_log2_solutions: f64,
    pub spearman_rho: Option<f64>,
    pub regularity_pct: Option<f64>,
    pub histogram: Histogram,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fixed seed-splitting rule: trial t of a run with master seed s gets its
/// own stream seed, independent of execution order.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial.wrapping_add(1)))
}

fn run_trials<F>(trials: u64, workers: usize, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(u64) -> Result<TrialRecord> + Sync + Send,
{
    let indices: Vec<u64> = (0..trials).collect();
    let mut records = if workers <= 1 {
        indices.into_iter().map(f).collect::<Result<Vec<_>>>()?
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| MobsError::InvalidArgument(e.to_string()))?;
        pool.install(|| indices.into_par_iter().map(&f).collect::<Result<Vec<_>>>())?
    };
    records.sort_by_key(|r| r.trial);
    Ok(records)
}

fn count_for(
    m: &BitMatrix,
    h: &CycleAutomorphism,
    x: u128,
    trial: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let a = generate_a(m, h, x)?;
    let target = mat_mul(&h.apply(&a)?, m)?;
    let report = count_solutions(&target, &a)?;
    Ok(TrialRecord {
        trial,
        seed,
        n: m.n(),
        k: m.k(),
        exponent: x,
        per_plane: report.per_plane,
        solution_total: report.total,
        log2_solutions: report.log2_total,
        log2_orbit: None,
        regular: None,
        ms: start.elapsed().as_millis() as u64,
    })
}

fn exponent_range(e_min: u32, e_max: u32) -> Result<(u128, u128)> {
    if e_min > e_max || e_max >= 120 {
        return Err(MobsError::InvalidArgument(format!(
            "bad exponent range [2^{e_min}, 2^{e_max}]"
        )));
    }
    Ok((1u128 << e_min, 1u128 << e_max))
}

/// Experiment 1: fixed public matrix, random exponent per trial drawn
/// uniformly from [2^e_min, 2^e_max].
pub fn experiment_fixed_matrix(
    m: &BitMatrix,
    h: &CycleAutomorphism,
    trials: u64,
    e_min: u32,
    e_max: u32,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>> {
    let (lo, hi) = exponent_range(e_min, e_max)?;
    run_trials(trials, workers, |t| {
        let seed = trial_seed(master_seed, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = rng.random_range(lo..=hi);
        count_for(m, h, x, t, seed)
    })
}

/// Experiment 2: fixed exponent, fresh random public matrix per trial.
pub fn experiment_random_matrix(
    h: &CycleAutomorphism,
    x: u128,
    n: usize,
    k: usize,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>> {
    run_trials(trials, workers, |t| {
        let seed = trial_seed(master_seed, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = BitMatrix::random(n, k, &mut rng);
        count_for(&m, h, x, t, seed)
    })
}

/// Experiment 3: as experiment 2, additionally counting the principal ideal
/// of A and checking regularity.
pub fn experiment_orbit_vs_solutions(
    h: &CycleAutomorphism,
    x: u128,
    n: usize,
    k: usize,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrialRecord>> {
    run_trials(trials, workers, |t| {
        let seed = trial_seed(master_seed, t);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = BitMatrix::random(n, k, &mut rng);
        let start = Instant::now();
        let a = generate_a(&m, h, x)?;
        let target = mat_mul(&h.apply(&a)?, &m)?;
        let forward = count_solutions(&target, &a)?;
        let reversed = count_solutions(&a, &target)?;
        let orbit = count_orbit(&a)?;
        Ok(TrialRecord {
            trial: t,
            seed,
            n,
            k,
            exponent: x,
            log2_orbit: Some(orbit.log2_total),
            regular: Some(forward.total == reversed.total),
            log2_solutions: forward.log2_total,
            solution_total: forward.total,
            per_plane: forward.per_plane,
            ms: start.elapsed().as_millis() as u64,
        })
    })
}

/// Spearman's rank correlation with average ranks for ties.
pub fn spearman_rho(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(MobsError::SpearmanUndefined(
            "need at least two pairs".into(),
        ));
    }
    let xs = average_ranks(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ys = average_ranks(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    pearson(&xs, &ys)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MobsError::SpearmanUndefined(
            "zero variance in a coordinate".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Fixed-width histogram in log2 space; Freedman-Diaconis width with a floor
/// of 1.0.
pub fn log2_histogram(values: &[f64]) -> Histogram {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Histogram {
            bin_edges: vec![],
            counts: vec![],
        };
    }
    let mut sorted = finite.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p) as usize];
    let iqr = q(0.75) - q(0.25);
    let width = (2.0 * iqr / (sorted.len() as f64).cbrt()).max(1.0);
    let lo = sorted[0].floor();
    let hi = sorted[sorted.len() - 1];
    let bins = (((hi - lo) / width).floor() as usize + 1).max(1);
    let mut counts = vec![0u64; bins];
    for v in &finite {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Histogram {
        bin_edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
        counts,
    }
}

pub fn summarize(records: &[TrialRecord]) -> SummaryStats {
    let logs: Vec<f64> = records.iter().map(|r| r.log2_solutions).collect();
    let pairs: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.log2_orbit.map(|o| (o, r.log2_solutions)))
        .collect();
    let spearman = if pairs.len() == records.len() && pairs.len() >= 2 {
        spearman_rho(&pairs).ok()
    } else {
        None
    };
    let regulars: Vec<bool> = records.iter().filter_map(|r| r.regular).collect();
    let regularity_pct = if regulars.len() == records.len() && !regulars.is_empty() {
        Some(100.0 * regulars.iter().filter(|&&r| r).count() as f64 / regulars.len() as f64)
    } else {
        None
    };
    SummaryStats {
        trials: records.len() as u64,
        min_log2_solutions: logs.iter().copied().fold(f64::INFINITY, f64::min),
        max_log2_solutions: logs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_log2_solutions: logs.iter().sum::<f64>() / logs.len().max(1) as f64,
        spearman_rho: spearman,
        regularity_pct,
        histogram: log2_histogram(&logs),
    }
}

/// CSV schema: trial,seed,n,k,exponent,log2_solutions,log2_orbit,regular,per_plane_json,ms
pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "seed",
        "n",
        "k",
        "exponent",
        "log2_solutions",
        "log2_orbit",
        "regular",
        "per_plane_json",
        "ms",
    ])
    .map_err(io_err)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.exponent.to_string(),
            r.log2_solutions.to_string(),
            r.log2_orbit.map(|v| v.to_string()).unwrap_or_default(),
            r.regular.map(|v| v.to_string()).unwrap_or_default(),
            serde_json::to_string(&r.per_plane)?,
            r.ms.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| MobsError::InvalidArgument(e.to_string()))?;
    Ok(())
}

fn io_err(e: csv::Error) -> MobsError {
    MobsError::InvalidArgument(e.to_string())
}
