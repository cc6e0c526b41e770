//! `mobs`: workbench CLI for the MOBS key exchange, telescoping-equality
//! counting, the two key-recovery attacks, and the three experiments.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mobs_core::attack::{monico_attack, monico_enumerate, telescope_attack};
use mobs_core::automorphism::{build_prime_cycle_perm, prime_prefix_for_sum, CycleAutomorphism};
use mobs_core::boolmat::{mat_mul, BitMatrix};
use mobs_core::experiments::{
    experiment_fixed_matrix, experiment_orbit_vs_solutions, experiment_random_matrix, summarize,
    write_csv, TrialRecord,
};
use mobs_core::protocol::{run_exchange, TranscriptFile};
use mobs_core::telescoping::{count_orbit, count_solutions};

#[derive(Parser)]
#[command(name = "mobs", version, about = "MOBS key exchange and cryptanalysis workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PlatformArgs {
    /// Matrix dimension
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Bitstring length; resolved to the ascending prime prefix summing to it
    #[arg(long)]
    k: Option<usize>,
    /// Explicit cycle lengths, e.g. "2,3,5"; sum gives k
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<usize>>,
    /// Scatter cycle membership over positions instead of contiguous blocks
    #[arg(long)]
    scatter_cycles: bool,
}

impl PlatformArgs {
    fn resolve(&self, rng: &mut ChaCha8Rng) -> Result<(usize, CycleAutomorphism)> {
        let primes = match (&self.k, &self.primes) {
            (Some(k), None) => prime_prefix_for_sum(*k)?,
            (None, Some(ps)) => ps.clone(),
            (Some(k), Some(ps)) => {
                if ps.iter().sum::<usize>() != *k {
                    bail!("--k {} does not match the sum of --primes {:?}", k, ps);
                }
                ps.clone()
            }
            (None, None) => bail!("one of --k or --primes is required"),
        };
        let k = primes.iter().sum();
        let h = if self.scatter_cycles {
            build_prime_cycle_perm(k, &primes, Some(rng))?
        } else {
            build_prime_cycle_perm(k, &primes, None::<&mut ChaCha8Rng>)?
        };
        Ok((k, h))
    }
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    platform: PlatformArgs,
    /// Master seed; every published number must be reproducible
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    trials: u64,
    /// Output directory for the CSV and summary JSON
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for independent trials
    #[arg(long, env = "MOBS_WORKERS", default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one full exchange and print the transcript JSON
    DemoExchange {
        #[command(flatten)]
        platform: PlatformArgs,
        #[arg(long)]
        seed: u64,
        /// Private exponents drawn uniformly from [2^e_min, 2^e_max]
        #[arg(long, default_value_t = 7)]
        e_min: u32,
        #[arg(long, default_value_t = 10)]
        e_max: u32,
        /// Include the private exponents and key in the output
        #[arg(long)]
        reveal_private: bool,
    },
    /// Count telescoping-equality solutions and the ideal size of A
    CountSolutions {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Experiment 1: fix M, vary the exponent
    Exp1 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 7)]
        e_min: u32,
        #[arg(long, default_value_t = 10)]
        e_max: u32,
    },
    /// Experiment 2: fix the exponent, vary M
    Exp2 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 100)]
        exponent: u128,
    },
    /// Experiment 3: as exp2, also counting ideal sizes and regularity
    Exp3 {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 100)]
        exponent: u128,
    },
    /// Key-recovery attacks on a transcript file
    Attack {
        #[command(subcommand)]
        attack: AttackCommand,
    },
}

#[derive(Subcommand)]
enum AttackCommand {
    /// Monico's CRT attack over the prime cycles of h
    Monico {
        #[arg(long)]
        transcript: PathBuf,
        /// Enumerate every CRT combination of admissible residues
        #[arg(long)]
        enumerate_all: bool,
        /// Cap on enumerated combinations
        #[arg(long, default_value_t = 1000)]
        cap: u64,
    },
    /// Guess solutions of the telescoping equality up to a budget
    Telescope {
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        budget: u64,
    },
}

fn load_transcript(path: &PathBuf) -> Result<TranscriptFile> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read transcript {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("cannot parse transcript {}", path.display()))
}

fn write_experiment_outputs(
    name: &str,
    records: &[TrialRecord],
    out: &PathBuf,
) -> Result<()> {
    fs::create_dir_all(out)?;
    let csv_path = out.join(format!("{name}.csv"));
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    fs::write(&csv_path, buf)?;
    let summary_path = out.join(format!("{name}_summary.json"));
    fs::write(&summary_path, serde_json::to_vec_pretty(&summarize(records))?)?;
    eprintln!(
        "wrote {} and {}",
        csv_path.display(),
        summary_path.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::DemoExchange {
            platform,
            seed,
            e_min,
            e_max,
            reveal_private,
        } => {
            if e_min > e_max || e_max >= 120 {
                bail!("bad exponent range [2^{e_min}, 2^{e_max}]");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (k, h) = platform.resolve(&mut rng)?;
            let m = BitMatrix::random(platform.n, k, &mut rng);
            let x = rng.random_range(1u128 << e_min..=1u128 << e_max);
            let y = rng.random_range(1u128 << e_min..=1u128 << e_max);
            let transcript = run_exchange(&m, &h, x, y)?;
            let file = if reveal_private {
                TranscriptFile::with_private(&transcript)
            } else {
                TranscriptFile::public_only(&transcript)
            };
            println!("{}", serde_json::to_string_pretty(&file)?);
        }
        Command::CountSolutions { transcript } => {
            let t = load_transcript(&transcript)?;
            let target = mat_mul(&t.h.apply(&t.a)?, &t.m)?;
            let solutions = count_solutions(&target, &t.a)?;
            let orbit = count_orbit(&t.a)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "solutions": solutions,
                    "orbit": orbit,
                }))?
            );
        }
        Command::Exp1 { exp, e_min, e_max } => {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            let (k, h) = exp.platform.resolve(&mut rng)?;
            let m = BitMatrix::random(exp.platform.n, k, &mut rng);
            let records =
                experiment_fixed_matrix(&m, &h, exp.trials, e_min, e_max, exp.seed, exp.workers)?;
            write_experiment_outputs("exp1", &records, &exp.out)?;
        }
        Command::Exp2 { exp, exponent } => {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            let (k, h) = exp.platform.resolve(&mut rng)?;
            let records = experiment_random_matrix(
                &h,
                exponent,
                exp.platform.n,
                k,
                exp.trials,
                exp.seed,
                exp.workers,
            )?;
            write_experiment_outputs("exp2", &records, &exp.out)?;
        }
        Command::Exp3 { exp, exponent } => {
            let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
            let (k, h) = exp.platform.resolve(&mut rng)?;
            let records = experiment_orbit_vs_solutions(
                &h,
                exponent,
                exp.platform.n,
                k,
                exp.trials,
                exp.seed,
                exp.workers,
            )?;
            write_experiment_outputs("exp3", &records, &exp.out)?;
        }
        Command::Attack { attack } => match attack {
            AttackCommand::Monico {
                transcript,
                enumerate_all,
                cap,
            } => {
                let t = load_transcript(&transcript)?;
                let view = t.view();
                let outcome = monico_attack(&view, t.key.as_ref())?;
                let mut output = serde_json::json!({
                    "candidate_exponent": outcome.candidate_exponent.to_string(),
                    "success": outcome.success,
                    "residue_ambiguity": outcome.residue_ambiguity,
                    "candidate_key": outcome.candidate_key,
                });
                if enumerate_all {
                    let e = monico_enumerate(&view, cap, t.key.as_ref())?;
                    output["enumeration"] = serde_json::json!({
                        "combinations_tried": e.combinations_tried,
                        "distinct_keys": e.distinct_keys,
                        "all_keys_match": e.all_keys_match,
                    });
                }
                println!("{}", serde_json::to_string_pretty(&output)?);
            }
            AttackCommand::Telescope { transcript, budget } => {
                let t = load_transcript(&transcript)?;
                let out = telescope_attack(&t.view(), budget, t.key.as_ref())?;
                let output = serde_json::json!({
                    "found": out.outcome.is_some(),
                    "candidate_exponent": out.outcome.as_ref()
                        .map(|o| o.candidate_exponent.to_string()),
                    "success": out.outcome.as_ref().and_then(|o| o.success),
                    "guesses": out.guesses,
                    "solution_total": out.solutions.total.to_string(),
                    "log2_solution_total": out.solutions.log2_total,
                });
                println!("{}", serde_json::to_string_pretty(&output)?);
            }
        },
    }
    Ok(())
}
