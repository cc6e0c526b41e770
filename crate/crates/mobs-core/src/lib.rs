//! MOBS key exchange over Boolean bitstring matrices: the protocol, exact
//! solution counting for its telescoping equality, ideal-size measurements,
//! and the permutation-recovery and Monico CRT attacks.

pub mod attack;
pub mod automorphism;
pub mod boolmat;
pub mod error;
pub mod experiments;
pub mod protocol;
pub mod telescoping;

pub use attack::{
    crt_combine, cycle_residues, monico_attack, monico_enumerate, telescope_attack,
    AttackOutcome, CycleResidues, TelescopeOutcome,
};
pub use automorphism::{
    build_prime_cycle_perm, first_primes, prime_prefix_for_sum, CycleAutomorphism,
};
pub use boolmat::{
    all_matrices, assemble, mat_mul, plane_mul, pull, BitMatrix, BitString, PlaneMatrix,
};
pub use error::{MobsError, Result};
pub use experiments::{
    experiment_fixed_matrix, experiment_orbit_vs_solutions, experiment_random_matrix,
    spearman_rho, summarize, write_csv, SummaryStats, TrialRecord,
};
pub use protocol::{
    derive_key, generate_a, holomorph_pow, run_exchange, ExchangeTranscript, HolomorphElement,
    PublicView, TranscriptFile,
};
pub use telescoping::{
    count_orbit, count_singlebit_orbit, count_singlebit_solutions, count_solutions, is_regular,
    OrbitReport, SolutionReport,
};
