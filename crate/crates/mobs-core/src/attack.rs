//! Key recovery from a public transcript (M, h, A, B).
//!
//! Monico's attack finds an exponent a with h^a(M)A = h(A)M residue by
//! residue over the prime cycles of h, combines the residues by CRT, and
//! forms the candidate key h^a(B)A. The telescope attack instead enumerates
//! solutions Y of h(A)M = YA and tries to read a permutation power off each
//! one; it is defeated by the sheer number of solutions at full parameters.

use num_bigint::BigUint;

use crate::automorphism::CycleAutomorphism;
use crate::boolmat::{mat_mul, plane_mul, pull, BitMatrix, PlaneMatrix};
use crate::error::{MobsError, Result};
use crate::protocol::PublicView;
use crate::telescoping::{count_solutions, singlebit_solution_set, SolutionReport};

/// Admissible exponent residues, one set per cycle of h.
///
/// Fixed points are carried as length-1 cycles: they contribute no CRT
/// modulus but their plane equation must still hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResidues {
    pub per_cycle: Vec<CycleResidueSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResidueSet {
    pub cycle: Vec<usize>,
    pub residues: Vec<u64>,
}

impl CycleResidues {
    pub fn ambiguity(&self) -> Vec<usize> {
        self.per_cycle.iter().map(|c| c.residues.len()).collect()
    }
}

/// For each cycle of h, the residues r with h^r(source) matching `target` on
/// the cycle's planes: plane_j(h^r(source)) * plane_j(right_factor) =
/// plane_j(target) for every position j in the cycle, or plain plane equality
/// when no right factor is given. Plane j of h^r(source) is plane
/// sigma^(-r)(j) of source, which on a cycle is an index shift.
pub fn cycle_residues(
    source: &BitMatrix,
    target: &BitMatrix,
    right_factor: Option<&BitMatrix>,
    h: &CycleAutomorphism,
) -> Result<CycleResidues> {
    let k = h.k();
    if source.k() != k || target.k() != k {
        return Err(MobsError::DimensionMismatch(
            "transcript length does not match the permutation".into(),
        ));
    }
    let mut in_cycle = vec![false; k];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for cycle in h.cycles() {
        for &pos in cycle {
            in_cycle[pos] = true;
        }
        cycles.push(cycle.clone());
    }
    for pos in 0..k {
        if !in_cycle[pos] {
            cycles.push(vec![pos]);
        }
    }
    cycles.sort_by_key(|c| c[0]);

    let matches = |src_plane: PlaneMatrix, j: usize| -> Result<bool> {
        let lhs = match right_factor {
            Some(rf) => plane_mul(src_plane, pull(j, rf)?)?,
            None => src_plane,
        };
        Ok(lhs == pull(j, target)?)
    };

    let mut per_cycle = Vec::with_capacity(cycles.len());
    for cycle in cycles {
        let len = cycle.len();
        let mut residues = Vec::new();
        'residue: for r in 0..len {
            for (t, &j) in cycle.iter().enumerate() {
                // sigma^(-r) on the cycle: index t steps back by r
                let src_pos = cycle[(t + len - r) % len];
                if !matches(pull(src_pos, source)?, j)? {
                    continue 'residue;
                }
            }
            residues.push(r as u64);
        }
        if residues.is_empty() {
            return Err(MobsError::InconsistentResidues {
                cycle_start: cycle[0],
            });
        }
        per_cycle.push(CycleResidueSet { cycle, residues });
    }
    Ok(CycleResidues { per_cycle })
}

/// Unique a in [0, prod p_i) with a = r_i mod p_i.
pub fn crt_combine(residues: &[(u128, u128)]) -> Result<u128> {
    let mut a = 0u128;
    let mut modulus = 1u128;
    for &(r, p) in residues {
        // solve a + modulus * t = r (mod p)
        let (g, inv, _) = ext_gcd(modulus as i128 % p as i128, p as i128);
        if g != 1 {
            return Err(MobsError::NonCoprimeModuli(modulus, p));
        }
        let diff = ((r as i128 - (a % p) as i128) % p as i128 + p as i128) % p as i128;
        let t = (diff * ((inv % p as i128 + p as i128) % p as i128)) % p as i128;
        a += modulus * t as u128;
        modulus *= p;
    }
    Ok(a)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Result of a key-recovery attempt. `success` is only populated when the
/// caller supplies the true key for comparison.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub candidate_exponent: u128,
    pub candidate_key: BitMatrix,
    pub success: Option<bool>,
    pub residue_ambiguity: Vec<usize>,
}

/// Monico's CRT attack. Solves h^a(M)A = h(A)M cycle by cycle, takes the
/// smallest admissible residue per cycle, and returns h^a(B)A. The returned
/// exponent is re-checked against the equation before use.
pub fn monico_attack(view: &PublicView, true_key: Option<&BitMatrix>) -> Result<AttackOutcome> {
    let target = mat_mul(&view.h.apply(&view.a)?, &view.m)?;
    let residues = cycle_residues(&view.m, &target, Some(&view.a), &view.h)?;
    let crt_input: Vec<(u128, u128)> = residues
        .per_cycle
        .iter()
        .filter(|c| c.cycle.len() > 1)
        .map(|c| (c.residues[0] as u128, c.cycle.len() as u128))
        .collect();
    let a = crt_combine(&crt_input)?;
    let check = mat_mul(&view.h.power(a).apply(&view.m)?, &view.a)?;
    if check != target {
        return Err(MobsError::InconsistentResidues { cycle_start: 0 });
    }
    let candidate_key = mat_mul(&view.h.power(a).apply(&view.b)?, &view.a)?;
    let success = true_key.map(|k| candidate_key == *k);
    Ok(AttackOutcome {
        candidate_exponent: a,
        candidate_key,
        success,
        residue_ambiguity: residues.ambiguity(),
    })
}

/// All CRT combinations of admissible residues, up to `cap`, with the set of
/// distinct candidate keys they produce.
#[derive(Debug, Clone)]
pub struct MonicoEnumeration {
    pub combinations_tried: u64,
    pub exponents: Vec<u128>,
    pub distinct_keys: usize,
    pub all_keys_match: Option<bool>,
}

pub fn monico_enumerate(
    view: &PublicView,
    cap: u64,
    true_key: Option<&BitMatrix>,
) -> Result<MonicoEnumeration> {
    let target = mat_mul(&view.h.apply(&view.a)?, &view.m)?;
    let residues = cycle_residues(&view.m, &target, Some(&view.a), &view.h)?;
    let cycles: Vec<&CycleResidueSet> = residues
        .per_cycle
        .iter()
        .filter(|c| c.cycle.len() > 1)
        .collect();
    let mut indices = vec![0usize; cycles.len()];
    let mut exponents = Vec::new();
    let mut keys = std::collections::HashSet::new();
    let mut all_match = true;
    let mut tried = 0u64;
    loop {
        if tried >= cap {
            break;
        }
        let crt_input: Vec<(u128, u128)> = cycles
            .iter()
            .zip(&indices)
            .map(|(c, &i)| (c.residues[i] as u128, c.cycle.len() as u128))
            .collect();
        let a = crt_combine(&crt_input)?;
        let key = mat_mul(&view.h.power(a).apply(&view.b)?, &view.a)?;
        if let Some(k) = true_key {
            all_match &= key == *k;
        }
        keys.insert(key.planes().to_vec());
        exponents.push(a);
        tried += 1;
        // advance the mixed-radix counter over residue choices
        let mut pos = 0;
        loop {
            if pos == cycles.len() {
                return Ok(MonicoEnumeration {
                    combinations_tried: tried,
                    exponents,
                    distinct_keys: keys.len(),
                    all_keys_match: true_key.map(|_| all_match),
                });
            }
            indices[pos] += 1;
            if indices[pos] < cycles[pos].residues.len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
    Ok(MonicoEnumeration {
        combinations_tried: tried,
        exponents,
        distinct_keys: keys.len(),
        all_keys_match: true_key.map(|_| all_match),
    })
}

/// Result of the guess-based telescope attack; `outcome` is None when the
/// budget ran out, which is the expected result at full parameters.
#[derive(Debug, Clone)]
pub struct TelescopeOutcome {
    pub outcome: Option<AttackOutcome>,
    pub guesses: u64,
    pub solutions: SolutionReport,
}

/// Enumerate up to `budget` solutions Y of h(A)M = YA, combining the
/// per-plane solution sets in lexicographic plane order. Each Y is tested for
/// the shape h^a(M); a consistent Y yields a candidate key h^a(B)A.
pub fn telescope_attack(
    view: &PublicView,
    budget: u64,
    true_key: Option<&BitMatrix>,
) -> Result<TelescopeOutcome> {
    if budget == 0 {
        return Err(MobsError::InvalidArgument("budget must be at least 1".into()));
    }
    let target = mat_mul(&view.h.apply(&view.a)?, &view.m)?;
    let solutions = count_solutions(&target, &view.a)?;
    let k = view.m.k();
    let sets: Vec<Vec<PlaneMatrix>> = (0..k)
        .map(|i| singlebit_solution_set(pull(i, &target)?, pull(i, &view.a)?))
        .collect::<Result<Vec<_>>>()?;
    if sets.iter().any(|s| s.is_empty()) {
        return Ok(TelescopeOutcome {
            outcome: None,
            guesses: 0,
            solutions,
        });
    }

    let mut indices = vec![0usize; k];
    let mut guesses = 0u64;
    let mut best: Option<AttackOutcome> = None;
    'enumerate: while guesses < budget {
        let picked: Vec<PlaneMatrix> = sets
            .iter()
            .zip(&indices)
            .map(|(s, &i)| s[i])
            .collect();
        let y = crate::boolmat::assemble(&picked)?;
        guesses += 1;
        if let Ok(residues) = cycle_residues(&view.m, &y, None, &view.h) {
            let crt_input: Vec<(u128, u128)> = residues
                .per_cycle
                .iter()
                .filter(|c| c.cycle.len() > 1)
                .map(|c| (c.residues[0] as u128, c.cycle.len() as u128))
                .collect();
            let a = crt_combine(&crt_input)?;
            let candidate_key = mat_mul(&view.h.power(a).apply(&view.b)?, &view.a)?;
            let success = true_key.map(|tk| candidate_key == *tk);
            let outcome = AttackOutcome {
                candidate_exponent: a,
                candidate_key,
                success,
                residue_ambiguity: residues.ambiguity(),
            };
            match success {
                Some(true) => {
                    best = Some(outcome);
                    break 'enumerate;
                }
                Some(false) => {}
                None => {
                    // no true key to compare against; report the first
                    // consistent candidate
                    best = Some(outcome);
                    break 'enumerate;
                }
            }
        }
        // lexicographic order over the plane tuple: last plane varies fastest
        let mut pos = k;
        loop {
            if pos == 0 {
                break 'enumerate;
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < sets[pos].len() {
                break;
            }
            indices[pos] = 0;
        }
    }
    Ok(TelescopeOutcome {
        outcome: best,
        guesses,
        solutions,
    })
}

/// Convenience for tests and the CLI: is the solution total small enough to
/// sweep exhaustively with the given budget?
pub fn total_within_budget(solutions: &SolutionReport, budget: u64) -> bool {
    solutions.total <= BigUint::from(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::build_prime_cycle_perm;
    use crate::boolmat::assemble;
    use crate::protocol::run_exchange;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crt_basics() {
        assert_eq!(crt_combine(&[(0, 2), (0, 3), (0, 5)]).unwrap(), 0);
        assert_eq!(crt_combine(&[(1, 2), (2, 3), (3, 5)]).unwrap(), 23);
        assert_eq!(crt_combine(&[(1, 2)]).unwrap(), 1);
        assert_eq!(crt_combine(&[]).unwrap(), 0);
        assert!(crt_combine(&[(1, 4), (1, 2)]).is_err());
    }

    #[test]
    fn crt_full_parameter_moduli() {
        let primes = crate::automorphism::first_primes(16);
        let residues: Vec<(u128, u128)> = primes
            .iter()
            .enumerate()
            .map(|(i, &p)| ((i as u128) % p as u128, p as u128))
            .collect();
        let a = crt_combine(&residues).unwrap();
        for &(r, p) in &residues {
            assert_eq!(a % p, r);
        }
    }

    #[test]
    fn residues_of_equal_matrices_with_distinct_planes() {
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        // planes all distinct: plane i has code i + 1
        let planes: Vec<_> = (0..10)
            .map(|i| PlaneMatrix::new(3, i as u32 + 1).unwrap())
            .collect();
        let m = assemble(&planes).unwrap();
        let res = cycle_residues(&m, &m, None, &h).unwrap();
        for set in &res.per_cycle {
            assert_eq!(set.residues, vec![0]);
        }
    }

    #[test]
    fn identical_planes_give_full_ambiguity() {
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        let planes = vec![PlaneMatrix::new(3, 42).unwrap(); 10];
        let m = assemble(&planes).unwrap();
        let res = cycle_residues(&m, &m, None, &h).unwrap();
        for set in &res.per_cycle {
            assert_eq!(set.residues.len(), set.cycle.len());
        }
    }

    #[test]
    fn true_exponent_survives_in_every_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        for _ in 0..20 {
            let m = BitMatrix::random(3, 10, &mut rng);
            let x = rng.random_range(1..5000u128);
            let y = rng.random_range(1..5000u128);
            let t = run_exchange(&m, &h, x, y).unwrap();
            let target = mat_mul(&h.apply(&t.a).unwrap(), &m).unwrap();
            let res = cycle_residues(&m, &target, Some(&t.a), &h).unwrap();
            for set in &res.per_cycle {
                if set.cycle.len() > 1 {
                    let r = (x % set.cycle.len() as u128) as u64;
                    assert!(
                        set.residues.contains(&r),
                        "x mod {} missing from {:?}",
                        set.cycle.len(),
                        set.residues
                    );
                }
            }
        }
    }

    #[test]
    fn monico_recovers_the_key_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        for _ in 0..25 {
            let m = BitMatrix::random(3, 10, &mut rng);
            let x = rng.random_range(1..5000u128);
            let y = rng.random_range(1..5000u128);
            let t = run_exchange(&m, &h, x, y).unwrap();
            let outcome = monico_attack(&t.public_view(), Some(&t.key)).unwrap();
            assert_eq!(outcome.success, Some(true));
        }
    }

    #[test]
    fn monico_exponent_satisfies_the_defining_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        let m = BitMatrix::random(3, 10, &mut rng);
        let t = run_exchange(&m, &h, 1234, 567).unwrap();
        let view = t.public_view();
        let outcome = monico_attack(&view, None).unwrap();
        let lhs = mat_mul(
            &h.power(outcome.candidate_exponent).apply(&m).unwrap(),
            &t.a,
        )
        .unwrap();
        let rhs = mat_mul(&h.apply(&t.a).unwrap(), &m).unwrap();
        assert_eq!(lhs, rhs);
        assert!(outcome.success.is_none());
    }

    #[test]
    fn monico_single_cycle_recovers_residue() {
        // h a single 5-cycle, planes of M distinct under shifts
        let h = build_prime_cycle_perm(5, &[5], None::<&mut ChaCha8Rng>).unwrap();
        // five distinct permutation matrices: products stay distinct under
        // shifts, so the residue is forced
        let planes: Vec<_> = [273u32, 161, 266, 98, 140]
            .iter()
            .map(|&code| PlaneMatrix::new(3, code).unwrap())
            .collect();
        let m = assemble(&planes).unwrap();
        let x = 3u128; // x < 5
        let t = run_exchange(&m, &h, x, 4).unwrap();
        let outcome = monico_attack(&t.public_view(), Some(&t.key)).unwrap();
        assert_eq!(outcome.candidate_exponent % 5, x % 5);
        assert_eq!(outcome.success, Some(true));
    }

    #[test]
    fn monico_enumeration_all_combinations_give_the_key() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        let m = BitMatrix::random(3, 10, &mut rng);
        let t = run_exchange(&m, &h, 999, 1001).unwrap();
        let result = monico_enumerate(&t.public_view(), 1000, Some(&t.key)).unwrap();
        assert!(result.combinations_tried >= 1);
        assert_eq!(result.all_keys_match, Some(true));
        assert_eq!(result.distinct_keys, 1);
    }

    #[test]
    fn telescope_succeeds_when_total_is_forced() {
        // identity-plane M: the telescoping equation has a unique solution
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        let m = BitMatrix::identity(3, 10);
        let t = run_exchange(&m, &h, 42, 91).unwrap();
        let out = telescope_attack(&t.public_view(), 10, Some(&t.key)).unwrap();
        assert_eq!(out.solutions.total, BigUint::from(1u32));
        let outcome = out.outcome.expect("unique solution must be found");
        assert_eq!(outcome.success, Some(true));
    }

    #[test]
    fn telescope_exhaustive_budget_succeeds_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // 3-cycle on permutation-matrix planes plus one random fixed plane
        let h = CycleAutomorphism::new(4, vec![vec![0, 1, 2]]).unwrap();
        for _ in 0..5 {
            let perms = [0b100_010_001u32, 0b010_100_001, 0b001_100_010, 0b010_001_100];
            let planes = vec![
                PlaneMatrix::new(3, perms[rng.random_range(0..4)]).unwrap(),
                PlaneMatrix::new(3, perms[rng.random_range(0..4)]).unwrap(),
                PlaneMatrix::new(3, perms[rng.random_range(0..4)]).unwrap(),
                PlaneMatrix::new(3, rng.random_range(0..512)).unwrap(),
            ];
            let m = assemble(&planes).unwrap();
            let x = rng.random_range(1..1000u128);
            let y = rng.random_range(1..1000u128);
            let t = run_exchange(&m, &h, x, y).unwrap();
            let out = telescope_attack(&t.public_view(), 10_000, Some(&t.key)).unwrap();
            assert!(total_within_budget(&out.solutions, 10_000));
            assert_eq!(out.outcome.unwrap().success, Some(true));
        }
    }
}
