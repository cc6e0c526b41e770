//! Permutations of bit-plane positions, stored as disjoint cycles.
//!
//! Applied entrywise to a `BitMatrix`, a permutation of bit positions is an
//! automorphism of the matrix semigroup. Cycle form is kept throughout since
//! the attacks work residue-by-residue over the cycles.
//!
//! Convention: the bit at position i moves TO position sigma(i), so plane j of
//! h(M) is plane sigma^-1(j) of M.

use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::boolmat::BitMatrix;
use crate::error::{MobsError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleAutomorphism {
    k: usize,
    /// Disjoint cycles, each started at its smallest member, ordered by that
    /// member. Positions not listed are fixed points.
    cycles: Vec<Vec<usize>>,
}

impl CycleAutomorphism {
    pub fn new(k: usize, cycles: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; k];
        for cycle in &cycles {
            if cycle.is_empty() {
                return Err(MobsError::InvalidCycles("empty cycle".into()));
            }
            for &pos in cycle {
                if pos >= k {
                    return Err(MobsError::InvalidCycles(format!(
                        "position {pos} out of range for k = {k}"
                    )));
                }
                if seen[pos] {
                    return Err(MobsError::InvalidCycles(format!(
                        "position {pos} appears in more than one cycle"
                    )));
                }
                seen[pos] = true;
            }
        }
        Ok(Self {
            k,
            cycles: canonicalize(cycles),
        })
    }

    pub fn identity(k: usize) -> Self {
        Self { k, cycles: vec![] }
    }

    /// Rebuild cycle form from a full position map sigma.
    pub fn from_position_map(sigma: &[usize]) -> Result<Self> {
        let k = sigma.len();
        let mut seen = vec![false; k];
        if sigma.iter().any(|&j| j >= k) || {
            for &j in sigma {
                seen[j] = true;
            }
            seen.iter().any(|&s| !s)
        } {
            return Err(MobsError::InvalidCycles("not a permutation".into()));
        }
        let mut visited = vec![false; k];
        let mut cycles = Vec::new();
        for start in 0..k {
            if visited[start] {
                continue;
            }
            let mut cycle = vec![start];
            visited[start] = true;
            let mut pos = sigma[start];
            while pos != start {
                visited[pos] = true;
                cycle.push(pos);
                pos = sigma[pos];
            }
            if cycle.len() > 1 {
                cycles.push(cycle);
            }
        }
        Ok(Self { k, cycles })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// sigma as a length-k array: position i maps to sigma[i].
    pub fn position_map(&self) -> Vec<usize> {
        let mut sigma: Vec<usize> = (0..self.k).collect();
        for cycle in &self.cycles {
            let len = cycle.len();
            for t in 0..len {
                sigma[cycle[t]] = cycle[(t + 1) % len];
            }
        }
        sigma
    }

    pub fn inverse_position_map(&self) -> Vec<usize> {
        let sigma = self.position_map();
        let mut inv = vec![0; self.k];
        for (i, &j) in sigma.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    /// lcm of the cycle lengths; the product of the primes for distinct
    /// prime-length cycles.
    pub fn order(&self) -> u128 {
        self.cycles
            .iter()
            .fold(1u128, |acc, c| acc.lcm(&(c.len() as u128)))
    }

    /// Entrywise action on a matrix: plane i of m becomes plane sigma(i).
    pub fn apply(&self, m: &BitMatrix) -> Result<BitMatrix> {
        if self.k != m.k() {
            return Err(MobsError::DimensionMismatch(format!(
                "permutation on {} positions applied to k = {} matrix",
                self.k,
                m.k()
            )));
        }
        let mut planes = m.planes().to_vec();
        for cycle in &self.cycles {
            let len = cycle.len();
            for t in 0..len {
                planes[cycle[(t + 1) % len]] = m.planes()[cycle[t]];
            }
        }
        crate::boolmat::assemble(
            &planes
                .iter()
                .map(|&code| crate::boolmat::PlaneMatrix::new(m.n(), code))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// e-fold composition, computed per cycle as an index shift of e mod the
    /// cycle length; cost does not depend on the magnitude of e.
    pub fn power(&self, e: u128) -> Self {
        let mut sigma: Vec<usize> = (0..self.k).collect();
        for cycle in &self.cycles {
            let len = cycle.len();
            let shift = (e % len as u128) as usize;
            for t in 0..len {
                sigma[cycle[t]] = cycle[(t + shift) % len];
            }
        }
        Self::from_position_map(&sigma).expect("shift of a permutation is a permutation")
    }
}

fn canonicalize(cycles: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = cycles
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let min_at = c
                .iter()
                .enumerate()
                .min_by_key(|(_, &p)| p)
                .map(|(i, _)| i)
                .unwrap();
            let mut rotated = c[min_at..].to_vec();
            rotated.extend_from_slice(&c[..min_at]);
            rotated
        })
        .collect();
    out.sort_by_key(|c| c[0]);
    out
}

fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The first `count` primes.
pub fn first_primes(count: usize) -> Vec<usize> {
    let mut primes = Vec::with_capacity(count);
    let mut p = 2;
    while primes.len() < count {
        if is_prime(p) {
            primes.push(p);
        }
        p += 1;
    }
    primes
}

/// The prefix of the primes summing exactly to k, if one exists.
/// 10 = 2+3+5, 197 = sum of the first 12, 381 = sum of the first 16.
pub fn prime_prefix_for_sum(k: usize) -> Result<Vec<usize>> {
    let mut primes = Vec::new();
    let mut sum = 0;
    let mut p = 2;
    while sum < k {
        if is_prime(p) {
            primes.push(p);
            sum += p;
        }
        p += 1;
    }
    if sum == k {
        Ok(primes)
    } else {
        Err(MobsError::NotAPrimePrefixSum { k })
    }
}

/// Build a permutation of {0..k-1} whose cycle type is exactly `primes`.
///
/// Positions are assigned to cycles as consecutive blocks in the given order;
/// pass an rng to scatter which positions form each cycle instead.
pub fn build_prime_cycle_perm<R: Rng + ?Sized>(
    k: usize,
    primes: &[usize],
    rng: Option<&mut R>,
) -> Result<CycleAutomorphism> {
    let sum: usize = primes.iter().sum();
    if sum != k {
        return Err(MobsError::PrimeSumMismatch {
            primes: primes.to_vec(),
            sum,
            k,
        });
    }
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime(p) {
            return Err(MobsError::InvalidArgument(format!("{p} is not prime")));
        }
        if primes[..i].contains(&p) {
            return Err(MobsError::InvalidArgument(format!("duplicate prime {p}")));
        }
    }
    let mut positions: Vec<usize> = (0..k).collect();
    if let Some(rng) = rng {
        positions.shuffle(rng);
    }
    let mut cycles = Vec::with_capacity(primes.len());
    let mut offset = 0;
    for &p in primes {
        cycles.push(positions[offset..offset + p].to_vec());
        offset += p;
    }
    CycleAutomorphism::new(k, cycles)
}

#[derive(Serialize, Deserialize)]
struct CycleRepr {
    k: usize,
    cycles: Vec<Vec<usize>>,
}

impl Serialize for CycleAutomorphism {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CycleRepr {
            k: self.k,
            cycles: self.cycles.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycleAutomorphism {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CycleRepr::deserialize(deserializer)?;
        CycleAutomorphism::new(repr.k, repr.cycles).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolmat::{mat_mul, pull};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn no_rng() -> Option<&'static mut ChaCha8Rng> {
        None
    }

    #[test]
    fn prime_sums() {
        assert_eq!(first_primes(3).iter().sum::<usize>(), 10);
        assert_eq!(first_primes(12).iter().sum::<usize>(), 197);
        assert_eq!(first_primes(16).iter().sum::<usize>(), 381);
        assert_eq!(prime_prefix_for_sum(10).unwrap(), vec![2, 3, 5]);
        assert_eq!(prime_prefix_for_sum(381).unwrap().len(), 16);
        assert!(prime_prefix_for_sum(11).is_err());
    }

    #[test]
    fn order_of_prime_cycle_products() {
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        assert_eq!(h.order(), 30);
        let h16 = build_prime_cycle_perm(381, &first_primes(16), no_rng()).unwrap();
        // product of the first 16 primes, computed directly
        let expected: u128 = first_primes(16).iter().map(|&p| p as u128).product();
        assert_eq!(expected, 32_589_158_477_190_044_730);
        assert_eq!(h16.order(), expected);
    }

    #[test]
    fn sum_mismatch_rejected() {
        assert!(build_prime_cycle_perm(11, &[2, 3, 5], no_rng()).is_err());
        assert!(build_prime_cycle_perm(4, &[4], no_rng()).is_err());
        assert!(build_prime_cycle_perm(4, &[2, 2], no_rng()).is_err());
    }

    #[test]
    fn identity_leaves_matrix_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = BitMatrix::random(3, 10, &mut rng);
        assert_eq!(CycleAutomorphism::identity(10).apply(&m).unwrap(), m);
    }

    #[test]
    fn order_many_applications_return_to_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = BitMatrix::random(3, 10, &mut rng);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        let mut cur = m.clone();
        for _ in 0..h.order() {
            cur = h.apply(&cur).unwrap();
        }
        assert_eq!(cur, m);
        assert_eq!(h.power(h.order()), CycleAutomorphism::identity(10));
        assert_eq!(h.power(0), CycleAutomorphism::identity(10));
    }

    #[test]
    fn power_matches_iterated_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = BitMatrix::random(3, 10, &mut rng);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        let mut iterated = m.clone();
        for _ in 0..5 {
            iterated = h.apply(&iterated).unwrap();
        }
        assert_eq!(h.power(5).apply(&m).unwrap(), iterated);
    }

    #[test]
    fn power_addition_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        for _ in 0..20 {
            let m = BitMatrix::random(3, 10, &mut rng);
            let a = rng.random_range(0..1000u128);
            let b = rng.random_range(0..1000u128);
            let lhs = h.power(a).apply(&h.power(b).apply(&m).unwrap()).unwrap();
            let rhs = h.power(a + b).apply(&m).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn automorphism_law_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], Some(&mut rng)).unwrap();
        for _ in 0..100 {
            let m = BitMatrix::random(3, 10, &mut rng);
            let n = BitMatrix::random(3, 10, &mut rng);
            let lhs = h.apply(&mat_mul(&m, &n).unwrap()).unwrap();
            let rhs = mat_mul(&h.apply(&m).unwrap(), &h.apply(&n).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn power_of_prime_cycle_is_shift() {
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        let sigma = h.position_map();
        let e = 7u128;
        let sigma_e = h.power(e).position_map();
        // trace each plane: sigma_e must equal sigma applied e times
        for start in 0..10 {
            let mut pos = start;
            for _ in 0..e {
                pos = sigma[pos];
            }
            assert_eq!(sigma_e[start], pos);
        }
    }

    #[test]
    fn action_direction_convention() {
        // cycle (0 1 2): bit at position 0 moves to position 1
        let h = CycleAutomorphism::new(3, vec![vec![0, 1, 2]]).unwrap();
        let planes = [
            crate::boolmat::PlaneMatrix::new(3, 7).unwrap(),
            crate::boolmat::PlaneMatrix::new(3, 0).unwrap(),
            crate::boolmat::PlaneMatrix::new(3, 0).unwrap(),
        ];
        let m = crate::boolmat::assemble(&planes).unwrap();
        let hm = h.apply(&m).unwrap();
        assert_eq!(pull(1, &hm).unwrap().code(), 7);
        assert_eq!(pull(0, &hm).unwrap().code(), 0);
    }

    #[test]
    fn json_round_trip() {
        let h = build_prime_cycle_perm(10, &[2, 3, 5], no_rng()).unwrap();
        let json = serde_json::to_string(&h).unwrap();
        assert!(json.contains("\"k\":10"));
        let back: CycleAutomorphism = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn overlapping_cycles_rejected() {
        assert!(CycleAutomorphism::new(5, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(CycleAutomorphism::new(3, vec![vec![0, 3]]).is_err());
    }
}
