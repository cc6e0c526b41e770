//! Exact counting of solutions Y to h(A)M = YA and of principal left-ideal
//! sizes, plane by plane.
//!
//! The matrix semigroup is the direct sum of its k bit planes, so the
//! solution count of the full equation is the product of the k single-bit
//! counts, and likewise for ideal sizes. Totals at k = 381 reach ~2^3400, so
//! they are kept as exact big integers; log2 is derived from the per-plane
//! counts, never the other way round.

use num_bigint::BigUint;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::automorphism::CycleAutomorphism;
use crate::boolmat::{all_matrices, mat_mul, plane_mul, pull, BitMatrix, PlaneMatrix};
use crate::error::Result;

/// Per-plane solution counts for a telescoping-type equation target = Y*right.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub per_plane: Vec<u64>,
    pub total: BigUint,
    pub log2_total: f64,
    /// Plane products performed: k * 2^(n^2) for a full count.
    pub plane_products: u64,
}

/// Per-plane principal left-ideal sizes {Y*a : Y}.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport {
    pub per_plane: Vec<u64>,
    pub total: BigUint,
    pub log2_total: f64,
    pub plane_products: u64,
}

fn totals(per_plane: &[u64]) -> (BigUint, f64) {
    let total = per_plane
        .iter()
        .fold(BigUint::from(1u32), |acc, &c| acc * BigUint::from(c));
    let log2 = if per_plane.iter().any(|&c| c == 0) {
        f64::NEG_INFINITY
    } else {
        per_plane.iter().map(|&c| (c as f64).log2()).sum()
    };
    (total, log2)
}

fn serialize_report<S: Serializer>(
    name: &'static str,
    per_plane: &[u64],
    total: &BigUint,
    log2_total: f64,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut s = serializer.serialize_struct(name, 3)?;
    s.serialize_field("per_plane", per_plane)?;
    s.serialize_field("total", &total.to_string())?;
    s.serialize_field("log2_total", &log2_total)?;
    s.end()
}

impl Serialize for SolutionReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_report(
            "SolutionReport",
            &self.per_plane,
            &self.total,
            self.log2_total,
            serializer,
        )
    }
}

impl Serialize for OrbitReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_report(
            "OrbitReport",
            &self.per_plane,
            &self.total,
            self.log2_total,
            serializer,
        )
    }
}

/// |{Y : target = Y * right}| over all 2^(n^2) single-bit matrices.
pub fn count_singlebit_solutions(target: PlaneMatrix, right: PlaneMatrix) -> Result<u64> {
    let mut count = 0;
    for y in all_matrices(target.n())? {
        if plane_mul(y, right)? == target {
            count += 1;
        }
    }
    Ok(count)
}

/// Per-plane solution counts and their exact product for target = Y * right.
pub fn count_solutions(target: &BitMatrix, right: &BitMatrix) -> Result<SolutionReport> {
    let k = target.k();
    let mut per_plane = Vec::with_capacity(k);
    let mut products = 0u64;
    for i in 0..k {
        per_plane.push(count_singlebit_solutions(
            pull(i, target)?,
            pull(i, right)?,
        )?);
        products += 1u64 << (target.n() * target.n());
    }
    let (total, log2_total) = totals(&per_plane);
    Ok(SolutionReport {
        per_plane,
        total,
        log2_total,
        plane_products: products,
    })
}

/// The full solution set {y : target = y * right} for one plane, as codes.
pub fn singlebit_solution_set(target: PlaneMatrix, right: PlaneMatrix) -> Result<Vec<PlaneMatrix>> {
    let mut out = Vec::new();
    for y in all_matrices(target.n())? {
        if plane_mul(y, right)? == target {
            out.push(y);
        }
    }
    Ok(out)
}

/// |{Y * a : Y}|: the size of the principal left ideal of one plane.
pub fn count_singlebit_orbit(a: PlaneMatrix) -> Result<u64> {
    let n = a.n();
    let slots = 1usize << (n * n);
    let mut seen = vec![false; slots];
    let mut count = 0;
    for y in all_matrices(n)? {
        let prod = plane_mul(y, a)?.code() as usize;
        if !seen[prod] {
            seen[prod] = true;
            count += 1;
        }
    }
    Ok(count)
}

/// Product of per-plane ideal sizes: |{Y * a : Y in S}|.
pub fn count_orbit(a: &BitMatrix) -> Result<OrbitReport> {
    let k = a.k();
    let mut per_plane = Vec::with_capacity(k);
    let mut products = 0u64;
    for i in 0..k {
        per_plane.push(count_singlebit_orbit(pull(i, a)?)?);
        products += 1u64 << (a.n() * a.n());
    }
    let (total, log2_total) = totals(&per_plane);
    Ok(OrbitReport {
        per_plane,
        total,
        log2_total,
        plane_products: products,
    })
}

/// Regularity check for (M, h, A): the count of Y with h(A)M = YA against the
/// count of Y with Y(h(A)M) = A. Both use the same per-plane counter, with
/// the operand roles swapped for the second.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityCheck {
    pub forward: SolutionReport,
    pub reversed: SolutionReport,
    pub regular: bool,
}

pub fn is_regular(
    m: &BitMatrix,
    h: &CycleAutomorphism,
    a: &BitMatrix,
) -> Result<RegularityCheck> {
    let c = mat_mul(&h.apply(a)?, m)?;
    let forward = count_solutions(&c, a)?;
    let reversed = count_solutions(a, &c)?;
    let regular = forward.total == reversed.total;
    Ok(RegularityCheck {
        forward,
        reversed,
        regular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::build_prime_cycle_perm;
    use crate::boolmat::assemble;
    use crate::protocol::generate_a;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute force over all 2^(n^2 k) full matrices: the independent oracle
    /// for the plane-decomposition counters.
    fn brute_force_solution_count(target: &BitMatrix, right: &BitMatrix) -> u64 {
        let n = target.n();
        let k = target.k();
        let planes = all_matrices(n).unwrap();
        let mut count = 0;
        let total = (planes.len() as u64).pow(k as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut ps = Vec::with_capacity(k);
            for _ in 0..k {
                ps.push(planes[(rem % planes.len() as u64) as usize]);
                rem /= planes.len() as u64;
            }
            let y = assemble(&ps).unwrap();
            if mat_mul(&y, right).unwrap() == *target {
                count += 1;
            }
        }
        count
    }

    fn brute_force_orbit_count(a: &BitMatrix) -> u64 {
        let n = a.n();
        let k = a.k();
        let planes = all_matrices(n).unwrap();
        let mut seen = std::collections::HashSet::new();
        let total = (planes.len() as u64).pow(k as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut ps = Vec::with_capacity(k);
            for _ in 0..k {
                ps.push(planes[(rem % planes.len() as u64) as usize]);
                rem /= planes.len() as u64;
            }
            let y = assemble(&ps).unwrap();
            seen.insert(mat_mul(&y, a).unwrap().planes().to_vec());
        }
        seen.len() as u64
    }

    #[test]
    fn singlebit_identity_right_factor_forces_unique_solution() {
        let id = PlaneMatrix::identity(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let b = PlaneMatrix::new(3, rng.random_range(0..512)).unwrap();
            assert_eq!(count_singlebit_solutions(b, id).unwrap(), 1);
        }
    }

    #[test]
    fn singlebit_zero_right_factor() {
        let z = PlaneMatrix::zero(3);
        assert_eq!(count_singlebit_solutions(z, z).unwrap(), 512);
        let b = PlaneMatrix::new(3, 5).unwrap();
        assert_eq!(count_singlebit_solutions(b, z).unwrap(), 0);
    }

    #[test]
    fn singlebit_all_ones() {
        // each row of Y must be nonzero: (2^3 - 1)^3 = 343
        let j = PlaneMatrix::all_ones(3);
        assert_eq!(count_singlebit_solutions(j, j).unwrap(), 343);
    }

    #[test]
    fn singlebit_orbit_cases() {
        assert_eq!(count_singlebit_orbit(PlaneMatrix::identity(3)).unwrap(), 512);
        assert_eq!(count_singlebit_orbit(PlaneMatrix::zero(3)).unwrap(), 1);
        // each row of Y*J is zero or all-ones independently: 2^3
        assert_eq!(count_singlebit_orbit(PlaneMatrix::all_ones(3)).unwrap(), 8);
    }

    #[test]
    fn count_solutions_matches_full_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let a = BitMatrix::random(2, 2, &mut rng);
            let b = BitMatrix::random(2, 2, &mut rng);
            let target = mat_mul(&b, &a).unwrap();
            let report = count_solutions(&target, &a).unwrap();
            let brute = brute_force_solution_count(&target, &a);
            assert_eq!(report.total, BigUint::from(brute));
        }
    }

    #[test]
    fn count_orbit_matches_full_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let a = BitMatrix::random(2, 2, &mut rng);
            let report = count_orbit(&a).unwrap();
            assert_eq!(report.total, BigUint::from(brute_force_orbit_count(&a)));
        }
    }

    #[test]
    fn identity_right_factor_gives_total_one() {
        let a = BitMatrix::identity(3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = BitMatrix::random(3, 5, &mut rng);
        let report = count_solutions(&b, &a).unwrap();
        assert_eq!(report.total, BigUint::from(1u32));
        assert_eq!(report.log2_total, 0.0);
    }

    #[test]
    fn genuine_exchange_always_has_a_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        for _ in 0..10 {
            let m = BitMatrix::random(3, 10, &mut rng);
            let x = rng.random_range(1..500u128);
            let a = generate_a(&m, &h, x).unwrap();
            let target = mat_mul(&h.apply(&a).unwrap(), &m).unwrap();
            let report = count_solutions(&target, &a).unwrap();
            assert!(report.total >= BigUint::from(1u32));
        }
    }

    #[test]
    fn sampled_reassemblies_satisfy_the_full_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = build_prime_cycle_perm(10, &[2, 3, 5], None::<&mut ChaCha8Rng>).unwrap();
        let m = BitMatrix::random(3, 10, &mut rng);
        let a = generate_a(&m, &h, 100).unwrap();
        let target = mat_mul(&h.apply(&a).unwrap(), &m).unwrap();
        let sets: Vec<_> = (0..10)
            .map(|i| {
                singlebit_solution_set(pull(i, &target).unwrap(), pull(i, &a).unwrap()).unwrap()
            })
            .collect();
        for _ in 0..100 {
            let picked: Vec<_> = sets
                .iter()
                .map(|s| s[rng.random_range(0..s.len())])
                .collect();
            let y = assemble(&picked).unwrap();
            assert_eq!(mat_mul(&y, &a).unwrap(), target);
        }
    }

    #[test]
    fn plane_product_work_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = BitMatrix::random(3, 10, &mut rng);
        let b = BitMatrix::random(3, 10, &mut rng);
        let report = count_solutions(&b, &a).unwrap();
        assert_eq!(report.plane_products, 10 * 512);
    }

    #[test]
    fn zero_plane_count_short_circuits_total() {
        let target = BitMatrix::identity(2, 2);
        let right = BitMatrix::zeros(2, 2);
        let report = count_solutions(&target, &right).unwrap();
        assert_eq!(report.total, BigUint::from(0u32));
        assert_eq!(report.per_plane.len(), 2);
        assert!(report.log2_total.is_infinite() && report.log2_total < 0.0);
    }

    #[test]
    fn regularity_trivial_cases() {
        let h = CycleAutomorphism::identity(4);
        let m = BitMatrix::identity(3, 4);
        let check = is_regular(&m, &h, &m).unwrap();
        assert!(check.regular);
        assert_eq!(check.forward.total, BigUint::from(1u32));
        assert_eq!(check.reversed.total, BigUint::from(1u32));

        let z = BitMatrix::zeros(3, 4);
        let check = is_regular(&z, &h, &z).unwrap();
        assert!(check.regular);
        let expected = BigUint::from(512u64).pow(4);
        assert_eq!(check.forward.total, expected);
        assert_eq!(check.reversed.total, expected);
    }

    #[test]
    fn regularity_matches_brute_force_at_small_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = build_prime_cycle_perm(2, &[2], None::<&mut ChaCha8Rng>).unwrap();
        for _ in 0..3 {
            let m = BitMatrix::random(2, 2, &mut rng);
            let x = rng.random_range(1..100u128);
            let a = generate_a(&m, &h, x).unwrap();
            let check = is_regular(&m, &h, &a).unwrap();
            let c = mat_mul(&h.apply(&a).unwrap(), &m).unwrap();
            assert_eq!(
                check.forward.total,
                BigUint::from(brute_force_solution_count(&c, &a))
            );
            assert_eq!(
                check.reversed.total,
                BigUint::from(brute_force_solution_count(&a, &c))
            );
        }
    }

    #[test]
    fn report_serializes_total_as_decimal_string() {
        let report = SolutionReport {
            per_plane: vec![2, 3],
            total: BigUint::from(6u32),
            log2_total: (6f64).log2(),
            plane_products: 32,
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["total"], "6");
        assert!(json.get("plane_products").is_none());
    }
}
