//! Boolean-semiring bitstring-matrix algebra.
//!
//! A `BitMatrix` is an n x n matrix whose entries are k-bit strings, multiplied
//! with bitwise OR as addition and bitwise AND as multiplication. The semigroup
//! is the direct sum of its k bit planes, so matrices are stored plane-major:
//! k single-bit matrices, each packed into the low n^2 bits of a word.

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{MobsError, Result};

/// Largest dimension for which we allow 2^(n^2) enumeration.
pub const MAX_ENUM_DIM: usize = 5;

/// A single-bit n x n Boolean matrix packed into an integer code.
///
/// Bit j of the code is entry (j div n, j mod n), row-major, so bit 0 is
/// entry (0,0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneMatrix {
    n: usize,
    code: u32,
}

impl PlaneMatrix {
    pub fn new(n: usize, code: u32) -> Result<Self> {
        if n == 0 || n > MAX_ENUM_DIM {
            return Err(MobsError::EnumerationTooLarge { n });
        }
        let bits = n * n;
        if bits < 32 && code >= 1u32 << bits {
            return Err(MobsError::InvalidArgument(format!(
                "code {code} out of range for n = {n}"
            )));
        }
        Ok(PlaneMatrix { n, code })
    }

    pub fn zero(n: usize) -> Self {
        PlaneMatrix { n, code: 0 }
    }

    pub fn identity(n: usize) -> Self {
        let mut code = 0u32;
        for i in 0..n {
            code |= 1 << (i * n + i);
        }
        PlaneMatrix { n, code }
    }

    pub fn all_ones(n: usize) -> Self {
        PlaneMatrix {
            n,
            code: ((1u64 << (n * n)) - 1) as u32,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn code(&self) -> u32 {
        self.code
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        (self.code >> (row * self.n + col)) & 1 == 1
    }
}

fn check_same_n(a: &PlaneMatrix, b: &PlaneMatrix) -> Result<()> {
    if a.n != b.n {
        return Err(MobsError::DimensionMismatch(format!(
            "plane dimensions {} vs {}",
            a.n, b.n
        )));
    }
    Ok(())
}

/// Boolean matrix product on packed codes: row i of the result is the OR of
/// the rows of `b` selected by the set bits in row i of `a`.
fn plane_mul_code(n: usize, a: u32, b: u32) -> u32 {
    let row_mask = (1u32 << n) - 1;
    let mut out = 0u32;
    for i in 0..n {
        let a_row = (a >> (i * n)) & row_mask;
        let mut out_row = 0u32;
        for t in 0..n {
            if (a_row >> t) & 1 == 1 {
                out_row |= (b >> (t * n)) & row_mask;
            }
        }
        out |= out_row << (i * n);
    }
    out
}

/// Direct (untabulated) Boolean matrix product of two planes.
pub fn plane_mul_direct(a: PlaneMatrix, b: PlaneMatrix) -> Result<PlaneMatrix> {
    check_same_n(&a, &b)?;
    Ok(PlaneMatrix {
        n: a.n,
        code: plane_mul_code(a.n, a.code, b.code),
    })
}

static N3_PRODUCT_TABLE: OnceLock<Vec<u32>> = OnceLock::new();

/// Product table for n = 3, all 512 x 512 pairs, built once on first use.
pub fn n3_product_table() -> &'static [u32] {
    N3_PRODUCT_TABLE.get_or_init(|| {
        let mut table = vec![0u32; 512 * 512];
        for a in 0..512u32 {
            for b in 0..512u32 {
                table[(a as usize) << 9 | b as usize] = plane_mul_code(3, a, b);
            }
        }
        table
    })
}

/// Boolean matrix product of two planes; uses the precomputed table at n = 3.
pub fn plane_mul(a: PlaneMatrix, b: PlaneMatrix) -> Result<PlaneMatrix> {
    check_same_n(&a, &b)?;
    let code = if a.n == 3 {
        n3_product_table()[(a.code as usize) << 9 | b.code as usize]
    } else {
        plane_mul_code(a.n, a.code, b.code)
    };
    Ok(PlaneMatrix { n: a.n, code })
}

/// All 2^(n^2) single-bit matrices in ascending code order.
pub fn all_matrices(n: usize) -> Result<Vec<PlaneMatrix>> {
    if n == 0 || n > MAX_ENUM_DIM {
        return Err(MobsError::EnumerationTooLarge { n });
    }
    let count = 1u64 << (n * n);
    Ok((0..count)
        .map(|code| PlaneMatrix { n, code: code as u32 })
        .collect())
}

/// A k-bit string, the entry type of `BitMatrix`. Bit i lives on plane i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn zeros(k: usize) -> Self {
        BitString { bits: vec![false; k] }
    }

    pub fn ones(k: usize) -> Self {
        BitString { bits: vec![true; k] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Big-endian hex encoding of the k bits, bit 0 least significant.
    pub fn to_hex(&self) -> String {
        let k = self.bits.len();
        let digits = k.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < k && self.bits[i] {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(s: &str, k: usize) -> Result<Self> {
        let mut bits = vec![false; k];
        for (pos, c) in s.chars().rev().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| MobsError::InvalidArgument(format!("bad hex digit {c:?}")))?;
            for b in 0..4 {
                let i = pos * 4 + b;
                if (nibble >> b) & 1 == 1 {
                    if i >= k {
                        return Err(MobsError::InvalidArgument(format!(
                            "hex string {s:?} has a bit set beyond k = {k}"
                        )));
                    }
                    bits[i] = true;
                }
            }
        }
        Ok(BitString { bits })
    }
}

/// An n x n matrix of k-bit strings, stored as k packed bit planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    k: usize,
    planes: Vec<u32>,
}

impl BitMatrix {
    pub fn zeros(n: usize, k: usize) -> Self {
        BitMatrix {
            n,
            k,
            planes: vec![0; k],
        }
    }

    /// Diagonal entries all-ones, off-diagonal all-zero: the multiplicative
    /// identity of the semigroup.
    pub fn identity(n: usize, k: usize) -> Self {
        let id = PlaneMatrix::identity(n).code;
        BitMatrix {
            n,
            k,
            planes: vec![id; k],
        }
    }

    /// Every entry an independent uniform k-bit string.
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let mask = ((1u64 << (n * n)) - 1) as u32;
        let planes = (0..k).map(|_| rng.random::<u32>() & mask).collect();
        BitMatrix { n, k, planes }
    }

    pub fn from_entries(n: usize, k: usize, entries: &[Vec<BitString>]) -> Result<Self> {
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(MobsError::DimensionMismatch(format!(
                "expected an {n} x {n} entry grid"
            )));
        }
        let mut planes = vec![0u32; k];
        for (r, row) in entries.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                if entry.len() != k {
                    return Err(MobsError::DimensionMismatch(format!(
                        "entry ({r},{c}) has length {}, expected k = {k}",
                        entry.len()
                    )));
                }
                for i in 0..k {
                    if entry.bit(i) {
                        planes[i] |= 1 << (r * n + c);
                    }
                }
            }
        }
        Ok(BitMatrix { n, k, planes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn planes(&self) -> &[u32] {
        &self.planes
    }

    pub fn entry(&self, row: usize, col: usize) -> BitString {
        let pos = row * self.n + col;
        BitString {
            bits: self.planes.iter().map(|p| (p >> pos) & 1 == 1).collect(),
        }
    }
}

/// The single-bit matrix formed by the i-th component of every entry.
pub fn pull(i: usize, m: &BitMatrix) -> Result<PlaneMatrix> {
    if i >= m.k {
        return Err(MobsError::PlaneIndexOutOfRange { index: i, k: m.k });
    }
    Ok(PlaneMatrix {
        n: m.n,
        code: m.planes[i],
    })
}

/// Inverse of `pull`: stack k single-bit matrices back into a bitstring matrix.
pub fn assemble(planes: &[PlaneMatrix]) -> Result<BitMatrix> {
    let first = planes.first().ok_or(MobsError::EmptyPlaneSequence)?;
    let n = first.n;
    if planes.iter().any(|p| p.n != n) {
        return Err(MobsError::DimensionMismatch(
            "planes have differing dimensions".into(),
        ));
    }
    Ok(BitMatrix {
        n,
        k: planes.len(),
        planes: planes.iter().map(|p| p.code).collect(),
    })
}

/// Semigroup product, computed plane by plane.
pub fn mat_mul(a: &BitMatrix, b: &BitMatrix) -> Result<BitMatrix> {
    if a.n != b.n || a.k != b.k {
        return Err(MobsError::DimensionMismatch(format!(
            "({} x {}, k = {}) vs ({} x {}, k = {})",
            a.n, a.n, a.k, b.n, b.n, b.k
        )));
    }
    let planes = if a.n == 3 {
        let table = n3_product_table();
        a.planes
            .iter()
            .zip(&b.planes)
            .map(|(&pa, &pb)| table[(pa as usize) << 9 | pb as usize])
            .collect()
    } else {
        a.planes
            .iter()
            .zip(&b.planes)
            .map(|(&pa, &pb)| plane_mul_code(a.n, pa, pb))
            .collect()
    };
    Ok(BitMatrix {
        n: a.n,
        k: a.k,
        planes,
    })
}

#[derive(Serialize, Deserialize)]
struct BitMatrixRepr {
    n: usize,
    k: usize,
    entries: Vec<Vec<String>>,
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.n)
            .map(|r| (0..self.n).map(|c| self.entry(r, c).to_hex()).collect())
            .collect();
        BitMatrixRepr {
            n: self.n,
            k: self.k,
            entries,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = BitMatrixRepr::deserialize(deserializer)?;
        let entries: Vec<Vec<BitString>> = repr
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|hex| BitString::from_hex(hex, repr.k))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        BitMatrix::from_entries(repr.n, repr.k, &entries).map_err(serde::de::Error::custom)
    }
}
