//! The MOBS key exchange.
//!
//! Alice and Bob exponentiate the public holomorph element (M, h); Alice
//! obtains (A, h^x), Bob (B, h^y), they swap the matrix components and both
//! arrive at K = h^x(B)A = h^y(A)B.

use serde::{Deserialize, Serialize};

use crate::automorphism::CycleAutomorphism;
use crate::boolmat::{mat_mul, BitMatrix};
use crate::error::{MobsError, Result};

/// A pair (g, h^e) in the holomorph, with the automorphism h held by
/// reference. Multiplication is (g, e)(g', e') = (h^e'(g) g', e + e').
#[derive(Debug, Clone)]
pub struct HolomorphElement<'a> {
    pub g: BitMatrix,
    pub e: u128,
    pub h: &'a CycleAutomorphism,
}

impl<'a> HolomorphElement<'a> {
    pub fn new(g: BitMatrix, e: u128, h: &'a CycleAutomorphism) -> Self {
        HolomorphElement { g, e, h }
    }

    pub fn mul(&self, other: &HolomorphElement<'a>) -> Result<HolomorphElement<'a>> {
        let shifted = self.h.power(other.e).apply(&self.g)?;
        Ok(HolomorphElement {
            g: mat_mul(&shifted, &other.g)?,
            e: self.e + other.e,
            h: self.h,
        })
    }
}

/// (M, h)^x by square-and-multiply: O(log x) holomorph multiplications.
pub fn holomorph_pow<'a>(base: &HolomorphElement<'a>, x: u128) -> Result<HolomorphElement<'a>> {
    if x == 0 {
        return Err(MobsError::ZeroExponent);
    }
    let mut result: Option<HolomorphElement> = None;
    let mut square = base.clone();
    let mut rem = x;
    loop {
        if rem & 1 == 1 {
            result = Some(match result {
                None => square.clone(),
                Some(r) => r.mul(&square)?,
            });
        }
        rem >>= 1;
        if rem == 0 {
            break;
        }
        square = square.mul(&square)?;
    }
    Ok(result.expect("x >= 1"))
}

/// The exchange value: first component of (M, h)^x, i.e. the decreasing-index
/// product h^(x-1)(M) ... h(M) M.
pub fn generate_a(m: &BitMatrix, h: &CycleAutomorphism, x: u128) -> Result<BitMatrix> {
    let base = HolomorphElement::new(m.clone(), 1, h);
    Ok(holomorph_pow(&base, x)?.g)
}

/// Naive x-step iteration A <- h(A) M; the oracle for `generate_a`.
pub fn generate_a_naive(m: &BitMatrix, h: &CycleAutomorphism, x: u128) -> Result<BitMatrix> {
    if x == 0 {
        return Err(MobsError::ZeroExponent);
    }
    let mut a = m.clone();
    for _ in 1..x {
        a = mat_mul(&h.apply(&a)?, m)?;
    }
    Ok(a)
}

/// One party's key: h^own_exponent(other_value) * own_value.
pub fn derive_key(
    own_exponent: u128,
    h: &CycleAutomorphism,
    other_value: &BitMatrix,
    own_value: &BitMatrix,
) -> Result<BitMatrix> {
    mat_mul(&h.power(own_exponent).apply(other_value)?, own_value)
}

/// A full simulated exchange: public data plus the private exponents and key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeTranscript {
    pub m: BitMatrix,
    pub h: CycleAutomorphism,
    pub x: u128,
    pub y: u128,
    pub a: BitMatrix,
    pub b: BitMatrix,
    pub key: BitMatrix,
}

/// What an eavesdropper sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicView {
    pub m: BitMatrix,
    pub h: CycleAutomorphism,
    pub a: BitMatrix,
    pub b: BitMatrix,
}

impl ExchangeTranscript {
    pub fn public_view(&self) -> PublicView {
        PublicView {
            m: self.m.clone(),
            h: self.h.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }
}

/// Run the four protocol steps and check the key equality and the telescoping
/// identity h(A)M = h^x(M)A. A failure of either is an invariant violation.
pub fn run_exchange(
    m: &BitMatrix,
    h: &CycleAutomorphism,
    x: u128,
    y: u128,
) -> Result<ExchangeTranscript> {
    if x == 0 || y == 0 {
        return Err(MobsError::ZeroExponent);
    }
    let a = generate_a(m, h, x)?;
    let b = generate_a(m, h, y)?;
    let key_a = derive_key(x, h, &b, &a)?;
    let key_b = derive_key(y, h, &a, &b)?;
    assert_eq!(key_a, key_b, "K_A != K_B: protocol invariant violated");
    let lhs = mat_mul(&h.apply(&a)?, m)?;
    let rhs = mat_mul(&h.power(x).apply(m)?, &a)?;
    assert_eq!(lhs, rhs, "telescoping identity violated");
    Ok(ExchangeTranscript {
        m: m.clone(),
        h: h.clone(),
        x,
        y,
        a,
        b,
        key: key_a,
    })
}

/// On-disk transcript: public data always, private fields optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptFile {
    pub m: BitMatrix,
    pub h: CycleAutomorphism,
    pub a: BitMatrix,
    pub b: BitMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<BitMatrix>,
}

impl TranscriptFile {
    pub fn public_only(t: &ExchangeTranscript) -> Self {
        TranscriptFile {
            m: t.m.clone(),
            h: t.h.clone(),
            a: t.a.clone(),
            b: t.b.clone(),
            x: None,
            y: None,
            key: None,
        }
    }

    pub fn with_private(t: &ExchangeTranscript) -> Self {
        TranscriptFile {
            x: Some(t.x.to_string()),
            y: Some(t.y.to_string()),
            key: Some(t.key.clone()),
            ..Self::public_only(t)
        }
    }

    pub fn view(&self) -> PublicView {
        PublicView {
            m: self.m.clone(),
            h: self.h.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }
}
