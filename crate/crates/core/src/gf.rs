//! Arithmetic in binary extension fields GF(2^b) for 1 <= b <= 16.
//!
//! A [`Field`] is a cheap-to-clone handle around the field parameters and
//! (for b <= 12) exp/log tables. Above 12 bits multiplication falls back to
//! carry-less multiply followed by polynomial reduction.
//!
//! Matrix code works on raw `u16` symbols through [`Field::mul_raw`] and
//! friends; [`FieldElement`] is the checked value type for callers who want
//! the field tag carried along.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_BITS: u32 = 16;
const TABLE_BITS: u32 = 12;

/// Extension degree and reduction polynomial of a binary field.
///
/// `poly` includes the leading `x^b` term, so x^3+x+1 is `0b1011`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawFieldSpec", into = "RawFieldSpec")]
pub struct FieldSpec {
    bits: u32,
    poly: u32,
}

#[derive(Serialize, Deserialize)]
struct RawFieldSpec {
    b: u32,
    poly: u32,
}

impl TryFrom<RawFieldSpec> for FieldSpec {
    type Error = Error;

    fn try_from(raw: RawFieldSpec) -> Result<Self> {
        FieldSpec::new(raw.b, raw.poly)
    }
}

impl From<FieldSpec> for RawFieldSpec {
    fn from(spec: FieldSpec) -> Self {
        RawFieldSpec { b: spec.bits, poly: spec.poly }
    }
}

impl FieldSpec {
    pub fn new(bits: u32, poly: u32) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::usage(format!("field bits must be in 1..={MAX_BITS}, got {bits}")));
        }
        if degree(poly) != Some(bits) {
            return Err(Error::usage(format!(
                "reduction polynomial {poly:#b} does not have degree {bits}"
            )));
        }
        if !is_irreducible(poly) {
            return Err(Error::usage(format!("reduction polynomial {poly:#b} is reducible")));
        }
        Ok(Self { bits, poly })
    }

    /// Field with the numerically smallest irreducible polynomial of degree `bits`.
    pub fn with_default_poly(bits: u32) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::usage(format!("field bits must be in 1..={MAX_BITS}, got {bits}")));
        }
        let poly = smallest_irreducible(bits);
        Ok(Self { bits, poly })
    }

    /// Smallest default-polynomial field with at least `min_size` elements.
    pub fn at_least(min_size: u64) -> Result<Self> {
        let mut bits = 1;
        while (1u64 << bits) < min_size {
            bits += 1;
            if bits > MAX_BITS {
                return Err(Error::usage(format!(
                    "no supported binary field has {min_size} or more elements"
                )));
            }
        }
        Self::with_default_poly(bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of field elements, 2^b.
    pub fn size(&self) -> u32 {
        1 << self.bits
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.bits, self.poly)
    }
}

fn degree(poly: u32) -> Option<u32> {
    (poly != 0).then(|| 31 - poly.leading_zeros())
}

/// Remainder of carry-less division `a mod m` over GF(2)[x].
fn poly_rem(mut a: u32, m: u32) -> u32 {
    let dm = degree(m).expect("nonzero modulus");
    while let Some(da) = degree(a) {
        if da < dm {
            break;
        }
        a ^= m << (da - dm);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(poly: u32) -> bool {
    let Some(d) = degree(poly) else {
        return false;
    };
    if d == 0 {
        return false;
    }
    (1..=d / 2).all(|k| ((1u32 << k)..(1u32 << (k + 1))).all(|divisor| poly_rem(poly, divisor) != 0))
}

/// Numerically smallest irreducible polynomial of the given degree.
pub fn smallest_irreducible(bits: u32) -> u32 {
    ((1u32 << bits)..(1u32 << (bits + 1)))
        .find(|&p| is_irreducible(p))
        .expect("irreducible polynomials exist in every degree")
}

/// A symbol of GF(2^b) tagged with its field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u16,
    spec: FieldSpec,
}

impl FieldElement {
    pub fn value(&self) -> u16 {
        self.value
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

struct Tables {
    // exp has 2(q-1) entries so exp[log a + log b] needs no reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

struct Inner {
    spec: FieldSpec,
    tables: Option<Tables>,
}

#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Field").field(&self.inner.spec).finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.inner.spec == other.inner.spec
    }
}

impl Eq for Field {}

impl Field {
    pub fn new(spec: FieldSpec) -> Self {
        let tables = (spec.bits <= TABLE_BITS).then(|| build_tables(spec));
        Self { inner: Arc::new(Inner { spec, tables }) }
    }

    pub fn with_bits(bits: u32) -> Result<Self> {
        FieldSpec::with_default_poly(bits).map(Self::new)
    }

    pub fn spec(&self) -> FieldSpec {
        self.inner.spec
    }

    pub fn bits(&self) -> u32 {
        self.inner.spec.bits
    }

    pub fn size(&self) -> u32 {
        self.inner.spec.size()
    }

    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value >= self.size() {
            return Err(Error::usage(format!(
                "value {value} is not an element of {}",
                self.inner.spec
            )));
        }
        Ok(FieldElement { value: value as u16, spec: self.inner.spec })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, spec: self.inner.spec }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement { value: 1, spec: self.inner.spec }
    }

    fn check(&self, x: FieldElement) -> Result<()> {
        if x.spec != self.inner.spec {
            return Err(Error::FieldMismatch { expected: self.inner.spec, found: x.spec });
        }
        Ok(())
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(FieldElement { value: x.value ^ y.value, spec: x.spec })
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(FieldElement { value: self.mul_raw(x.value, y.value), spec: x.spec })
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        let value = self
            .inv_raw(x.value)
            .ok_or_else(|| Error::Domain("zero has no multiplicative inverse".into()))?;
        Ok(FieldElement { value, spec: x.spec })
    }

    pub fn pow(&self, x: FieldElement, exp: u64) -> Result<FieldElement> {
        self.check(x)?;
        Ok(FieldElement { value: self.pow_raw(x.value, exp), spec: x.spec })
    }

    #[inline]
    pub fn mul_raw(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        match &self.inner.tables {
            Some(t) => t.exp[t.log[a as usize] as usize + t.log[b as usize] as usize],
            None => clmul_reduce(a, b, self.inner.spec.poly),
        }
    }

    pub fn inv_raw(&self, a: u16) -> Option<u16> {
        if a == 0 {
            return None;
        }
        match &self.inner.tables {
            Some(t) => {
                let order = self.size() as usize - 1;
                let l = t.log[a as usize] as usize;
                Some(t.exp[(order - l) % order])
            }
            // a^(q-2) = a^-1 in the multiplicative group of order q-1.
            None => Some(self.pow_raw(a, self.size() as u64 - 2)),
        }
    }

    pub fn pow_raw(&self, mut base: u16, mut exp: u64) -> u16 {
        let mut acc = 1u16;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `a / b`; panics on division by zero.
    pub fn div_raw(&self, a: u16, b: u16) -> u16 {
        self.mul_raw(a, self.inv_raw(b).expect("division by zero"))
    }
}

fn clmul_reduce(a: u16, b: u16, poly: u32) -> u16 {
    let (mut a, mut b) = (a as u32, b as u32);
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    poly_rem(acc, poly) as u16
}

fn build_tables(spec: FieldSpec) -> Tables {
    let q = spec.size() as usize;
    let order = q - 1;
    let mul = |a: u16, b: u16| clmul_reduce(a, b, spec.poly);
    // The reduction polynomial need not be primitive, so search for a generator.
    let generator = (1..q as u16)
        .find(|&g| {
            let mut x = g;
            let mut k = 1;
            while x != 1 {
                x = mul(x, g);
                k += 1;
            }
            k == order
        })
        .expect("multiplicative group of a finite field is cyclic");
    let mut exp = vec![0u16; 2 * order.max(1)];
    let mut log = vec![0u16; q];
    let mut x = 1u16;
    for i in 0..order {
        exp[i] = x;
        log[x as usize] = i as u16;
        x = mul(x, generator);
    }
    for i in order..exp.len() {
        exp[i] = exp[i - order];
    }
    Tables { exp, log }
}
