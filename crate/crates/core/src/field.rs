//! Arithmetic over GF(2) and prime fields GF(p).
//!
//! Labels and shares are plain reduced integers ([`FieldElement`]); all
//! arithmetic goes through the [`FieldSpec`] that owns the modulus, so a
//! single element type serves every field the protocols run over.

use std::fmt;

use crate::error::{Error, Result};

/// The Mersenne prime 2^61 - 1, the default modulus for threshold labels.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

/// Number of PRG bytes consumed per element of an odd prime field.
pub const PRIME_ELEMENT_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    modulus: u64,
}

/// A field value, always reduced below the modulus of the field it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn from_bool(bit: bool) -> Self {
        FieldElement(bit as u64)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FieldSpec {
    /// Validates `modulus` as 2 or a prime.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        if modulus > 2 && !is_prime(modulus) {
            return Err(Error::CompositeModulus(modulus));
        }
        Ok(FieldSpec { modulus })
    }

    pub fn gf2() -> Self {
        FieldSpec { modulus: 2 }
    }

    pub fn mersenne61() -> Self {
        FieldSpec {
            modulus: MERSENNE_61,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_binary(&self) -> bool {
        self.modulus == 2
    }

    /// Agents are evaluated at the points 1..=n, which must be distinct and nonzero.
    pub fn check_agents(&self, n: usize) -> Result<()> {
        if (n as u128) < self.modulus as u128 {
            Ok(())
        } else {
            Err(Error::FieldTooSmall {
                modulus: self.modulus,
                n,
            })
        }
    }

    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement(value % self.modulus)
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let sum = a.0 as u128 + b.0 as u128;
        let p = self.modulus as u128;
        FieldElement(if sum >= p { sum - p } else { sum } as u64)
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        if a.0 == 0 {
            a
        } else {
            FieldElement(self.modulus - a.0)
        }
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(((a.0 as u128 * b.0 as u128) % self.modulus as u128) as u64)
    }

    pub fn pow(&self, base: FieldElement, mut exp: u64) -> FieldElement {
        let mut acc = FieldElement::ONE;
        let mut base = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::ZeroInverse);
        }
        Ok(self.pow(a, self.modulus - 2))
    }

    pub fn sum<I: IntoIterator<Item = FieldElement>>(&self, items: I) -> FieldElement {
        items
            .into_iter()
            .fold(FieldElement::ZERO, |acc, x| self.add(acc, x))
    }

    /// PRG bytes consumed per element: one byte (its LSB) for GF(2), 16 bytes otherwise.
    pub fn element_width(&self) -> usize {
        if self.is_binary() {
            1
        } else {
            PRIME_ELEMENT_BYTES
        }
    }

    pub fn element_from_bytes(&self, bytes: &[u8]) -> Result<FieldElement> {
        let expected = self.element_width();
        if bytes.len() != expected {
            return Err(Error::WidthMismatch {
                expected,
                actual: bytes.len(),
            });
        }
        if self.is_binary() {
            return Ok(FieldElement((bytes[0] & 1) as u64));
        }
        let mut buf = [0u8; 16];
        buf.copy_from_slice(bytes);
        let wide = u128::from_be_bytes(buf);
        Ok(FieldElement((wide % self.modulus as u128) as u64))
    }

    /// Hex digits used to serialize one element: ceil(bits(modulus) / 4).
    pub fn hex_width(&self) -> usize {
        let bits = 64 - self.modulus.leading_zeros() as usize;
        bits.div_ceil(4)
    }

    pub fn to_hex(&self, x: FieldElement) -> String {
        format!("{:0width$x}", x.0, width = self.hex_width())
    }

    pub fn from_hex(&self, s: &str) -> Result<FieldElement> {
        if s.len() != self.hex_width() {
            return Err(Error::StateFileCorrupt(format!(
                "field element `{s}` should have {} hex digits",
                self.hex_width()
            )));
        }
        let v = u64::from_str_radix(s, 16)
            .map_err(|e| Error::StateFileCorrupt(format!("bad hex `{s}`: {e}")))?;
        if v >= self.modulus {
            return Err(Error::StateFileCorrupt(format!(
                "value {v} is not reduced mod {}",
                self.modulus
            )));
        }
        Ok(FieldElement(v))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.modulus)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    #[test]
    fn make_validates_modulus() {
        assert!(gf(2).is_binary());
        assert_eq!(gf(5).modulus(), 5);
        assert_eq!(FieldSpec::new(6), Err(Error::CompositeModulus(6)));
        assert_eq!(FieldSpec::new(1), Err(Error::ModulusTooSmall(1)));
        assert!(FieldSpec::new(MERSENNE_61).is_ok());
        assert!(FieldSpec::new(257).is_ok());
        assert!(FieldSpec::new(561).is_err()); // Carmichael
    }

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial(n), "{n}");
        }
    }

    #[test]
    fn small_field_examples() {
        let f2 = gf(2);
        assert_eq!(f2.add(f2.one(), f2.one()), f2.zero());
        let f5 = gf(5);
        assert_eq!(f5.add(f5.element(3), f5.element(4)), f5.element(2));
        assert_eq!(f5.inv(f5.element(2)).unwrap(), f5.element(3));
        assert_eq!(f5.neg(f5.element(2)), f5.element(3));
        assert_eq!(f5.inv(f5.zero()), Err(Error::ZeroInverse));
        let f7 = gf(7);
        assert_eq!(f7.inv(f7.element(5)).unwrap(), f7.element(3));
        for x in 0..7 {
            assert_eq!(f7.add(f7.zero(), f7.element(x)), f7.element(x));
        }
    }

    #[test]
    fn bytes_to_elements() {
        let f2 = gf(2);
        assert_eq!(f2.element_from_bytes(&[0x07]).unwrap(), f2.one());
        assert_eq!(f2.element_from_bytes(&[0x06]).unwrap(), f2.zero());
        let f5 = gf(5);
        assert_eq!(f5.element_from_bytes(&[0u8; 16]).unwrap(), f5.zero());
        let mut seventeen = [0u8; 16];
        seventeen[15] = 17;
        assert_eq!(f5.element_from_bytes(&seventeen).unwrap(), f5.element(2));
        assert_eq!(
            f5.element_from_bytes(&[0u8; 8]),
            Err(Error::WidthMismatch {
                expected: 16,
                actual: 8
            })
        );
        assert!(f2.element_from_bytes(&[0u8; 16]).is_err());
    }

    #[test]
    fn hex_widths() {
        assert_eq!(gf(2).hex_width(), 1);
        assert_eq!(gf(5).hex_width(), 1);
        assert_eq!(gf(257).hex_width(), 3);
        assert_eq!(FieldSpec::mersenne61().hex_width(), 16);
        let f = gf(257);
        assert_eq!(f.to_hex(f.element(256)), "100");
        assert_eq!(f.to_hex(f.element(10)), "00a");
        assert_eq!(f.from_hex("00a").unwrap(), f.element(10));
        assert!(f.from_hex("101").is_err());
        assert!(f.from_hex("0a").is_err());
    }

    // Field axioms on 10^4 random triples per field.
    fn check_axioms(f: FieldSpec, triples: &[(u64, u64, u64)]) {
        for &(a, b, c) in triples {
            let (a, b, c) = (f.element(a), f.element(b), f.element(c));
            for x in [f.add(a, b), f.mul(a, b), f.neg(a), f.sub(a, b)] {
                assert!(x.value() < f.modulus());
            }
            assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            assert_eq!(f.add(a, b), f.add(b, a));
            assert_eq!(f.mul(a, b), f.mul(b, a));
            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            assert_eq!(f.add(a, f.neg(a)), f.zero());
            if !a.is_zero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(4))]
        #[test]
        fn axioms_hold(triples in proptest::collection::vec(any::<(u64, u64, u64)>(), 10_000)) {
            for p in [2, 5, 7, 257, MERSENNE_61] {
                check_axioms(gf(p), &triples);
            }
        }
    }
}
