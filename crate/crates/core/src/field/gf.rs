//! Binary extension fields GF(2^w), 1 <= w <= 16.
//!
//! Elements are `w`-bit integers in the polynomial basis: bit `i` is the
//! coefficient of `x^i`. Multiplication goes through exp/log tables built
//! from a generator of the multiplicative group, so any irreducible modulus
//! works, primitive or not.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// A field element. Only the low `w` bits are ever set.
pub type Elem = u16;

pub const MAX_DEGREE: u32 = 16;

/// Default moduli, indexed by `w - 1`. All are primitive.
const DEFAULT_MODULI: [u32; 16] = [
    0b11,     // x + 1
    0b111,    // x^2 + x + 1
    0b1011,   // x^3 + x + 1
    0x13,     // x^4 + x + 1
    0x25,     // x^5 + x^2 + 1
    0x43,     // x^6 + x + 1
    0x83,     // x^7 + x + 1
    0x11d,    // x^8 + x^4 + x^3 + x^2 + 1
    0x211,    // x^9 + x^4 + 1
    0x409,    // x^10 + x^3 + 1
    0x805,    // x^11 + x^2 + 1
    0x1053,   // x^12 + x^6 + x^4 + x + 1
    0x201b,   // x^13 + x^4 + x^3 + x + 1
    0x4443,   // x^14 + x^10 + x^6 + x + 1
    0x8003,   // x^15 + x + 1
    0x1100b,  // x^16 + x^12 + x^3 + x + 1
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow,
}

struct Tables {
    /// exp[i] = g^i for i in 0..2(q-1), doubled so sums of logs need no reduction.
    exp: Vec<Elem>,
    /// log[a] for a != 0; log[0] is unused.
    log: Vec<u32>,
    generator: Elem,
}

/// GF(2^w) with a fixed irreducible modulus. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    w: u32,
    modulus: u32,
    tables: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl std::hash::Hash for Field {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.w.hash(state);
        self.modulus.hash(state);
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}; {:#x})", self.w, self.modulus)
    }
}

impl Field {
    /// GF(2^w) with the default modulus from the table.
    pub fn new(w: u32) -> Result<Self> {
        if w == 0 || w > MAX_DEGREE {
            return Err(invalid(format!("extension degree {w} not in 1..=16")));
        }
        Self::with_modulus(w, DEFAULT_MODULI[w as usize - 1])
    }

    pub fn gf2() -> Self {
        Self::new(1).expect("GF(2) is always constructible")
    }

    pub fn default_modulus(w: u32) -> Option<u32> {
        (1..=MAX_DEGREE).contains(&w).then(|| DEFAULT_MODULI[w as usize - 1])
    }

    /// GF(2^w) with a caller-supplied modulus, which must be irreducible of degree `w`.
    pub fn with_modulus(w: u32, modulus: u32) -> Result<Self> {
        if w == 0 || w > MAX_DEGREE {
            return Err(invalid(format!("extension degree {w} not in 1..=16")));
        }
        if degree(modulus) != Some(w) {
            return Err(invalid(format!("modulus {modulus:#x} does not have degree {w}")));
        }
        if !is_irreducible(modulus) {
            return Err(invalid(format!("modulus {modulus:#x} is reducible")));
        }
        let tables = build_tables(w, modulus);
        Ok(Field { w, modulus, tables: Arc::new(tables) })
    }

    pub fn degree(&self) -> u32 {
        self.w
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Number of elements, 2^w.
    pub fn order(&self) -> u32 {
        1 << self.w
    }

    pub fn mask(&self) -> Elem {
        ((1u32 << self.w) - 1) as Elem
    }

    pub fn is_binary(&self) -> bool {
        self.w == 1
    }

    /// A generator of the multiplicative group. Equals `x` (= 2) whenever the
    /// modulus is primitive.
    pub fn generator(&self) -> Elem {
        self.tables.generator
    }

    pub fn contains(&self, a: Elem) -> bool {
        a & !self.mask() == 0
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.tables;
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::NonInvertible("zero has no multiplicative inverse".into()));
        }
        let t = &self.tables;
        let q1 = self.order() - 1;
        Ok(t.exp[((q1 - t.log[a as usize]) % q1) as usize])
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let q1 = (self.order() - 1) as u64;
        let l = self.tables.log[a as usize] as u64;
        self.tables.exp[((l * (e % q1)) % q1) as usize]
    }

    /// `g^i` for the multiplicative generator.
    pub fn exp(&self, i: u64) -> Elem {
        let q1 = (self.order() - 1) as u64;
        self.tables.exp[(i % q1) as usize]
    }

    /// The single dispatch entry point for `add | mul | inv | pow`.
    /// For `Pow`, `b` is read as the exponent.
    pub fn op(&self, a: Elem, b: Elem, kind: FieldOp) -> Result<Elem> {
        if !self.contains(a) || (kind != FieldOp::Pow && !self.contains(b)) {
            return Err(invalid("operand outside the field"));
        }
        match kind {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow => Ok(self.pow(a, b as u64)),
        }
    }

    /// Horner evaluation of `coeffs[0] + coeffs[1] x + ...` at `x`.
    pub fn poly_eval(&self, coeffs: &[Elem], x: Elem) -> Elem {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}

/// Carry-less product of two polynomials over GF(2), reduced modulo `modulus`.
pub(crate) fn clmul_mod(mut a: u32, mut b: u32, modulus: u32, w: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << w) != 0 {
            a ^= modulus;
        }
    }
    acc
}

fn degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b).expect("divisor is nonzero");
    while let Some(da) = degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    let Some(d) = degree(p) else { return false };
    if d == 0 {
        return false;
    }
    for dd in 1..=d / 2 {
        for low in 0..(1u32 << dd) {
            let divisor = (1 << dd) | low;
            if poly_rem(p, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

fn build_tables(w: u32, modulus: u32) -> Tables {
    let q = 1u32 << w;
    let q1 = q - 1;
    let order_of = |g: u32| -> u32 {
        let mut x = g;
        let mut k = 1;
        while x != 1 {
            x = clmul_mod(x, g, modulus, w);
            k += 1;
        }
        k
    };
    let generator = if q1 == 1 {
        1
    } else {
        (2..q).find(|&g| order_of(g) == q1).expect("multiplicative group is cyclic")
    };
    let mut exp = vec![0 as Elem; 2 * q1 as usize];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for i in 0..q1 {
        exp[i as usize] = x as Elem;
        exp[(i + q1) as usize] = x as Elem;
        log[x as usize] = i;
        x = clmul_mod(x, generator, modulus, w);
    }
    Tables { exp, log, generator: generator as Elem }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA: Elem = 0b10;

    #[test]
    fn gf4_hand_values() {
        let f = Field::new(2).unwrap();
        assert_eq!(f.modulus(), 0b111);
        // alpha * alpha = alpha + 1 modulo x^2 + x + 1
        assert_eq!(f.op(ALPHA, ALPHA, FieldOp::Mul).unwrap(), 0b11);
        assert_eq!(f.op(1, ALPHA, FieldOp::Mul).unwrap(), ALPHA);
        assert_eq!(f.op(0b11, 0, FieldOp::Inv).unwrap(), ALPHA);
        assert_eq!(f.pow(ALPHA, 3), 1);
    }

    #[test]
    fn inverse_of_zero_fails() {
        let f = Field::new(4).unwrap();
        assert!(matches!(f.inv(0), Err(Error::NonInvertible(_))));
        assert!(f.op(0, 0, FieldOp::Inv).is_err());
    }

    #[test]
    fn horner_examples() {
        let f = Field::new(2).unwrap();
        assert_eq!(f.poly_eval(&[0b11], ALPHA), 0b11);
        assert_eq!(f.poly_eval(&[0, 1], ALPHA), ALPHA);
        // 1 + a + a^2 with a^2 = a + 1 sums to zero in characteristic 2.
        let naive = 1 ^ ALPHA ^ (clmul_mod(2, 2, 0b111, 2) as Elem);
        assert_eq!(naive, 0);
        assert_eq!(f.poly_eval(&[1, 1, 1], ALPHA), naive);
    }

    #[test]
    fn default_moduli_are_primitive() {
        for w in 1..=MAX_DEGREE {
            let f = Field::new(w).unwrap();
            if w > 1 {
                assert_eq!(f.generator(), 2, "w = {w}");
            }
        }
    }

    #[test]
    fn rejects_reducible_modulus() {
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(Field::with_modulus(4, 0b10101).is_err());
        assert!(Field::with_modulus(4, 0b111).is_err());
        assert!(Field::new(17).is_err());
    }

    #[test]
    fn non_primitive_modulus_still_works() {
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5.
        let f = Field::with_modulus(4, 0b11111).unwrap();
        assert_ne!(f.generator(), 2);
        for a in 1..16 {
            let ai = f.inv(a).unwrap();
            assert_eq!(f.mul(a, ai), 1);
            assert_eq!(f.mul(a, 2) as u32, clmul_mod(a as u32, 2, 0b11111, 4));
        }
    }

    #[test]
    fn inverse_exhaustive_up_to_w8() {
        for w in 1..=8 {
            let f = Field::new(w).unwrap();
            for a in 1..f.order() as Elem {
                assert_eq!(f.mul(f.inv(a).unwrap(), a), 1, "w={w} a={a}");
            }
        }
    }

    #[test]
    fn table_mul_matches_clmul() {
        for w in [3, 5, 8, 11, 16] {
            let f = Field::new(w).unwrap();
            let m = f.modulus();
            let mut a: u32 = 1;
            for b in (0..f.order()).step_by(97) {
                a = (a * 31 + 7) & f.mask() as u32;
                assert_eq!(f.mul(a as Elem, b as Elem) as u32, clmul_mod(a, b, m, w));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn field_axioms(w in 1u32..=16, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
                let f = Field::new(w).unwrap();
                let (a, b, c) = (a & f.mask(), b & f.mask(), c & f.mask());
                prop_assert_eq!(f.add(a, b), f.add(b, a));
                prop_assert_eq!(f.mul(a, b), f.mul(b, a));
                prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            }
        }
    }
}
