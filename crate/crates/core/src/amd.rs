//! Algebraic manipulation detection with the polynomial tag
//! `f(m, r) = r^(d+2) + sum_i m_i r^i` over GF(2^u).
//!
//! Message bits are left-padded with zeros to `d` blocks of `u` bits, read most
//! significant first, where `d` is the smallest odd number of blocks holding `k`
//! bits. A codeword is the bit string `m || r || f(m, r)` of length `k + 2u`.
//!
//! Taking `u` equal to the symbol width of GF(q) gives the q-ary code: each
//! message block, the key and the tag are single symbols.

use std::fmt::Write as _;

use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Elem, Field, FieldVector};
use crate::prob::{exact, Exact};

/// Upper limit on `k + 3u` for the exhaustive oracle.
pub const MAX_ORACLE_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmdCode {
    k: u32,
    u: u32,
    d: u32,
    /// True when an all-zero block was added to make `d` odd.
    parity_padded: bool,
    field: Field,
}

impl AmdCode {
    pub fn new(k: u32, u: u32) -> Result<Self> {
        if k == 0 {
            return Err(invalid("AMD message length must be positive"));
        }
        if u == 0 || u > 16 {
            return Err(invalid(format!("tag field degree u = {u} not in 1..=16")));
        }
        if k + 2 * u > 64 {
            return Err(invalid("AMD codeword must fit in 64 bits"));
        }
        let blocks = k.div_ceil(u);
        let parity_padded = blocks % 2 == 0;
        let d = blocks + parity_padded as u32;
        Ok(AmdCode { k, u, d, parity_padded, field: Field::new(u)? })
    }

    /// Message length in bits.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    /// Number of message blocks in the tag polynomial, always odd.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn parity_padded(&self) -> bool {
        self.parity_padded
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Codeword length `k + 2u`.
    pub fn n(&self) -> u32 {
        self.k + 2 * self.u
    }

    pub fn tag(&self, m: u64, r: Elem) -> Elem {
        let f = &self.field;
        let mut acc = f.pow(r, self.d as u64 + 2);
        let mask = f.mask() as u64;
        for i in 1..=self.d {
            let block = ((m >> ((self.d - i) * self.u)) & mask) as Elem;
            acc ^= f.mul(block, f.pow(r, i as u64));
        }
        acc
    }

    /// Packed encoder: `m` holds `k` bits, `r` is a field element.
    pub fn encode_word(&self, m: u64, r: Elem) -> u64 {
        debug_assert!(m >> self.k == 0 && self.field.contains(r));
        let t = self.tag(m, r);
        (((m << self.u) | r as u64) << self.u) | t as u64
    }

    /// Packed decoder; `None` is the rejection symbol.
    pub fn decode_word(&self, x: u64) -> Option<u64> {
        let mask = self.field.mask() as u64;
        let t = (x & mask) as Elem;
        let r = ((x >> self.u) & mask) as Elem;
        let m = x >> (2 * self.u);
        (m >> self.k == 0 && self.tag(m, r) == t).then_some(m)
    }

    pub fn encode(&self, m: &FieldVector, r: Elem) -> Result<FieldVector> {
        self.check_bits(m, self.k)?;
        if !self.field.contains(r) {
            return Err(invalid("AMD key outside the tag field"));
        }
        Ok(FieldVector::from_word(m.field(), self.encode_word(m.to_word(), r), self.n() as usize))
    }

    pub fn decode(&self, x: &FieldVector) -> Result<Option<FieldVector>> {
        self.check_bits(x, self.n())?;
        Ok(self
            .decode_word(x.to_word())
            .map(|m| FieldVector::from_word(x.field(), m, self.k as usize)))
    }

    /// `(k/u + 1) / 2^u`, with `k` increased by `u` when a parity block was added.
    pub fn failure_bound(&self) -> Exact {
        let k_eff = self.k + if self.parity_padded { self.u } else { 0 };
        exact((k_eff + self.u) as u128, (self.u as u128) << self.u)
    }

    /// `(d + 1) / 2^u`: the root-count bound for the padded polynomial actually used.
    /// Exceeds [`failure_bound`](Self::failure_bound) when `u` does not divide `k`.
    pub fn effective_bound(&self) -> Exact {
        exact(self.d as u128 + 1, 1u128 << self.u)
    }

    fn check_bits(&self, v: &FieldVector, len: u32) -> Result<()> {
        if !v.field().is_binary() {
            return Err(Error::FieldMismatch);
        }
        check_len(len as usize, v.len())
    }
}

pub fn amd_failure_bound(code: &AmdCode) -> Exact {
    code.failure_bound()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaRate {
    pub delta: u64,
    /// Worst case over messages of `Pr_r[decode != reject]`.
    pub not_bot: Exact,
    /// Worst case over messages of `Pr_r[decode not in {m, reject}]`.
    pub wrong: Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmdOracleReport {
    /// `max_{m, delta != 0} Pr_r[decode(encode(m, r) + delta) != reject]`.
    pub max_not_bot: Exact,
    /// The weaker event: `decode(...)` is a valid message other than `m`.
    pub max_wrong: Exact,
    pub worst_delta: u64,
    pub worst_m: u64,
    /// Smallest detection probability over offsets that touch only message bits.
    pub min_detect_message_only: Exact,
    pub per_delta: Vec<DeltaRate>,
}

impl AmdOracleReport {
    /// `delta,failure_rate` rows, one per nonzero offset, offset as a bit string.
    pub fn to_csv(&self, n: u32) -> String {
        let mut s = String::from("delta,failure_rate\n");
        for row in &self.per_delta {
            let _ = writeln!(s, "{:0width$b},{}", row.delta, row.not_bot, width = n as usize);
        }
        s
    }
}

/// Exact failure rates by enumerating every message, nonzero offset and key.
pub fn amd_exhaustive_oracle(code: &AmdCode) -> Result<AmdOracleReport> {
    let (k, u, n) = (code.k, code.u, code.n());
    if k + 3 * u > MAX_ORACLE_BITS {
        return Err(Error::Infeasible(format!(
            "AMD oracle needs 2^{} evaluations; limit is 2^{MAX_ORACLE_BITS}",
            2 * k + 3 * u
        )));
    }
    let keys = 1u64 << u;
    let denom = keys as u128;
    let codewords: Vec<Vec<u64>> = (0..1u64 << k)
        .map(|m| (0..keys).map(|r| code.encode_word(m, r as Elem)).collect())
        .collect();
    let mut per_delta = Vec::with_capacity((1usize << n) - 1);
    let mut best = (0u64, 0u64, 1u64, 0u64);
    let mut max_wrong = 0u64;
    let mut min_detect = keys;
    for delta in 1u64..(1u64 << n) {
        let (mut worst_nb, mut worst_wrong) = (0u64, 0u64);
        for (m, words) in codewords.iter().enumerate() {
            let (mut nb, mut wrong) = (0u64, 0u64);
            for &x in words {
                if let Some(mm) = code.decode_word(x ^ delta) {
                    nb += 1;
                    wrong += (mm != m as u64) as u64;
                }
            }
            if nb > best.0 {
                best = (nb, wrong, delta, m as u64);
            }
            worst_nb = worst_nb.max(nb);
            worst_wrong = worst_wrong.max(wrong);
        }
        max_wrong = max_wrong.max(worst_wrong);
        if delta >> (2 * u) != 0 && delta & ((1 << (2 * u)) - 1) == 0 {
            min_detect = min_detect.min(keys - worst_nb);
        }
        per_delta.push(DeltaRate {
            delta,
            not_bot: exact(worst_nb as u128, denom),
            wrong: exact(worst_wrong as u128, denom),
        });
    }
    Ok(AmdOracleReport {
        max_not_bot: exact(best.0 as u128, denom),
        max_wrong: exact(max_wrong as u128, denom),
        worst_delta: best.2,
        worst_m: best.3,
        min_detect_message_only: exact(min_detect as u128, denom),
        per_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::to_f64;
    use proptest::prelude::*;

    #[test]
    fn encoding_examples() {
        let c = AmdCode::new(2, 2).unwrap();
        assert_eq!(c.encode_word(0, 0), 0);
        // m = 01, r = a: tag = a + a^3 = a + 1 in GF(4)
        let x = c.encode(&FieldVector::parse_bits("01").unwrap(), 0b10).unwrap();
        assert_eq!(x.to_string(), "011011");
        assert_eq!(c.decode(&x).unwrap().unwrap().to_string(), "01");
        let flipped = FieldVector::parse_bits("011010").unwrap();
        assert_eq!(c.decode(&flipped).unwrap(), None);
        assert!(c.encode(&FieldVector::parse_bits("1").unwrap(), 0).is_err());
    }

    #[test]
    fn padding_rules() {
        let c = AmdCode::new(4, 2).unwrap();
        assert_eq!((c.d(), c.parity_padded()), (3, true));
        assert_eq!(c.failure_bound(), exact(1, 1));
        let c = AmdCode::new(1, 2).unwrap();
        assert_eq!((c.d(), c.parity_padded()), (1, false));
        assert_eq!(c.n(), 5);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(amd_failure_bound(&AmdCode::new(3, 3).unwrap()), exact(1, 4));
        assert_eq!(to_f64(&amd_failure_bound(&AmdCode::new(1, 2).unwrap())), 0.375);
        for u in 1..=6 {
            assert_eq!(AmdCode::new(u, u).unwrap().failure_bound(), exact(2, 1 << u));
        }
        assert_eq!(AmdCode::new(1, 2).unwrap().effective_bound(), exact(1, 2));
    }

    /// Independent count of offsets fooling the tag, straight from the definition.
    fn naive_not_bot(c: &AmdCode, m: u64, delta: u64) -> u64 {
        let f = c.field();
        let u = c.u();
        let mask = f.mask() as u64;
        let mut hits = 0;
        for r in 0..f.order() as u64 {
            let x = c.encode_word(m, r as Elem) ^ delta;
            let (mm, rr, t) = (x >> (2 * u), (x >> u) & mask, x & mask);
            // rebuild the tag from scratch with repeated multiplication
            let mut acc = 0u16;
            let mut power = 1u16;
            for i in 1..=c.d() + 2 {
                power = f.mul(power, rr as Elem);
                if i <= c.d() {
                    let block = ((mm >> ((c.d() - i) * u)) & mask) as Elem;
                    acc ^= f.mul(block, power);
                }
            }
            acc ^= power;
            hits += (acc as u64 == t) as u64;
        }
        hits
    }

    #[test]
    fn oracle_agrees_with_naive_recount() {
        for (k, u) in [(1, 1), (2, 2), (1, 2), (3, 3), (4, 2)] {
            let c = AmdCode::new(k, u).unwrap();
            let rep = amd_exhaustive_oracle(&c).unwrap();
            let mut best = 0;
            for delta in 1..(1u64 << c.n()) {
                for m in 0..(1u64 << k) {
                    best = best.max(naive_not_bot(&c, m, delta));
                }
            }
            assert_eq!(rep.max_not_bot, exact(best as u128, 1 << u), "k={k} u={u}");
            assert!(rep.max_wrong <= rep.max_not_bot);
        }
    }

    #[test]
    fn oracle_meets_effective_bound() {
        for u in 1..=4 {
            for k in 1..=(16 - 3 * u).min(8) {
                let c = AmdCode::new(k, u).unwrap();
                let rep = amd_exhaustive_oracle(&c).unwrap();
                assert!(rep.max_not_bot <= c.effective_bound(), "k={k} u={u}");
                if k % u == 0 {
                    assert!(rep.max_not_bot <= c.failure_bound(), "k={k} u={u}");
                }
            }
        }
    }

    #[test]
    fn partial_block_exceeds_formula() {
        // With k = 1 and u = 2 the single block still has degree-3 tag polynomial, and
        // an offset on the key alone leaves a quadratic with two roots in GF(4).
        let c = AmdCode::new(1, 2).unwrap();
        let rep = amd_exhaustive_oracle(&c).unwrap();
        assert_eq!(rep.max_not_bot, exact(1, 2));
        assert!(rep.max_not_bot > c.failure_bound());
    }

    #[test]
    fn message_only_offsets_are_caught() {
        let c = AmdCode::new(3, 3).unwrap();
        let rep = amd_exhaustive_oracle(&c).unwrap();
        assert!(rep.min_detect_message_only >= exact(1, 1) - c.failure_bound());
        assert!(rep.to_csv(c.n()).starts_with("delta,failure_rate\n000000001,"));
    }

    #[test]
    fn oracle_refuses_large_parameters() {
        assert!(matches!(amd_exhaustive_oracle(&AmdCode::new(12, 5).unwrap()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn round_trip_exhaustive() {
        for (k, u) in [(8, 8), (10, 4), (12, 3), (6, 1)] {
            let c = AmdCode::new(k, u).unwrap();
            for m in 0..1u64 << k {
                for r in 0..1u16 << u {
                    assert_eq!(c.decode_word(c.encode_word(m, r)), Some(m));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(k in 1u32..12, u in 1u32..5, m in any::<u64>(), r in any::<u16>()) {
            let c = AmdCode::new(k, u).unwrap();
            let m = m & ((1 << k) - 1);
            let r = r & c.field().mask();
            prop_assert_eq!(c.decode_word(c.encode_word(m, r)), Some(m));
        }
    }
}
