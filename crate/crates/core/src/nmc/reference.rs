//! Slow reference path: brute force over the encoder randomness with vector
//! arithmetic, independent of the packed engine. Used to cross-check it.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{invalid, Error, Result};
use crate::field::{Field, FieldVector};
use crate::lecss::{lecss_decode, lecss_encode};
use crate::prob::{exact, Exact};
use crate::wiretap::{wt_decode, wt_encode};

use super::adversary::{read_value, Adversary};
use super::outcome::{DistMode, Outcome, OutcomeDistribution};
use super::{nm_decode, nm_encode, InnerCode, NmCode, SameStarRule};

/// Upper limit on randomness bits for the brute-force path.
pub const MAX_REFERENCE_BITS: u32 = 22;

/// A randomized coding scheme with explicit randomness.
pub trait CodingScheme {
    fn message_bits(&self) -> u32;
    fn length(&self) -> usize;
    fn randomness_bits(&self) -> u32;
    fn encode(&self, m: u64, rand: u64) -> Result<FieldVector>;
    fn decode(&self, x: &FieldVector) -> Result<Outcome>;
}

impl CodingScheme for NmCode {
    fn message_bits(&self) -> u32 {
        self.k()
    }

    fn length(&self) -> usize {
        self.n()
    }

    fn randomness_bits(&self) -> u32 {
        NmCode::randomness_bits(self)
    }

    fn encode(&self, m: u64, rand: u64) -> Result<FieldVector> {
        let (key, rnd) = self.split_randomness(rand);
        let mv = FieldVector::from_word(&Field::gf2(), m, self.k() as usize);
        let r = FieldVector::from_word(self.field(), rnd, self.inner_randomness());
        nm_encode(self, &mv, key, &r)
    }

    fn decode(&self, x: &FieldVector) -> Result<Outcome> {
        nm_decode(self, x)
    }
}

fn enumerable(bits: u32) -> Result<()> {
    if bits > MAX_REFERENCE_BITS {
        return Err(Error::Infeasible(format!("brute force over 2^{bits} randomness values")));
    }
    Ok(())
}

/// `Tamper_m^f` by encoding, tampering and decoding every randomness value.
pub fn reference_tamper_experiment<S: CodingScheme, A: Adversary + ?Sized>(
    scheme: &S,
    f: &A,
    m: u64,
) -> Result<OutcomeDistribution> {
    brute_force(scheme, f, m, false)
}

/// `StrongNM_m^f` by brute force.
pub fn reference_strong_experiment<S: CodingScheme, A: Adversary + ?Sized>(
    scheme: &S,
    f: &A,
    m: u64,
) -> Result<OutcomeDistribution> {
    brute_force(scheme, f, m, true)
}

fn brute_force<S: CodingScheme, A: Adversary + ?Sized>(
    scheme: &S,
    f: &A,
    m: u64,
    strong: bool,
) -> Result<OutcomeDistribution> {
    let bits = scheme.randomness_bits();
    enumerable(bits)?;
    let mut counts: BTreeMap<Outcome, u128> = BTreeMap::new();
    for rand in 0..1u64 << bits {
        let x = scheme.encode(m, rand)?;
        let y = f.apply_vector(&x)?;
        let o = if strong && y == x { Outcome::SameStar } else { scheme.decode(&y)? };
        *counts.entry(o).or_insert(0) += 1;
    }
    OutcomeDistribution::from_counts(scheme.message_bits(), DistMode::Exact, counts)
}

fn inner_zero_encoding(code: &NmCode, rnd: u64) -> Result<FieldVector> {
    let field = code.field();
    let r = FieldVector::from_word(field, rnd, code.inner_randomness());
    match code.inner() {
        InnerCode::Lecss(l) => lecss_encode(l, &FieldVector::zeros(field, l.ell()), &r),
        InnerCode::Wiretap(w) => wt_encode(w, &FieldVector::zeros(field, w.ell()), &r),
    }
}

/// The inner decoder maps `z` to the zero message.
fn decodes_to_zero(code: &NmCode, z: &FieldVector) -> Result<bool> {
    Ok(match code.inner() {
        InnerCode::Lecss(l) => lecss_decode(l, z)?.is_some_and(|v| v.is_zero()),
        InnerCode::Wiretap(w) => wt_decode(w, z)?.is_zero(),
    })
}

/// `D_f` by brute force over `Y`, the inner encodings of the zero message, with each
/// read value weighted as its construction prescribes.
pub fn reference_simulator<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    rule: SameStarRule,
) -> Result<OutcomeDistribution> {
    let field = code.field();
    let rdim = code.inner_randomness() as u32 * field.degree();
    enumerable(rdim)?;
    let n = code.n();
    let read = f.read_set();
    let s = read.len();
    let unread = n - s;
    // per read value: outcome counts and the number of Y in the cell
    let mut cells: BTreeMap<u64, (BTreeMap<Outcome, u128>, u128)> = BTreeMap::new();
    for rnd in 0..1u64 << rdim {
        let y = inner_zero_encoding(code, rnd)?;
        let alpha = read_value(&y, read)?;
        let n_ow = f.overwritten(alpha).iter().filter(|i| !read.contains(i)).count();
        let o = match code.inner() {
            InnerCode::Lecss(l) => {
                let t = l.t();
                if t <= s {
                    return Err(Error::OutsideRegime("t' <= |S_r|".into()));
                }
                // ranges in listed order: [0, t'-s], (t'-s, unread/2], (unread/2, n-t'), rest
                if n_ow <= t - s {
                    offset_outcome(code, f, &y, SameStarRule::ZeroLabel)?
                } else if 2 * n_ow <= unread || n_ow < n - t {
                    Outcome::Bot
                } else {
                    nm_decode(code, &f.apply_vector(&y)?)?
                }
            }
            InnerCode::Wiretap(_) => {
                if 2 * n_ow <= unread {
                    offset_outcome(code, f, &y, rule)?
                } else {
                    nm_decode(code, &f.apply_vector(&y)?)?
                }
            }
        };
        let cell = cells.entry(alpha).or_default();
        *cell.0.entry(o).or_insert(0) += 1;
        cell.1 += 1;
    }
    let total_y = 1u128 << rdim;
    let mut probs: BTreeMap<Outcome, Exact> = BTreeMap::new();
    let w = field.degree();
    for (hist, size) in cells.values() {
        let weight = match code.inner() {
            InnerCode::Lecss(_) => exact(1, 1u128 << (s as u32 * w)),
            InnerCode::Wiretap(_) => exact(*size, total_y),
        };
        for (o, c) in hist {
            let p = weight * exact(*c, *size);
            *probs.entry(*o).or_insert_with(|| exact(0, 1)) += p;
        }
    }
    if matches!(code.inner(), InnerCode::Lecss(_)) && cells.len() != 1usize << (s as u32 * w) {
        return Err(Error::OutsideRegime("some read values never occur".into()));
    }
    from_probs(code.k(), probs)
}

fn offset_outcome<A: Adversary + ?Sized>(code: &NmCode, f: &A, y: &FieldVector, rule: SameStarRule) -> Result<Outcome> {
    let d = f.difference_vector(y)?;
    let harmless = match rule {
        SameStarRule::ZeroLabel => decodes_to_zero(code, &d)?,
        SameStarRule::ZeroOffset => d.is_zero(),
    };
    Ok(if harmless { Outcome::SameStar } else { Outcome::Bot })
}

fn from_probs(k: u32, probs: BTreeMap<Outcome, Exact>) -> Result<OutcomeDistribution> {
    let total = probs.values().fold(1u128, |acc, p| acc.lcm(p.denom()));
    let sum: Exact = probs.values().fold(exact(0, 1), |a, b| a + b);
    if sum != exact(1, 1) {
        return Err(invalid(format!("simulator mass sums to {sum}")));
    }
    let counts = probs.into_iter().map(|(o, p)| (o, p.numer() * (total / p.denom())));
    OutcomeDistribution::from_counts(k, DistMode::Exact, counts)
}
