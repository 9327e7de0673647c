//! Coset-coding wiretap II codes and their privacy verifier.

use std::fmt::Write as _;

use itertools::Itertools;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::codes::{binary_basis, gray_walk, CosetLabeler, LinearCode};
use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Field, FieldMatrix, FieldVector};
use crate::prob::{exact, to_f64, Exact};
use crate::seed::SeedTree;

/// Upper limit on the number of codewords enumerated for an exact privacy check.
pub const MAX_EXACT_CODEWORDS: u64 = 1 << 24;
/// Upper limit on `sets * codewords` for an exact privacy check.
pub const MAX_EXACT_WORK: u64 = 1 << 32;

/// Encoder `[R m] [G; Ĝ]` where `G` generates the randomness code `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetWtCode {
    code: LinearCode,
    ghat: FieldMatrix,
    stacked: FieldMatrix,
    labeler: CosetLabeler,
    ell: usize,
    rho: Exact,
    epsilon: Exact,
}

impl CosetWtCode {
    /// Wraps an explicit `(C, Ĝ)` pair with claimed `(rho, epsilon)`.
    pub fn from_parts(code: LinearCode, ghat: FieldMatrix, rho: Exact, epsilon: Exact) -> Result<Self> {
        let n = code.n();
        let ell = n - code.k();
        if ell == 0 {
            return Err(invalid("randomness code is the full space; no room for a message"));
        }
        check_len(ell, ghat.rows())?;
        let stacked = code.generator().vstack(&ghat)?;
        if stacked.rank() != n {
            return Err(Error::RankDeficient("[G; Ĝ] is not invertible".into()));
        }
        // rate l/n <= 1 - rho
        if exact(ell as u128, n as u128) + rho > exact(1, 1) {
            return Err(invalid(format!("rate {ell}/{n} exceeds 1 - rho = 1 - {rho}")));
        }
        let labeler = CosetLabeler::new(&code, &ghat)?;
        Ok(CosetWtCode { code, ghat, stacked, labeler, ell, rho, epsilon })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn field(&self) -> &Field {
        self.code.field()
    }

    pub fn ghat(&self) -> &FieldMatrix {
        &self.ghat
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    /// Message length in symbols.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Randomness length in symbols.
    pub fn r(&self) -> usize {
        self.code.k()
    }

    pub fn rho(&self) -> Exact {
        self.rho
    }

    pub fn epsilon(&self) -> Exact {
        self.epsilon
    }

    /// Largest reading-set size covered by `rho`: `floor(n * rho)`.
    pub fn private_set_size(&self) -> usize {
        (self.rho * exact(self.n() as u128, 1)).to_integer() as usize
    }

    /// Set for Hamming-based instances, whose `rho` from the dual distance sits
    /// strictly below the value 1/2 quoted for that family.
    pub fn hamming_half_note(&self) -> Option<String> {
        (self.code.label().starts_with("hamming") && self.rho < exact(1, 2)).then(|| {
            format!("rho = (d_perp - 1)/n = {} is below the 1/2 quoted for the Hamming family; {} is used", self.rho, self.rho)
        })
    }

    pub fn stacked(&self) -> &FieldMatrix {
        &self.stacked
    }

    pub fn labeler(&self) -> &CosetLabeler {
        &self.labeler
    }
}

/// `rho = (d_perp(C) - 1)/n`, `epsilon = 0`, with `Ĝ` from a seeded full-rank extension.
pub fn wt_build(code: &LinearCode, seed: u64) -> Result<CosetWtCode> {
    let ell = code.n() - code.k();
    if ell == 0 {
        return Err(invalid("randomness code is the full space; no room for a message"));
    }
    let dd = code.dual_distance()?;
    let full = code.generator().extend_to_full_rank(ell, seed)?;
    let ghat = full.row_block(code.k(), code.n());
    let rho = exact(dd as u128 - 1, code.n() as u128);
    CosetWtCode::from_parts(code.clone(), ghat, rho, exact(0, 1))
}

pub fn wt_encode(w: &CosetWtCode, m: &FieldVector, r: &FieldVector) -> Result<FieldVector> {
    check_len(w.ell, m.len())?;
    check_len(w.r(), r.len())?;
    w.stacked.mat_vec_mul(&r.concat(m)?)
}

pub fn wt_decode(w: &CosetWtCode, x: &FieldVector) -> Result<FieldVector> {
    check_len(w.n(), x.len())?;
    w.labeler.label(x)
}

/// Packed encoder over words of `w` bits per symbol.
#[derive(Clone, Debug)]
pub(crate) struct PackedWt {
    /// GF(2)-basis of the randomness code, `r * w` words.
    pub r_basis: Vec<u64>,
    /// GF(2)-basis images of message bits, `ell * w` words, most significant first.
    pub m_basis: Vec<u64>,
}

impl PackedWt {
    pub fn new(wt: &CosetWtCode) -> Self {
        PackedWt {
            r_basis: binary_basis(wt.code.generator()),
            m_basis: binary_basis(&wt.ghat),
        }
    }

    pub fn message_offset(&self, m: u64) -> u64 {
        combine(&self.m_basis, m)
    }

    pub fn encode(&self, m: u64, r: u64) -> u64 {
        self.message_offset(m) ^ combine(&self.r_basis, r)
    }

    pub fn for_each_codeword(&self, m: u64, mut visit: impl FnMut(u64)) {
        let base = self.message_offset(m);
        gray_walk(&self.r_basis, |c| visit(base ^ c));
    }
}

/// XOR of `basis[i]` over the set bits of `bits`, bit `len-1-i` selecting `basis[i]`.
pub(crate) fn combine(basis: &[u64], bits: u64) -> u64 {
    let len = basis.len();
    let mut acc = 0;
    for (i, b) in basis.iter().enumerate() {
        if (bits >> (len - 1 - i)) & 1 == 1 {
            acc ^= b;
        }
    }
    acc
}

/// Symbols of `x` at positions `set` concatenated into an index.
#[inline]
pub(crate) fn project_word(x: u64, n: usize, w: u32, set: &[usize]) -> u64 {
    let mask = (1u64 << w) - 1;
    set.iter()
        .fold(0, |acc, &i| (acc << w) | ((x >> ((n - 1 - i) as u32 * w)) & mask))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exact,
    MonteCarlo,
}

impl VerifyMode {
    pub fn as_str(self) -> &'static str {
        match self {
            VerifyMode::Exact => "exact",
            VerifyMode::MonteCarlo => "montecarlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrivacyRow {
    pub set: Vec<usize>,
    pub m0: u64,
    pub m1: u64,
    pub sd: Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrivacyReport {
    pub max_set_size: usize,
    pub mode: VerifyMode,
    /// Largest distance seen; plug-in estimate in Monte Carlo mode.
    pub max_sd: Exact,
    pub witness: Option<PrivacyRow>,
    /// Worst message pair for each reading set, in enumeration order.
    pub rows: Vec<PrivacyRow>,
    pub samples: u64,
    /// Binomial half-width added to plug-in estimates; zero in exact mode.
    pub half_width: f64,
    pub notes: Vec<String>,
}

impl PrivacyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("set,m0,m1,sd\n");
        for row in &self.rows {
            let set = row.set.iter().map(|i| i.to_string()).join(" ");
            let _ = writeln!(s, "{set},{},{},{}", row.m0, row.m1, row.sd);
        }
        s
    }

    /// Largest set size `s` such that every set of size at most `s` shows distance 0.
    pub fn zero_up_to(&self) -> Option<usize> {
        let bad = self.rows.iter().filter(|r| r.sd > exact(0, 1)).map(|r| r.set.len()).min();
        match bad {
            Some(0) => None,
            Some(s) => Some(s - 1),
            None => Some(self.max_set_size),
        }
    }
}

/// Exact `max SD(Enc(m0)_S, Enc(m1)_S)` over all message pairs and `|S| <= max_set_size`,
/// enumerating every randomness value for every message.
pub fn wt_verify_privacy(w: &CosetWtCode, max_set_size: usize) -> Result<PrivacyReport> {
    let packed = PackedWt::new(w);
    let messages = 1u64 << (w.ell * w.field().degree() as usize);
    let per_message = 1u64 << packed.r_basis.len();
    let total = messages.checked_mul(per_message).unwrap_or(u64::MAX);
    let sets = sets_up_to(w.n(), max_set_size);
    if total > MAX_EXACT_CODEWORDS || total.saturating_mul(sets) > MAX_EXACT_WORK {
        return Err(Error::Infeasible(format!(
            "exact privacy check needs {total} codewords over {sets} reading sets; use Monte Carlo mode"
        )));
    }
    let words: Vec<Vec<u64>> = (0..messages)
        .map(|m| {
            let mut v = Vec::with_capacity(per_message as usize);
            packed.for_each_codeword(m, |x| v.push(x));
            v
        })
        .collect();
    let mut rep = exact_view_privacy(&words, w.n(), w.field().degree(), max_set_size);
    rep.notes.extend(w.hamming_half_note());
    Ok(rep)
}

pub(crate) fn sets_up_to(n: usize, max: usize) -> u64 {
    (0..=max.min(n)).map(|s| binomial(n as u64, s as u64)).sum()
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Exact view privacy for an explicit codeword ensemble: `words[m]` lists the encoding
/// of message `m` under every randomness value (all lists the same length).
pub(crate) fn exact_view_privacy(words: &[Vec<u64>], n: usize, w: u32, max_set_size: usize) -> PrivacyReport {
    let all_sets: Vec<Vec<usize>> = (0..=max_set_size.min(n)).flat_map(|s| (0..n).combinations(s)).collect();
    let rows: Vec<PrivacyRow> = all_sets
        .par_iter()
        .map(|set| worst_pair_exact(words, n, w, set))
        .collect();
    summarize(rows, max_set_size, VerifyMode::Exact, words.first().map_or(0, |v| v.len()) as u64, 0.0)
}

fn summarize(rows: Vec<PrivacyRow>, max_set_size: usize, mode: VerifyMode, samples: u64, half_width: f64) -> PrivacyReport {
    let mut witness: Option<PrivacyRow> = None;
    for r in &rows {
        if witness.as_ref().is_none_or(|b| r.sd > b.sd) {
            witness = Some(r.clone());
        }
    }
    PrivacyReport {
        max_set_size,
        mode,
        max_sd: witness.as_ref().map_or(exact(0, 1), |r| r.sd),
        witness,
        rows,
        samples,
        half_width,
        notes: Vec::new(),
    }
}

fn worst_pair_exact(words: &[Vec<u64>], n: usize, w: u32, set: &[usize]) -> PrivacyRow {
    let bins = 1usize << (set.len() as u32 * w);
    let hists: Vec<Vec<u32>> = words
        .iter()
        .map(|ws| {
            let mut h = vec![0u32; bins];
            for &x in ws {
                h[project_word(x, n, w, set) as usize] += 1;
            }
            h
        })
        .collect();
    let per = words.first().map_or(1, |v| v.len()) as u128;
    worst_pair(&hists, per, set)
}

/// The pair of histograms with the largest distance; ties keep the first pair.
fn worst_pair(hists: &[Vec<u32>], per: u128, set: &[usize]) -> PrivacyRow {
    let mut distinct: Vec<(usize, &Vec<u32>)> = Vec::new();
    for (i, h) in hists.iter().enumerate() {
        if !distinct.iter().any(|(_, d)| *d == h) {
            distinct.push((i, h));
        }
    }
    let mut best = PrivacyRow { set: set.to_vec(), m0: 0, m1: 0, sd: exact(0, 1) };
    for (a, (i, ha)) in distinct.iter().enumerate() {
        for (j, hb) in distinct.iter().skip(a + 1) {
            let l1: u128 = ha.iter().zip(hb.iter()).map(|(&x, &y)| x.abs_diff(y) as u128).sum();
            let sd = exact(l1, 2 * per);
            if sd > best.sd {
                best = PrivacyRow { set: set.to_vec(), m0: *i as u64, m1: *j as u64, sd };
            }
        }
    }
    best
}

/// Monte Carlo privacy estimate: `set_draws` reading sets of each size up to the limit,
/// one random message pair per set, `samples` encodings per message.
pub fn wt_verify_privacy_mc(
    w: &CosetWtCode,
    max_set_size: usize,
    set_draws: usize,
    samples: u64,
    seed: &SeedTree,
) -> Result<PrivacyReport> {
    if samples == 0 {
        return Err(invalid("Monte Carlo privacy check needs at least one sample"));
    }
    let packed = PackedWt::new(w);
    let (n, sym) = (w.n(), w.field().degree());
    let mbits = w.ell as u32 * sym;
    let rbits = packed.r_basis.len() as u32;
    let draw = |m: u64, rng: &mut ChaCha8Rng| packed.encode(m, rng.gen_range(0..1u64 << rbits));
    let mut rep = mc_view_privacy(n, sym, mbits, max_set_size, set_draws, samples, seed, draw);
    rep.notes.extend(w.hamming_half_note());
    Ok(rep)
}

/// Monte Carlo view privacy for any sampler: `draw(m, rng)` returns one packed encoding of `m`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn mc_view_privacy(
    n: usize,
    sym: u32,
    mbits: u32,
    max_set_size: usize,
    set_draws: usize,
    samples: u64,
    seed: &SeedTree,
    draw: impl Fn(u64, &mut ChaCha8Rng) -> u64 + Sync,
) -> PrivacyReport {
    let jobs: Vec<(usize, usize)> = (1..=max_set_size.min(n))
        .flat_map(|s| (0..set_draws).map(move |i| (s, i)))
        .collect();
    let rows: Vec<PrivacyRow> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let mut rng = seed.child("set").index(s as u64).index(i as u64).rng();
            let mut set = sample(&mut rng, n, s).into_vec();
            set.sort_unstable();
            let m0 = rng.gen_range(0..1u64 << mbits);
            let mut m1 = rng.gen_range(0..1u64 << mbits);
            if m1 == m0 {
                m1 ^= 1;
            }
            let bins = 1usize << (s as u32 * sym);
            let hists: Vec<Vec<u32>> = [m0, m1]
                .iter()
                .map(|&m| {
                    let mut h = vec![0u32; bins];
                    for _ in 0..samples {
                        h[project_word(draw(m, &mut rng), n, sym, &set) as usize] += 1;
                    }
                    h
                })
                .collect();
            let mut row = worst_pair(&hists, samples as u128, &set);
            row.m0 = m0;
            row.m1 = m1;
            row
        })
        .collect();
    let half = mc_half_width(samples, 1usize << (max_set_size as u32 * sym).min(20));
    summarize(rows, max_set_size, VerifyMode::MonteCarlo, samples, half)
}

/// Slack for a plug-in distance between two empirical histograms over `bins` outcomes:
/// `sum_i sqrt(p_i(1-p_i)/N)` is at most `sqrt(bins/N)`, taken at three standard errors.
pub fn mc_half_width(samples: u64, bins: usize) -> f64 {
    3.0 * (bins as f64 / samples as f64).sqrt()
}

/// Convenience for reports: the plug-in maximum as a float.
pub fn max_sd_f64(rep: &PrivacyReport) -> f64 {
    to_f64(&rep.max_sd)
}
