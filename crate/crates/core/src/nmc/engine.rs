//! Tampering experiments and simulator distributions on packed codewords.
//!
//! Exact mode conditions on the read value `alpha` and on the AMD key: the remaining
//! codewords form a coset of a subspace, `g^alpha` is affine on it, and the decoder
//! output is uniform on an affine image (see [`super::affine`]). Monte Carlo mode
//! draws the encoder randomness from a seed tree in fixed-size chunks, so results do
//! not depend on the thread count.

use std::collections::BTreeMap;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::BitLinearMap;
use crate::error::{check_len, invalid, Error, Result};
use crate::prob::{exact, Exact};
use crate::seed::SeedTree;
use crate::tamper::{low_mask, AffineAction, CompiledTamper};
use crate::wiretap::combine;

use super::adversary::Adversary;
use super::affine::{for_each_image, image_count, MaskedSolver};
use super::outcome::{DistMode, Outcome, OutcomeDistribution};
use super::{Construction, InnerCode, NmCode, PackedNm};

/// Upper limit on `u + |S_r| w`, the number of (AMD key, read value) cells in exact mode.
pub const MAX_EXACT_CELL_BITS: u32 = 24;
const CHUNK: u64 = 1 << 16;
const DENSE_K: u32 = 16;
const TABLE_BITS: u32 = 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Every value of the encoder randomness.
    Exact,
    /// `samples` draws from the given seed node.
    MonteCarlo { samples: u64, seed: SeedTree },
}

/// When the construction-2 simulator emits `same*` in its first case.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SameStarRule {
    /// The offset `Δg^alpha(y)` decodes to the zero message.
    #[default]
    ZeroLabel,
    /// The offset `Δg^alpha(y)` is the zero word.
    ZeroOffset,
}

struct Acc {
    k: u32,
    dense: Vec<u128>,
    sparse: BTreeMap<Outcome, u128>,
}

impl Acc {
    fn new(k: u32) -> Self {
        let dense = if k <= DENSE_K { vec![0; 2 + (1usize << k)] } else { Vec::new() };
        Acc { k, dense, sparse: BTreeMap::new() }
    }

    #[inline]
    fn add(&mut self, o: Outcome, c: u128) {
        match self.slot(o) {
            Some(i) => self.dense[i] += c,
            None => *self.sparse.entry(o).or_insert(0) += c,
        }
    }

    /// Moves `c` counts from `from` to `to`; `from` must hold at least `c`.
    fn transfer(&mut self, from: Outcome, to: Outcome, c: u128) {
        if c == 0 {
            return;
        }
        match self.slot(from) {
            Some(i) => self.dense[i] -= c,
            None => *self.sparse.get_mut(&from).expect("source outcome present") -= c,
        }
        self.add(to, c);
    }

    fn slot(&self, o: Outcome) -> Option<usize> {
        if self.dense.is_empty() {
            return None;
        }
        Some(match o {
            Outcome::Bot => 0,
            Outcome::SameStar => 1,
            Outcome::Message(m) => 2 + m as usize,
        })
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.dense.iter_mut().zip(&other.dense) {
            *a += b;
        }
        for (o, c) in other.sparse {
            *self.sparse.entry(o).or_insert(0) += c;
        }
        self
    }

    fn finish(self, mode: DistMode) -> Result<OutcomeDistribution> {
        let dense = self.dense.into_iter().enumerate().map(|(i, c)| {
            let o = match i {
                0 => Outcome::Bot,
                1 => Outcome::SameStar,
                _ => Outcome::Message(i as u64 - 2),
            };
            (o, c)
        });
        OutcomeDistribution::from_counts(self.k, mode, dense.chain(self.sparse))
    }
}

/// XOR-combinations of a basis through per-chunk lookup tables.
struct SpanTable {
    parts: Vec<(u32, Vec<u64>)>,
}

impl SpanTable {
    const PART: u32 = 11;

    fn new(basis: &[u64]) -> Self {
        let len = basis.len() as u32;
        let mut parts = Vec::new();
        let mut shift = 0;
        while shift < len {
            let bits = Self::PART.min(len - shift);
            let table = (0..1u64 << bits).map(|v| combine(basis, v << shift)).collect();
            parts.push((shift, table));
            shift += bits;
        }
        SpanTable { parts }
    }

    #[inline]
    fn get(&self, v: u64) -> u64 {
        self.parts
            .iter()
            .fold(0, |acc, (s, t)| acc ^ t[((v >> s) as usize) & (t.len() - 1)])
    }
}

/// Packed code and compiled adversary, checked against each other.
struct Setup<'a> {
    p: &'a PackedNm,
    ct: CompiledTamper,
    read_mask: u64,
    nbits: u32,
}

fn setup<'a, A: Adversary + ?Sized>(code: &'a NmCode, f: &A) -> Result<Setup<'a>> {
    let p = code.packed();
    check_len(p.n, f.n())?;
    let ct = f.compile()?;
    if ct.w != p.w {
        return Err(Error::FieldMismatch);
    }
    let read_mask = symbols_mask(p.n, p.w, &ct.read);
    Ok(Setup { p, nbits: p.n_bits(), ct, read_mask })
}

pub(crate) fn symbols_mask(n: usize, w: u32, positions: &[usize]) -> u64 {
    let sym = low_mask(w);
    positions.iter().fold(0, |acc, &i| acc | (sym << ((n - 1 - i) as u32 * w)))
}

impl Setup<'_> {
    /// Places the read value `alpha` at the read positions.
    fn spread(&self, alpha: u64) -> u64 {
        let (n, w, r) = (self.p.n, self.p.w, &self.ct.read);
        let sym = low_mask(w);
        r.iter().enumerate().fold(0, |acc, (j, &i)| {
            let seg = (alpha >> ((r.len() - 1 - j) as u32 * w)) & sym;
            acc | (seg << ((n - 1 - i) as u32 * w))
        })
    }

    /// Overwritten positions outside the read set.
    fn overwrites(&self, g: &AffineAction) -> usize {
        let (n, w) = (self.p.n, self.p.w);
        let sym = low_mask(w);
        (0..n)
            .filter(|i| !self.ct.read.contains(i))
            .filter(|&i| (g.pass >> ((n - 1 - i) as u32 * w)) & sym == 0)
            .count()
    }

    fn read_bits(&self) -> u32 {
        self.ct.read.len() as u32 * self.p.w
    }

    fn exact_cells_ok(&self, key_bits: u32) -> Result<()> {
        let bits = key_bits + self.read_bits();
        if bits > MAX_EXACT_CELL_BITS {
            return Err(Error::Infeasible(format!(
                "exact mode needs 2^{bits} conditioning cells (limit 2^{MAX_EXACT_CELL_BITS}); use Monte Carlo mode"
            )));
        }
        Ok(())
    }
}

fn check_message(code: &NmCode, m: u64) -> Result<()> {
    if code.k() < 64 && m >> code.k() != 0 {
        return Err(invalid(format!("message {m:#x} has more than k = {} bits", code.k())));
    }
    Ok(())
}

fn full_randomness(code: &NmCode) -> u128 {
    1u128 << code.randomness_bits()
}

/// `Tamper_m^f`: the distribution of `Dec(f(Enc(m)))`.
pub fn tamper_experiment<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    m: u64,
    mode: &EvalMode,
) -> Result<OutcomeDistribution> {
    experiment(code, f, m, mode, false)
}

/// `StrongNM_m^f`: as [`tamper_experiment`], but unchanged codewords give `same*`.
pub fn strong_experiment<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    m: u64,
    mode: &EvalMode,
) -> Result<OutcomeDistribution> {
    experiment(code, f, m, mode, true)
}

fn experiment<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    m: u64,
    mode: &EvalMode,
    strong: bool,
) -> Result<OutcomeDistribution> {
    check_message(code, m)?;
    let s = setup(code, f)?;
    let unchanged = if strong { Outcome::SameStar } else { Outcome::Message(m) };
    if s.ct.writes_nothing() {
        let total = match mode {
            EvalMode::Exact => full_randomness(code),
            EvalMode::MonteCarlo { samples, .. } => *samples as u128,
        };
        return OutcomeDistribution::from_counts(code.k(), dist_mode(mode), [(unchanged, total)]);
    }
    match mode {
        EvalMode::Exact => exact_experiment(&s, m, strong),
        EvalMode::MonteCarlo { samples, seed } => {
            let p = s.p;
            let rdim = p.r_basis.len() as u32;
            let bits = p.amd_key_bits() + rdim;
            let cosets: Vec<u64> = (0..1u64 << p.amd_key_bits()).map(|key| p.coset(m, key as u16)).collect();
            let span = SpanTable::new(&p.r_basis);
            let eval = |idx: u64| {
                let x = cosets[(idx >> rdim) as usize] ^ span.get(idx & low_mask(rdim));
                let y = s.ct.apply(x);
                if strong && y == x {
                    Outcome::SameStar
                } else {
                    p.decode(y)
                }
            };
            monte_carlo(code.k(), bits, *samples, seed, eval)
        }
    }
}

fn dist_mode(mode: &EvalMode) -> DistMode {
    match mode {
        EvalMode::Exact => DistMode::Exact,
        EvalMode::MonteCarlo { .. } => DistMode::Empirical,
    }
}

fn exact_experiment(s: &Setup, m: u64, strong: bool) -> Result<OutcomeDistribution> {
    let p = s.p;
    s.exact_cells_ok(p.amd_key_bits())?;
    let solver = MaskedSolver::new(&p.r_basis, s.read_mask);
    let low = low_mask(s.nbits);
    let acc = (0..1u64 << p.amd_key_bits())
        .into_par_iter()
        .map(|key| {
            let mut acc = Acc::new(p.k);
            let base = p.coset(m, key as u16);
            for (alpha, g) in s.ct.table.iter().enumerate() {
                let target = s.spread(alpha as u64) ^ base;
                let Some(sec) = solver.solve(target) else { continue };
                // x = base ^ y, so dmap(g(x)) = dmap_P(y) ^ dmap((base & P) ^ c)
                let map = p.dmap.masked(g.pass);
                let constant = p.dmap.apply((base & g.pass) ^ g.constant);
                for_each_image(&map, constant, &sec, |z, c| acc.add(p.outcome_of(z), c));
                if strong {
                    let fixed = fixed_points(s, base, target, g, low);
                    acc.transfer(Outcome::Message(m), Outcome::SameStar, fixed);
                }
            }
            acc
        })
        .reduce(|| Acc::new(p.k), Acc::merge);
    acc.finish(DistMode::Exact)
}

/// Codewords `base ^ y` in the read cell `target` with `g(x) = x`.
fn fixed_points(s: &Setup, base: u64, target: u64, g: &AffineAction, low: u64) -> u128 {
    // g(x) ^ x = (x & !P) ^ c vanishes iff c & P = 0 and x & !P = c & !P
    let over = !g.pass & low;
    if g.constant & g.pass != 0 {
        return 0;
    }
    let both = s.read_mask & over;
    if (target ^ base ^ g.constant) & both != 0 {
        return 0;
    }
    let mask = s.read_mask | over;
    let t = (target & s.read_mask) | ((g.constant ^ base) & over);
    let solver = MaskedSolver::new(&s.p.r_basis, mask);
    solver.solve(t).map_or(0, |_| 1u128 << solver.kernel_dim())
}

fn monte_carlo(
    k: u32,
    bits: u32,
    samples: u64,
    seed: &SeedTree,
    eval: impl Fn(u64) -> Outcome + Sync,
) -> Result<OutcomeDistribution> {
    if samples == 0 {
        return Err(invalid("Monte Carlo mode needs at least one sample"));
    }
    // a full outcome table is cheaper once the samples outnumber the randomness values
    let table: Option<Vec<Outcome>> =
        (bits <= TABLE_BITS && samples >= 1 << bits).then(|| (0..1u64 << bits).into_par_iter().map(&eval).collect());
    let mask = low_mask(bits);
    let chunks = samples.div_ceil(CHUNK);
    let acc = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng: ChaCha8Rng = seed.index(c).rng();
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = Acc::new(k);
            for _ in 0..len {
                let idx = rng.next_u64() & mask;
                let o = match &table {
                    Some(t) => t[idx as usize],
                    None => eval(idx),
                };
                acc.add(o, 1);
            }
            acc
        })
        .reduce(|| Acc::new(k), Acc::merge);
    acc.finish(DistMode::Empirical)
}

/// Simulator case for one read value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SimCase {
    /// `same*` when the offset is harmless, `⊥` otherwise.
    Offset,
    /// Always `⊥`.
    Reject,
    /// Decode the tampered simulated codeword.
    Decode,
}

/// Case number (1 to 4) for construction 1 given `n^ow` outside the read set.
fn c1_case(n: usize, t: usize, read: usize, n_ow: usize) -> u8 {
    let unread = n - read;
    if n_ow + read <= t {
        1
    } else if 2 * n_ow <= unread {
        2
    } else if n_ow + t < n {
        3
    } else {
        4
    }
}

fn c2_case(n: usize, read: usize, n_ow: usize) -> u8 {
    if 2 * n_ow <= n - read {
        1
    } else {
        2
    }
}

fn sim_case(code: &NmCode, read: usize, n_ow: usize) -> (u8, SimCase) {
    let n = code.n();
    match code.inner() {
        InnerCode::Lecss(l) => {
            let c = c1_case(n, l.t(), read, n_ow);
            let s = match c {
                1 => SimCase::Offset,
                2 | 3 => SimCase::Reject,
                _ => SimCase::Decode,
            };
            (c, s)
        }
        InnerCode::Wiretap(_) => {
            let c = c2_case(n, read, n_ow);
            (c, if c == 1 { SimCase::Offset } else { SimCase::Decode })
        }
    }
}

/// `D_f` for construction 2, built from `Y = WTenc(0)` without access to any message.
pub fn simulator_c2<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    rule: SameStarRule,
    mode: &EvalMode,
) -> Result<OutcomeDistribution> {
    if code.construction() != Construction::Two {
        return Err(invalid("simulator_c2 needs a construction 2 code"));
    }
    simulate(code, f, rule, mode)
}

/// `D_f` for construction 1, averaging the per-read-value cases with uniform weights.
pub fn simulator_c1<A: Adversary + ?Sized>(code: &NmCode, f: &A, mode: &EvalMode) -> Result<OutcomeDistribution> {
    let InnerCode::Lecss(l) = code.inner() else {
        return Err(invalid("simulator_c1 needs a construction 1 code"));
    };
    if l.t() <= f.read_set().len() {
        return Err(Error::OutsideRegime(format!(
            "t' = {} <= |S_r| = {}: the read positions are not uniform",
            l.t(),
            f.read_set().len()
        )));
    }
    simulate(code, f, SameStarRule::ZeroLabel, mode)
}

/// Dispatches on the construction; construction 1 ignores `rule`.
pub fn simulator<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    rule: SameStarRule,
    mode: &EvalMode,
) -> Result<OutcomeDistribution> {
    match code.construction() {
        Construction::One => simulator_c1(code, f, mode),
        Construction::Two => simulator_c2(code, f, rule, mode),
    }
}

fn simulate<A: Adversary + ?Sized>(
    code: &NmCode,
    f: &A,
    rule: SameStarRule,
    mode: &EvalMode,
) -> Result<OutcomeDistribution> {
    let s = setup(code, f)?;
    let p = s.p;
    let rdim = p.r_basis.len() as u32;
    if s.ct.writes_nothing() {
        let total = match mode {
            EvalMode::Exact => 1u128 << rdim,
            EvalMode::MonteCarlo { samples, .. } => *samples as u128,
        };
        return OutcomeDistribution::from_counts(code.k(), dist_mode(mode), [(Outcome::SameStar, total)]);
    }
    let read = s.ct.read.len();
    let cases: Vec<SimCase> = s.ct.table.iter().map(|g| sim_case(code, read, s.overwrites(g)).1).collect();
    let low = low_mask(s.nbits);
    let id = BitLinearMap::from_fn(s.nbits as usize, s.nbits as usize, |x| x);
    match mode {
        EvalMode::Exact => {
            s.exact_cells_ok(0)?;
            let solver = MaskedSolver::new(&p.r_basis, s.read_mask);
            if code.construction() == Construction::One && solver.kernel_dim() as u32 + s.read_bits() != rdim {
                return Err(Error::OutsideRegime("read positions are not uniform under the inner code".into()));
            }
            let mut acc = Acc::new(p.k);
            for (alpha, g) in s.ct.table.iter().enumerate() {
                let Some(sec) = solver.solve(s.spread(alpha as u64)) else { continue };
                let size = 1u128 << sec.kernel.len();
                match cases[alpha] {
                    SimCase::Reject => acc.add(Outcome::Bot, size),
                    SimCase::Decode => {
                        let map = p.dmap.masked(g.pass);
                        for_each_image(&map, p.dmap.apply(g.constant), &sec, |z, c| acc.add(p.outcome_of(z), c));
                    }
                    SimCase::Offset => {
                        let d = g.difference(s.nbits);
                        let hits = match rule {
                            SameStarRule::ZeroLabel => {
                                image_count(&p.dmap.masked(d.pass), p.dmap.apply(d.constant), &sec, 0)
                            }
                            SameStarRule::ZeroOffset => image_count(&id.masked(d.pass & low), d.constant, &sec, 0),
                        };
                        acc.add(Outcome::SameStar, hits);
                        acc.add(Outcome::Bot, size - hits);
                    }
                }
            }
            acc.finish(DistMode::Exact)
        }
        EvalMode::MonteCarlo { samples, seed } => {
            let span = SpanTable::new(&p.r_basis);
            let eval = |rnd: u64| {
                let y = span.get(rnd);
                let alpha = s.ct.read_value(y) as usize;
                let g = &s.ct.table[alpha];
                match cases[alpha] {
                    SimCase::Reject => Outcome::Bot,
                    SimCase::Decode => p.decode(g.apply(y)),
                    SimCase::Offset => {
                        let d = g.difference(s.nbits).apply(y);
                        let harmless = match rule {
                            SameStarRule::ZeroLabel => p.dmap.apply(d) == 0,
                            SameStarRule::ZeroOffset => d == 0,
                        };
                        if harmless {
                            Outcome::SameStar
                        } else {
                            Outcome::Bot
                        }
                    }
                }
            };
            monte_carlo(code.k(), rdim, *samples, seed, eval)
        }
    }
}

/// Per read value breakdown of the construction 1 cases for message `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseRow {
    pub alpha: u64,
    pub case: u8,
    pub overwrites: usize,
    /// `Pr[X_{S_r} = alpha]`.
    pub mass: Exact,
    /// Cases 2 and 3: probability that the inner decoder accepts, given `alpha`.
    pub undetected: Option<Exact>,
}

/// For cases 2 and 3, the inner decoder sees `Δg^alpha(X)` and `g^alpha(X)` respectively;
/// `undetected` is the probability that it does not reject.
pub fn c1_case_analysis<A: Adversary + ?Sized>(code: &NmCode, f: &A, m: u64) -> Result<Vec<CaseRow>> {
    let InnerCode::Lecss(l) = code.inner() else {
        return Err(invalid("case analysis needs a construction 1 code"));
    };
    check_message(code, m)?;
    let s = setup(code, f)?;
    let p = s.p;
    s.exact_cells_ok(p.amd_key_bits())?;
    let check = p.check();
    let solver = MaskedSolver::new(&p.r_basis, s.read_mask);
    let total = full_randomness(code);
    let read = s.ct.read.len();
    let mut rows = Vec::with_capacity(s.ct.table.len());
    for (alpha, g) in s.ct.table.iter().enumerate() {
        let n_ow = s.overwrites(g);
        let case = c1_case(code.n(), l.t(), read, n_ow);
        let act = match case {
            2 => Some(g.difference(s.nbits)),
            3 => Some(*g),
            _ => None,
        };
        let (mut size, mut accepted) = (0u128, 0u128);
        for key in 0..1u64 << p.amd_key_bits() {
            let base = p.coset(m, key as u16);
            let Some(sec) = solver.solve(s.spread(alpha as u64) ^ base) else { continue };
            size += 1 << sec.kernel.len();
            if let Some(a) = act {
                let map = check.masked(a.pass);
                accepted += image_count(&map, check.apply((base & a.pass) ^ a.constant), &sec, 0);
            }
        }
        rows.push(CaseRow {
            alpha: alpha as u64,
            case,
            overwrites: n_ow,
            mass: exact(size, total),
            undetected: (act.is_some() && size > 0).then(|| exact(accepted, size)),
        });
    }
    Ok(rows)
}
