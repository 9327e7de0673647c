//! Leaky bitwise tampering functions `f_{S_r, S_w, g}` and the q-ary
//! add/overwrite family.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Elem, Field, FieldVector};
use crate::seed::SeedTree;
use crate::wiretap::project_word;

/// Largest read set for which `g` may be stored as an explicit table.
pub const MAX_TABLE_READ: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BitAction {
    Set0,
    Set1,
    Keep,
    Flip,
}

impl BitAction {
    pub const ALL: [BitAction; 4] = [BitAction::Set0, BitAction::Set1, BitAction::Keep, BitAction::Flip];

    pub fn apply(self, bit: u8) -> u8 {
        match self {
            BitAction::Set0 => 0,
            BitAction::Set1 => 1,
            BitAction::Keep => bit & 1,
            BitAction::Flip => (bit & 1) ^ 1,
        }
    }

    /// The action `b -> apply(b) XOR b`.
    pub fn difference(self) -> BitAction {
        match self {
            BitAction::Set0 => BitAction::Keep,
            BitAction::Set1 => BitAction::Flip,
            BitAction::Keep => BitAction::Set0,
            BitAction::Flip => BitAction::Set1,
        }
    }

    pub fn is_overwrite(self) -> bool {
        matches!(self, BitAction::Set0 | BitAction::Set1)
    }

    pub fn symbol(self) -> char {
        match self {
            BitAction::Set0 => '0',
            BitAction::Set1 => '1',
            BitAction::Keep => 'k',
            BitAction::Flip => 'f',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        Some(match c {
            '0' => BitAction::Set0,
            '1' => BitAction::Set1,
            'k' => BitAction::Keep,
            'f' => BitAction::Flip,
            _ => return None,
        })
    }
}

/// `x -> (x & pass) ^ constant` on packed words. Each symbol of `pass` is all ones
/// (keep/add) or all zeros (overwrite).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AffineAction {
    pub pass: u64,
    pub constant: u64,
}

impl AffineAction {
    pub fn identity(n_bits: u32) -> Self {
        AffineAction { pass: low_mask(n_bits), constant: 0 }
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        (x & self.pass) ^ self.constant
    }

    /// The offset map `x -> apply(x) - x`, again affine.
    pub fn difference(&self, n_bits: u32) -> Self {
        AffineAction { pass: !self.pass & low_mask(n_bits), constant: self.constant }
    }

    /// Positions (symbols of width `w`) that are overwritten.
    pub fn overwrites(&self, n: usize, w: u32) -> usize {
        let mask = (1u64 << w) - 1;
        (0..n).filter(|&i| (self.pass >> (i as u32 * w)) & mask == 0).count()
    }
}

pub(crate) fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Lazily evaluated `g` for read sets too large for a table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Same action vector for every read value.
    Constant(Vec<BitAction>),
    /// Write position `j` is set to read bit `j mod |S_r|`.
    CopyRead,
    /// `high` when the read value has weight at least `at`, else `low`.
    Threshold { at: usize, low: Vec<BitAction>, high: Vec<BitAction> },
    /// Pseudo-random action per `(alpha, j)` from a keyed mixer.
    Hashed { key: u64 },
}

impl Rule {
    fn actions(&self, alpha: u64, read_len: usize, write_len: usize) -> Vec<BitAction> {
        match self {
            Rule::Constant(v) => v.clone(),
            Rule::CopyRead => (0..write_len)
                .map(|j| {
                    if read_len == 0 {
                        BitAction::Keep
                    } else if (alpha >> (read_len - 1 - j % read_len)) & 1 == 1 {
                        BitAction::Set1
                    } else {
                        BitAction::Set0
                    }
                })
                .collect(),
            Rule::Threshold { at, low, high } => {
                if alpha.count_ones() as usize >= *at {
                    high.clone()
                } else {
                    low.clone()
                }
            }
            Rule::Hashed { key } => (0..write_len)
                .map(|j| {
                    let h = splitmix(key ^ splitmix(alpha ^ ((j as u64 / 32) << 58)));
                    BitAction::ALL[((h >> (2 * (j % 32))) & 3) as usize]
                })
                .collect(),
        }
    }

    fn describe(&self) -> String {
        let vec = |v: &[BitAction]| v.iter().map(|a| a.symbol()).collect::<String>();
        match self {
            Rule::Constant(v) => format!("constant {}", vec(v)),
            Rule::CopyRead => "copy-read".into(),
            Rule::Threshold { at, low, high } => format!("threshold {at} {} {}", vec(low), vec(high)),
            Rule::Hashed { key } => format!("hashed {key:016x}"),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GTable {
    /// Entry `alpha` is the action vector for read value `alpha`.
    Table(Vec<Vec<BitAction>>),
    Rule(Rule),
}

/// `f_{S_r, S_w, g}`: positions in `S_w` are rewritten by `g(x_{S_r})`, the rest copied.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TamperFunction {
    n: usize,
    read: Vec<usize>,
    write: Vec<usize>,
    g: GTable,
}

impl TamperFunction {
    pub fn new(n: usize, read: Vec<usize>, write: Vec<usize>, g: GTable) -> Result<Self> {
        let read = sorted_set(read, n)?;
        let write = sorted_set(write, n)?;
        match &g {
            GTable::Table(t) => {
                if read.len() > MAX_TABLE_READ {
                    return Err(invalid(format!("tables need |S_r| <= {MAX_TABLE_READ}; use a rule")));
                }
                check_len(1usize << read.len(), t.len())?;
                for row in t {
                    check_len(write.len(), row.len())?;
                }
            }
            GTable::Rule(Rule::Constant(v)) => check_len(write.len(), v.len())?,
            GTable::Rule(Rule::Threshold { low, high, .. }) => {
                check_len(write.len(), low.len())?;
                check_len(write.len(), high.len())?;
            }
            GTable::Rule(_) => {}
        }
        Ok(TamperFunction { n, read, write, g })
    }

    pub fn identity(n: usize) -> Self {
        TamperFunction { n, read: vec![], write: vec![], g: GTable::Table(vec![vec![]]) }
    }

    /// Every position rewritten by the same action.
    pub fn constant(n: usize, action: BitAction) -> Self {
        TamperFunction { n, read: vec![], write: (0..n).collect(), g: GTable::Table(vec![vec![action; n]]) }
    }

    /// Overwrites every position with the bits of `v` (first position most significant).
    pub fn overwrite_all(n: usize, v: u64) -> Self {
        let acts = (0..n)
            .map(|i| if (v >> (n - 1 - i)) & 1 == 1 { BitAction::Set1 } else { BitAction::Set0 })
            .collect();
        TamperFunction { n, read: vec![], write: (0..n).collect(), g: GTable::Table(vec![acts]) }
    }

    /// Flips the positions where `delta` has a one.
    pub fn xor_offset(n: usize, delta: u64) -> Self {
        let write: Vec<usize> = (0..n).filter(|&i| (delta >> (n - 1 - i)) & 1 == 1).collect();
        let k = write.len();
        TamperFunction { n, read: vec![], write, g: GTable::Table(vec![vec![BitAction::Flip; k]]) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn read_set(&self) -> &[usize] {
        &self.read
    }

    pub fn write_set(&self) -> &[usize] {
        &self.write
    }

    pub fn g(&self) -> &GTable {
        &self.g
    }

    pub fn actions(&self, alpha: u64) -> Vec<BitAction> {
        match &self.g {
            GTable::Table(t) => t[alpha as usize].clone(),
            GTable::Rule(r) => r.actions(alpha, self.read.len(), self.write.len()),
        }
    }

    /// `Δg^alpha`: the action vector producing `g^alpha(x) XOR x`.
    pub fn difference_function(&self, alpha: u64) -> Vec<BitAction> {
        self.actions(alpha).into_iter().map(BitAction::difference).collect()
    }

    /// Packed form of `g^alpha` on `n`-bit words, first position most significant.
    pub fn affine(&self, alpha: u64) -> AffineAction {
        let n = self.n;
        let mut a = AffineAction::identity(n as u32);
        for (&i, act) in self.write.iter().zip(self.actions(alpha)) {
            let bit = 1u64 << (n - 1 - i);
            match act {
                BitAction::Set0 => a.pass &= !bit,
                BitAction::Set1 => {
                    a.pass &= !bit;
                    a.constant |= bit;
                }
                BitAction::Keep => {}
                BitAction::Flip => a.constant |= bit,
            }
        }
        a
    }

    pub fn compile(&self) -> Result<CompiledTamper> {
        if self.n > 64 {
            return Err(invalid("packed tampering needs n <= 64"));
        }
        if self.read.len() > MAX_TABLE_READ {
            return Err(Error::BudgetExceeded(format!(
                "|S_r| = {} exceeds the tabulation limit {MAX_TABLE_READ}",
                self.read.len()
            )));
        }
        let table = (0..1u64 << self.read.len()).map(|a| self.affine(a)).collect();
        Ok(CompiledTamper { n: self.n, w: 1, read: self.read.clone(), table })
    }

    /// Text form: a header with `n`, `S_r`, `S_w`, then one `alpha actions` line per
    /// read value, or a single `rule` line for rule-based functions.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("tamper n={} read={} write={}\n", self.n, join(&self.read), join(&self.write));
        match &self.g {
            GTable::Table(t) => {
                for (alpha, row) in t.iter().enumerate() {
                    let acts: String = row.iter().map(|a| a.symbol()).collect();
                    let _ = writeln!(s, "{:0w$b} {acts}", alpha, w = self.read.len());
                }
            }
            GTable::Rule(r) => {
                let _ = writeln!(s, "rule {}", r.describe());
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let perr = |line, msg: &str| Error::Parse { line, msg: msg.into() };
        let rest = header.strip_prefix("tamper ").ok_or_else(|| perr(hl, "expected 'tamper' header"))?;
        let (mut n, mut read, mut write) = (None, vec![], vec![]);
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| perr(hl, "expected key=value"))?;
            let list = || -> Result<Vec<usize>> {
                v.split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| perr(hl, "bad index")))
                    .collect()
            };
            match k {
                "n" => n = Some(v.parse().map_err(|_| perr(hl, "bad n"))?),
                "read" => read = list()?,
                "write" => write = list()?,
                _ => return Err(perr(hl, "unknown header key")),
            }
        }
        let n = n.ok_or_else(|| perr(hl, "missing n"))?;
        let mut table = Vec::new();
        for (ln, line) in lines {
            if line.starts_with("rule ") {
                return Err(perr(ln, "rule-based functions are not parsed back"));
            }
            let (alpha, acts) = line.split_once(' ').unwrap_or((line, ""));
            let idx = if alpha.is_empty() { 0 } else { usize::from_str_radix(alpha, 2).map_err(|_| perr(ln, "bad read value"))? };
            if idx != table.len() {
                return Err(perr(ln, "read values must be listed in order"));
            }
            let row = acts
                .chars()
                .map(|c| BitAction::from_symbol(c).ok_or_else(|| perr(ln, "bad action symbol")))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        Self::new(n, read, write, GTable::Table(table))
    }

    /// Hex prefix of the SHA-256 of the text form.
    pub fn digest(&self) -> String {
        digest_hex(&self.to_text())
    }
}

impl fmt::Display for TamperFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub(crate) fn digest_hex(text: &str) -> String {
    let h = Sha256::digest(text.as_bytes());
    h.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn sorted_set(v: Vec<usize>, n: usize) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = v.iter().copied().collect();
    if set.len() != v.len() {
        return Err(invalid("index set has duplicates"));
    }
    if let Some(&bad) = set.iter().find(|&&i| i >= n) {
        return Err(invalid(format!("index {bad} out of range for n = {n}")));
    }
    Ok(set.into_iter().collect())
}

pub fn tamper_apply(f: &TamperFunction, x: &FieldVector) -> Result<FieldVector> {
    check_len(f.n, x.len())?;
    if !x.field().is_binary() {
        return Err(Error::FieldMismatch);
    }
    let alpha = x.project(&f.read)?.elems().iter().fold(0u64, |a, &b| (a << 1) | b as u64);
    let mut out = x.elems().to_vec();
    for (&i, act) in f.write.iter().zip(f.actions(alpha)) {
        out[i] = act.apply(out[i] as u8) as Elem;
    }
    FieldVector::new(x.field(), out)
}

pub fn difference_function(f: &TamperFunction, alpha: u64) -> Vec<BitAction> {
    f.difference_function(alpha)
}

/// A tampering function tabulated as one affine action per read value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompiledTamper {
    pub n: usize,
    /// Symbol width in bits.
    pub w: u32,
    pub read: Vec<usize>,
    pub table: Vec<AffineAction>,
}

impl CompiledTamper {
    #[inline]
    pub fn read_value(&self, x: u64) -> u64 {
        project_word(x, self.n, self.w, &self.read)
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        self.table[self.read_value(x) as usize].apply(x)
    }

    pub fn writes_nothing(&self) -> bool {
        let id = AffineAction::identity(self.n as u32 * self.w);
        self.table.iter().all(|a| *a == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    Uniform,
    Structured,
}

impl SampleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SampleMode::Uniform => "uniform",
            SampleMode::Structured => "structured",
        }
    }
}

/// `floor(n * rho)` with a small tolerance so that `n * (k/n)` lands on `k`.
pub fn budget(n: usize, rho: f64) -> usize {
    ((n as f64) * rho + 1e-9).floor().max(0.0) as usize
}

/// Draws a member of the family with `|S_r| = floor(n rho_r)` and `|S_w| = floor(n rho_w)`.
///
/// Uniform mode fills the table with independent uniform actions (a keyed rule beyond
/// [`MAX_TABLE_READ`]). Structured mode picks one of: all-Set0, all-Flip, copy-read,
/// threshold, or overwrite with a random constant.
pub fn tamper_sample(n: usize, rho_r: f64, rho_w: f64, mode: SampleMode, seed: &SeedTree) -> Result<TamperFunction> {
    if !(0.0..=1.0).contains(&rho_r) || !(0.0..=1.0).contains(&rho_w) {
        return Err(invalid("rho_r and rho_w must lie in [0, 1]"));
    }
    let mut rng = seed.rng();
    let (nr, nw) = (budget(n, rho_r), budget(n, rho_w));
    let mut read = sample(&mut rng, n, nr).into_vec();
    let mut write = sample(&mut rng, n, nw).into_vec();
    read.sort_unstable();
    write.sort_unstable();
    let rand_vec = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<BitAction> {
        (0..nw).map(|_| BitAction::ALL[rng.gen_range(0..4)]).collect()
    };
    let g = match mode {
        SampleMode::Uniform if nr <= MAX_TABLE_READ => {
            GTable::Table((0..1u64 << nr).map(|_| rand_vec(&mut rng)).collect())
        }
        SampleMode::Uniform => GTable::Rule(Rule::Hashed { key: rng.gen() }),
        SampleMode::Structured => match rng.gen_range(0..5) {
            0 => GTable::Rule(Rule::Constant(vec![BitAction::Set0; nw])),
            1 => GTable::Rule(Rule::Constant(vec![BitAction::Flip; nw])),
            2 => GTable::Rule(Rule::CopyRead),
            3 => GTable::Rule(Rule::Threshold {
                at: nr.div_ceil(2),
                low: vec![BitAction::Keep; nw],
                high: vec![BitAction::Flip; nw],
            }),
            _ => GTable::Rule(Rule::Constant(
                (0..nw).map(|_| if rng.gen() { BitAction::Set1 } else { BitAction::Set0 }).collect(),
            )),
        },
    };
    TamperFunction::new(n, read, write, g)
}

/// The attack turning a distinguisher `D` on `x_{S_r}` into a same*-probability gap:
/// keep the first bit when the read value is in `D`, flip it otherwise.
pub fn privacy_breaker(n: usize, distinguisher: &BTreeSet<u64>, read: Vec<usize>) -> Result<TamperFunction> {
    if n == 0 {
        return Err(invalid("privacy breaker needs n >= 1"));
    }
    let size = 1u64 << read.len();
    if let Some(&bad) = distinguisher.iter().find(|&&a| a >= size) {
        return Err(invalid(format!("read value {bad} outside the {size}-element read space")));
    }
    let table = (0..size)
        .map(|a| vec![if distinguisher.contains(&a) { BitAction::Keep } else { BitAction::Flip }])
        .collect();
    TamperFunction::new(n, read, vec![0], GTable::Table(table))
}

/// `log2` of `C(n, a) C(n, b) (4^b)^(2^a)` with `a = n rho_r`, `b = n rho_w`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySize {
    pub n: usize,
    pub read: usize,
    pub write: usize,
    pub binom_read: BigUint,
    pub binom_write: BigUint,
    /// `2^a * 2b`, the exponent contributed by the tables.
    pub table_bits: BigUint,
    pub log2: f64,
}

impl FamilySize {
    pub fn log2_log2(&self) -> f64 {
        self.log2.log2()
    }
}

pub fn family_size_bound(n: usize, rho_r: f64, rho_w: f64) -> FamilySize {
    let (a, b) = (budget(n, rho_r), budget(n, rho_w));
    let binom_read = binomial_big(n, a);
    let binom_write = binomial_big(n, b);
    let table_bits = (BigUint::one() << a) * BigUint::from(2 * b);
    let log2 = log2_big(&binom_read) + log2_big(&binom_write) + table_bits.to_f64().expect("finite");
    FamilySize { n, read: a, write: b, binom_read, binom_write, table_bits, log2 }
}

fn binomial_big(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// `log2(x)` with `log2(0)` treated as a zero contribution.
fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().expect("fits").log2();
    }
    let shift = bits - 52;
    let top = (x >> shift).to_f64().expect("52 bits");
    top.log2() + shift as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QaryAction {
    Add(Elem),
    Overwrite(Elem),
}

impl QaryAction {
    pub fn apply(self, f: &Field, x: Elem) -> Elem {
        match self {
            QaryAction::Add(d) => f.add(x, d),
            QaryAction::Overwrite(c) => c,
        }
    }

    fn describe(self) -> String {
        match self {
            QaryAction::Add(d) => format!("+{d:x}"),
            QaryAction::Overwrite(c) => format!("={c:x}"),
        }
    }
}

/// `f_{S_r, [n], g}` over GF(q): every position gets `g(x_{S_r})_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AoTamperFunction {
    field: Field,
    n: usize,
    read: Vec<usize>,
    table: Vec<Vec<QaryAction>>,
}

impl AoTamperFunction {
    /// `table[alpha]` is the action vector for read value `alpha`, the read symbols packed
    /// most significant first.
    pub fn new(field: &Field, n: usize, read: Vec<usize>, table: Vec<Vec<QaryAction>>) -> Result<Self> {
        let read = sorted_set(read, n)?;
        let bits = read.len() as u32 * field.degree();
        if bits > MAX_TABLE_READ as u32 {
            return Err(invalid("read space too large to tabulate"));
        }
        check_len(1usize << bits, table.len())?;
        for row in &table {
            check_len(n, row.len())?;
            for a in row {
                let (QaryAction::Add(e) | QaryAction::Overwrite(e)) = *a;
                if !field.contains(e) {
                    return Err(invalid("action constant outside the field"));
                }
            }
        }
        Ok(AoTamperFunction { field: field.clone(), n, read, table })
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        AoTamperFunction { field: field.clone(), n, read: vec![], table: vec![vec![QaryAction::Add(0); n]] }
    }

    pub fn constant(field: &Field, n: usize, actions: Vec<QaryAction>) -> Result<Self> {
        Self::new(field, n, vec![], vec![actions])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn read_set(&self) -> &[usize] {
        &self.read
    }

    pub fn actions(&self, alpha: u64) -> &[QaryAction] {
        &self.table[alpha as usize]
    }

    pub fn affine(&self, alpha: u64) -> AffineAction {
        let w = self.field.degree();
        let mut a = AffineAction::identity(self.n as u32 * w);
        for (i, act) in self.actions(alpha).iter().enumerate() {
            let shift = (self.n - 1 - i) as u32 * w;
            let mask = (self.field.mask() as u64) << shift;
            match *act {
                QaryAction::Add(d) => a.constant |= (d as u64) << shift,
                QaryAction::Overwrite(c) => {
                    a.pass &= !mask;
                    a.constant |= (c as u64) << shift;
                }
            }
        }
        a
    }

    pub fn compile(&self) -> Result<CompiledTamper> {
        let w = self.field.degree();
        if self.n as u32 * w > 64 {
            return Err(invalid("packed tampering needs n * w <= 64"));
        }
        let table = (0..self.table.len() as u64).map(|a| self.affine(a)).collect();
        Ok(CompiledTamper { n: self.n, w, read: self.read.clone(), table })
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("ao-tamper q={} n={} read={}\n", self.field.order(), self.n, join(&self.read));
        for (alpha, row) in self.table.iter().enumerate() {
            let acts: Vec<String> = row.iter().map(|a| a.describe()).collect();
            let _ = writeln!(s, "{alpha:x} {}", acts.join(" "));
        }
        s
    }

    pub fn digest(&self) -> String {
        digest_hex(&self.to_text())
    }
}

pub fn ao_apply(f: &AoTamperFunction, x: &FieldVector) -> Result<FieldVector> {
    check_len(f.n, x.len())?;
    if x.field() != &f.field {
        return Err(Error::FieldMismatch);
    }
    let w = f.field.degree();
    let alpha = x.project(&f.read)?.elems().iter().fold(0u64, |a, &b| (a << w) | b as u64);
    let out = x.elems().iter().zip(f.actions(alpha)).map(|(&xi, act)| act.apply(&f.field, xi)).collect();
    FieldVector::new(&f.field, out)
}

/// Draws an F_AO member reading `t` uniformly chosen positions. Uniform mode picks each
/// action as Add or Overwrite with a uniform constant. Structured mode picks one of:
/// all-Overwrite with a constant vector, all-Add with a constant offset, or read-dependent
/// overwrite of the unread positions.
pub fn ao_sample(field: &Field, n: usize, t: usize, mode: SampleMode, seed: &SeedTree) -> Result<AoTamperFunction> {
    if t > n {
        return Err(invalid("read budget exceeds n"));
    }
    let mut rng = seed.rng();
    let q = field.order();
    let mut read = sample(&mut rng, n, t).into_vec();
    read.sort_unstable();
    let entries = 1usize << (t as u32 * field.degree());
    let rand_action = |rng: &mut rand_chacha::ChaCha8Rng| {
        let c = rng.gen_range(0..q) as Elem;
        if rng.gen() {
            QaryAction::Add(c)
        } else {
            QaryAction::Overwrite(c)
        }
    };
    let table = match mode {
        SampleMode::Uniform => (0..entries).map(|_| (0..n).map(|_| rand_action(&mut rng)).collect()).collect(),
        SampleMode::Structured => {
            let kind = rng.gen_range(0..3);
            let base: Vec<Elem> = (0..n).map(|_| rng.gen_range(0..q) as Elem).collect();
            (0..entries)
                .map(|alpha| {
                    (0..n)
                        .map(|i| match kind {
                            0 => QaryAction::Overwrite(base[i]),
                            1 => QaryAction::Add(base[i]),
                            _ if read.contains(&i) => QaryAction::Add(0),
                            _ => QaryAction::Overwrite(field.add(base[i], (alpha as Elem) & field.mask())),
                        })
                        .collect()
                })
                .collect()
        }
    };
    AoTamperFunction::new(field, n, read, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn bits(s: &str) -> FieldVector {
        FieldVector::parse_bits(s).unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = TamperFunction::new(4, vec![], vec![0, 1, 2, 3], GTable::Table(vec![vec![BitAction::Keep; 4]])).unwrap();
        assert_eq!(tamper_apply(&id, &bits("1011")).unwrap(), bits("1011"));

        let mut table = vec![vec![BitAction::Keep]; 4];
        table[0] = vec![BitAction::Set1];
        let f = TamperFunction::new(7, vec![0, 1], vec![2], GTable::Table(table)).unwrap();
        assert_eq!(tamper_apply(&f, &bits("0000000")).unwrap(), bits("0010000"));
        assert_eq!(tamper_apply(&f, &bits("0100000")).unwrap(), bits("0100000"));
    }

    #[test]
    fn read_dependent_set_equals_flip() {
        let g = GTable::Table(vec![vec![BitAction::Set1], vec![BitAction::Set0]]);
        let a = TamperFunction::new(3, vec![1], vec![1], g).unwrap();
        let b = TamperFunction::new(3, vec![], vec![1], GTable::Table(vec![vec![BitAction::Flip]])).unwrap();
        for x in 0..8 {
            let v = FieldVector::from_word(&Field::gf2(), x, 3);
            assert_eq!(tamper_apply(&a, &v).unwrap(), tamper_apply(&b, &v).unwrap());
        }
    }

    #[test]
    fn difference_examples() {
        assert_eq!(BitAction::Flip.difference(), BitAction::Set1);
        assert_eq!(BitAction::Keep.difference(), BitAction::Set0);
        for a in BitAction::ALL {
            assert_eq!(a.difference().difference(), a);
            for b in 0..2u8 {
                assert_eq!(a.difference().apply(b), a.apply(b) ^ b);
            }
        }
    }

    #[test]
    fn sampling_rules() {
        let s = SeedTree::new(3);
        let f = tamper_sample(10, 0.0, 0.5, SampleMode::Uniform, &s).unwrap();
        assert!(f.read_set().is_empty());
        assert!(matches!(f.g(), GTable::Table(t) if t.len() == 1));
        let id = tamper_sample(10, 0.3, 0.0, SampleMode::Uniform, &s).unwrap();
        for x in 0..1024 {
            let v = FieldVector::from_word(&Field::gf2(), x, 10);
            assert_eq!(tamper_apply(&id, &v).unwrap(), v);
        }
        assert_eq!(tamper_sample(31, 5.0 / 31.0, 10.0 / 31.0, SampleMode::Uniform, &s).unwrap().read_set().len(), 5);
        for mode in [SampleMode::Uniform, SampleMode::Structured] {
            let a = tamper_sample(12, 0.25, 0.5, mode, &s.index(9)).unwrap();
            let b = tamper_sample(12, 0.25, 0.5, mode, &s.index(9)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_text(), b.to_text());
        }
        let big = tamper_sample(40, 0.6, 0.5, SampleMode::Uniform, &s).unwrap();
        assert!(matches!(big.g(), GTable::Rule(Rule::Hashed { .. })));
        assert!(big.compile().is_err());
    }

    #[test]
    fn ao_examples() {
        let f = Field::new(4).unwrap();
        let x = FieldVector::new(&f, vec![1, 2, 3, 4, 5]).unwrap();
        assert_eq!(ao_apply(&AoTamperFunction::identity(&f, 5), &x).unwrap(), x);
        let ow = AoTamperFunction::constant(&f, 5, vec![QaryAction::Overwrite(7); 5]).unwrap();
        assert_eq!(ao_apply(&ow, &x).unwrap().elems(), &[7; 5]);
        let s = SeedTree::new(5);
        let g = ao_sample(&f, 5, 1, SampleMode::Uniform, &s).unwrap();
        let c = g.compile().unwrap();
        for w in [0u64, 0x12345, 0xfedcb, 0x0f0f0] {
            let v = FieldVector::from_word(&f, w, 5);
            assert_eq!(ao_apply(&g, &v).unwrap().to_word(), c.apply(w));
        }
    }

    #[test]
    fn ao_over_gf2_is_bitwise() {
        let f2 = Field::gf2();
        for n in 1..=8usize {
            for code in 0..4u64.pow(n as u32).min(256) {
                let acts: Vec<QaryAction> = (0..n)
                    .map(|i| match (code >> (2 * i)) & 3 {
                        0 => QaryAction::Overwrite(0),
                        1 => QaryAction::Overwrite(1),
                        2 => QaryAction::Add(0),
                        _ => QaryAction::Add(1),
                    })
                    .collect();
                let bits_acts: Vec<BitAction> = acts
                    .iter()
                    .map(|a| match a {
                        QaryAction::Overwrite(0) => BitAction::Set0,
                        QaryAction::Overwrite(_) => BitAction::Set1,
                        QaryAction::Add(0) => BitAction::Keep,
                        QaryAction::Add(_) => BitAction::Flip,
                    })
                    .collect();
                let ao = AoTamperFunction::constant(&f2, n, acts).unwrap();
                let bt = TamperFunction::new(n, vec![], (0..n).collect(), GTable::Table(vec![bits_acts])).unwrap();
                for x in 0..1u64 << n {
                    let v = FieldVector::from_word(&f2, x, n);
                    assert_eq!(ao_apply(&ao, &v).unwrap(), tamper_apply(&bt, &v).unwrap());
                }
            }
        }
    }

    #[test]
    fn family_size_values() {
        for n in [4, 10, 33] {
            assert_eq!(family_size_bound(n, 0.0, 1.0).log2, 2.0 * n as f64);
        }
        let fs = family_size_bound(10, 0.2, 1.0);
        assert_eq!(fs.binom_read, BigUint::from(45u32));
        assert_eq!(fs.table_bits, BigUint::from(80u32));
        assert!((fs.log2 - (45f64.log2() + 80.0)).abs() < 1e-12);
    }

    #[test]
    fn breaker_shapes() {
        let all: BTreeSet<u64> = (0..4).collect();
        let id = privacy_breaker(5, &all, vec![1, 2]).unwrap();
        let none = privacy_breaker(5, &BTreeSet::new(), vec![1, 2]).unwrap();
        for x in 0..32 {
            let v = FieldVector::from_word(&Field::gf2(), x, 5);
            assert_eq!(tamper_apply(&id, &v).unwrap(), v);
            assert_eq!(tamper_apply(&none, &v).unwrap().to_word(), x ^ 0b10000);
        }
        assert!(privacy_breaker(5, &[4u64].into(), vec![1, 2]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = tamper_sample(9, 2.0 / 9.0, 4.0 / 9.0, SampleMode::Uniform, &SeedTree::new(1)).unwrap();
        let t = f.to_text();
        assert!(t.starts_with("tamper n=9 read="));
        assert_eq!(t.lines().count(), 1 + 4);
        assert_eq!(TamperFunction::from_text(&t).unwrap(), f);
        assert_eq!(f.digest().len(), 16);
    }

    fn small_function() -> impl Strategy<Value = TamperFunction> {
        (1usize..=12, any::<u64>()).prop_map(|(n, s)| {
            let seed = SeedTree::new(s);
            let mut rng = seed.rng();
            let rr = rng.gen_range(0..=n.min(4)) as f64 / n as f64;
            let rw = rng.gen_range(0..=n) as f64 / n as f64;
            let mode = if rng.gen() { SampleMode::Uniform } else { SampleMode::Structured };
            tamper_sample(n, rr, rw, mode, &seed.child("f")).unwrap()
        })
    }

    proptest! {
        #[test]
        fn untouched_outside_write_set(f in small_function()) {
            let n = f.n();
            let c = f.compile().unwrap();
            for x in 0..1u64 << n {
                let v = FieldVector::from_word(&Field::gf2(), x, n);
                let y = tamper_apply(&f, &v).unwrap();
                prop_assert_eq!(y.to_word(), c.apply(x));
                for i in 0..n {
                    if !f.write_set().contains(&i) {
                        prop_assert_eq!(y.get(i), v.get(i));
                    }
                }
                // g^alpha(x) = x XOR Δg^alpha(x)
                let alpha = c.read_value(x);
                let diff = c.table[alpha as usize].difference(n as u32);
                prop_assert_eq!(c.apply(x), x ^ diff.apply(x));
                let acts = f.difference_function(alpha);
                for (&i, a) in f.write_set().iter().zip(acts) {
                    prop_assert_eq!(a.apply(v.get(i) as u8) as u16, y.get(i) ^ v.get(i));
                }
            }
        }
    }
}
