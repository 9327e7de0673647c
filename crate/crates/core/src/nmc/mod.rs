//! Non-malleable codes for bit-wise independent tampering with a read set.
//!
//! Both constructions put an AMD code in front of a linear inner code: a LECSS
//! (construction 1) or a coset wiretap II code (construction 2). The inner code may
//! live over GF(2^w); the AMD codeword is then read as `ℓ` packed symbols.

mod adversary;
mod affine;
mod audit;
mod bounds;
mod engine;
mod outcome;
mod reference;
mod regime;

use serde::Serialize;

use crate::amd::AmdCode;
use crate::codes::{binary_basis, hamming_code, reed_muller_code, BitLinearMap};
use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Elem, Field, FieldVector};
use crate::lecss::{lecss_decode, lecss_encode, LecssCode, PackedLecss};
use crate::prob::{exact, Exact};
use crate::wiretap::{combine, wt_build, wt_decode, wt_encode, CosetWtCode};

pub use adversary::Adversary;
pub use audit::{
    audit_adversaries, nm_security_audit, AdversaryRow, AuditMode, AuditOptions, AuditReport, CodeParams,
};
pub use bounds::{bounds_calculator, c1_case_bound, BoundsAnswer, BoundsQuery};
pub use engine::{
    c1_case_analysis, simulator, simulator_c1, simulator_c2, strong_experiment, tamper_experiment, CaseRow,
    EvalMode, SameStarRule,
};
pub use outcome::{patch, statistical_distance, DistMode, Outcome, OutcomeDistribution};
pub use reference::{
    reference_simulator, reference_strong_experiment, reference_tamper_experiment, CodingScheme,
};
pub use regime::{ClaimedBound, Regime, RegimeCheck, RegimeVerdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Construction {
    /// LECSS inner code.
    One,
    /// Coset wiretap II inner code.
    Two,
}

impl Construction {
    pub fn number(self) -> u8 {
        match self {
            Construction::One => 1,
            Construction::Two => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub enum InnerCode {
    Lecss(LecssCode),
    Wiretap(CosetWtCode),
}

/// `Enc(m) = Inner(AMDenc(m))`, together with the adversary budgets it is audited against.
#[derive(Clone, Debug)]
pub struct NmCode {
    label: String,
    inner: InnerCode,
    amd: AmdCode,
    read_budget: usize,
    write_budget: usize,
    packed: PackedNm,
}

impl NmCode {
    pub fn construction1(lecss: LecssCode, amd: AmdCode, read_budget: usize, write_budget: usize) -> Result<Self> {
        let label = format!("C1[{} | AMD k={} u={}]", lecss.outer().label(), amd.k(), amd.u());
        Self::assemble(label, InnerCode::Lecss(lecss), amd, read_budget, write_budget)
    }

    pub fn construction2(wt: CosetWtCode, amd: AmdCode, read_budget: usize, write_budget: usize) -> Result<Self> {
        let label = format!("C2[{} | AMD k={} u={}]", wt.code().label(), amd.k(), amd.u());
        Self::assemble(label, InnerCode::Wiretap(wt), amd, read_budget, write_budget)
    }

    fn assemble(label: String, inner: InnerCode, amd: AmdCode, read_budget: usize, write_budget: usize) -> Result<Self> {
        let (n, msg_bits) = match &inner {
            InnerCode::Lecss(l) => (l.n(), l.ell()),
            InnerCode::Wiretap(w) => (w.n(), w.ell() * w.field().degree() as usize),
        };
        if amd.n() as usize != msg_bits {
            return Err(invalid(format!(
                "AMD codeword length {} differs from the inner message length {msg_bits} bits",
                amd.n()
            )));
        }
        if read_budget > n || write_budget > n {
            return Err(invalid(format!("budgets ({read_budget}, {write_budget}) exceed n = {n}")));
        }
        let packed = PackedNm::new(&inner, &amd)?;
        Ok(NmCode { label, inner, amd, read_budget, write_budget, packed })
    }

    /// Same code audited against different budgets.
    pub fn with_budgets(&self, read_budget: usize, write_budget: usize) -> Result<Self> {
        Self::assemble(self.label.clone(), self.inner.clone(), self.amd.clone(), read_budget, write_budget)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn construction(&self) -> Construction {
        match self.inner {
            InnerCode::Lecss(_) => Construction::One,
            InnerCode::Wiretap(_) => Construction::Two,
        }
    }

    pub fn inner(&self) -> &InnerCode {
        &self.inner
    }

    pub fn amd(&self) -> &AmdCode {
        &self.amd
    }

    pub fn field(&self) -> &Field {
        match &self.inner {
            InnerCode::Lecss(l) => l.outer().field(),
            InnerCode::Wiretap(w) => w.field(),
        }
    }

    /// Codeword length in symbols.
    pub fn n(&self) -> usize {
        self.packed.n
    }

    /// Message length in bits.
    pub fn k(&self) -> u32 {
        self.amd.k()
    }

    pub fn read_budget(&self) -> usize {
        self.read_budget
    }

    pub fn write_budget(&self) -> usize {
        self.write_budget
    }

    /// Number of inner-code randomness symbols.
    pub fn inner_randomness(&self) -> usize {
        match &self.inner {
            InnerCode::Lecss(l) => l.r(),
            InnerCode::Wiretap(w) => w.r(),
        }
    }

    /// Bits of encoder randomness: AMD key plus inner randomness.
    pub fn randomness_bits(&self) -> u32 {
        self.amd.u() + self.packed.r_basis.len() as u32
    }

    /// The closed-form AMD detection parameter.
    pub fn delta(&self) -> Exact {
        self.amd.failure_bound()
    }

    pub fn epsilon(&self) -> Exact {
        match &self.inner {
            InnerCode::Lecss(_) => exact(0, 1),
            InnerCode::Wiretap(w) => w.epsilon(),
        }
    }

    pub fn regime(&self) -> Result<Regime> {
        let n = self.n();
        let rho_r = exact(self.read_budget as u128, n as u128);
        let rho_w = exact(self.write_budget as u128, n as u128);
        Ok(match &self.inner {
            InnerCode::Lecss(l) => Regime::construction1(n, l.t(), l.d(), rho_r, rho_w),
            InnerCode::Wiretap(w) => Regime::construction2(n, w.rho(), rho_r, rho_w),
        })
    }

    /// `2ε + δ` for construction 2; `max{δ, case bound}` for construction 1.
    pub fn claimed_security(&self) -> ClaimedBound {
        match &self.inner {
            InnerCode::Wiretap(w) => ClaimedBound::two_eps_delta(w.epsilon(), self.delta()),
            InnerCode::Lecss(l) => ClaimedBound::c1(self.delta(), self.n(), l.t(), l.d(), self.read_budget),
        }
    }

    pub fn code_params(&self) -> CodeParams {
        let (inner_label, inner_dim, ell, t, d, rho) = match &self.inner {
            InnerCode::Lecss(l) => (l.outer().label().to_string(), l.r(), l.ell(), Some(l.t()), Some(l.d()), None),
            InnerCode::Wiretap(w) => {
                (w.code().label().to_string(), w.r(), w.ell(), None, None, Some(w.rho().to_string()))
            }
        };
        CodeParams {
            label: self.label.clone(),
            construction: self.construction().number(),
            q: self.field().order() as u64,
            n: self.n(),
            k: self.k(),
            inner: inner_label,
            inner_randomness: inner_dim,
            inner_message: ell,
            t,
            d,
            rho,
            amd_k: self.amd.k(),
            amd_u: self.amd.u(),
            delta: self.delta().to_string(),
            amd_effective_bound: self.amd.effective_bound().to_string(),
            rate: exact(self.k() as u128, (self.n() as u128) * self.field().degree() as u128).to_string(),
        }
    }

    pub(crate) fn packed(&self) -> &PackedNm {
        &self.packed
    }

    /// Splits a randomness index into `(AMD key, inner randomness)`.
    pub(crate) fn split_randomness(&self, rand: u64) -> (Elem, u64) {
        let rdim = self.packed.r_basis.len() as u32;
        ((rand >> rdim) as Elem, rand & crate::tamper::low_mask(rdim))
    }
}

/// Bit-packed encoder and decoder for an [`NmCode`].
#[derive(Clone, Debug)]
pub(crate) struct PackedNm {
    pub n: usize,
    pub w: u32,
    pub k: u32,
    pub r_basis: Vec<u64>,
    pub m_basis: Vec<u64>,
    /// Syndrome bits followed by label bits; a word decodes only when the syndrome is zero.
    pub dmap: BitLinearMap,
    /// The syndrome part of `dmap` (no outputs for total inner decoders).
    pub check: BitLinearMap,
    pub label_bits: u32,
    amd: AmdCode,
    amd_table: Option<Vec<u64>>,
}

const AMD_TABLE_BITS: u32 = 20;
const BOT: u64 = u64::MAX;

impl PackedNm {
    fn new(inner: &InnerCode, amd: &AmdCode) -> Result<Self> {
        let (n, w, r_basis, m_basis, check, label) = match inner {
            InnerCode::Lecss(l) => {
                let p = PackedLecss::new(l);
                (l.n(), 1, p.r_basis, p.m_basis, p.syndrome, p.label)
            }
            InnerCode::Wiretap(wt) => {
                let g = wt.stacked();
                let w = wt.field().degree();
                let basis = binary_basis(g);
                let split = wt.r() * w as usize;
                let label = BitLinearMap::from_matrix(wt.labeler().matrix());
                let none = BitLinearMap::from_fn(0, 0, |_| 0);
                (wt.n(), w, basis[..split].to_vec(), basis[split..].to_vec(), none, label)
            }
        };
        let dmap = check.stack(&label);
        if n * w as usize > 64 {
            return Err(invalid("packed codewords need n * w <= 64"));
        }
        let label_bits = amd.n();
        let amd_table = (label_bits <= AMD_TABLE_BITS).then(|| {
            (0..1u64 << label_bits).map(|z| amd.decode_word(z).unwrap_or(BOT)).collect()
        });
        Ok(PackedNm { n, w, k: amd.k(), r_basis, m_basis, dmap, check, label_bits, amd: amd.clone(), amd_table })
    }

    pub fn check(&self) -> &BitLinearMap {
        &self.check
    }

    pub fn n_bits(&self) -> u32 {
        self.n as u32 * self.w
    }

    pub fn amd_key_bits(&self) -> u32 {
        self.amd.u()
    }

    pub fn encode(&self, m: u64, key: Elem, rnd: u64) -> u64 {
        combine(&self.m_basis, self.amd.encode_word(m, key)) ^ combine(&self.r_basis, rnd)
    }

    /// Offset of the coset holding the encodings of `m` under AMD key `key`.
    pub fn coset(&self, m: u64, key: Elem) -> u64 {
        combine(&self.m_basis, self.amd.encode_word(m, key))
    }

    /// Outcome for a decoder-map output `z`.
    #[inline]
    pub fn outcome_of(&self, z: u64) -> Outcome {
        if z >> self.label_bits != 0 {
            return Outcome::Bot;
        }
        let m = match &self.amd_table {
            Some(t) => t[z as usize],
            None => self.amd.decode_word(z).unwrap_or(BOT),
        };
        if m == BOT {
            Outcome::Bot
        } else {
            Outcome::Message(m)
        }
    }

    #[inline]
    pub fn decode(&self, x: u64) -> Outcome {
        self.outcome_of(self.dmap.apply(x))
    }
}

fn bits_vector(bits: u64, len: usize) -> FieldVector {
    FieldVector::from_word(&Field::gf2(), bits, len)
}

/// Encodes `m` (k bits) with AMD key `key` and inner randomness `r` (symbols of the inner field).
pub fn nm_encode(code: &NmCode, m: &FieldVector, key: Elem, r: &FieldVector) -> Result<FieldVector> {
    check_len(code.k() as usize, m.len())?;
    let a = code.amd.encode(m, key)?;
    let field = code.field();
    if r.field() != field {
        return Err(Error::FieldMismatch);
    }
    match &code.inner {
        InnerCode::Lecss(l) => lecss_encode(l, &a, r),
        InnerCode::Wiretap(w) => {
            let msg = FieldVector::from_word(field, a.to_word(), w.ell());
            wt_encode(w, &msg, r)
        }
    }
}

/// Inner decode followed by AMD decode; never returns `same*`.
pub fn nm_decode(code: &NmCode, x: &FieldVector) -> Result<Outcome> {
    check_len(code.n(), x.len())?;
    let bits = code.amd.n() as usize;
    let label = match &code.inner {
        InnerCode::Lecss(l) => match lecss_decode(l, x)? {
            Some(v) => v,
            None => return Ok(Outcome::Bot),
        },
        InnerCode::Wiretap(w) => wt_decode(w, x)?,
    };
    let word = bits_vector(label.to_word(), bits);
    Ok(match code.amd.decode(&word)? {
        Some(m) => Outcome::Message(m.to_word()),
        None => Outcome::Bot,
    })
}

/// Best binary AMD code filling `bits` output bits: smallest effective bound, then longest message.
pub fn amd_for_bits(bits: u32) -> Result<AmdCode> {
    let mut best: Option<AmdCode> = None;
    for u in 1..=bits.saturating_sub(1) / 2 {
        let Ok(c) = AmdCode::new(bits - 2 * u, u) else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                c.effective_bound() < b.effective_bound()
                    || (c.effective_bound() == b.effective_bound() && c.k() > b.k())
            }
        };
        if better {
            best = Some(c);
        }
    }
    best.ok_or_else(|| invalid(format!("no AMD code fits in {bits} bits")))
}

/// Construction 2 over the `[2^h - 1, 2^h - 1 - h]` Hamming code, whose coset code is
/// `((2^(h-1) - 1) / (2^h - 1), 0)` private.
pub fn hamming_construction2(h: u32, read_budget: usize, write_budget: usize) -> Result<NmCode> {
    let code = hamming_code(h)?;
    let wt = wt_build(&code, 0)?;
    let amd = amd_for_bits(h)?;
    NmCode::construction2(wt, amd, read_budget, write_budget)
}

/// Construction 1 over the LECSS `RM(1,4) ⊂ RM(2,4)`: `n = 16`, `(d', t') = (4, 3)`,
/// with the AMD code of `k = 2`, `u = 2`.
pub fn reed_muller_construction1(read_budget: usize, write_budget: usize) -> Result<NmCode> {
    let rm = reed_muller_code(2, 4)?;
    let lecss = LecssCode::from_generator("RM(1,4)<RM(2,4)", rm.generator().clone(), 5)?;
    let amd = AmdCode::new(2, 2)?;
    NmCode::construction1(lecss, amd, read_budget, write_budget)
}

#[cfg(test)]
mod tests;
