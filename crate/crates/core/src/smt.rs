//! One-round non-malleable message transmission over `n` wires, and single sessions on
//! the active-adversary wiretap II channel.
//!
//! Each wire carries one symbol of a construction-2 codeword over GF(2^w). The
//! adversary reads `t` wires and adds to or overwrites every wire.

use rand::Rng;
use serde::Serialize;

use crate::codes::reed_solomon_code;
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::nmc::{
    amd_for_bits, audit_adversaries, nm_decode, AdversaryRow, Adversary, AuditMode, AuditOptions, AuditReport,
    ClaimedBound, CodingScheme, Construction, InnerCode, NmCode, Outcome, RegimeVerdict,
};
use crate::prob::{exact, to_f64, Exact};
use crate::seed::SeedTree;
use crate::tamper::{ao_sample, low_mask, AoTamperFunction, SampleMode, TamperFunction};
use crate::wiretap::{
    exact_view_privacy, mc_view_privacy, wt_build, wt_verify_privacy, wt_verify_privacy_mc, PrivacyRow, VerifyMode,
};

/// What the adversary sees: the values on the wires it reads.
pub const VIEW: &str = "read wire values";

/// Encoder randomness bits enumerated exactly by the secrecy audit.
pub const MAX_SECRECY_BITS: u32 = 22;

#[derive(Clone, Debug)]
pub struct SmtProtocol {
    n: usize,
    t: usize,
    codec: NmCode,
    epsilon: Exact,
    delta: Exact,
}

impl SmtProtocol {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn codec(&self) -> &NmCode {
        &self.codec
    }

    pub fn epsilon(&self) -> Exact {
        self.epsilon
    }

    /// Tamper-detection error of the AMD layer, `(d + 1) / 2^u`.
    pub fn delta(&self) -> Exact {
        self.delta
    }

    /// `2 eps + delta`.
    pub fn claimed(&self) -> ClaimedBound {
        ClaimedBound::two_eps_delta(self.epsilon, self.delta)
    }
}

/// Builds the protocol over `RS[n, n - message_symbols]`, whose coset code is private
/// against `n - message_symbols` wires.
pub fn smt_build(field: &Field, n: usize, t: usize, message_symbols: usize, seed: u64) -> Result<SmtProtocol> {
    if message_symbols == 0 || message_symbols >= n {
        return Err(invalid(format!("need 0 < message_symbols < n, got {message_symbols} with n = {n}")));
    }
    if t > n {
        return Err(invalid(format!("t = {t} exceeds n = {n}")));
    }
    let rs = reed_solomon_code(field, n, n - message_symbols)?;
    let wt = wt_build(&rs, seed)?;
    let rho = wt.rho();
    let need = (exact(1, 1) + exact(t as u128, n as u128)) / 2;
    if rho < need {
        return Err(Error::OutsideRegime(format!("rho = {rho} < (1 + t/n)/2 = {need}")));
    }
    let amd = amd_for_bits(message_symbols as u32 * field.degree())?;
    let delta = amd.effective_bound();
    let epsilon = wt.epsilon();
    let codec = NmCode::construction2(wt, amd, t, n)?;
    Ok(SmtProtocol { n, t, codec, epsilon, delta })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SessionLog {
    pub message: String,
    pub adversary: String,
    pub adversary_digest: String,
    /// Root seed; the encoder randomness is drawn from its `encoder` child.
    pub seed: u64,
    pub randomness: u64,
    pub sent: String,
    pub received_wires: String,
    pub received: String,
}

fn session<A: Adversary>(code: &NmCode, m: u64, f: &A, seed: u64) -> Result<SessionLog> {
    if code.k() < 64 && m >> code.k() != 0 {
        return Err(invalid(format!("message {m:#x} has more than k = {} bits", code.k())));
    }
    let bits = code.randomness_bits();
    let rand = SeedTree::new(seed).child("encoder").rng().gen::<u64>() & low_mask(bits);
    let x = CodingScheme::encode(code, m, rand)?;
    let y = f.apply_vector(&x)?;
    let out = nm_decode(code, &y)?;
    Ok(SessionLog {
        message: Outcome::Message(m).render(code.k()),
        adversary: f.describe(),
        adversary_digest: f.digest(),
        seed,
        randomness: rand,
        sent: x.to_string(),
        received_wires: y.to_string(),
        received: out.render(code.k()),
    })
}

fn check_read<A: Adversary>(f: &A, n: usize, budget: usize) -> Result<()> {
    if f.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.n() });
    }
    if f.read_set().len() > budget {
        return Err(Error::BudgetExceeded(format!("adversary reads {} wires, budget {budget}", f.read_set().len())));
    }
    Ok(())
}

/// Sends `m`, lets `adversary` tamper with the wires, and decodes.
pub fn smt_transmit(p: &SmtProtocol, m: u64, adversary: &AoTamperFunction, seed: u64) -> Result<SessionLog> {
    if adversary.field() != p.codec.field() {
        return Err(Error::FieldMismatch);
    }
    check_read(adversary, p.n, p.t)?;
    session(&p.codec, m, adversary, seed)
}

/// Re-runs a logged session and checks that it reproduces byte for byte.
pub fn smt_replay(p: &SmtProtocol, log: &SessionLog, adversary: &AoTamperFunction) -> Result<bool> {
    let m = u64::from_str_radix(&log.message, 2).map_err(|e| invalid(format!("bad logged message: {e}")))?;
    Ok(smt_transmit(p, m, adversary, log.seed)? == *log)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecrecyReport {
    pub set_size: usize,
    pub mode: &'static str,
    pub max_sd: f64,
    pub max_sd_exact: String,
    pub witness_set: Option<Vec<usize>>,
    pub witness_messages: Option<(u64, u64)>,
    pub samples: u64,
    pub half_width: f64,
    pub view: &'static str,
}

impl SecrecyReport {
    fn new(set_size: usize, mode: VerifyMode, sd: Exact, witness: Option<PrivacyRow>, samples: u64, half: f64) -> Self {
        let witness = witness.filter(|w| w.sd > exact(0, 1));
        SecrecyReport {
            set_size,
            mode: mode.as_str(),
            max_sd: to_f64(&sd),
            max_sd_exact: sd.to_string(),
            witness_set: witness.as_ref().map(|w| w.set.clone()),
            witness_messages: witness.as_ref().map(|w| (w.m0, w.m1)),
            samples,
            half_width: half,
            view: VIEW,
        }
    }
}

/// Largest distance between the views of two messages over every set of at most
/// `set_size` wires. Enumerates all encoder randomness when it fits, and otherwise
/// samples `samples` encodings for `set_draws` random sets per size.
pub fn smt_secrecy_audit(
    p: &SmtProtocol,
    set_size: usize,
    samples: u64,
    set_draws: usize,
    seed: u64,
) -> Result<SecrecyReport> {
    code_secrecy_audit(&p.codec, set_size, samples, set_draws, seed)
}

/// [`smt_secrecy_audit`] for any code.
pub fn code_secrecy_audit(code: &NmCode, set_size: usize, samples: u64, set_draws: usize, seed: u64) -> Result<SecrecyReport> {
    if set_size > code.n() {
        return Err(invalid(format!("set size {set_size} exceeds n = {}", code.n())));
    }
    let bits = code.randomness_bits();
    let w = code.field().degree();
    let p = code.packed();
    let messages = 1u64 << code.k();
    if bits <= MAX_SECRECY_BITS && code.k() <= 8 {
        let words: Vec<Vec<u64>> = (0..messages)
            .map(|m| {
                (0..1u64 << bits)
                    .map(|rand| {
                        let (key, rnd) = code.split_randomness(rand);
                        p.encode(m, key, rnd)
                    })
                    .collect()
            })
            .collect();
        let rep = exact_view_privacy(&words, code.n(), w, set_size);
        return Ok(SecrecyReport::new(set_size, VerifyMode::Exact, rep.max_sd, rep.witness, 1 << bits, 0.0));
    }
    if samples == 0 || set_draws == 0 {
        return Err(Error::Infeasible(format!(
            "exact secrecy audit over 2^{bits} randomness values; give samples and set draws"
        )));
    }
    let draw = |m: u64, rng: &mut rand_chacha::ChaCha8Rng| {
        let (key, rnd) = code.split_randomness(rng.gen::<u64>() & low_mask(bits));
        p.encode(m, key, rnd)
    };
    let root = SeedTree::new(seed).child("secrecy");
    let rep = mc_view_privacy(code.n(), w, code.k(), set_size, set_draws, samples, &root, draw);
    Ok(SecrecyReport::new(set_size, VerifyMode::MonteCarlo, rep.max_sd, rep.witness, samples, rep.half_width))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtAuditOptions {
    pub adversaries: usize,
    pub mode: AuditMode,
    pub seed: u64,
    pub sample_mode: SampleMode,
    pub max_messages: usize,
}

impl Default for SmtAuditOptions {
    fn default() -> Self {
        SmtAuditOptions {
            adversaries: 100,
            mode: AuditMode::Exact,
            seed: 0,
            sample_mode: SampleMode::Uniform,
            max_messages: 64,
        }
    }
}

/// Samples read-`t` add/overwrite adversaries and audits the codec against `2 eps + delta`.
pub fn smt_nm_audit(p: &SmtProtocol, opts: &SmtAuditOptions) -> Result<AuditReport> {
    let root = SeedTree::new(opts.seed).child("smt").child("adversary");
    let advs = (0..opts.adversaries)
        .map(|i| ao_sample(p.codec.field(), p.n, p.t, opts.sample_mode, &root.index(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    smt_audit_adversaries(p, &advs, opts)
}

/// Audits an explicit list of adversaries.
pub fn smt_audit_adversaries(p: &SmtProtocol, advs: &[AoTamperFunction], opts: &SmtAuditOptions) -> Result<AuditReport> {
    for f in advs {
        check_read(f, p.n, p.t)?;
    }
    let nm_opts = AuditOptions {
        adversaries: advs.len(),
        mode: opts.mode,
        seed: opts.seed,
        sample_mode: opts.sample_mode,
        max_messages: opts.max_messages,
        ..AuditOptions::default()
    };
    let mut rep = audit_adversaries(&p.codec, advs, &nm_opts, p.claimed())?;
    rep.notes.push(format!("adversary view: {VIEW}"));
    Ok(rep)
}

const AWTP_SET_DRAWS: usize = 8;
const AWTP_SAMPLES: u64 = 50_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AwtpSession {
    pub log: SessionLog,
    /// How secrecy was established: exact privacy enumeration or the inner code's uniformity.
    pub secrecy_method: String,
    pub secrecy: bool,
    pub nm: AdversaryRow,
    pub nm_bound: f64,
    pub nm_respected: bool,
    pub regime: RegimeVerdict,
    pub rate: String,
    /// `(1 - rho_r) / 2`, the rate ceiling of construction 2 instances.
    pub rate_ceiling: Option<String>,
}

/// One session on the active-adversary wiretap II channel: the adversary reads at most
/// the code's read budget and may write every position.
pub fn awtp_session(code: &NmCode, adversary: &TamperFunction, m: u64, seed: u64) -> Result<AwtpSession> {
    check_read(adversary, code.n(), code.read_budget())?;
    let log = session(code, m, adversary, seed)?;
    let (secrecy_method, secrecy) = match code.inner() {
        InnerCode::Wiretap(w) => {
            let budget = code.read_budget();
            match wt_verify_privacy(w, budget) {
                Ok(rep) => {
                    let ok = rep.zero_up_to().is_some_and(|s| s >= budget);
                    (format!("exact privacy enumeration up to {budget} positions"), ok)
                }
                Err(Error::Infeasible(_)) => {
                    let seeds = SeedTree::new(seed).child("secrecy");
                    let rep = wt_verify_privacy_mc(w, budget, AWTP_SET_DRAWS, AWTP_SAMPLES, &seeds)?;
                    let ok = to_f64(&rep.max_sd) <= rep.half_width;
                    (format!("Monte Carlo privacy check up to {budget} positions"), ok)
                }
                Err(e) => return Err(e),
            }
        }
        InnerCode::Lecss(l) => (format!("{}-uniform inner code", l.t()), l.t() >= code.read_budget()),
    };
    let opts = AuditOptions { adversaries: 1, seed, ..AuditOptions::default() };
    let claimed = code.claimed_security();
    let rep = audit_adversaries(code, std::slice::from_ref(adversary), &opts, claimed.clone())?;
    let n = code.n() as u128;
    let inner_message = match code.inner() {
        InnerCode::Wiretap(w) => w.ell(),
        InnerCode::Lecss(l) => l.ell(),
    } as u128;
    let rate_ceiling = (code.construction() == Construction::Two)
        .then(|| ((exact(1, 1) - exact(code.read_budget() as u128, n)) / 2).to_string());
    Ok(AwtpSession {
        log,
        secrecy_method,
        secrecy,
        nm_bound: claimed.value,
        nm_respected: rep.bound_respected,
        nm: rep.per_adversary.into_iter().next().expect("one adversary"),
        regime: code.regime()?.verdict,
        rate: exact(inner_message, n).to_string(),
        rate_ceiling,
    })
}
