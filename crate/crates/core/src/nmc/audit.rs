//! Security audits: measured `SD(Tamper_m^f, Patch(D_f, m))` against the claimed bound.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::prob::{exact, to_f64, Exact};
use crate::seed::SeedTree;
use crate::tamper::{digest_hex, tamper_sample, SampleMode};
use crate::wiretap::mc_half_width;

use super::adversary::Adversary;
use super::engine::{simulator, tamper_experiment, EvalMode, SameStarRule};
use super::outcome::{patch, statistical_distance, Outcome};
use super::regime::{ClaimedBound, Regime};
use super::{InnerCode, NmCode};

const HISTOGRAM_BINS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditMode {
    Exact,
    MonteCarlo { samples: u64 },
}

impl AuditMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AuditMode::Exact => "exact",
            AuditMode::MonteCarlo { .. } => "montecarlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    pub adversaries: usize,
    pub mode: AuditMode,
    pub seed: u64,
    pub sample_mode: SampleMode,
    pub rule: SameStarRule,
    /// Messages per adversary; all `2^k` are used when they fit.
    pub max_messages: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            adversaries: 100,
            mode: AuditMode::Exact,
            seed: 0,
            sample_mode: SampleMode::Uniform,
            rule: SameStarRule::ZeroLabel,
            max_messages: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodeParams {
    pub label: String,
    pub construction: u8,
    pub q: u64,
    pub n: usize,
    pub k: u32,
    pub inner: String,
    pub inner_randomness: usize,
    pub inner_message: usize,
    pub t: Option<usize>,
    pub d: Option<usize>,
    pub rho: Option<String>,
    pub amd_k: u32,
    pub amd_u: u32,
    pub delta: String,
    pub amd_effective_bound: String,
    pub rate: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversaryRow {
    pub f_digest: String,
    pub read: usize,
    pub writes: usize,
    pub max_sd: f64,
    pub max_sd_exact: String,
    pub worst_m: String,
    /// Digest of the simulator output, identical for every message.
    pub df_digest: String,
    pub df_identical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub code_params: CodeParams,
    pub regime: Regime,
    pub claimed_bound: f64,
    pub claimed_expression: String,
    pub per_adversary: Vec<AdversaryRow>,
    pub max_sd: f64,
    pub max_sd_exact: String,
    pub mode: String,
    pub seed: u64,
    pub samples: Option<u64>,
    pub half_width: f64,
    pub messages_per_adversary: usize,
    /// Counts of per-adversary maxima in ten equal bins over `[0, 1]`.
    pub histogram: Vec<u64>,
    pub df_identical: bool,
    pub bound_respected: bool,
    pub notes: Vec<String>,
}

fn messages(k: u32, max: usize, seed: &SeedTree) -> Vec<u64> {
    if k < 63 && (1u64 << k) <= max as u64 {
        return (0..1u64 << k).collect();
    }
    // distinct messages drawn from the low min(k, 32) bits' worth of space
    let space = 1usize << k.min(32);
    let mut v: Vec<u64> = sample(&mut seed.rng(), space, max.min(space)).into_iter().map(|m| m as u64).collect();
    v.sort_unstable();
    v
}

/// Samples `opts.adversaries` tampering functions within the code's budgets and audits them.
pub fn nm_security_audit(code: &NmCode, opts: &AuditOptions) -> Result<AuditReport> {
    let root = SeedTree::new(opts.seed).child("nm-audit");
    let n = code.n();
    let rho_r = code.read_budget() as f64 / n as f64;
    let rho_w = code.write_budget() as f64 / n as f64;
    let advs = (0..opts.adversaries)
        .map(|i| tamper_sample(n, rho_r, rho_w, opts.sample_mode, &root.child("adversary").index(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    audit_adversaries(code, &advs, opts, code.claimed_security())
}

/// Audits an explicit adversary list against `claimed`.
pub fn audit_adversaries<A: Adversary + Sync>(
    code: &NmCode,
    adversaries: &[A],
    opts: &AuditOptions,
    claimed: ClaimedBound,
) -> Result<AuditReport> {
    if opts.max_messages == 0 {
        return Err(invalid("max_messages must be positive"));
    }
    let root = SeedTree::new(opts.seed).child("nm-audit");
    let msgs = messages(code.k(), opts.max_messages, &root.child("messages"));
    let (samples, half_width) = match opts.mode {
        AuditMode::Exact => (None, 0.0),
        AuditMode::MonteCarlo { samples } => {
            let bins = 1usize << code.k().min(20);
            (Some(samples), mc_half_width(samples, bins + 1))
        }
    };
    let rows = adversaries
        .par_iter()
        .enumerate()
        .map(|(i, f)| audit_one(code, f, i as u64, &msgs, opts, &root))
        .collect::<Result<Vec<_>>>()?;
    let mut max = exact(0, 1);
    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    for (_, sd) in &rows {
        if *sd > max {
            max = *sd;
        }
        let bin = ((to_f64(sd) * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    let regime = code.regime()?;
    let mut notes = Vec::new();
    if !regime.guaranteed() {
        notes.push("parameters are outside both security regimes; the bound is not guaranteed".into());
    }
    if let InnerCode::Wiretap(w) = code.inner() {
        notes.extend(w.hamming_half_note());
    }
    if code.amd().effective_bound() > code.delta() {
        notes.push(format!(
            "AMD root-count bound (d+1)/2^u = {} exceeds the closed-form delta {}",
            code.amd().effective_bound(),
            code.delta()
        ));
    }
    let per_adversary: Vec<AdversaryRow> = rows.into_iter().map(|(r, _)| r).collect();
    let df_identical = per_adversary.iter().all(|r| r.df_identical);
    Ok(AuditReport {
        code_params: code.code_params(),
        regime,
        claimed_bound: claimed.value,
        claimed_expression: claimed.expression.clone(),
        max_sd: to_f64(&max),
        max_sd_exact: max.to_string(),
        bound_respected: claimed.respects(&max, half_width),
        per_adversary,
        mode: opts.mode.as_str().into(),
        seed: opts.seed,
        samples,
        half_width,
        messages_per_adversary: msgs.len(),
        histogram,
        df_identical,
        notes,
    })
}

fn audit_one<A: Adversary>(
    code: &NmCode,
    f: &A,
    index: u64,
    msgs: &[u64],
    opts: &AuditOptions,
    root: &SeedTree,
) -> Result<(AdversaryRow, Exact)> {
    let sim_mode = match opts.mode {
        AuditMode::Exact => EvalMode::Exact,
        AuditMode::MonteCarlo { samples } => EvalMode::MonteCarlo { samples, seed: root.child("simulator").index(index) },
    };
    let mut first: Option<String> = None;
    let mut identical = true;
    let mut worst = (exact(0, 1), msgs[0]);
    for &m in msgs {
        // rebuilt for every message: the builder never sees m, so the bytes must agree
        let d = simulator(code, f, opts.rule, &sim_mode)?;
        let bytes = d.canonical();
        match &first {
            None => first = Some(bytes),
            Some(b) => identical &= *b == bytes,
        }
        let mode = match opts.mode {
            AuditMode::Exact => EvalMode::Exact,
            AuditMode::MonteCarlo { samples } => {
                EvalMode::MonteCarlo { samples, seed: root.child("tamper").index(index).index(m) }
            }
        };
        let t = tamper_experiment(code, f, m, &mode)?;
        let sd = statistical_distance(&t, &patch(&d, m), false)?;
        if sd > worst.0 {
            worst = (sd, m);
        }
    }
    let row = AdversaryRow {
        f_digest: f.digest(),
        read: f.read_set().len(),
        writes: f.write_count(),
        max_sd: to_f64(&worst.0),
        max_sd_exact: worst.0.to_string(),
        worst_m: Outcome::Message(worst.1).render(code.k()),
        df_digest: digest_hex(first.as_deref().unwrap_or("")),
        df_identical: identical,
    };
    Ok((row, worst.0))
}
