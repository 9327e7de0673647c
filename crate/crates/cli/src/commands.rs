use std::fmt::Write as _;

use serde::Serialize;

use nmcode::amd::{amd_exhaustive_oracle, AmdCode};
use nmcode::codes::reed_solomon_code;
use nmcode::field::Field;
use nmcode::lecss::{lecss_build_random, lecss_verify};
use nmcode::nmc::{
    amd_for_bits, audit_adversaries, bounds_calculator, hamming_construction2, nm_security_audit,
    reed_muller_construction1, AuditMode, AuditOptions, AuditReport, BoundsQuery, InnerCode, NmCode, Regime,
    SameStarRule,
};
use nmcode::prob::{exact, to_f64, Exact};
use nmcode::seed::SeedTree;
use nmcode::smt::{smt_build, smt_nm_audit, smt_secrecy_audit, smt_transmit, SecrecyReport, SessionLog, SmtAuditOptions};
use nmcode::tamper::{ao_sample, budget, SampleMode};
use nmcode::wiretap::{wt_build, wt_verify_privacy, wt_verify_privacy_mc, CosetWtCode, PrivacyReport};

use crate::config::{Format, Mode, Rule, RunConfig, Sampling};
use crate::error::CliError;

/// Rendered report and whether every measured quantity respected its claimed bound.
pub struct Output {
    pub body: String,
    pub respected: bool,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn need<T: Copy>(name: &str, v: Option<T>) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("{name} is required for this command")))
}

fn unsupported(format: Format, command: &str) -> CliError {
    CliError::Config(format!("format {format:?} is not available for {command}"))
}

fn sample_mode(s: Sampling) -> SampleMode {
    match s {
        Sampling::Uniform => SampleMode::Uniform,
        Sampling::Structured => SampleMode::Structured,
    }
}

fn rule(r: Rule) -> SameStarRule {
    match r {
        Rule::ZeroLabel => SameStarRule::ZeroLabel,
        Rule::ZeroOffset => SameStarRule::ZeroOffset,
    }
}

fn floor_mul(n: usize, p: Exact) -> usize {
    ((n as u128 * p.numer()) / p.denom()) as usize
}

fn wiretap(cfg: &RunConfig) -> Result<CosetWtCode, CliError> {
    let code = match cfg.w {
        None => nmcode::codes::hamming_code(cfg.h)?,
        Some(w) => {
            let field = Field::new(w)?;
            let n = cfg.n.unwrap_or(5);
            if cfg.ell == 0 || cfg.ell >= n {
                return Err(CliError::Config(format!("ell = {} must lie in 1..n with n = {n}", cfg.ell)));
            }
            reed_solomon_code(&field, n, n - cfg.ell)?
        }
    };
    Ok(wt_build(&code, cfg.seed)?)
}

/// The code a config describes, with budgets from `rho_r`/`rho_w` or in-regime defaults.
pub fn build_code(cfg: &RunConfig) -> Result<NmCode, CliError> {
    let base = match cfg.construction {
        1 => match cfg.n {
            None => reed_muller_construction1(0, 0)?,
            Some(n) => {
                let (k, u) = (cfg.k.unwrap_or(2), cfg.u.unwrap_or(2));
                let amd = AmdCode::new(k, u)?;
                let lecss = lecss_build_random(n, amd.n() as usize, cfg.r.unwrap_or(n / 3), cfg.seed)?;
                NmCode::construction1(lecss, amd, 0, 0)?
            }
        },
        _ => match cfg.w {
            None if cfg.k.is_none() => hamming_construction2(cfg.h, 0, 0)?,
            _ => {
                let wt = wiretap(cfg)?;
                let bits = (wt.ell() as u32) * wt.field().degree();
                let amd = match (cfg.k, cfg.u) {
                    (Some(k), Some(u)) => AmdCode::new(k, u)?,
                    _ => amd_for_bits(bits)?,
                };
                NmCode::construction2(wt, amd, 0, 0)?
            }
        },
    };
    let n = base.n();
    let (read, write) = match (cfg.rho_r, cfg.rho_w) {
        (Some(r), Some(w)) => (budget(n, r), budget(n, w)),
        (r, w) => {
            let (dr, dw) = default_budgets(&base);
            (r.map_or(dr, |r| budget(n, r)), w.map_or(dw, |w| budget(n, w)))
        }
    };
    Ok(base.with_budgets(read, write)?)
}

fn default_budgets(code: &NmCode) -> (usize, usize) {
    let n = code.n();
    match code.inner() {
        InnerCode::Lecss(l) => (1.min(l.t().saturating_sub(1)), n),
        InnerCode::Wiretap(w) => {
            let rho = w.rho();
            let two_rho = rho * 2;
            if two_rho >= exact(1, 1) {
                (floor_mul(n, two_rho - exact(1, 1)), n)
            } else {
                let read = floor_mul(n, rho) / 3;
                (read, 2 * read)
            }
        }
    }
}

#[derive(Serialize)]
struct CodeBuild<'a> {
    code_params: nmcode::nmc::CodeParams,
    read_budget: usize,
    write_budget: usize,
    regime: Regime,
    claimed_bound: f64,
    claimed_expression: String,
    inner_code: &'a str,
}

pub fn code_build(cfg: &RunConfig) -> Result<Output, CliError> {
    let code = build_code(cfg)?;
    let text = match code.inner() {
        InnerCode::Lecss(l) => l.to_text(),
        InnerCode::Wiretap(w) => w.code().to_text(),
    };
    let claimed = code.claimed_security();
    let body = match cfg.format {
        Format::Json | Format::Auto => json(&CodeBuild {
            code_params: code.code_params(),
            read_budget: code.read_budget(),
            write_budget: code.write_budget(),
            regime: code.regime()?,
            claimed_bound: claimed.value,
            claimed_expression: claimed.expression,
            inner_code: &text,
        }),
        Format::Text => text,
        Format::Csv => return Err(unsupported(cfg.format, "code build")),
    };
    Ok(Output { body, respected: true })
}

#[derive(Serialize)]
struct AmdAudit {
    k: u32,
    u: u32,
    n: u32,
    d: u32,
    failure_bound: String,
    effective_bound: String,
    max_failure: String,
    max_failure_f64: f64,
    max_wrong: String,
    worst_delta: u64,
    worst_m: u64,
    min_detect_message_only: String,
    bound_respected: bool,
}

pub fn amd_audit(cfg: &RunConfig) -> Result<Output, CliError> {
    let code = AmdCode::new(cfg.k.unwrap_or(3), cfg.u.unwrap_or(3))?;
    let rep = amd_exhaustive_oracle(&code)?;
    let respected = rep.max_not_bot <= code.failure_bound();
    let body = match cfg.format {
        Format::Csv => rep.to_csv(code.n()),
        Format::Json | Format::Auto => json(&AmdAudit {
            k: code.k(),
            u: code.u(),
            n: code.n(),
            d: code.d(),
            failure_bound: code.failure_bound().to_string(),
            effective_bound: code.effective_bound().to_string(),
            max_failure: rep.max_not_bot.to_string(),
            max_failure_f64: to_f64(&rep.max_not_bot),
            max_wrong: rep.max_wrong.to_string(),
            worst_delta: rep.worst_delta,
            worst_m: rep.worst_m,
            min_detect_message_only: rep.min_detect_message_only.to_string(),
            bound_respected: respected,
        }),
        Format::Text => format!("{} (bound {})\n", rep.max_not_bot, code.failure_bound()),
    };
    Ok(Output { body, respected })
}

#[derive(Serialize)]
struct WtAudit {
    code: String,
    n: usize,
    ell: usize,
    rho: String,
    epsilon: String,
    private_set_size: usize,
    max_set_size: usize,
    mode: &'static str,
    max_sd: f64,
    max_sd_exact: String,
    witness_set: Option<Vec<usize>>,
    witness_messages: Option<(u64, u64)>,
    zero_up_to: Option<usize>,
    private_max_sd: String,
    samples: u64,
    half_width: f64,
    notes: Vec<String>,
    bound_respected: bool,
}

pub fn wt_audit(cfg: &RunConfig) -> Result<Output, CliError> {
    let wt = wiretap(cfg)?;
    let private = wt.private_set_size();
    let max_set = cfg.max_set.unwrap_or(private + 1).min(wt.n());
    let rep: PrivacyReport = match cfg.mode {
        Mode::Exact => wt_verify_privacy(&wt, max_set)?,
        Mode::Montecarlo => {
            let seed = SeedTree::new(cfg.seed).child("wt-audit");
            wt_verify_privacy_mc(&wt, max_set, cfg.set_draws, cfg.samples, &seed)?
        }
    };
    // only sets within the private size are bound by epsilon
    let private_max = rep.rows.iter().filter(|r| r.set.len() <= private).map(|r| r.sd).max().unwrap_or(exact(0, 1));
    let respected = to_f64(&private_max) <= to_f64(&wt.epsilon()) + rep.half_width;
    let witness = rep.witness.as_ref().filter(|w| w.sd > exact(0, 1));
    let body = match cfg.format {
        Format::Csv => rep.to_csv(),
        Format::Json | Format::Auto => json(&WtAudit {
            code: wt.code().label().to_string(),
            n: wt.n(),
            ell: wt.ell(),
            rho: wt.rho().to_string(),
            epsilon: wt.epsilon().to_string(),
            private_set_size: private,
            max_set_size: max_set,
            mode: rep.mode.as_str(),
            max_sd: to_f64(&rep.max_sd),
            max_sd_exact: rep.max_sd.to_string(),
            witness_set: witness.map(|w| w.set.clone()),
            witness_messages: witness.map(|w| (w.m0, w.m1)),
            zero_up_to: rep.zero_up_to(),
            private_max_sd: private_max.to_string(),
            samples: rep.samples,
            half_width: rep.half_width,
            notes: rep.notes.clone(),
            bound_respected: respected,
        }),
        Format::Text => return Err(unsupported(cfg.format, "wt audit")),
    };
    Ok(Output { body, respected })
}

#[derive(Serialize)]
struct LecssReport {
    label: String,
    n: usize,
    r: usize,
    ell: usize,
    /// Minimum distance of the outer code.
    expected_d: usize,
    /// Dual distance of the inner code, less one.
    expected_t: usize,
    measured_d: usize,
    measured_t: usize,
    bound_respected: bool,
}

pub fn lecss_verify_cmd(cfg: &RunConfig) -> Result<Output, CliError> {
    let code = build_code(&RunConfig { construction: 1, ..cfg.clone() })?;
    let InnerCode::Lecss(l) = code.inner() else { unreachable!("construction 1 has a LECSS") };
    let expected_d = l.outer().min_distance()?;
    let expected_t = l.inner()?.dual_distance()? - 1;
    let (measured_d, measured_t) = lecss_verify(l)?;
    let respected = measured_d == expected_d && measured_t >= expected_t;
    let rep = LecssReport {
        label: l.outer().label().to_string(),
        n: l.n(),
        r: l.r(),
        ell: l.ell(),
        expected_d,
        expected_t,
        measured_d,
        measured_t,
        bound_respected: respected,
    };
    let body = match cfg.format {
        Format::Json | Format::Auto => json(&rep),
        Format::Text => format!("d = {measured_d}, t = {measured_t}\n"),
        Format::Csv => return Err(unsupported(cfg.format, "lecss verify")),
    };
    Ok(Output { body, respected })
}

fn audit_mode(cfg: &RunConfig) -> AuditMode {
    match cfg.mode {
        Mode::Exact => AuditMode::Exact,
        Mode::Montecarlo => AuditMode::MonteCarlo { samples: cfg.samples },
    }
}

fn audit_csv(rep: &AuditReport) -> String {
    let mut s = String::from("f_digest,read,writes,max_sd,worst_m\n");
    for r in &rep.per_adversary {
        let _ = writeln!(s, "{},{},{},{},{}", r.f_digest, r.read, r.writes, r.max_sd_exact, r.worst_m);
    }
    s
}

fn render_audit(rep: &AuditReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json | Format::Auto => Ok(json(rep)),
        Format::Csv => Ok(audit_csv(rep)),
        Format::Text => Err(unsupported(format, "nm audit")),
    }
}

pub fn nm_audit(cfg: &RunConfig) -> Result<Output, CliError> {
    let code = build_code(cfg)?;
    let opts = AuditOptions {
        adversaries: cfg.adversaries,
        mode: audit_mode(cfg),
        seed: cfg.seed,
        sample_mode: sample_mode(cfg.sample_mode),
        rule: rule(cfg.rule),
        max_messages: cfg.max_messages,
    };
    let rep = if code.field().is_binary() {
        nm_security_audit(&code, &opts)?
    } else {
        let root = SeedTree::new(cfg.seed).child("nm-audit").child("adversary");
        let advs = (0..cfg.adversaries)
            .map(|i| ao_sample(code.field(), code.n(), code.read_budget(), opts.sample_mode, &root.index(i as u64)))
            .collect::<Result<Vec<_>, _>>()?;
        audit_adversaries(&code, &advs, &opts, code.claimed_security())?
    };
    Ok(Output { body: render_audit(&rep, cfg.format)?, respected: rep.bound_respected })
}

#[derive(Serialize)]
struct SmtRun {
    n: usize,
    t: usize,
    q: u64,
    message_symbols: usize,
    epsilon: String,
    delta: String,
    claimed_bound: f64,
    secrecy: SecrecyReport,
    session: SessionLog,
    nm_audit: AuditReport,
}

pub fn smt_run(cfg: &RunConfig) -> Result<Output, CliError> {
    let field = Field::new(cfg.w.unwrap_or(4))?;
    let p = smt_build(&field, cfg.n.unwrap_or(5), cfg.t, cfg.ell, cfg.seed)?;
    let root = SeedTree::new(cfg.seed).child("smt-run");
    let secrecy = smt_secrecy_audit(&p, p.t(), cfg.samples, cfg.set_draws, root.child("secrecy").as_u64())?;
    let opts = SmtAuditOptions {
        adversaries: cfg.adversaries,
        mode: audit_mode(cfg),
        seed: cfg.seed,
        sample_mode: sample_mode(cfg.sample_mode),
        max_messages: cfg.max_messages,
    };
    let nm = smt_nm_audit(&p, &opts)?;
    let adversary = ao_sample(&field, p.n(), p.t(), opts.sample_mode, &root.child("session-adversary"))?;
    let m = root.child("session-message").as_u64() & ((1u64 << p.codec().k()) - 1);
    let session = smt_transmit(&p, m, &adversary, root.child("session").as_u64())?;
    let secrecy_ok = secrecy.max_sd <= to_f64(&p.epsilon()) + secrecy.half_width;
    let respected = secrecy_ok && nm.bound_respected;
    let body = match cfg.format {
        Format::Json | Format::Auto => json(&SmtRun {
            n: p.n(),
            t: p.t(),
            q: field.order() as u64,
            message_symbols: cfg.ell,
            epsilon: p.epsilon().to_string(),
            delta: p.delta().to_string(),
            claimed_bound: p.claimed().value,
            secrecy,
            session,
            nm_audit: nm,
        }),
        Format::Csv => audit_csv(&nm),
        Format::Text => return Err(unsupported(cfg.format, "smt run")),
    };
    Ok(Output { body, respected })
}

pub fn bounds(cfg: &RunConfig, kind: &str) -> Result<Output, CliError> {
    let query = match kind {
        "capacity" => BoundsQuery::Capacity {
            rho_r: cfg.rho_r.unwrap_or(0.0),
            rho_w: cfg.rho_w.unwrap_or(1.0),
            strong: cfg.strong,
        },
        "c1" => {
            let n = need("n", cfg.n)?;
            BoundsQuery::C1Security {
                delta: need("delta", cfg.delta)?,
                n,
                t: cfg.t,
                d: need("d", cfg.d)?,
                read: budget(n, cfg.rho_r.unwrap_or(0.0)),
            }
        }
        "c2" => BoundsQuery::C2Security { epsilon: cfg.epsilon.unwrap_or(0.0), delta: need("delta", cfg.delta)? },
        "regime-c1" => BoundsQuery::RegimeC1 {
            n: need("n", cfg.n)?,
            t: cfg.t,
            d: need("d", cfg.d)?,
            rho_r: need("rho_r", cfg.rho_r)?,
            rho_w: need("rho_w", cfg.rho_w)?,
        },
        "regime-c2" => BoundsQuery::RegimeC2 {
            rho: need("rho", cfg.rho)?,
            rho_r: need("rho_r", cfg.rho_r)?,
            rho_w: need("rho_w", cfg.rho_w)?,
        },
        other => return Err(CliError::Config(format!("unknown bounds query `{other}`"))),
    };
    let ans = bounds_calculator(&query)?;
    let body = match cfg.format {
        Format::Json => json(&ans),
        Format::Text | Format::Auto => match ans.value {
            Some(v) => format!("{v}\n"),
            None => format!("{}\n", ans.verdict),
        },
        Format::Csv => return Err(unsupported(cfg.format, "bounds")),
    };
    Ok(Output { body, respected: true })
}
