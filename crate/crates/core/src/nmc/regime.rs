//! Parameter regimes under which the security bounds apply, and the bounds they give.

use serde::{Serialize, Serializer};

use crate::prob::{exact, to_f64, Exact};

use super::bounds::c1_case_bound;

fn ratio_str<S: Serializer>(r: &Exact, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn opt_ratio_str<S: Serializer>(r: &Option<Exact>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&r.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeVerdict {
    /// The general bound for the construction applies.
    Main,
    /// Only the small write budget variant applies.
    SmallWrite,
    /// Neither applies; measured distances carry no guarantee.
    NotGuaranteed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegimeCheck {
    pub condition: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Regime {
    pub construction: u8,
    pub n: usize,
    #[serde(serialize_with = "ratio_str")]
    pub rho_r: Exact,
    #[serde(serialize_with = "ratio_str")]
    pub rho_w: Exact,
    #[serde(serialize_with = "opt_ratio_str")]
    pub rho: Option<Exact>,
    pub t: Option<usize>,
    pub d: Option<usize>,
    pub checks: Vec<RegimeCheck>,
    pub verdict: RegimeVerdict,
}

fn check(condition: &str, holds: bool) -> RegimeCheck {
    RegimeCheck { condition: condition.into(), holds }
}

impl Regime {
    /// LECSS with `(d', t')`: main regime `t' > nρr` and `d' > n(1-ρr)/4`; small write
    /// regime `ρw < (1-ρr)/2`, `t' > nρr` and `d' > nρw/2`.
    pub fn construction1(n: usize, t: usize, d: usize, rho_r: Exact, rho_w: Exact) -> Self {
        let one = exact(1, 1);
        let nn = exact(n as u128, 1);
        let t_ok = exact(t as u128, 1) > nn * rho_r;
        let d_main = exact(4 * d as u128, 1) > nn * (one - rho_r);
        let small_w = rho_w * 2 < one - rho_r;
        let d_small = exact(2 * d as u128, 1) > nn * rho_w;
        let verdict = if t_ok && d_main {
            RegimeVerdict::Main
        } else if small_w && t_ok && d_small {
            RegimeVerdict::SmallWrite
        } else {
            RegimeVerdict::NotGuaranteed
        };
        Regime {
            construction: 1,
            n,
            rho_r,
            rho_w,
            rho: None,
            t: Some(t),
            d: Some(d),
            checks: vec![
                check("t' > n*rho_r", t_ok),
                check("d' > n*(1-rho_r)/4", d_main),
                check("rho_w < (1-rho_r)/2", small_w),
                check("d' > n*rho_w/2", d_small),
            ],
            verdict,
        }
    }

    /// Wiretap privacy `ρ`: main regime `ρ ≥ (1+ρr)/2`; small write regime
    /// `ρw < (1-ρr)/2` and `ρ ≥ ρr + ρw`.
    pub fn construction2(n: usize, rho: Exact, rho_r: Exact, rho_w: Exact) -> Self {
        let one = exact(1, 1);
        let main = rho * 2 >= one + rho_r;
        let small_w = rho_w * 2 < one - rho_r;
        let sum = rho >= rho_r + rho_w;
        let verdict = if main {
            RegimeVerdict::Main
        } else if small_w && sum {
            RegimeVerdict::SmallWrite
        } else {
            RegimeVerdict::NotGuaranteed
        };
        Regime {
            construction: 2,
            n,
            rho_r,
            rho_w,
            rho: Some(rho),
            t: None,
            d: None,
            checks: vec![
                check("rho >= (1+rho_r)/2", main),
                check("rho_w < (1-rho_r)/2", small_w),
                check("rho >= rho_r + rho_w", sum),
            ],
            verdict,
        }
    }

    pub fn guaranteed(&self) -> bool {
        self.verdict != RegimeVerdict::NotGuaranteed
    }
}

/// A security bound with the expression it was evaluated from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimedBound {
    pub value: f64,
    #[serde(serialize_with = "opt_ratio_str")]
    pub exact: Option<Exact>,
    pub expression: String,
}

impl ClaimedBound {
    pub fn exact(value: Exact, expression: impl Into<String>) -> Self {
        ClaimedBound { value: to_f64(&value), exact: Some(value), expression: expression.into() }
    }

    pub fn two_eps_delta(epsilon: Exact, delta: Exact) -> Self {
        let v = epsilon * 2 + delta;
        Self::exact(v, format!("2*eps + delta = 2*{epsilon} + {delta}"))
    }

    pub fn c1(delta: Exact, n: usize, t: usize, d: usize, read: usize) -> Self {
        let case = c1_case_bound(n, t, d, read);
        let dv = to_f64(&delta);
        if case <= dv {
            Self::exact(delta, format!("max{{delta, case bound}} = delta = {delta} (case bound {case})"))
        } else {
            ClaimedBound {
                value: case,
                exact: None,
                expression: format!("max{{delta, case bound}} = case bound = {case} (delta = {delta})"),
            }
        }
    }

    /// `sd <= bound + slack`, exactly when both sides are exact and there is no slack.
    pub fn respects(&self, sd: &Exact, slack: f64) -> bool {
        match (&self.exact, slack == 0.0) {
            (Some(b), true) => sd <= b,
            _ => to_f64(sd) <= self.value + slack,
        }
    }
}
