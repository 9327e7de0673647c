//! Closed-form rate and security bounds.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::prob::{exact, Exact};

use super::regime::{Regime, RegimeVerdict};

/// Undetected-error bound for the middle overwrite cases of construction 1:
/// `2^-e + (e / (n (d'/n - (1-ρr)/4)^2))^(e/2)` with `e = t' - nρr`.
///
/// Infinite when `e <= 0` or `d'/n <= (1-ρr)/4`.
pub fn c1_case_bound(n: usize, t: usize, d: usize, read: usize) -> f64 {
    if t <= read {
        return f64::INFINITY;
    }
    let e = (t - read) as f64;
    let nf = n as f64;
    let gap = d as f64 / nf - (1.0 - read as f64 / nf) / 4.0;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    (-e).exp2() + (e / (nf * gap * gap)).powf(e / 2.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundsQuery {
    /// Rate upper limit against `(ρr, ρw)`; `strong` selects strong non-malleability.
    Capacity { rho_r: f64, rho_w: f64, strong: bool },
    /// `max{δ, case bound}` for a `(d', t')` LECSS of length `n` and read budget `nρr`.
    C1Security { delta: f64, n: usize, t: usize, d: usize, read: usize },
    /// `2ε + δ`.
    C2Security { epsilon: f64, delta: f64 },
    /// Which security regime covers construction 1 at `(n, t', d', ρr, ρw)`.
    RegimeC1 { n: usize, t: usize, d: usize, rho_r: f64, rho_w: f64 },
    /// Which security regime covers construction 2 at `(ρ, ρr, ρw)`.
    RegimeC2 { rho: f64, rho_r: f64, rho_w: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsAnswer {
    pub query: String,
    pub value: Option<f64>,
    pub verdict: String,
    pub notes: Vec<String>,
    pub regime: Option<Regime>,
}

fn unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} is not in [0, 1]")))
    }
}

/// Nearest simple fraction, so that inputs like `5/31` entered as decimals compare exactly.
fn rational(name: &str, x: f64) -> Result<Exact> {
    unit(name, x)?;
    let r = Ratio::<i64>::approximate_float(x).ok_or_else(|| invalid(format!("{name} = {x} has no rational form")))?;
    Ok(exact(*r.numer() as u128, *r.denom() as u128))
}

fn verdict_str(v: RegimeVerdict) -> String {
    match v {
        RegimeVerdict::Main => "main".into(),
        RegimeVerdict::SmallWrite => "small-write".into(),
        RegimeVerdict::NotGuaranteed => "not guaranteed".into(),
    }
}

pub fn bounds_calculator(query: &BoundsQuery) -> Result<BoundsAnswer> {
    match *query {
        BoundsQuery::Capacity { rho_r, rho_w, strong } => {
            unit("rho_r", rho_r)?;
            unit("rho_w", rho_w)?;
            let value = 1.0 - rho_r;
            let (verdict, notes) = if strong || rho_r <= rho_w {
                ("capacity".to_string(), vec![])
            } else {
                (
                    "upper bound unknown".to_string(),
                    vec!["for rho_r > rho_w, 1 - rho_r is achievable but rates above it are not ruled out".into()],
                )
            };
            Ok(BoundsAnswer {
                query: format!("capacity rho_r={rho_r} rho_w={rho_w} strong={strong}"),
                value: Some(value),
                verdict,
                notes,
                regime: None,
            })
        }
        BoundsQuery::C1Security { delta, n, t, d, read } => {
            unit("delta", delta)?;
            if read > n {
                return Err(invalid("read budget exceeds n"));
            }
            let case = c1_case_bound(n, t, d, read);
            let value = delta.max(case);
            let mut notes = vec![format!("case bound = {case}")];
            if t <= read {
                notes.push("t' <= n*rho_r: outside regime".into());
            }
            if value >= 1.0 {
                notes.push("bound is vacuous at these parameters".into());
            }
            Ok(BoundsAnswer {
                query: format!("c1_security delta={delta} n={n} t={t} d={d} read={read}"),
                value: Some(value),
                verdict: if t > read { "in regime".into() } else { "outside regime".into() },
                notes,
                regime: None,
            })
        }
        BoundsQuery::C2Security { epsilon, delta } => {
            unit("epsilon", epsilon)?;
            unit("delta", delta)?;
            Ok(BoundsAnswer {
                query: format!("c2_security epsilon={epsilon} delta={delta}"),
                value: Some(2.0 * epsilon + delta),
                verdict: "2*eps + delta".into(),
                notes: vec![],
                regime: None,
            })
        }
        BoundsQuery::RegimeC1 { n, t, d, rho_r, rho_w } => {
            let r = Regime::construction1(n, t, d, rational("rho_r", rho_r)?, rational("rho_w", rho_w)?);
            Ok(BoundsAnswer {
                query: format!("regime construction=1 n={n} t={t} d={d} rho_r={rho_r} rho_w={rho_w}"),
                value: None,
                verdict: verdict_str(r.verdict),
                notes: vec![],
                regime: Some(r),
            })
        }
        BoundsQuery::RegimeC2 { rho, rho_r, rho_w } => {
            let r = Regime::construction2(0, rational("rho", rho)?, rational("rho_r", rho_r)?, rational("rho_w", rho_w)?);
            Ok(BoundsAnswer {
                query: format!("regime construction=2 rho={rho} rho_r={rho_r} rho_w={rho_w}"),
                value: None,
                verdict: verdict_str(r.verdict),
                notes: vec![],
                regime: Some(r),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(q: BoundsQuery) -> f64 {
        bounds_calculator(&q).unwrap().value.unwrap()
    }

    #[test]
    fn capacity_values() {
        assert_eq!(value(BoundsQuery::Capacity { rho_r: 0.25, rho_w: 1.0, strong: true }), 0.75);
        assert_eq!(value(BoundsQuery::Capacity { rho_r: 0.25, rho_w: 0.5, strong: false }), 0.75);
        let a = bounds_calculator(&BoundsQuery::Capacity { rho_r: 0.5, rho_w: 0.25, strong: false }).unwrap();
        assert_eq!(a.value, Some(0.5));
        assert_eq!(a.verdict, "upper bound unknown");
        assert!(bounds_calculator(&BoundsQuery::Capacity { rho_r: 1.5, rho_w: 1.0, strong: true }).is_err());
    }

    #[test]
    fn c2_security_value() {
        assert_eq!(value(BoundsQuery::C2Security { epsilon: 0.0, delta: 0.375 }), 0.375);
        assert_eq!(value(BoundsQuery::C2Security { epsilon: 0.125, delta: 0.25 }), 0.5);
    }

    #[test]
    fn c1_case_bound_oracle() {
        // e = 2, gap = 4/16 - (15/16)/4 = 1/64: 1/4 + (2 / (16/4096))^1 = 512.25
        assert_eq!(c1_case_bound(16, 3, 4, 1), 0.25 + 512.0);
        assert_eq!(c1_case_bound(16, 3, 4, 3), f64::INFINITY);
        assert_eq!(c1_case_bound(16, 3, 3, 1), f64::INFINITY);
        // large-distance instance: e = 10, gap = 1/2 - 1/4 = 1/4: 2^-10 + (10/(100/16))^5
        let v = c1_case_bound(100, 10, 50, 0);
        assert!((v - (2f64.powi(-10) + 1.6f64.powi(5))).abs() < 1e-12);
        let a = bounds_calculator(&BoundsQuery::C1Security { delta: 0.5, n: 16, t: 3, d: 4, read: 1 }).unwrap();
        assert_eq!(a.value, Some(512.25));
    }

    #[test]
    fn regime_queries() {
        let a = bounds_calculator(&BoundsQuery::RegimeC2 { rho: 15.0 / 31.0, rho_r: 5.0 / 31.0, rho_w: 10.0 / 31.0 }).unwrap();
        assert_eq!(a.verdict, "small-write");
        let a = bounds_calculator(&BoundsQuery::RegimeC2 { rho: 3.0 / 7.0, rho_r: 2.0 / 15.0, rho_w: 0.25 }).unwrap();
        assert_eq!(a.verdict, "small-write");
        let a = bounds_calculator(&BoundsQuery::RegimeC2 { rho: 0.6, rho_r: 0.2, rho_w: 1.0 }).unwrap();
        assert_eq!(a.verdict, "main");
        let a = bounds_calculator(&BoundsQuery::RegimeC1 { n: 16, t: 3, d: 4, rho_r: 1.0 / 16.0, rho_w: 1.0 }).unwrap();
        assert_eq!(a.verdict, "main");
    }
}
