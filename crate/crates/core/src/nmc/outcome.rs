//! Decoder outcomes and distributions over them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::prob::{exact, Exact};

/// `⊥`, `same*`, or a decoded message packed into the low `k` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Bot,
    SameStar,
    Message(u64),
}

impl Outcome {
    pub fn render(&self, k: u32) -> String {
        match self {
            Outcome::Bot => "bot".into(),
            Outcome::SameStar => "same*".into(),
            Outcome::Message(m) => (0..k).rev().map(|i| if (m >> i) & 1 == 1 { '1' } else { '0' }).collect(),
        }
    }

    pub fn from_option(m: Option<u64>) -> Self {
        m.map_or(Outcome::Bot, Outcome::Message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistMode {
    /// Counts over the full randomness space.
    Exact,
    /// Counts over `total` independent samples.
    Empirical,
}

/// Mass function over outcomes stored as integer counts out of `total`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    k: u32,
    mode: DistMode,
    counts: BTreeMap<Outcome, u128>,
    total: u128,
}

impl OutcomeDistribution {
    pub fn from_counts(k: u32, mode: DistMode, counts: impl IntoIterator<Item = (Outcome, u128)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (o, c) in counts {
            if let Outcome::Message(m) = o {
                if k < 64 && m >> k != 0 {
                    return Err(Error::InvalidParameter(format!("message {m:#x} exceeds {k} bits")));
                }
            }
            if c > 0 {
                *map.entry(o).or_insert(0) += c;
            }
        }
        let total = map.values().sum();
        if total == 0 {
            return Err(Error::InvalidParameter("distribution has no mass".into()));
        }
        Ok(OutcomeDistribution { k, mode, counts: map, total })
    }

    pub fn point(k: u32, o: Outcome) -> Self {
        OutcomeDistribution { k, mode: DistMode::Exact, counts: BTreeMap::from([(o, 1)]), total: 1 }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn mode(&self) -> DistMode {
        self.mode
    }

    /// Randomness-space size (exact) or sample count (empirical).
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn count(&self, o: Outcome) -> u128 {
        self.counts.get(&o).copied().unwrap_or(0)
    }

    pub fn prob(&self, o: Outcome) -> Exact {
        exact(self.count(o), self.total)
    }

    pub fn support(&self) -> impl Iterator<Item = (Outcome, u128)> + '_ {
        self.counts.iter().map(|(o, c)| (*o, *c))
    }

    pub fn is_point(&self, o: Outcome) -> bool {
        self.counts.len() == 1 && self.count(o) == self.total
    }

    /// Stable text form; equal distributions give equal bytes.
    pub fn canonical(&self) -> String {
        let mode = match self.mode {
            DistMode::Exact => "exact",
            DistMode::Empirical => "empirical",
        };
        let mut s = format!("k={} mode={mode} total={}\n", self.k, self.total);
        for (o, c) in &self.counts {
            let _ = writeln!(s, "{} {c}", o.render(self.k));
        }
        s
    }
}

/// Moves the `same*` mass onto `Message(m)`.
pub fn patch(d: &OutcomeDistribution, m: u64) -> OutcomeDistribution {
    let mut out = d.clone();
    if let Some(c) = out.counts.remove(&Outcome::SameStar) {
        *out.counts.entry(Outcome::Message(m)).or_insert(0) += c;
    }
    out
}

/// Half the L1 distance. Comparing an exact with an empirical distribution is an
/// error unless `allow_mixed` is set.
pub fn statistical_distance(p: &OutcomeDistribution, q: &OutcomeDistribution, allow_mixed: bool) -> Result<Exact> {
    check_len(p.k as usize, q.k as usize)?;
    if p.mode != q.mode && !allow_mixed {
        return Err(Error::MixedModes);
    }
    let (a, b) = (p.total, q.total);
    let keys: std::collections::BTreeSet<&Outcome> = p.counts.keys().chain(q.counts.keys()).collect();
    let mut num = 0u128;
    for o in keys {
        let x = p.count(*o) * b;
        let y = q.count(*o) * a;
        num += x.abs_diff(y);
    }
    Ok(exact(num, 2 * a * b))
}
