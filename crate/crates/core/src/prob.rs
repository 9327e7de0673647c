//! Exact probabilities.

use num_rational::Ratio;

pub type Exact = Ratio<u128>;

pub fn exact(num: u128, den: u128) -> Exact {
    Ratio::new(num, den)
}

pub fn to_f64(p: &Exact) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// `|a - b|` without leaving the unsigned domain.
pub fn abs_diff(a: &Exact, b: &Exact) -> Exact {
    if a >= b {
        a - b
    } else {
        b - a
    }
}
