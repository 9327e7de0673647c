//! Affine subspaces of packed GF(2) words and their images under linear maps.
//!
//! Conditioned on a fixed read value, the codewords of a linear scheme form a coset
//! of a subspace, and every quantity the experiments need is a linear function of
//! the codeword. Its distribution over the coset is uniform on an affine image,
//! which these helpers compute without enumerating the coset.

use crate::codes::{gray_walk, BitLinearMap};

/// The solutions `offset ^ span(kernel)` of a masked linear system.
#[derive(Clone, Debug)]
pub(crate) struct Section {
    pub offset: u64,
    pub kernel: Vec<u64>,
}

/// Reduces `basis` against the bits in `mask` once, so that many targets can be solved.
#[derive(Clone, Debug)]
pub(crate) struct MaskedSolver {
    /// `(pivot bit, masked key, full vector)`, each key free of earlier pivots.
    pivots: Vec<(u32, u64, u64)>,
    kernel: Vec<u64>,
    mask: u64,
}

impl MaskedSolver {
    /// `basis` must be linearly independent.
    pub fn new(basis: &[u64], mask: u64) -> Self {
        let mut pivots: Vec<(u32, u64, u64)> = Vec::new();
        let mut kernel = Vec::new();
        for &b in basis {
            let (mut key, mut full) = (b & mask, b);
            for &(p, k, f) in &pivots {
                if (key >> p) & 1 == 1 {
                    key ^= k;
                    full ^= f;
                }
            }
            if key == 0 {
                kernel.push(full);
            } else {
                pivots.push((63 - key.leading_zeros(), key, full));
            }
        }
        MaskedSolver { pivots, kernel, mask }
    }

    /// All `y` in the span with `y & mask == target & mask`, or `None`.
    pub fn solve(&self, target: u64) -> Option<Section> {
        let mut t = target & self.mask;
        let mut offset = 0;
        for &(p, k, f) in &self.pivots {
            if (t >> p) & 1 == 1 {
                t ^= k;
                offset ^= f;
            }
        }
        (t == 0).then(|| Section { offset, kernel: self.kernel.clone() })
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel.len()
    }
}

/// An independent set spanning the same space as `v`, with distinct leading bits in
/// decreasing order.
pub(crate) fn independent(v: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut rows: Vec<u64> = Vec::new();
    for mut x in v {
        for &r in &rows {
            if (x >> (63 - r.leading_zeros())) & 1 == 1 {
                x ^= r;
            }
        }
        if x != 0 {
            let pos = rows.partition_point(|r| r.leading_zeros() < x.leading_zeros());
            rows.insert(pos, x);
        }
    }
    rows
}

/// Visits each point of `map(section)` with its multiplicity (a power of two).
pub(crate) fn for_each_image(
    map: &BitLinearMap,
    constant: u64,
    section: &Section,
    mut visit: impl FnMut(u64, u128),
) {
    let image = independent(section.kernel.iter().map(|&k| map.apply(k)));
    let mult = 1u128 << (section.kernel.len() - image.len());
    let base = map.apply(section.offset) ^ constant;
    gray_walk(&image, |v| visit(base ^ v, mult));
}

/// Multiplicity of `target` in `map(section) ^ constant`; zero when unreachable.
pub(crate) fn image_count(map: &BitLinearMap, constant: u64, section: &Section, target: u64) -> u128 {
    let image = independent(section.kernel.iter().map(|&k| map.apply(k)));
    let base = map.apply(section.offset) ^ constant;
    match MaskedSolver::new(&image, u64::MAX).solve(base ^ target) {
        Some(_) => 1u128 << (section.kernel.len() - image.len()),
        None => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(basis: &[u64]) -> Vec<u64> {
        let mut out = Vec::new();
        gray_walk(basis, |x| out.push(x));
        out
    }

    proptest! {
        #[test]
        fn solver_matches_enumeration(raw in prop::collection::vec(0u64..1 << 12, 1..7), mask in 0u64..1 << 12, target in 0u64..1 << 12) {
            let basis = independent(raw);
            let solver = MaskedSolver::new(&basis, mask);
            let expected: Vec<u64> = span(&basis).into_iter().filter(|y| y & mask == target & mask).collect();
            match solver.solve(target) {
                None => prop_assert!(expected.is_empty()),
                Some(sec) => {
                    let mut got: Vec<u64> = span(&sec.kernel).into_iter().map(|k| k ^ sec.offset).collect();
                    got.sort_unstable();
                    let mut want = expected.clone();
                    want.sort_unstable();
                    prop_assert_eq!(got, want);
                }
            }
        }

        #[test]
        fn image_matches_enumeration(raw in prop::collection::vec(0u64..1 << 10, 1..6), m0 in 0u64..1 << 10, m1 in 0u64..1 << 10, m2 in 0u64..1 << 10, c in 0u64..8) {
            let basis = independent(raw);
            let map = BitLinearMap::from_fn(10, 3, |x| {
                let b = |m: u64| ((x & m).count_ones() & 1) as u64;
                (b(m0) << 2) | (b(m1) << 1) | b(m2)
            });
            let sec = Section { offset: 0x155, kernel: basis.clone() };
            let mut want = std::collections::BTreeMap::new();
            for y in span(&basis) {
                *want.entry(map.apply(y ^ 0x155) ^ c).or_insert(0u128) += 1;
            }
            let mut got = std::collections::BTreeMap::new();
            for_each_image(&map, c, &sec, |z, k| *got.entry(z).or_insert(0u128) += k);
            prop_assert_eq!(&got, &want);
            for z in 0..8 {
                prop_assert_eq!(image_count(&map, c, &sec, z), want.get(&z).copied().unwrap_or(0));
            }
        }
    }
}
