//! Linear error-correcting secret sharing as a nested pair `C ⊂ C̄` of binary codes.
//!
//! The generator of `C̄` lists the `r` rows spanning `C` first and the `ℓ` message
//! rows after them; `Enc(m; R) = [R m] · Gen`.

use std::fmt::Write as _;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{binary_basis, gray_walk, BitLinearMap, LinearCode};
use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Field, FieldMatrix, FieldVector};
use crate::wiretap::{combine, project_word};

/// Upper limit on `ℓ + r` for [`lecss_verify`].
pub const MAX_VERIFY_DIM: usize = 22;
const BUILD_RETRIES: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LecssCode {
    outer: LinearCode,
    r: usize,
    ell: usize,
    d: usize,
    t: usize,
}

impl LecssCode {
    /// Wraps a generator whose first `r` rows span the inner code, then verifies `(d, t)`.
    pub fn from_generator(label: impl Into<String>, generator: FieldMatrix, r: usize) -> Result<Self> {
        if !generator.field().is_binary() {
            return Err(Error::FieldMismatch);
        }
        if r > generator.rows() {
            return Err(invalid("inner dimension exceeds generator rows"));
        }
        let outer = LinearCode::from_generator(label, generator)?;
        let ell = outer.k() - r;
        let mut code = LecssCode { outer, r, ell, d: 0, t: 0 };
        let (d, t) = lecss_verify(&code)?;
        code.d = d;
        code.t = t;
        Ok(code)
    }

    pub fn outer(&self) -> &LinearCode {
        &self.outer
    }

    pub fn n(&self) -> usize {
        self.outer.n()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn inner_generator(&self) -> FieldMatrix {
        self.outer.generator().row_block(0, self.r)
    }

    /// The subcode `C` spanned by the randomness rows.
    pub fn inner(&self) -> Result<LinearCode> {
        LinearCode::from_generator(format!("inner({})", self.outer.label()), self.inner_generator())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("lecss r={} ell={}\n", self.r, self.ell);
        s.push_str(&self.outer.to_text());
        let _ = writeln!(s, "(d,t) verified: ({},{})", self.d, self.t);
        s
    }

    /// Parses [`to_text`](Self::to_text) output and re-verifies; a stale footer is an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let bad = |msg: &str| Error::Parse { line: ln, msg: msg.into() };
        let mut r = None;
        for tok in header.strip_prefix("lecss ").ok_or_else(|| bad("expected 'lecss' header"))?.split_whitespace() {
            if let Some(v) = tok.strip_prefix("r=") {
                r = v.parse::<usize>().ok();
            }
        }
        let r = r.ok_or_else(|| bad("missing r="))?;
        let outer = LinearCode::from_lines(&mut lines)?;
        let code = Self::from_generator(outer.label().to_string(), outer.generator().clone(), r)?;
        if let Some((fl, footer)) = lines.next() {
            let want = format!("(d,t) verified: ({},{})", code.d, code.t);
            if footer.trim() != want {
                return Err(Error::Parse { line: fl, msg: format!("footer disagrees with verification: {want}") });
            }
        }
        Ok(code)
    }
}

/// Random full-rank `(ℓ + r) × n` generator, reproducible from `seed`.
pub fn lecss_build_random(n: usize, ell: usize, r: usize, seed: u64) -> Result<LecssCode> {
    if ell + r > n {
        return Err(invalid(format!("ell + r = {} exceeds n = {n}", ell + r)));
    }
    if ell == 0 {
        return Err(invalid("LECSS needs a nonempty message"));
    }
    let f = Field::gf2();
    for attempt in 0..BUILD_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let data = (0..(ell + r) * n).map(|_| rng.gen_range(0..2)).collect();
        let g = FieldMatrix::new(&f, ell + r, n, data)?;
        if g.rank() == ell + r {
            return LecssCode::from_generator(format!("random n={n} ell={ell} r={r} seed={seed}"), g, r);
        }
    }
    Err(Error::RankDeficient(format!("no full-rank generator after {BUILD_RETRIES} draws")))
}

pub fn lecss_encode(code: &LecssCode, m: &FieldVector, r: &FieldVector) -> Result<FieldVector> {
    check_len(code.ell, m.len())?;
    check_len(code.r, r.len())?;
    code.outer.generator().mat_vec_mul(&r.concat(m)?)
}

/// `None` when `x` is not a codeword of `C̄`, otherwise the label of its coset of `C`.
pub fn lecss_decode(code: &LecssCode, x: &FieldVector) -> Result<Option<FieldVector>> {
    let p = PackedLecss::new(code);
    check_len(code.n(), x.len())?;
    Ok(p.decode(x.to_word()).map(|m| FieldVector::from_word(x.field(), m, code.ell)))
}

/// Bit-packed encoder and decoder.
#[derive(Clone, Debug)]
pub(crate) struct PackedLecss {
    pub r_basis: Vec<u64>,
    pub m_basis: Vec<u64>,
    pub syndrome: BitLinearMap,
    pub label: BitLinearMap,
}

impl PackedLecss {
    pub fn new(code: &LecssCode) -> Self {
        let g = code.outer.generator();
        let basis = binary_basis(g);
        let n = code.n();
        // coordinates c with x = c * Gen, for x in C̄: pick pivot columns of Gen
        let (_, pivots) = g.rref();
        let k = g.rows();
        let cols = pivots;
        let sub_rows: Vec<Vec<u16>> = (0..k).map(|i| cols.iter().map(|&c| g.get(i, c)).collect()).collect();
        let sub = FieldMatrix::from_rows(g.field(), &sub_rows, k).expect("square");
        let inv = sub.inverse().expect("pivot columns are independent");
        let ell = code.ell;
        let label = BitLinearMap::from_fn(n, ell, |x| {
            let xv = FieldVector::from_word(g.field(), x, n);
            let xs = xv.project(&cols).expect("pivots in range");
            let c = inv.mat_vec_mul(&xs).expect("square");
            c.to_word() & ((1u64 << ell) - 1)
        });
        PackedLecss {
            r_basis: basis[..code.r].to_vec(),
            m_basis: basis[code.r..].to_vec(),
            syndrome: BitLinearMap::from_matrix(&code.outer.parity_check().transpose()),
            label,
        }
    }

    #[cfg(test)]
    pub fn encode(&self, m: u64, r: u64) -> u64 {
        combine(&self.m_basis, m) ^ combine(&self.r_basis, r)
    }

    pub fn decode(&self, x: u64) -> Option<u64> {
        (self.syndrome.apply(x) == 0).then(|| self.label.apply(x))
    }

    pub fn for_each_codeword(&self, m: u64, mut visit: impl FnMut(u64)) {
        let base = combine(&self.m_basis, m);
        gray_walk(&self.r_basis, |c| visit(base ^ c));
    }
}

/// `(d, t)` by brute force: `d` is the minimum weight of `C̄` and `t` the largest `τ`
/// such that, for every message, every `τ` positions of the encoding are uniform over
/// the randomness.
pub fn lecss_verify(code: &LecssCode) -> Result<(usize, usize)> {
    let n = code.n();
    if code.ell + code.r > MAX_VERIFY_DIM {
        return Err(Error::Infeasible(format!(
            "LECSS verification enumerates 2^{} codewords; limit is 2^{MAX_VERIFY_DIM}",
            code.ell + code.r
        )));
    }
    let d = code.outer.min_distance()?;
    let p = PackedLecss::new(code);
    let words: Vec<Vec<u64>> = (0..1u64 << code.ell)
        .map(|m| {
            let mut v = Vec::with_capacity(1 << code.r);
            p.for_each_codeword(m, |x| v.push(x));
            v
        })
        .collect();
    let mut t = 0;
    for tau in 1..=code.r.min(n) {
        let sets: Vec<Vec<usize>> = (0..n).combinations(tau).collect();
        let all_uniform = sets.par_iter().all(|set| {
            words.iter().all(|ws| {
                let mut h = vec![0u32; 1 << tau];
                for &x in ws {
                    h[project_word(x, n, 1, set) as usize] += 1;
                }
                let target = (ws.len() >> tau) as u32;
                h.iter().all(|&c| c == target)
            })
        });
        if !all_uniform {
            break;
        }
        t = tau;
    }
    Ok((d, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{dual_code, hamming_code, reed_muller_code};

    fn rm_pair() -> LecssCode {
        let g = reed_muller_code(2, 4).unwrap().generator().clone();
        LecssCode::from_generator("rm(1,4) in rm(2,4)", g, 5).unwrap()
    }

    #[test]
    fn reed_muller_pair_parameters() {
        let c = rm_pair();
        assert_eq!((c.n(), c.r(), c.ell(), c.d(), c.t()), (16, 5, 6, 4, 3));
        assert_eq!(c.t() + 1, c.inner().unwrap().dual_distance().unwrap());
    }

    #[test]
    fn deterministic_random_build() {
        let a = lecss_build_random(8, 2, 3, 42).unwrap();
        let b = lecss_build_random(8, 2, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(lecss_build_random(8, 2, 0, 1).unwrap().t(), 0);
        assert!(lecss_build_random(4, 3, 2, 0).is_err());
    }

    #[test]
    fn uniformity_frequent_at_n16() {
        let hits = (0..10).filter(|&s| lecss_build_random(16, 2, 8, s).unwrap().t() >= 1).count();
        assert!(hits >= 8, "only {hits} of 10 seeds gave t >= 1");
    }

    #[test]
    fn t_matches_inner_dual_distance() {
        for seed in 0..12 {
            let c = lecss_build_random(10, 2, 4, seed).unwrap();
            let inner = c.inner().unwrap();
            assert_eq!(c.t() + 1, inner.dual_distance().unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn d_matches_independent_sweep() {
        let h = hamming_code(3).unwrap();
        // Hamming [7,4] with its even-weight [7,3] subcode (the simplex code) inside
        let simplex = dual_code(&h).unwrap();
        let mut rows = simplex.generator().row_vectors();
        for v in h.generator().row_vectors() {
            let trial = FieldMatrix::from_vectors(&Field::gf2(), &[rows.clone(), vec![v.clone()]].concat(), 7).unwrap();
            if trial.rank() == rows.len() + 1 {
                rows.push(v);
            }
        }
        let g = FieldMatrix::from_vectors(&Field::gf2(), &rows, 7).unwrap();
        let c = LecssCode::from_generator("hamming/simplex", g, 3).unwrap();
        assert_eq!(c.d(), h.min_distance().unwrap());
        assert_eq!(c.t(), 2);
    }

    #[test]
    fn weight_one_word_gives_distance_one() {
        let g = FieldMatrix::from_bit_rows(&["110000", "001100", "000001"]).unwrap();
        assert_eq!(LecssCode::from_generator("w1", g, 2).unwrap().d(), 1);
    }

    #[test]
    fn decode_properties_exhaustive() {
        let c = rm_pair();
        let f = Field::gf2();
        let p = PackedLecss::new(&c);
        for m in 0..1u64 << c.ell() {
            for r in (0..1u64 << c.r()).step_by(3) {
                let x = lecss_encode(&c, &FieldVector::from_word(&f, m, c.ell()), &FieldVector::from_word(&f, r, c.r())).unwrap();
                assert_eq!(x.to_word(), p.encode(m, r));
                assert_eq!(p.decode(x.to_word()), Some(m));
            }
        }
        // light nonzero words are rejected
        for x in 1u64..1 << 16 {
            let w = x.count_ones() as usize;
            if w < c.d() {
                assert_eq!(p.decode(x), None);
            }
        }
        // linearity on decodable pairs
        let mut valid = Vec::new();
        p.for_each_codeword(5, |x| valid.push(x));
        p.for_each_codeword(9, |x| valid.push(x));
        for &a in valid.iter().step_by(7) {
            for &b in valid.iter().step_by(5) {
                let (da, db) = (p.decode(a).unwrap(), p.decode(b).unwrap());
                assert_eq!(p.decode(a ^ b), Some(da ^ db));
            }
        }
        let off = FieldVector::from_word(&f, 1, 16);
        assert_eq!(lecss_decode(&c, &off).unwrap(), None);
    }

    #[test]
    fn text_round_trip() {
        let c = lecss_build_random(9, 2, 4, 3).unwrap();
        let t = c.to_text();
        assert!(t.trim_end().ends_with(&format!("(d,t) verified: ({},{})", c.d(), c.t())));
        assert_eq!(LecssCode::from_text(&t).unwrap(), c);
        let footer = format!("(d,t) verified: ({},{})", c.d(), c.t());
        let stale = t.replace(&footer, "(d,t) verified: (99,99)");
        assert!(LecssCode::from_text(&stale).is_err());
    }
}
