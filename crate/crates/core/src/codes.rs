//! Linear codes: Hamming, Simplex, Reed-Solomon, duals, exhaustive distances
//! and coset labelling.

use std::fmt::Write as _;

use itertools::Itertools;

use crate::error::{check_len, invalid, Error, Result};
use crate::field::{Elem, Field, FieldMatrix, FieldVector};

/// Largest GF(2)-dimension (`k * w`) swept when computing a distance.
pub const MAX_SWEEP_BITS: u32 = 26;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    label: String,
    field: Field,
    n: usize,
    k: usize,
    generator: FieldMatrix,
    parity_check: FieldMatrix,
    min_distance: Option<usize>,
    dual_distance: Option<usize>,
}

impl LinearCode {
    /// A code spanned by the rows of `generator`, which must be linearly independent.
    ///
    /// Both distances are computed here when the sweep is small enough, and left
    /// unset otherwise.
    pub fn from_generator(label: impl Into<String>, generator: FieldMatrix) -> Result<Self> {
        if generator.rank() != generator.rows() {
            return Err(Error::RankDeficient("generator rows are dependent".into()));
        }
        let parity_check = generator.null_space();
        Self::assemble(label.into(), generator, parity_check)
    }

    fn assemble(label: String, generator: FieldMatrix, parity_check: FieldMatrix) -> Result<Self> {
        let field = generator.field().clone();
        let (n, k) = (generator.cols(), generator.rows());
        let prod = generator.mul(&parity_check.transpose())?;
        if (0..prod.rows()).any(|r| prod.row(r).iter().any(|&e| e != 0)) {
            return Err(invalid("G * H^T is not zero"));
        }
        let min_distance = sweep_min_weight(&generator).ok();
        let dual_distance = sweep_min_weight(&parity_check).ok();
        Ok(LinearCode { label, field, n, k, generator, parity_check, min_distance, dual_distance })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &FieldMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &FieldMatrix {
        &self.parity_check
    }

    /// Minimum weight of a nonzero codeword (`n + 1` for the zero code).
    pub fn min_distance(&self) -> Result<usize> {
        self.min_distance.ok_or_else(|| too_large(self.k, &self.field))
    }

    /// Minimum distance of the dual code.
    pub fn dual_distance(&self) -> Result<usize> {
        self.dual_distance.ok_or_else(|| too_large(self.n - self.k, &self.field))
    }

    pub fn encode(&self, msg: &FieldVector) -> Result<FieldVector> {
        self.generator.mat_vec_mul(msg)
    }

    pub fn syndrome(&self, x: &FieldVector) -> Result<FieldVector> {
        check_len(self.n, x.len())?;
        self.parity_check.transpose().mat_vec_mul(x)
    }

    pub fn contains(&self, x: &FieldVector) -> Result<bool> {
        Ok(self.syndrome(x)?.is_zero())
    }

    /// Text form: a `code` header line followed by the generator matrix.
    pub fn to_text(&self) -> String {
        let fmt_opt = |d: Option<usize>| d.map_or("?".to_string(), |d| d.to_string());
        let mut s = String::new();
        let _ = writeln!(
            s,
            "code {} | n={} k={} d={} dual_d={}",
            self.label,
            self.n,
            self.k,
            fmt_opt(self.min_distance),
            fmt_opt(self.dual_distance)
        );
        s.push_str(&self.generator.to_text());
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let code = Self::from_lines(&mut lines)?;
        Ok(code)
    }

    pub(crate) fn from_lines<'a, I>(lines: &mut I) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let rest = header
            .strip_prefix("code ")
            .ok_or_else(|| Error::Parse { line: ln, msg: "expected 'code' header".into() })?;
        let label = rest.split(" | ").next().unwrap_or_default().to_string();
        let g = FieldMatrix::from_lines(lines)?;
        Self::from_generator(label, g)
    }
}

fn too_large(dim: usize, field: &Field) -> Error {
    Error::Infeasible(format!(
        "exhaustive sweep over {}^{dim} codewords exceeds 2^{MAX_SWEEP_BITS}; use smaller code",
        field.order()
    ))
}

/// `[2^h - 1, 2^h - 1 - h, 3]` Hamming code. Column `j` of the parity-check matrix
/// is the binary expansion of `j + 1`, most significant bit in row 0.
pub fn hamming_code(h: u32) -> Result<LinearCode> {
    if !(2..=16).contains(&h) {
        return Err(invalid(format!("Hamming parameter h = {h} must be in 2..=16")));
    }
    let f = Field::gf2();
    let n = (1usize << h) - 1;
    let mut data = vec![0; h as usize * n];
    for j in 0..n {
        let col = j + 1;
        for r in 0..h as usize {
            data[r * n + j] = ((col >> (h as usize - 1 - r)) & 1) as Elem;
        }
    }
    let parity_check = FieldMatrix::new(&f, h as usize, n, data)?;
    let generator = parity_check.null_space();
    LinearCode::assemble(format!("hamming h={h}"), generator, parity_check)
}

/// `[2^h - 1, h, 2^(h-1)]` Simplex code, the dual of [`hamming_code`].
pub fn simplex_code(h: u32) -> Result<LinearCode> {
    let mut c = dual_code(&hamming_code(h)?)?;
    c.label = format!("simplex h={h}");
    Ok(c)
}

pub fn repetition_code(n: usize) -> Result<LinearCode> {
    if n == 0 {
        return Err(invalid("repetition code needs n >= 1"));
    }
    let g = FieldMatrix::from_rows(&Field::gf2(), &[vec![1; n]], n)?;
    LinearCode::from_generator(format!("repetition n={n}"), g)
}

/// The dual code. Its generator is the row-reduced parity-check matrix of `code`.
pub fn dual_code(code: &LinearCode) -> Result<LinearCode> {
    let generator = code.parity_check.row_reduced_basis();
    let parity_check = code.generator.row_reduced_basis();
    LinearCode::assemble(format!("dual({})", code.label), generator, parity_check)
}

/// Reed-Solomon code evaluating polynomials of degree `< k` at `1, a, a^2, ...`
/// for the field generator `a`, with `0` appended as the last point when `n = q`.
pub fn reed_solomon_code(field: &Field, n: usize, k: usize) -> Result<LinearCode> {
    let q = field.order() as usize;
    if n > q {
        return Err(invalid(format!("Reed-Solomon length {n} exceeds field size {q}")));
    }
    if k > n {
        return Err(invalid(format!("dimension {k} exceeds length {n}")));
    }
    let points: Vec<Elem> = (0..n)
        .map(|j| if j == q - 1 { 0 } else { field.exp(j as u64) })
        .collect();
    let rows: Vec<Vec<Elem>> = (0..k)
        .map(|i| points.iter().map(|&x| field.pow(x, i as u64)).collect())
        .collect();
    let g = FieldMatrix::from_rows(field, &rows, n)?;
    LinearCode::from_generator(format!("reed-solomon q={q} n={n} k={k}"), g)
}

/// Reed-Muller code `RM(r, m)`: evaluations of monomials of degree at most `r` in
/// `m` variables at all points of GF(2)^m. Rows are ordered by degree, then
/// lexicographically by variable set, so `RM(r-1, m)` spans the leading rows.
pub fn reed_muller_code(r: u32, m: u32) -> Result<LinearCode> {
    if m == 0 || m > 6 || r > m {
        return Err(invalid(format!("RM({r}, {m}) needs 1 <= m <= 6 and r <= m")));
    }
    let n = 1usize << m;
    let mut rows = Vec::new();
    for deg in 0..=r as usize {
        for vars in (0..m as usize).combinations(deg) {
            let row = (0..n)
                .map(|p| vars.iter().all(|&v| (p >> (m as usize - 1 - v)) & 1 == 1) as Elem)
                .collect();
            rows.push(row);
        }
    }
    let g = FieldMatrix::from_rows(&Field::gf2(), &rows, n)?;
    LinearCode::from_generator(format!("reed-muller r={r} m={m}"), g)
}

/// A GF(2)-linear map on packed words: output bit `j` (most significant first) is
/// the parity of `x & masks[j]`. Every GF(q)-linear map on packed symbols has this form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitLinearMap {
    masks: Vec<u64>,
}

impl BitLinearMap {
    /// Builds the map from its action on the input unit bits `1 << i`, `i < in_bits`.
    pub fn from_fn(in_bits: usize, out_bits: usize, f: impl Fn(u64) -> u64) -> Self {
        let mut masks = vec![0u64; out_bits];
        for i in 0..in_bits {
            let y = f(1u64 << i);
            for (j, m) in masks.iter_mut().enumerate() {
                if (y >> (out_bits - 1 - j)) & 1 == 1 {
                    *m |= 1 << i;
                }
            }
        }
        BitLinearMap { masks }
    }

    /// `x -> x * m` for a matrix with `rows` symbols in and `cols` symbols out.
    pub fn from_matrix(m: &FieldMatrix) -> Self {
        let f = m.field().clone();
        let w = f.degree() as usize;
        Self::from_fn(m.rows() * w, m.cols() * w, |x| {
            let v = FieldVector::from_word(&f, x, m.rows());
            m.mat_vec_mul(&v).expect("dimensions agree").to_word()
        })
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        self.masks.iter().fold(0, |acc, &m| (acc << 1) | ((x & m).count_ones() & 1) as u64)
    }

    /// `x -> apply(x & pass)`.
    pub fn masked(&self, pass: u64) -> Self {
        BitLinearMap { masks: self.masks.iter().map(|m| m & pass).collect() }
    }

    /// Outputs of `self` followed by the outputs of `low`.
    pub fn stack(&self, low: &BitLinearMap) -> Self {
        BitLinearMap { masks: self.masks.iter().chain(&low.masks).copied().collect() }
    }
}

/// Maps a word to the label of its coset of `code`, given the labelling rows `coset_map`.
///
/// `coset_map` must have `n - k` rows and complete the code's generator to a basis.
/// Labels are read off the syndrome: `label = (x H^T) (Ĝ H^T)^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetLabeler {
    /// `n x l` matrix with `label = x * map`.
    map: FieldMatrix,
}

impl CosetLabeler {
    pub fn new(code: &LinearCode, coset_map: &FieldMatrix) -> Result<Self> {
        check_len(code.n - code.k, coset_map.rows())?;
        check_len(code.n, coset_map.cols())?;
        let ht = code.parity_check.transpose();
        let square = coset_map.mul(&ht)?;
        let inv = square
            .inverse()
            .map_err(|_| Error::RankDeficient("coset map does not complete the code to a basis".into()))?;
        Ok(CosetLabeler { map: ht.mul(&inv)? })
    }

    pub fn label(&self, x: &FieldVector) -> Result<FieldVector> {
        self.map.mat_vec_mul(x)
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.map
    }
}

pub fn coset_syndrome_decode(code: &LinearCode, x: &FieldVector, coset_map: &FieldMatrix) -> Result<FieldVector> {
    CosetLabeler::new(code, coset_map)?.label(x)
}

/// A GF(2)-basis of the GF(q)-row space of `m`: row `i` scaled by `x^b` sits at
/// index `i * w + (w - 1 - b)`, so that coefficient bits read most significant first.
pub(crate) fn binary_basis(m: &FieldMatrix) -> Vec<u64> {
    let f = m.field();
    let w = f.degree();
    let mut out = Vec::with_capacity(m.rows() * w as usize);
    for r in m.row_vectors() {
        for b in (0..w).rev() {
            out.push(r.scale(1 << b).to_word());
        }
    }
    out
}

/// Calls `visit` on every GF(2)-combination of `basis` (including zero) in Gray-code order.
pub(crate) fn gray_walk(basis: &[u64], mut visit: impl FnMut(u64)) {
    let mut x = 0u64;
    visit(x);
    for i in 1u64..(1u64 << basis.len()) {
        x ^= basis[i.trailing_zeros() as usize];
        visit(x);
    }
}

/// Number of nonzero `w`-bit symbols in a packed word.
#[inline]
pub(crate) fn symbol_weight(x: u64, w: u32) -> u32 {
    if w == 1 {
        return x.count_ones();
    }
    let mut low = 0u64;
    let mut i = 0;
    while i < 64 {
        low |= 1 << i;
        i += w;
    }
    let mut y = x;
    for b in 1..w {
        y |= x >> b;
    }
    (y & low).count_ones()
}

fn sweep_min_weight(g: &FieldMatrix) -> Result<usize> {
    let f = g.field();
    let dim_bits = g.rows() as u32 * f.degree();
    if dim_bits > MAX_SWEEP_BITS {
        return Err(too_large(g.rows(), f));
    }
    if g.rows() == 0 {
        return Ok(g.cols() + 1);
    }
    if g.cols() * f.degree() as usize <= 64 {
        let basis = binary_basis(g);
        let w = f.degree();
        let mut best = u32::MAX;
        gray_walk(&basis, |x| {
            if x != 0 {
                best = best.min(symbol_weight(x, w));
            }
        });
        return Ok(best as usize);
    }
    // Wide words: walk with explicit vectors.
    let basis: Vec<FieldVector> = binary_basis_vectors(g);
    let mut x = FieldVector::zeros(f, g.cols());
    let mut best = usize::MAX;
    for i in 1u64..(1u64 << basis.len()) {
        x = x.add(&basis[i.trailing_zeros() as usize])?;
        best = best.min(x.weight());
    }
    Ok(best)
}

fn binary_basis_vectors(m: &FieldMatrix) -> Vec<FieldVector> {
    let w = m.field().degree();
    m.row_vectors()
        .iter()
        .flat_map(|r| (0..w).rev().map(move |b| r.scale(1 << b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    /// Slow oracle: expand every codeword as a vector and take the minimum weight.
    fn brute_min_distance(c: &LinearCode) -> usize {
        let f = c.field();
        let q = f.order() as u64;
        let mut best = usize::MAX;
        for idx in 1..q.pow(c.k() as u32) {
            let mut digits = Vec::new();
            let mut t = idx;
            for _ in 0..c.k() {
                digits.push((t % q) as Elem);
                t /= q;
            }
            let m = FieldVector::new(f, digits).unwrap();
            best = best.min(c.encode(&m).unwrap().weight());
        }
        best
    }

    #[test]
    fn hamming_parameters() {
        let c = hamming_code(3).unwrap();
        assert_eq!((c.n(), c.k()), (7, 4));
        assert_eq!(c.min_distance().unwrap(), 3);
        assert_eq!(c.dual_distance().unwrap(), 4);
        assert_eq!(brute_min_distance(&c), 3);
        // lexicographic parity-check columns
        assert_eq!(c.parity_check().row(0), &[0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(c.parity_check().row(2), &[1, 0, 1, 0, 1, 0, 1]);

        let c5 = hamming_code(5).unwrap();
        assert_eq!((c5.n(), c5.k()), (31, 26));
        assert_eq!(c5.min_distance().unwrap(), 3);
        assert_eq!(c5.dual_distance().unwrap(), 16);
        assert!(hamming_code(1).is_err());
    }

    #[test]
    fn simplex_and_duals() {
        let s = simplex_code(3).unwrap();
        assert_eq!((s.n(), s.k()), (7, 3));
        assert_eq!(s.min_distance().unwrap(), 4);
        assert_eq!(brute_min_distance(&s), 4);

        let h = hamming_code(4).unwrap();
        let back = dual_code(&dual_code(&h).unwrap()).unwrap();
        assert_eq!(back.generator().row_reduced_basis(), h.generator().row_reduced_basis());

        let full = LinearCode::from_generator("full", FieldMatrix::identity(&Field::gf2(), 5)).unwrap();
        let zero = dual_code(&full).unwrap();
        assert_eq!((zero.n(), zero.k()), (5, 0));
    }

    #[test]
    fn repetition_distance() {
        assert_eq!(repetition_code(5).unwrap().min_distance().unwrap(), 5);
    }

    #[test]
    fn reed_solomon_is_mds() {
        let f = Field::new(4).unwrap();
        let rs = reed_solomon_code(&f, 5, 3).unwrap();
        assert_eq!(rs.min_distance().unwrap(), 3);
        assert_eq!(brute_min_distance(&rs), 3);
        assert_eq!(rs.dual_distance().unwrap(), 4);
        assert_eq!(reed_solomon_code(&f, 4, 4).unwrap().min_distance().unwrap(), 1);
        assert!(reed_solomon_code(&f, 17, 2).is_err());
        // n = q uses 0 as the last evaluation point
        let full = reed_solomon_code(&f, 16, 2).unwrap();
        assert_eq!(full.generator().get(1, 15), 0);
        assert_eq!(full.min_distance().unwrap(), 15);
    }

    #[test]
    fn mds_sweep_for_small_instances() {
        for w in 2..=4u32 {
            let f = Field::new(w).unwrap();
            let q = f.order() as usize;
            for n in 1..=q {
                for k in 1..=n {
                    if (k as u32) * w > 20 {
                        continue;
                    }
                    let rs = reed_solomon_code(&f, n, k).unwrap();
                    assert_eq!(rs.min_distance().unwrap(), n - k + 1, "q={q} n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn sweep_refuses_large_codes() {
        let err = hamming_code(6).unwrap().min_distance().unwrap_err();
        assert!(err.to_string().contains("use smaller code"));
    }

    #[test]
    fn coset_decode_matches_full_table() {
        let c = hamming_code(3).unwrap();
        let f = Field::gf2();
        let ghat = c.generator().extend_to_full_rank(3, 5).unwrap().row_block(4, 7);
        let labeler = CosetLabeler::new(&c, &ghat).unwrap();
        let stacked = c.generator().vstack(&ghat).unwrap();
        let mut table: HashMap<u64, u64> = HashMap::new();
        for idx in 0..128u64 {
            let rm = FieldVector::from_word(&f, idx, 7);
            let x = stacked.mat_vec_mul(&rm).unwrap();
            table.insert(x.to_word(), idx & 0b111);
        }
        assert_eq!(table.len(), 128);
        for (x, m) in table {
            let lab = labeler.label(&FieldVector::from_word(&f, x, 7)).unwrap();
            assert_eq!(lab.to_word(), m);
        }
        assert!(coset_syndrome_decode(&c, &FieldVector::zeros(&f, 7), &ghat).unwrap().is_zero());
        let e1 = coset_syndrome_decode(&c, &ghat.row_vector(1), &ghat).unwrap();
        assert_eq!(e1, FieldVector::unit(&f, 3, 1));
    }

    #[test]
    fn text_round_trip() {
        let f = Field::new(4).unwrap();
        let rs = reed_solomon_code(&f, 5, 3).unwrap();
        let t = rs.to_text();
        assert!(t.starts_with("code reed-solomon q=16 n=5 k=3 | n=5 k=3 d=3 dual_d=4\n4 3 5\n"));
        let back = LinearCode::from_text(&t).unwrap();
        assert_eq!(back.label(), rs.label());
        assert_eq!(back.generator(), rs.generator());
        assert_eq!(back.min_distance().unwrap(), 3);
    }

    #[test]
    fn reed_muller_nesting() {
        let rm1 = reed_muller_code(1, 4).unwrap();
        let rm2 = reed_muller_code(2, 4).unwrap();
        assert_eq!((rm1.k(), rm1.min_distance().unwrap(), rm1.dual_distance().unwrap()), (5, 8, 4));
        assert_eq!((rm2.k(), rm2.min_distance().unwrap()), (11, 4));
        assert_eq!(rm2.generator().row_block(0, 5), *rm1.generator());
    }

    #[test]
    fn bit_linear_map_matches_matrix() {
        let f = Field::new(4).unwrap();
        let rs = reed_solomon_code(&f, 5, 2).unwrap();
        let map = BitLinearMap::from_matrix(&rs.parity_check().transpose());
        for x in [0u64, 1, 0x12345, 0xfffff, 0xa0b0c] {
            let v = FieldVector::from_word(&f, x, 5);
            assert_eq!(map.apply(x), rs.syndrome(&v).unwrap().to_word());
        }
    }

    #[test]
    fn symbol_weights() {
        assert_eq!(symbol_weight(0xa0f, 4), 2);
        assert_eq!(symbol_weight(0x111, 4), 3);
        assert_eq!(symbol_weight(0b1011, 1), 3);
        assert_eq!(symbol_weight(0b10_00_11, 2), 2);
    }
}
