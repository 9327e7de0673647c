use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gf::{Elem, Field};
use super::vector::FieldVector;
use crate::error::{check_len, invalid, Error, Result};

/// Dense row-major matrix over a binary extension field.
///
/// Vectors multiply from the left: `v * M` with `v.len() == M.rows()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl FieldMatrix {
    pub fn new(field: &Field, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        if let Some(bad) = data.iter().find(|&&e| !field.contains(e)) {
            return Err(invalid(format!("element {bad:#x} outside {field:?}")));
        }
        Ok(FieldMatrix { field: field.clone(), rows, cols, data })
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FieldMatrix { field: field.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds a matrix from equal-length rows. `cols` is needed only when `rows` is empty.
    pub fn from_rows(field: &Field, rows: &[Vec<Elem>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Self::new(field, rows.len(), cols, data)
    }

    pub fn from_vectors(field: &Field, rows: &[FieldVector], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.field() != field {
                return Err(Error::FieldMismatch);
            }
            check_len(cols, r.len())?;
            data.extend_from_slice(r.elems());
        }
        Ok(FieldMatrix { field: field.clone(), rows: rows.len(), cols, data })
    }

    /// Parses GF(2) rows written as bit strings, e.g. `["1011", "0110"]`.
    pub fn from_bit_rows(rows: &[&str]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let vecs = rows
            .iter()
            .map(|r| FieldVector::parse_bits(r))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(&Field::gf2(), &vecs, cols)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vector(&self, r: usize) -> FieldVector {
        FieldVector::from_parts(self.field.clone(), self.row(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<FieldVector> {
        (0..self.rows).map(|r| self.row_vector(r)).collect()
    }

    /// `v * self`, the row-vector convention used throughout the crate.
    pub fn mat_vec_mul(&self, v: &FieldVector) -> Result<FieldVector> {
        if v.field() != &self.field {
            return Err(Error::FieldMismatch);
        }
        check_len(self.rows, v.len())?;
        let f = &self.field;
        let mut out = vec![0; self.cols];
        for (r, &coef) in v.elems().iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o ^= f.mul(coef, m);
            }
        }
        Ok(FieldVector::from_parts(f.clone(), out))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if other.field != self.field {
            return Err(Error::FieldMismatch);
        }
        check_len(self.cols, other.rows)?;
        let rows = (0..self.rows)
            .map(|r| other.mat_vec_mul(&self.row_vector(r)).map(FieldVector::into_elems))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&self.field, &rows, other.cols)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// `self` on top of `below`.
    pub fn vstack(&self, below: &Self) -> Result<Self> {
        if below.field != self.field {
            return Err(Error::FieldMismatch);
        }
        check_len(self.cols, below.cols)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&below.data);
        Ok(FieldMatrix { field: self.field.clone(), rows: self.rows + below.rows, cols: self.cols, data })
    }

    /// Rows `start..end`.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        FieldMatrix {
            field: self.field.clone(),
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let f = &self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut lead = 0;
        for c in 0..self.cols {
            if lead == self.rows {
                break;
            }
            let Some(p) = (lead..self.rows).find(|&r| m.get(r, c) != 0) else { continue };
            m.swap_rows(lead, p);
            let inv = f.inv(m.get(lead, c)).expect("pivot is nonzero");
            for j in 0..self.cols {
                let idx = lead * self.cols + j;
                m.data[idx] = f.mul(m.data[idx], inv);
            }
            for r in 0..self.rows {
                let factor = m.get(r, c);
                if r != lead && factor != 0 {
                    for j in 0..self.cols {
                        let sub = f.mul(factor, m.data[lead * self.cols + j]);
                        m.data[r * self.cols + j] ^= sub;
                    }
                }
            }
            pivots.push(c);
            lead += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : self * x^T = 0}`, one basis vector per row.
    pub fn null_space(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &fc in &free {
            let mut v = vec![0; self.cols];
            v[fc] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                // characteristic 2: -a = a
                v[pc] = r.get(i, fc);
            }
            basis.push(v);
        }
        Self::from_rows(&self.field, &basis, self.cols).expect("rows have width cols")
    }

    /// The nonzero rows of the reduced row echelon form.
    pub fn row_reduced_basis(&self) -> Self {
        let (r, pivots) = self.rref();
        r.row_block(0, pivots.len())
    }

    pub fn inverse(&self) -> Result<Self> {
        check_len(self.rows, self.cols)?;
        let n = self.rows;
        let mut aug = Self::zeros(&self.field, n, 2 * n);
        for r in 0..n {
            aug.data[r * 2 * n..r * 2 * n + n].copy_from_slice(self.row(r));
            aug.data[r * 2 * n + n + r] = 1;
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::NonInvertible("matrix is singular".into()));
        }
        let data = (0..n).flat_map(|r| red.row(r)[n..].to_vec()).collect();
        Ok(FieldMatrix { field: self.field.clone(), rows: n, cols: n, data })
    }

    /// Appends `extra_rows` rows so that the result has full row rank.
    ///
    /// Candidate rows are drawn uniformly from a ChaCha stream seeded with `seed` and kept
    /// when they increase the rank, so the output is a pure function of the inputs.
    pub fn extend_to_full_rank(&self, extra_rows: usize, seed: u64) -> Result<Self> {
        if self.rows + extra_rows > self.cols {
            return Err(Error::RankDeficient(format!(
                "cannot have {} independent rows of length {}",
                self.rows + extra_rows,
                self.cols
            )));
        }
        if self.rank() != self.rows {
            return Err(Error::RankDeficient("input rows are linearly dependent".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order = self.field.order();
        let mut out = self.clone();
        let target = self.rows + extra_rows;
        let mut attempts = 0usize;
        while out.rows < target {
            attempts += 1;
            if attempts > 64 * (extra_rows + 1) + 1024 {
                return Err(Error::RankDeficient("random extension did not converge".into()));
            }
            let cand: Vec<Elem> = (0..self.cols).map(|_| rng.gen_range(0..order) as Elem).collect();
            let cand = FieldMatrix { field: self.field.clone(), rows: 1, cols: self.cols, data: cand };
            let trial = out.vstack(&cand)?;
            if trial.rank() == trial.rows {
                out = trial;
            }
        }
        Ok(out)
    }

    /// Text form: `w rows cols` on the first line, then one line of hex elements per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.field.degree(), self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|e| format!("{e:x}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    /// Inverse of [`to_text`](Self::to_text). Uses the default modulus for the degree.
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_lines(&mut text.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }

    /// Parses one matrix from a numbered line stream, consuming exactly its lines.
    pub(crate) fn from_lines<'a, I>(lines: &mut I) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let parse_err = |line, msg: String| Error::Parse { line, msg };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(hl, format!("bad integer '{t}'"))))
            .collect::<Result<_>>()?;
        let [w, rows, cols] = nums[..] else {
            return Err(parse_err(hl, "header must be 'w rows cols'".into()));
        };
        let field = Field::new(w as u32).map_err(|e| parse_err(hl, e.to_string()))?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(hl, "too few rows".into()))?;
            let row: Vec<Elem> = line
                .split_whitespace()
                .map(|t| Elem::from_str_radix(t, 16).map_err(|_| parse_err(ln, format!("bad hex '{t}'"))))
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(parse_err(ln, format!("expected {cols} entries, got {}", row.len())));
            }
            data.extend(row);
        }
        Self::new(&field, rows, cols, data).map_err(|e| parse_err(hl, e.to_string()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}
