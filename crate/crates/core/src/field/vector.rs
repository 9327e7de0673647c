use std::fmt;

use super::gf::{Elem, Field};
use crate::error::{check_len, invalid, Error, Result};

/// A fixed-length vector over a binary extension field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: Field,
    elems: Vec<Elem>,
}

impl FieldVector {
    pub fn new(field: &Field, elems: Vec<Elem>) -> Result<Self> {
        if let Some(bad) = elems.iter().find(|&&e| !field.contains(e)) {
            return Err(invalid(format!("element {bad:#x} outside {field:?}")));
        }
        Ok(FieldVector { field: field.clone(), elems })
    }

    pub fn zeros(field: &Field, len: usize) -> Self {
        FieldVector { field: field.clone(), elems: vec![0; len] }
    }

    pub fn unit(field: &Field, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(field, len);
        v.elems[i] = 1;
        v
    }

    /// A GF(2) vector from booleans or 0/1 bytes.
    pub fn from_bits<I, B>(bits: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: Into<u8>,
    {
        let elems = bits.into_iter().map(|b| Elem::from(b.into() & 1)).collect();
        FieldVector { field: Field::gf2(), elems }
    }

    /// Parses a string of '0'/'1' characters into a GF(2) vector.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let elems = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(invalid(format!("'{c}' is not a bit"))),
            })
            .collect::<Result<Vec<Elem>>>()?;
        Ok(FieldVector { field: Field::gf2(), elems })
    }

    /// The low `len` bits of `word`, most significant first.
    pub fn from_word(field: &Field, word: u64, len: usize) -> Self {
        let w = field.degree() as usize;
        let mask = field.mask() as u64;
        let elems = (0..len)
            .map(|i| ((word >> ((len - 1 - i) * w)) & mask) as Elem)
            .collect();
        FieldVector { field: field.clone(), elems }
    }

    /// Packs the vector into an integer, first symbol in the most significant position.
    pub fn to_word(&self) -> u64 {
        let w = self.field.degree();
        debug_assert!(self.elems.len() as u32 * w <= 64);
        self.elems.iter().fold(0u64, |acc, &e| (acc << w) | e as u64)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> Elem {
        self.elems[i]
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&e| e == 0)
    }

    pub fn weight(&self) -> usize {
        self.elems.iter().filter(|&&e| e != 0).count()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let elems = self.elems.iter().zip(&other.elems).map(|(a, b)| a ^ b).collect();
        Ok(FieldVector { field: self.field.clone(), elems })
    }

    pub fn scale(&self, c: Elem) -> Self {
        let elems = self.elems.iter().map(|&a| self.field.mul(a, c)).collect();
        FieldVector { field: self.field.clone(), elems }
    }

    pub fn dot(&self, other: &Self) -> Result<Elem> {
        self.same_shape(other)?;
        Ok(self
            .elems
            .iter()
            .zip(&other.elems)
            .fold(0, |acc, (&a, &b)| acc ^ self.field.mul(a, b)))
    }

    /// Entries at the given positions, in the order given.
    pub fn project(&self, positions: &[usize]) -> Result<Self> {
        let elems = positions
            .iter()
            .map(|&i| self.elems.get(i).copied().ok_or_else(|| invalid(format!("position {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldVector { field: self.field.clone(), elems })
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        Ok(FieldVector { field: self.field.clone(), elems })
    }

    pub fn slice(&self, start: usize, end: usize) -> Self {
        FieldVector { field: self.field.clone(), elems: self.elems[start..end].to_vec() }
    }

    pub(crate) fn from_parts(field: Field, elems: Vec<Elem>) -> Self {
        FieldVector { field, elems }
    }

    pub(crate) fn into_elems(self) -> Vec<Elem> {
        self.elems
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        check_len(self.len(), other.len())
    }
}

impl fmt::Debug for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldVector({self})")
    }
}

/// Bits are printed as a contiguous string; wider symbols as space-separated hex.
impl fmt::Display for FieldVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_binary() {
            for e in &self.elems {
                write!(f, "{e}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.elems.iter().map(|e| format!("{e:x}")).collect();
            f.write_str(&parts.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_round_trip() {
        let f = Field::new(4).unwrap();
        let v = FieldVector::new(&f, vec![0xa, 0x3, 0xf]).unwrap();
        assert_eq!(v.to_word(), 0xa3f);
        assert_eq!(FieldVector::from_word(&f, 0xa3f, 3), v);
        let b = FieldVector::parse_bits("0110").unwrap();
        assert_eq!(b.to_word(), 0b0110);
        assert_eq!(b.to_string(), "0110");
    }

    #[test]
    fn rejects_out_of_field_elements() {
        let f = Field::new(2).unwrap();
        assert!(FieldVector::new(&f, vec![4]).is_err());
    }

    #[test]
    fn add_checks_shape() {
        let a = FieldVector::parse_bits("101").unwrap();
        let b = FieldVector::parse_bits("11").unwrap();
        assert!(matches!(a.add(&b), Err(Error::DimensionMismatch { .. })));
        let c = FieldVector::zeros(&Field::new(2).unwrap(), 3);
        assert_eq!(a.add(&c), Err(Error::FieldMismatch));
    }
}
