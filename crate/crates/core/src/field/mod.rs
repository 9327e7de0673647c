//! Arithmetic over GF(2^w) and the small dense linear algebra built on it.

mod gf;
mod matrix;
mod vector;

pub use gf::{is_irreducible, Elem, Field, FieldOp, MAX_DEGREE};
pub use matrix::FieldMatrix;
pub use vector::FieldVector;
