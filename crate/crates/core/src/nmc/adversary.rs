//! The tampering families the experiments accept.

use crate::error::{check_len, Result};
use crate::field::FieldVector;
use crate::tamper::{ao_apply, tamper_apply, AoTamperFunction, BitAction, CompiledTamper, QaryAction, TamperFunction};

/// A tampering function `x -> g^{x_{S_r}}(x)` acting position-wise.
///
/// The packed experiments use [`compile`](Adversary::compile); the reference path uses
/// the vector methods, which go through the uncompiled action tables.
pub trait Adversary {
    fn n(&self) -> usize;
    fn read_set(&self) -> &[usize];
    /// Positions `g` may change.
    fn write_count(&self) -> usize;
    fn compile(&self) -> Result<CompiledTamper>;
    fn digest(&self) -> String;
    fn describe(&self) -> String;

    /// `g^alpha(x)` with `alpha = x_{S_r}`.
    fn apply_vector(&self, x: &FieldVector) -> Result<FieldVector>;
    /// `Δg^alpha(x) = g^alpha(x) - x` with `alpha = x_{S_r}`.
    fn difference_vector(&self, x: &FieldVector) -> Result<FieldVector>;
    /// Positions that `g^alpha` overwrites.
    fn overwritten(&self, alpha: u64) -> Vec<usize>;
}

pub(crate) fn read_value(x: &FieldVector, read: &[usize]) -> Result<u64> {
    let w = x.field().degree();
    Ok(x.project(read)?.elems().iter().fold(0u64, |a, &b| (a << w) | b as u64))
}

impl Adversary for TamperFunction {
    fn n(&self) -> usize {
        TamperFunction::n(self)
    }

    fn read_set(&self) -> &[usize] {
        TamperFunction::read_set(self)
    }

    fn write_count(&self) -> usize {
        self.write_set().len()
    }

    fn compile(&self) -> Result<CompiledTamper> {
        TamperFunction::compile(self)
    }

    fn digest(&self) -> String {
        TamperFunction::digest(self)
    }

    fn describe(&self) -> String {
        self.to_text()
    }

    fn apply_vector(&self, x: &FieldVector) -> Result<FieldVector> {
        tamper_apply(self, x)
    }

    fn difference_vector(&self, x: &FieldVector) -> Result<FieldVector> {
        check_len(self.n(), x.len())?;
        let alpha = read_value(x, self.read_set())?;
        // positions outside S_w are kept, so their difference is 0
        let mut bits: Vec<u8> = vec![0; self.n()];
        for (&i, act) in self.write_set().iter().zip(self.difference_function(alpha)) {
            bits[i] = act.apply(x.get(i) as u8);
        }
        FieldVector::new(x.field(), bits.into_iter().map(u16::from).collect())
    }

    fn overwritten(&self, alpha: u64) -> Vec<usize> {
        self.write_set()
            .iter()
            .zip(self.actions(alpha))
            .filter(|(_, a)| matches!(a, BitAction::Set0 | BitAction::Set1))
            .map(|(&i, _)| i)
            .collect()
    }
}

impl Adversary for AoTamperFunction {
    fn n(&self) -> usize {
        AoTamperFunction::n(self)
    }

    fn read_set(&self) -> &[usize] {
        AoTamperFunction::read_set(self)
    }

    fn write_count(&self) -> usize {
        AoTamperFunction::n(self)
    }

    fn compile(&self) -> Result<CompiledTamper> {
        AoTamperFunction::compile(self)
    }

    fn digest(&self) -> String {
        AoTamperFunction::digest(self)
    }

    fn describe(&self) -> String {
        self.to_text()
    }

    fn apply_vector(&self, x: &FieldVector) -> Result<FieldVector> {
        ao_apply(self, x)
    }

    fn difference_vector(&self, x: &FieldVector) -> Result<FieldVector> {
        check_len(AoTamperFunction::n(self), x.len())?;
        let alpha = read_value(x, AoTamperFunction::read_set(self))?;
        let f = self.field();
        // Add(d) moves x by d; Overwrite(c) moves x by c - x
        let out = x
            .elems()
            .iter()
            .zip(self.actions(alpha))
            .map(|(&xi, act)| match *act {
                QaryAction::Add(d) => d,
                QaryAction::Overwrite(c) => f.add(c, xi),
            })
            .collect();
        FieldVector::new(f, out)
    }

    fn overwritten(&self, alpha: u64) -> Vec<usize> {
        self.actions(alpha)
            .iter()
            .enumerate()
            .filter(|(_, a)| matches!(a, QaryAction::Overwrite(_)))
            .map(|(i, _)| i)
            .collect()
    }
}
