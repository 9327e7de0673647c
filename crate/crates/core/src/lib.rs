pub mod error;
pub mod field;

pub use error::{Error, Result};
pub mod codes;
pub mod seed;
pub mod amd;
pub mod prob;
pub mod wiretap;
pub mod lecss;
pub mod tamper;
pub mod nmc;
pub mod smt;
