//! Hierarchical seed derivation.
//!
//! A run starts from one global `u64`. Each consumer derives its own node by
//! walking labelled edges (command, then module, then trial index), so adding
//! a consumer never shifts the randomness seen by another one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeedTree {
    key: [u8; 32],
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"nmcode/root");
        h.update(root.to_le_bytes());
        SeedTree { key: h.finalize().into() }
    }

    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"/");
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        SeedTree { key: h.finalize().into() }
    }

    pub fn index(&self, i: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"#");
        h.update(i.to_le_bytes());
        SeedTree { key: h.finalize().into() }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }

    /// A 64-bit seed for APIs that take one.
    pub fn as_u64(&self) -> u64 {
        u64::from_le_bytes(self.key[..8].try_into().expect("eight bytes"))
    }
}
