//! Seeded random streams addressed by a label path.
//!
//! A stream is a pure function of `(master_seed, path)`: the seed material is
//! a SHA-256 digest over the master seed and the length-prefixed labels, so
//! `["a", "b"]` and `["ab"]` never share a stream and the order in which
//! workers request streams cannot change what they draw.

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<String>,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new<S: AsRef<str>>(master_seed: u64, path: &[S]) -> Self {
        let path: Vec<String> = path.iter().map(|s| s.as_ref().to_string()).collect();
        let rng = ChaCha20Rng::from_seed(seed_material(master_seed, &path));
        RngStream { master_seed, path, rng }
    }

    /// Fresh stream one level below this one. Independent of how much has
    /// already been drawn from `self`.
    pub fn child(&self, label: impl AsRef<str>) -> RngStream {
        let mut path = self.path.clone();
        path.push(label.as_ref().to_string());
        RngStream::new(self.master_seed, &path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Uniform random permutation of `0..n`.
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(self);
        idx
    }
}

pub fn derive_rng<S: AsRef<str>>(master_seed: u64, path: &[S]) -> RngStream {
    RngStream::new(master_seed, path)
}

fn seed_material(master_seed: u64, path: &[String]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"dqlab-rng-v1");
    h.update(master_seed.to_le_bytes());
    h.update((path.len() as u64).to_le_bytes());
    for label in path {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
    }
    h.finalize().into()
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(mut s: RngStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| s.next_u64()).collect()
    }

    #[test]
    fn same_path_same_sequence() {
        assert_eq!(draws(derive_rng(7, &["a"]), 100), draws(derive_rng(7, &["a"]), 100));
    }

    #[test]
    fn distinct_labels_differ() {
        assert_ne!(draws(derive_rng(7, &["a"]), 100), draws(derive_rng(7, &["b"]), 100));
        assert_ne!(draws(derive_rng(7, &["a"]), 100), draws(derive_rng(8, &["a"]), 100));
    }

    #[test]
    fn no_concatenation_collision() {
        assert_ne!(
            draws(derive_rng(7, &["a", "b"]), 100),
            draws(derive_rng(7, &["ab"]), 100)
        );
        assert_ne!(draws(derive_rng(7, &["a", ""]), 100), draws(derive_rng(7, &["a"]), 100));
    }

    #[test]
    fn child_ignores_parent_position() {
        let mut parent = derive_rng(3, &["x"]);
        let before = parent.child("y");
        parent.next_u64();
        assert_eq!(draws(before, 10), draws(parent.child("y"), 10));
        assert_eq!(draws(parent.child("y"), 10), draws(derive_rng(3, &["x", "y"]), 10));
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = derive_rng(1, &["perm"]).permutation(50);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }
}
