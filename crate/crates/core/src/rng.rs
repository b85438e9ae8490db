//! Deterministic random streams keyed by `(seed, purpose label)`.
//!
//! Every random draw in the crate comes from a [`Stream`]. A stream is a
//! ChaCha20 generator whose key is the SHA-256 digest of the root seed and the
//! chain of labels that led to it, so two purposes never share randomness and
//! a run is fully reproduced by its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct Stream {
    key: [u8; 32],
}

impl Stream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(b"realclone/root");
        h.update(seed.to_le_bytes());
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        Self {
            key: h.finalize().into(),
        }
    }

    /// Child stream for a sub-purpose.
    pub fn split(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        Self {
            key: h.finalize().into(),
        }
    }

    /// Child stream for the `index`-th independent trial.
    pub fn child(&self, index: u64) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"#");
        h.update(index.to_le_bytes());
        Self {
            key: h.finalize().into(),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_key_same_draws() {
        let a: Vec<u64> = Stream::new(7, "x").rng().random_iter().take(4).collect();
        let b: Vec<u64> = Stream::new(7, "x").rng().random_iter().take(4).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_and_children_separate() {
        let root = Stream::new(7, "x");
        let draw = |s: &Stream| s.rng().random::<u64>();
        let values = [
            draw(&root),
            draw(&Stream::new(7, "y")),
            draw(&Stream::new(8, "x")),
            draw(&root.split("a")),
            draw(&root.child(0)),
            draw(&root.child(1)),
        ];
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                assert_ne!(values[i], values[j], "{i} vs {j}");
            }
        }
    }
}
