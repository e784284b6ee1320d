//! Deterministic random-stream derivation.
//!
//! Every randomized step in the lab draws from a [`ChaCha8Rng`] derived from
//! the run seed plus a list of integer tags (task, phase, item index, ...).
//! Derivation hashes the seed and tags together, so streams are independent
//! of each other and of worker scheduling: any parallel fan-out that keys its
//! items this way produces the same numbers at any thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives an independent deterministic stream from `seed` and `tags`.
pub fn derive_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for t in tags {
        hasher.update(t.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

/// Stable 64-bit tag for a string (task names, phase labels).
pub fn name_tag(name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}
