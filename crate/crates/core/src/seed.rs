use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest as _, Sha256};

/// Builds a ChaCha20 stream keyed by `sha256(domain ∥ parts…)`.
///
/// Every random draw in the crate goes through here so that each
/// (purpose, seed, index) tuple maps to its own independent stream.
pub(crate) fn stream(domain: &str, parts: &[u64]) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update((domain.len() as u32).to_be_bytes());
    hasher.update(domain.as_bytes());
    for part in parts {
        hasher.update(part.to_be_bytes());
    }
    ChaCha20Rng::from_seed(hasher.finalize().into())
}
