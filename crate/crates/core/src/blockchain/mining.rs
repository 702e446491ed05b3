//! Block hashing and nonce search.

use sha2::{Digest as _, Sha256};

use super::{Block, Difficulty, LedgerError};
use crate::keygen::Digest;

/// `sha256(merkle_root ∥ nonce as 8 big-endian bytes ∥ prev_block_hash)`.
pub fn block_hash(block: &Block) -> Digest {
    NonceHasher::new(&block.merkle_root).hash(block.nonce, &block.prev_block_hash)
}

/// Whether the leading `difficulty` bits of `h` are zero.
pub fn meets_difficulty(h: &Digest, difficulty: Difficulty) -> bool {
    let bits = difficulty.bits() as usize;
    let full = bits / 8;
    let rest = bits % 8;
    h.0[..full].iter().all(|b| *b == 0) && (rest == 0 || h.0[full] >> (8 - rest) == 0)
}

/// Hash state primed with the Merkle root; cloned once per nonce.
struct NonceHasher(Sha256);

impl NonceHasher {
    fn new(root: &Digest) -> Self {
        let mut h = Sha256::new();
        h.update(root.as_bytes());
        Self(h)
    }

    fn hash(&self, nonce: u64, prev: &Digest) -> Digest {
        let mut h = self.0.clone();
        h.update(nonce.to_be_bytes());
        h.update(prev.as_bytes());
        Digest(h.finalize().into())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinedBlock {
    pub block: Block,
    /// Hashes evaluated, counting the successful one.
    pub attempts: u64,
}

/// Scans nonces upward from `nonce_start` and returns the first block whose
/// hash meets `difficulty`.
pub fn mine_block(
    merkle_root: Digest,
    prev_block_hash: Digest,
    difficulty: Difficulty,
    nonce_start: u64,
) -> Result<MinedBlock, LedgerError> {
    let hasher = NonceHasher::new(&merkle_root);
    for nonce in nonce_start..=u64::MAX {
        if meets_difficulty(&hasher.hash(nonce, &prev_block_hash), difficulty) {
            return Ok(MinedBlock {
                block: Block {
                    merkle_root,
                    nonce,
                    prev_block_hash,
                },
                attempts: nonce - nonce_start + 1,
            });
        }
    }
    Err(LedgerError::NonceSpaceExhausted)
}

const PARALLEL_CHUNK: u64 = 1 << 12;

/// Same result as [`mine_block`], searched by `threads` workers over
/// interleaved nonce ranges. Each round every worker scans one chunk; the
/// smallest hit of the earliest round with any hit wins.
pub fn mine_block_parallel(
    merkle_root: Digest,
    prev_block_hash: Digest,
    difficulty: Difficulty,
    nonce_start: u64,
    threads: usize,
) -> Result<MinedBlock, LedgerError> {
    let threads = threads.max(1) as u64;
    if threads == 1 {
        return mine_block(merkle_root, prev_block_hash, difficulty, nonce_start);
    }
    let hasher = NonceHasher::new(&merkle_root);
    let mut round_start = nonce_start as u128;
    while round_start <= u64::MAX as u128 {
        let hit = std::thread::scope(|scope| {
            let workers: Vec<_> = (0..threads)
                .map(|t| {
                    let hasher = &hasher;
                    let prev = &prev_block_hash;
                    scope.spawn(move || {
                        let lo = round_start + (t * PARALLEL_CHUNK) as u128;
                        let hi = (lo + PARALLEL_CHUNK as u128).min(u64::MAX as u128 + 1);
                        (lo..hi)
                            .map(|n| n as u64)
                            .find(|&n| meets_difficulty(&hasher.hash(n, prev), difficulty))
                    })
                })
                .collect();
            workers
                .into_iter()
                .filter_map(|w| w.join().expect("mining worker panicked"))
                .min()
        });
        if let Some(nonce) = hit {
            return Ok(MinedBlock {
                block: Block {
                    merkle_root,
                    nonce,
                    prev_block_hash,
                },
                attempts: nonce - nonce_start + 1,
            });
        }
        round_start += (threads * PARALLEL_CHUNK) as u128;
    }
    Err(LedgerError::NonceSpaceExhausted)
}
