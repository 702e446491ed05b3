//! Proof-of-work ledger.
//!
//! Transaction digests are bundled under a Merkle root; a block is
//! `{merkle_root, nonce, prev_block_hash}` and is accepted only when its hash
//! starts with `difficulty` zero bits. Each block commits to its predecessor's
//! hash, so changing any past bundle invalidates that block's nonce and,
//! once re-mined, the linkage of every block after it.

mod ledger_file;
mod merkle;
mod mining;

use thiserror::Error;

use crate::keygen::Digest;

pub use ledger_file::{ledger_to_jsonl, parse_ledger_jsonl, LEDGER_FORMAT, LEDGER_FORMAT_VERSION};
pub use merkle::{merkle_root, verify_merkle_proof, MerkleProof, MerkleTree, ProofStep, Side};
pub use mining::{block_hash, meets_difficulty, mine_block, mine_block_parallel, MinedBlock};

/// Leading zero bits required of a block hash.
pub const DEFAULT_DIFFICULTY_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("a block needs at least one transaction digest")]
    EmptyBundle,
    #[error("leaf index {index} out of range for {len} leaves")]
    LeafOutOfRange { index: usize, len: usize },
    #[error("block index {index} out of range for chain of {len}")]
    BlockOutOfRange { index: usize, len: usize },
    #[error("difficulty must be between 1 and 256 bits, got {0}")]
    InvalidDifficulty(u32),
    #[error("no nonce satisfies the difficulty")]
    NonceSpaceExhausted,
    #[error("ledger line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Difficulty(u32);

impl Difficulty {
    pub fn new(bits: u32) -> Result<Self, LedgerError> {
        if (1..=256).contains(&bits) {
            Ok(Self(bits))
        } else {
            Err(LedgerError::InvalidDifficulty(bits))
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Mean number of hashes needed per block, `2^bits`.
    pub fn expected_attempts(self) -> f64 {
        2f64.powi(self.0 as i32)
    }
}

impl Default for Difficulty {
    fn default() -> Self {
        Self(DEFAULT_DIFFICULTY_BITS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub merkle_root: Digest,
    pub nonce: u64,
    pub prev_block_hash: Digest,
}

/// Blocks in order plus the leaf digests each one bundles.
///
/// Fields are public so that tampering can be simulated;
/// [`BlockChainState::validate_chain`] and
/// [`BlockChainState::audit_bundles`] are what establish integrity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockChainState {
    pub difficulty: Difficulty,
    pub blocks: Vec<Block>,
    pub bundles: Vec<Vec<Digest>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockFault {
    /// `prev_block_hash` does not match the predecessor.
    Linkage,
    /// The block hash lacks the required leading zeros.
    Difficulty,
    /// The retained bundle does not hash to the block's Merkle root.
    BundleMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainVerdict {
    Valid,
    FirstBad { index: usize, fault: BlockFault },
}

impl ChainVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainVerdict::Valid)
    }

    pub fn first_bad_block(&self) -> Option<usize> {
        match self {
            ChainVerdict::Valid => None,
            ChainVerdict::FirstBad { index, .. } => Some(*index),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairCostReport {
    pub tampered_index: usize,
    pub blocks_remined: usize,
    pub total_hash_attempts: u64,
    pub per_block_attempts: Vec<u64>,
}

impl BlockChainState {
    pub fn new(difficulty: Difficulty) -> Self {
        Self {
            difficulty,
            blocks: Vec::new(),
            bundles: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Hash of the last block, or all zeros for an empty chain.
    pub fn tip_hash(&self) -> Digest {
        self.blocks.last().map(block_hash).unwrap_or(Digest::ZERO)
    }

    pub fn block_hashes(&self) -> Vec<Digest> {
        self.blocks.iter().map(block_hash).collect()
    }

    /// Mines a block over `leaves` on top of the tip and appends it. The
    /// chain is only modified once mining has succeeded. Returns the number
    /// of hashes spent.
    pub fn append_block(&mut self, leaves: Vec<Digest>) -> Result<u64, LedgerError> {
        let root = merkle_root(&leaves)?;
        let mined = mine_block(root, self.tip_hash(), self.difficulty, 0)?;
        self.blocks.push(mined.block);
        self.bundles.push(leaves);
        Ok(mined.attempts)
    }

    /// Checks linkage and difficulty of every block, earliest fault first.
    pub fn validate_chain(&self) -> ChainVerdict {
        let mut expected_prev = Digest::ZERO;
        for (index, block) in self.blocks.iter().enumerate() {
            if block.prev_block_hash != expected_prev {
                return ChainVerdict::FirstBad { index, fault: BlockFault::Linkage };
            }
            let hash = block_hash(block);
            if !meets_difficulty(&hash, self.difficulty) {
                return ChainVerdict::FirstBad { index, fault: BlockFault::Difficulty };
            }
            expected_prev = hash;
        }
        ChainVerdict::Valid
    }

    /// Recomputes each retained bundle's Merkle root against its block.
    pub fn audit_bundles(&self) -> ChainVerdict {
        for (index, block) in self.blocks.iter().enumerate() {
            let matches = self
                .bundles
                .get(index)
                .and_then(|leaves| merkle_root(leaves).ok())
                .is_some_and(|root| root == block.merkle_root);
            if !matches {
                return ChainVerdict::FirstBad { index, fault: BlockFault::BundleMismatch };
            }
        }
        ChainVerdict::Valid
    }

    /// [`validate_chain`](Self::validate_chain) then
    /// [`audit_bundles`](Self::audit_bundles); reports the earlier fault.
    pub fn verify_all(&self) -> ChainVerdict {
        match (self.validate_chain(), self.audit_bundles()) {
            (ChainVerdict::Valid, audit) => audit,
            (chain, ChainVerdict::Valid) => chain,
            (chain, audit) => {
                if chain.first_bad_block() <= audit.first_bad_block() {
                    chain
                } else {
                    audit
                }
            }
        }
    }

    /// Replaces block `index`'s Merkle root and re-mines it and every later
    /// block so the copy validates again. `self` is left untouched. The
    /// copy's retained bundle for `index` is not changed.
    pub fn tamper_and_repair(
        &self,
        index: usize,
        new_merkle_root: Digest,
    ) -> Result<(BlockChainState, RepairCostReport), LedgerError> {
        if index >= self.len() {
            return Err(LedgerError::BlockOutOfRange { index, len: self.len() });
        }
        let mut repaired = self.clone();
        repaired.blocks[index].merkle_root = new_merkle_root;
        let mut per_block_attempts = Vec::with_capacity(self.len() - index);
        let mut prev = if index == 0 {
            Digest::ZERO
        } else {
            block_hash(&repaired.blocks[index - 1])
        };
        for block in &mut repaired.blocks[index..] {
            let mined = mine_block(block.merkle_root, prev, self.difficulty, 0)?;
            prev = block_hash(&mined.block);
            *block = mined.block;
            per_block_attempts.push(mined.attempts);
        }
        let report = RepairCostReport {
            tampered_index: index,
            blocks_remined: per_block_attempts.len(),
            total_hash_attempts: per_block_attempts.iter().sum(),
            per_block_attempts,
        };
        Ok((repaired, report))
    }
}
