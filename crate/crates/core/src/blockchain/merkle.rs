//! Binary Merkle trees over transaction digests.
//!
//! Adjacent digests are combined as `sha256(left ∥ right)`. An unpaired
//! trailing digest is promoted to the next level unchanged rather than
//! duplicated, so `[a, b, c]` and `[a, b, c, c]` have different roots.

use super::LedgerError;
use crate::keygen::{sha256_concat, Digest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest>>,
}

fn combine(left: &Digest, right: &Digest) -> Digest {
    sha256_concat(&[left.as_bytes(), right.as_bytes()])
}

impl MerkleTree {
    pub fn build(leaves: &[Digest]) -> Result<Self, LedgerError> {
        if leaves.is_empty() {
            return Err(LedgerError::EmptyBundle);
        }
        let mut levels = vec![leaves.to_vec()];
        while levels.last().expect("non-empty").len() > 1 {
            let next = levels
                .last()
                .expect("non-empty")
                .chunks(2)
                .map(|pair| match pair {
                    [l, r] => combine(l, r),
                    [single] => *single,
                    _ => unreachable!(),
                })
                .collect();
            levels.push(next);
        }
        Ok(Self { levels })
    }

    pub fn leaves(&self) -> &[Digest] {
        &self.levels[0]
    }

    /// Every level from the leaves up; the last holds only the root.
    pub fn levels(&self) -> &[Vec<Digest>] {
        &self.levels
    }

    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn root(&self) -> Digest {
        self.levels.last().expect("non-empty")[0]
    }

    pub fn prove(&self, leaf_index: usize) -> Result<MerkleProof, LedgerError> {
        if leaf_index >= self.leaves().len() {
            return Err(LedgerError::LeafOutOfRange {
                index: leaf_index,
                len: self.leaves().len(),
            });
        }
        let mut index = leaf_index;
        let mut path = Vec::with_capacity(self.height());
        for level in &self.levels[..self.height()] {
            let sibling = index ^ 1;
            path.push(match level.get(sibling) {
                Some(d) if sibling < index => ProofStep::Sibling(*d, Side::Left),
                Some(d) => ProofStep::Sibling(*d, Side::Right),
                None => ProofStep::Promoted,
            });
            index /= 2;
        }
        Ok(MerkleProof { leaf_index, path })
    }
}

pub fn merkle_root(leaves: &[Digest]) -> Result<Digest, LedgerError> {
    MerkleTree::build(leaves).map(|t| t.root())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofStep {
    /// Combine with this sibling, which sits on the given side.
    Sibling(Digest, Side),
    /// No sibling at this level; the digest moves up as is.
    Promoted,
}

/// Inclusion proof; one step per tree level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub leaf_index: usize,
    pub path: Vec<ProofStep>,
}

pub fn verify_merkle_proof(root: &Digest, leaf: &Digest, proof: &MerkleProof) -> bool {
    let folded = proof.path.iter().fold(*leaf, |acc, step| match step {
        ProofStep::Sibling(d, Side::Left) => combine(d, &acc),
        ProofStep::Sibling(d, Side::Right) => combine(&acc, d),
        ProofStep::Promoted => acc,
    });
    &folded == root
}
