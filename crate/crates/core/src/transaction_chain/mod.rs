//! Transaction units chained by hash and signature.
//!
//! A unit is `{public key, previous hash, previous signature}`. Handing data
//! from node N−1 to node N produces N's unit: the previous hash is the hash of
//! N−1's unit, and the signature is N−1's signature over
//! `sha256(pk(N) ∥ hash(N−1))`. Because each unit's signature sits inside the
//! next unit's hash input, altering any past unit breaks every later link.
//!
//! The first unit of a history has an all-zero previous hash and, in place
//! of a sender's signature, its owner's own signature over the same message
//! shape. That self-attestation anchors the root key so that tampering with
//! the root is caught at the root.

mod record_file;

use thiserror::Error;

use crate::keygen::wire::{Reader, Writer};
use crate::keygen::{self, sha256, sha256_concat, Digest, KeyError, KeyMaterial, PublicKey, SecretKey, Signature, Verdict};

pub use record_file::{parse_record_jsonl, record_to_jsonl, RECORD_FORMAT, RECORD_FORMAT_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("transfer history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error("record line {line}: {message}")]
    RecordFormat { line: usize, message: String },
}

/// What a unit carries in its signature slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Link {
    /// Root of a history, signed by the unit's own key.
    Genesis(Signature),
    /// Signature of the previous holder.
    Signed(Signature),
}

impl Link {
    pub fn signature(&self) -> &Signature {
        match self {
            Link::Genesis(s) | Link::Signed(s) => s,
        }
    }

    pub fn signature_mut(&mut self) -> &mut Signature {
        match self {
            Link::Genesis(s) | Link::Signed(s) => s,
        }
    }

    pub fn is_genesis(&self) -> bool {
        matches!(self, Link::Genesis(_))
    }

    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut out = vec![if self.is_genesis() { 0 } else { 1 }];
        out.extend(self.signature().to_canonical_bytes());
        out
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let (tag, rest) = bytes.split_first().ok_or_else(|| KeyError::Encoding("empty link".into()))?;
        let sig = Signature::from_canonical_bytes(rest)?;
        match tag {
            0 => Ok(Link::Genesis(sig)),
            1 => Ok(Link::Signed(sig)),
            t => Err(KeyError::Encoding(format!("unknown link tag {t}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransactionUnit {
    pub public_key: PublicKey,
    pub prev_hash: Digest,
    pub prev_signature: Link,
}

impl TransactionUnit {
    pub fn is_genesis(&self) -> bool {
        self.prev_signature.is_genesis()
    }

    /// Length-prefixed fields in fixed order: key, previous hash, link.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(&self.public_key.to_canonical_bytes());
        w.bytes(self.prev_hash.as_bytes());
        w.bytes(&self.prev_signature.to_canonical_bytes());
        w.finish()
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let mut r = Reader::new(bytes);
        let public_key = PublicKey::from_canonical_bytes(r.bytes()?)?;
        let prev_hash = Digest(
            r.bytes()?
                .try_into()
                .map_err(|_| KeyError::Encoding("previous hash is not 32 bytes".into()))?,
        );
        let prev_signature = Link::from_canonical_bytes(r.bytes()?)?;
        r.end()?;
        Ok(Self {
            public_key,
            prev_hash,
            prev_signature,
        })
    }
}

/// A transaction unit together with the secret key that owns it.
#[derive(Debug, Clone)]
pub struct LogicalNode {
    pub unit: TransactionUnit,
    pub secret_key: SecretKey,
}

impl LogicalNode {
    /// Whether the secret key signs for the unit's public key.
    pub fn is_consistent(&self) -> bool {
        let probe = sha256(b"logical-node-consistency");
        keygen::sign(&probe, &self.secret_key)
            .map(|sig| keygen::verify(&probe, &sig, &self.unit.public_key).is_valid())
            .unwrap_or(false)
    }
}

/// `sha256` of the unit's canonical bytes; the signature is part of the input.
pub fn unit_hash(unit: &TransactionUnit) -> Digest {
    sha256(&unit.to_canonical_bytes())
}

/// The message a link signature covers: `sha256(pk ∥ prev_hash)`.
pub fn link_message(recipient: &PublicKey, prev_hash: &Digest) -> Digest {
    sha256_concat(&[&recipient.to_canonical_bytes(), prev_hash.as_bytes()])
}

pub fn make_genesis(key: &KeyMaterial) -> Result<LogicalNode, ChainError> {
    let public_key = key.public_key();
    let secret_key = key.secret_key();
    let attestation = keygen::sign(&link_message(&public_key, &Digest::ZERO), &secret_key)?;
    Ok(LogicalNode {
        unit: TransactionUnit {
            public_key,
            prev_hash: Digest::ZERO,
            prev_signature: Link::Genesis(attestation),
        },
        secret_key,
    })
}

/// Builds the recipient's unit, signed by `sender`.
pub fn transfer(sender: &LogicalNode, recipient: &PublicKey) -> Result<TransactionUnit, ChainError> {
    let prev_hash = unit_hash(&sender.unit);
    let signature = keygen::sign(&link_message(recipient, &prev_hash), &sender.secret_key)?;
    Ok(TransactionUnit {
        public_key: recipient.clone(),
        prev_hash,
        prev_signature: Link::Signed(signature),
    })
}

/// Checks `unit`'s signature against the claimed sender. A genesis unit is
/// checked against its own key instead and must carry an all-zero hash.
pub fn verify_link(sender: &PublicKey, unit: &TransactionUnit) -> Verdict {
    let message = link_message(&unit.public_key, &unit.prev_hash);
    match &unit.prev_signature {
        Link::Genesis(sig) => {
            if !unit.prev_hash.is_zero() {
                return Verdict::Malformed("genesis unit with non-zero previous hash");
            }
            keygen::verify(&message, sig, &unit.public_key)
        }
        Link::Signed(sig) => {
            if unit.prev_hash.is_zero() {
                return Verdict::Malformed("signed unit with all-zero previous hash");
            }
            keygen::verify(&message, sig, sender)
        }
    }
}

/// Units from the root to the latest holder.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransferRecord {
    pub units: Vec<TransactionUnit>,
}

impl TransferRecord {
    pub fn new(genesis: TransactionUnit) -> Self {
        Self { units: vec![genesis] }
    }

    pub fn push(&mut self, unit: TransactionUnit) {
        self.units.push(unit);
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn latest(&self) -> Option<&TransactionUnit> {
        self.units.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkFault {
    /// The first unit is not a genesis unit, or a later one claims to be.
    MisplacedGenesis,
    /// `prev_hash` is not the hash of the preceding unit.
    HashMismatch,
    Signature(Verdict),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryVerdict {
    Valid,
    FirstBad { index: usize, fault: LinkFault },
}

impl HistoryVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, HistoryVerdict::Valid)
    }

    pub fn first_bad_index(&self) -> Option<usize> {
        match self {
            HistoryVerdict::Valid => None,
            HistoryVerdict::FirstBad { index, .. } => Some(*index),
        }
    }
}

/// Walks the record from the root, recomputing hashes and checking
/// signatures; reports the earliest broken unit.
pub fn verify_history(record: &TransferRecord) -> Result<HistoryVerdict, ChainError> {
    let Some(root) = record.units.first() else {
        return Err(ChainError::EmptyHistory);
    };
    let bad = |index, fault| Ok(HistoryVerdict::FirstBad { index, fault });
    if !root.is_genesis() {
        return bad(0, LinkFault::MisplacedGenesis);
    }
    let verdict = verify_link(&root.public_key, root);
    if !verdict.is_valid() {
        return bad(0, LinkFault::Signature(verdict));
    }
    for (index, pair) in record.units.windows(2).enumerate() {
        let (prev, unit) = (&pair[0], &pair[1]);
        let index = index + 1;
        if unit.is_genesis() {
            return bad(index, LinkFault::MisplacedGenesis);
        }
        if unit.prev_hash != unit_hash(prev) {
            return bad(index, LinkFault::HashMismatch);
        }
        let verdict = verify_link(&prev.public_key, unit);
        if !verdict.is_valid() {
            return bad(index, LinkFault::Signature(verdict));
        }
    }
    Ok(HistoryVerdict::Valid)
}
