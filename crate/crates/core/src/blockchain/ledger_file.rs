//! JSON-lines ledger: a header with the difficulty, then one block per line.

use serde::{Deserialize, Serialize};

use super::{Block, BlockChainState, Difficulty, LedgerError};
use crate::keygen::Digest;

pub const LEDGER_FORMAT: &str = "idlink-ledger";
pub const LEDGER_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    difficulty_bits: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockLine {
    merkle_root: String,
    nonce: u64,
    prev_block_hash: String,
    leaves: Vec<String>,
}

pub fn ledger_to_jsonl(chain: &BlockChainState) -> String {
    let header = Header {
        format: LEDGER_FORMAT.into(),
        version: LEDGER_FORMAT_VERSION,
        difficulty_bits: chain.difficulty.bits(),
    };
    let mut out = serde_json::to_string(&header).expect("header json");
    out.push('\n');
    for (i, block) in chain.blocks.iter().enumerate() {
        let line = BlockLine {
            merkle_root: block.merkle_root.to_hex(),
            nonce: block.nonce,
            prev_block_hash: block.prev_block_hash.to_hex(),
            leaves: chain.bundles.get(i).into_iter().flatten().map(Digest::to_hex).collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("block json"));
        out.push('\n');
    }
    out
}

pub fn parse_ledger_jsonl(text: &str) -> Result<BlockChainState, LedgerError> {
    let err = |line: usize, message: String| LedgerError::Format { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| err(1, e.to_string()))?;
    if header.format != LEDGER_FORMAT || header.version != LEDGER_FORMAT_VERSION {
        return Err(err(1, format!("unsupported format {} v{}", header.format, header.version)));
    }
    let mut chain = BlockChainState::new(Difficulty::new(header.difficulty_bits).map_err(|e| err(1, e.to_string()))?);
    for (i, text) in lines {
        let line = i + 1;
        let raw: BlockLine = serde_json::from_str(text).map_err(|e| err(line, e.to_string()))?;
        let digest = |s: &str| Digest::from_hex(s).map_err(|e| err(line, format!("{s:?}: {e}")));
        chain.blocks.push(Block {
            merkle_root: digest(&raw.merkle_root)?,
            nonce: raw.nonce,
            prev_block_hash: digest(&raw.prev_block_hash)?,
        });
        chain.bundles.push(raw.leaves.iter().map(|l| digest(l)).collect::<Result<_, _>>()?);
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::sha256;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut chain = BlockChainState::new(Difficulty::new(6).unwrap());
        for b in 0..4u8 {
            chain.append_block((0..=b).map(|i| sha256(&[b, i])).collect()).unwrap();
        }
        let text = ledger_to_jsonl(&chain);
        let parsed = parse_ledger_jsonl(&text).unwrap();
        assert_eq!(parsed, chain);
        assert_eq!(ledger_to_jsonl(&parsed), text);
    }

    #[test]
    fn large_nonces_survive() {
        let mut chain = BlockChainState::new(Difficulty::new(1).unwrap());
        chain.blocks.push(Block { merkle_root: Digest::ZERO, nonce: u64::MAX, prev_block_hash: Digest::ZERO });
        chain.bundles.push(vec![]);
        assert_eq!(parse_ledger_jsonl(&ledger_to_jsonl(&chain)).unwrap(), chain);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(parse_ledger_jsonl("").is_err());
        let text = "{\"format\":\"idlink-ledger\",\"version\":1,\"difficulty_bits\":8}\n{\"merkle_root\":\"xx\",\"nonce\":1,\"prev_block_hash\":\"00\",\"leaves\":[]}\n";
        assert!(matches!(parse_ledger_jsonl(text), Err(LedgerError::Format { line: 2, .. })));
        let zero = "{\"format\":\"idlink-ledger\",\"version\":1,\"difficulty_bits\":0}\n";
        assert!(parse_ledger_jsonl(zero).is_err());
    }
}
