//! JSON-lines transfer records: a header line, then one unit per line with
//! hex-encoded canonical fields.

use serde::{Deserialize, Serialize};

use super::{ChainError, Link, TransactionUnit, TransferRecord};
use crate::keygen::{Digest, PublicKey};

pub const RECORD_FORMAT: &str = "idlink-transfer-record";
pub const RECORD_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitLine {
    public_key: String,
    prev_hash: String,
    prev_signature: String,
}

pub fn record_to_jsonl(record: &TransferRecord) -> String {
    let header = Header {
        format: RECORD_FORMAT.into(),
        version: RECORD_FORMAT_VERSION,
    };
    let mut out = serde_json::to_string(&header).expect("header json");
    out.push('\n');
    for unit in &record.units {
        let line = UnitLine {
            public_key: hex::encode(unit.public_key.to_canonical_bytes()),
            prev_hash: unit.prev_hash.to_hex(),
            prev_signature: hex::encode(unit.prev_signature.to_canonical_bytes()),
        };
        out.push_str(&serde_json::to_string(&line).expect("unit json"));
        out.push('\n');
    }
    out
}

pub fn parse_record_jsonl(text: &str) -> Result<TransferRecord, ChainError> {
    let err = |line: usize, message: String| ChainError::RecordFormat { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let header: Header = serde_json::from_str(first).map_err(|e| err(1, e.to_string()))?;
    if header.format != RECORD_FORMAT || header.version != RECORD_FORMAT_VERSION {
        return Err(err(1, format!("unsupported format {} v{}", header.format, header.version)));
    }
    let mut record = TransferRecord::default();
    for (i, text) in lines {
        let line = i + 1;
        let raw: UnitLine = serde_json::from_str(text).map_err(|e| err(line, e.to_string()))?;
        let decode = |field: &str| hex::decode(field).map_err(|e| err(line, e.to_string()));
        record.units.push(TransactionUnit {
            public_key: PublicKey::from_canonical_bytes(&decode(&raw.public_key)?)
                .map_err(|e| err(line, e.to_string()))?,
            prev_hash: Digest::from_hex(&raw.prev_hash).map_err(|e| err(line, e.to_string()))?,
            prev_signature: Link::from_canonical_bytes(&decode(&raw.prev_signature)?)
                .map_err(|e| err(line, e.to_string()))?,
        });
    }
    Ok(record)
}
