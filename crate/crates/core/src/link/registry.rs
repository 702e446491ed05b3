//! Verifier-side enrollment table, persisted as one JSON document.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DeviceNode, LinkError, MacAddress, CHALLENGE_LEN};
use crate::chip_identity::ChipId;
use crate::keygen::{sha256, Digest, PublicKey};

pub const REGISTRY_FORMAT: &str = "idlink-registry";
pub const REGISTRY_FORMAT_VERSION: u32 = 1;

/// `sha256` of the packed chip ID bits. Lets an auditor match a chip
/// without the registry holding the ID itself.
pub fn chip_commitment(id: &ChipId) -> Digest {
    sha256(id.bits.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollmentRecord {
    pub chip_commitment: Digest,
    pub label: String,
    /// MAC seen at enrollment; informational only.
    pub mac_at_enrollment: MacAddress,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Registry {
    entries: BTreeMap<PublicKey, EnrollmentRecord>,
    seen_nonces: BTreeSet<[u8; CHALLENGE_LEN]>,
}

impl Registry {
    pub fn enroll(&mut self, device: &DeviceNode) -> Result<(), LinkError> {
        let key = device.public_key();
        if self.entries.contains_key(&key) {
            return Err(LinkError::DuplicateEnrollment(key.fingerprint()));
        }
        self.entries.insert(
            key,
            EnrollmentRecord {
                chip_commitment: chip_commitment(device.id_core.chip_id()),
                label: device.label.clone(),
                mac_at_enrollment: device.mac_address,
            },
        );
        Ok(())
    }

    pub fn is_enrolled(&self, key: &PublicKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &PublicKey) -> Option<&EnrollmentRecord> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns `false` if the nonce was already used.
    pub(crate) fn record_nonce(&mut self, nonce: [u8; CHALLENGE_LEN]) -> bool {
        self.seen_nonces.insert(nonce)
    }

    pub fn to_json(&self) -> String {
        let file = RegistryJson {
            format: REGISTRY_FORMAT.into(),
            version: REGISTRY_FORMAT_VERSION,
            entries: self
                .entries
                .iter()
                .map(|(key, rec)| EntryJson {
                    public_key: hex::encode(key.to_canonical_bytes()),
                    chip_commitment: rec.chip_commitment.to_hex(),
                    label: rec.label.clone(),
                    mac_at_enrollment: hex::encode(rec.mac_at_enrollment.0),
                })
                .collect(),
            seen_nonces: self.seen_nonces.iter().map(hex::encode).collect(),
        };
        serde_json::to_string_pretty(&file).expect("registry json")
    }

    pub fn from_json(text: &str) -> Result<Self, LinkError> {
        let fmt = |e: &dyn std::fmt::Display| LinkError::Format(e.to_string());
        let file: RegistryJson = serde_json::from_str(text).map_err(|e| fmt(&e))?;
        if file.format != REGISTRY_FORMAT || file.version != REGISTRY_FORMAT_VERSION {
            return Err(LinkError::Format(format!("unsupported format {} v{}", file.format, file.version)));
        }
        let mut registry = Registry::default();
        for entry in file.entries {
            let key = PublicKey::from_canonical_bytes(&hex::decode(&entry.public_key).map_err(|e| fmt(&e))?)?;
            let mut mac = [0u8; 6];
            hex::decode_to_slice(&entry.mac_at_enrollment, &mut mac).map_err(|e| fmt(&e))?;
            let record = EnrollmentRecord {
                chip_commitment: Digest::from_hex(&entry.chip_commitment).map_err(|e| fmt(&e))?,
                label: entry.label,
                mac_at_enrollment: MacAddress(mac),
            };
            if registry.entries.insert(key.clone(), record).is_some() {
                return Err(LinkError::DuplicateEnrollment(key.fingerprint()));
            }
        }
        for nonce in file.seen_nonces {
            let mut raw = [0u8; CHALLENGE_LEN];
            hex::decode_to_slice(&nonce, &mut raw).map_err(|e| fmt(&e))?;
            registry.seen_nonces.insert(raw);
        }
        Ok(registry)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryJson {
    format: String,
    version: u32,
    entries: Vec<EntryJson>,
    seen_nonces: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    public_key: String,
    chip_commitment: String,
    label: String,
    mac_at_enrollment: String,
}
