#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use idlink::chip_identity::{fabricate_chip, read_chip_id, FabProcess};
use idlink::keygen::{DerivationParams, KeyMaterial, Verdict};
use idlink::link::{link_transfer, DeviceNode, MacAddress};
use idlink::transaction_chain::{make_genesis, transfer, verify_link, LogicalNode, TransferRecord};

/// Six ElGamal keys followed by six RSA keys, all from 256-bit chip IDs.
pub fn key_pool() -> &'static [KeyMaterial] {
    static POOL: OnceLock<Vec<KeyMaterial>> = OnceLock::new();
    POOL.get_or_init(|| {
        let process = FabProcess::new(256, 0x5eed).unwrap();
        let params = [DerivationParams::elgamal_default(), DerivationParams::rsa_default()];
        params
            .iter()
            .flat_map(|p| (0..6).map(move |i| (p, i)))
            .map(|(p, i)| {
                let id = read_chip_id(&fabricate_chip(&process, i), &process, 0);
                p.derive(&id).unwrap()
            })
            .collect()
    })
}

/// An honest record whose holders are `path[0]`, `path[1]`, … of the pool.
pub fn honest_record(path: &[usize]) -> TransferRecord {
    let keys = key_pool();
    let genesis = make_genesis(&keys[path[0]]).unwrap();
    let mut record = TransferRecord::new(genesis.unit.clone());
    let mut node = genesis;
    for &next in &path[1..] {
        let unit = transfer(&node, &keys[next].public_key()).unwrap();
        record.push(unit.clone());
        node = LogicalNode {
            unit,
            secret_key: keys[next].secret_key(),
        };
    }
    record
}

pub fn devices(params: &DerivationParams, n: u64) -> Vec<DeviceNode> {
    let process = FabProcess::new(256, 42).unwrap();
    (0..n)
        .map(|i| {
            DeviceNode::start(fabricate_chip(&process, i), &process, params, MacAddress([2, 0, 0, 0, 0, i as u8]), format!("dev{i}"))
                .unwrap()
        })
        .collect()
}

/// Walks data 0 → 1 → 2 → 0 through the link layer and returns the record.
pub fn device_record(params: &DerivationParams) -> TransferRecord {
    let mut devs = devices(params, 3);
    let mut record = TransferRecord::new(devs[0].logical_node.unit.clone());
    for (from, to) in [(0, 1), (1, 2), (2, 0)] {
        let unit = link_transfer(&devs[from], &devs[to]).unwrap();
        // Same bytes as the chip-agnostic constructor on the same node.
        let plain = transfer(&devs[from].logical_node, &devs[to].public_key()).unwrap();
        assert_eq!(unit.to_canonical_bytes(), plain.to_canonical_bytes());
        assert_eq!(verify_link(&devs[from].public_key(), &unit), Verdict::Valid);
        devs[to].receive(unit.clone()).unwrap();
        record.push(unit);
    }
    record
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}
