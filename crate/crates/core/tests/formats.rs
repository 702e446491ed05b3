//! Every persisted format parses back to the same value and re-emits the
//! same bytes.

mod common;

use idlink::blockchain::{ledger_to_jsonl, parse_ledger_jsonl, BlockChainState, Difficulty};
use idlink::chip_identity::{emit_chip_dump, fabricate_chip, parse_chip_dump, read_chip_id, ChipId, FabProcess};
use idlink::keygen::{key_material_to_json, parse_key_file, public_key_to_json, sha256, DerivationParams, KeyMaterial};
use idlink::link::{DeviceNode, MacAddress, Registry};
use idlink::netsim::{run_scenario_logged, AttackMix, EventLog, ScenarioConfig};
use idlink::transaction_chain::{parse_record_jsonl, record_to_jsonl};
use idlink::BitString;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chip_dumps(bits in prop::collection::vec(any::<bool>(), 1..600)) {
        let id = ChipId::new(BitString::from_bools(bits.iter().copied()));
        let text = emit_chip_dump(&id);
        prop_assert_eq!(text.lines().count(), bits.len().div_ceil(64));
        let back = parse_chip_dump(&text).unwrap();
        prop_assert_eq!(emit_chip_dump(&back), text);
        prop_assert_eq!(back, id);
    }

    #[test]
    fn ledgers(bits in 1u32..=6, sizes in prop::collection::vec(1u64..20, 0..6)) {
        let mut chain = BlockChainState::new(Difficulty::new(bits).unwrap());
        for (b, &n) in sizes.iter().enumerate() {
            chain.append_block((0..n).map(|i| sha256(&[b as u8, i as u8])).collect()).unwrap();
        }
        let text = ledger_to_jsonl(&chain);
        let back = parse_ledger_jsonl(&text).unwrap();
        prop_assert_eq!(ledger_to_jsonl(&back), text);
        prop_assert_eq!(back, chain);
    }

    #[test]
    fn transfer_records(path in prop::collection::vec(0..common::key_pool().len(), 1..10)) {
        let record = common::honest_record(&path);
        let text = record_to_jsonl(&record);
        let back = parse_record_jsonl(&text).unwrap();
        prop_assert_eq!(record_to_jsonl(&back), text);
        prop_assert_eq!(back, record);
    }
}

#[test]
fn key_files() {
    for key in common::key_pool() {
        for material in [key.clone(), erased(key)] {
            let text = key_material_to_json(&material);
            let parsed = parse_key_file(&text).unwrap();
            assert_eq!(parsed.public_key, material.public_key());
            assert_eq!(key_material_to_json(parsed.key_material.as_ref().unwrap()), text);
            assert_eq!(parsed.key_material.unwrap(), material);
        }
        let public = public_key_to_json(&key.public_key());
        let parsed = parse_key_file(&public).unwrap();
        assert!(parsed.key_material.is_none());
        assert_eq!(public_key_to_json(&parsed.public_key), public);
    }
}

fn erased(key: &KeyMaterial) -> KeyMaterial {
    let mut key = key.clone();
    if let KeyMaterial::Rsa(k) = &mut key {
        k.erase_primes();
    }
    key
}

#[test]
fn registries() {
    let process = FabProcess::new(128, 3).unwrap();
    let mut registry = Registry::default();
    for (i, params) in [DerivationParams::rsa_default(), DerivationParams::elgamal_default()].iter().enumerate() {
        for j in 0..3u64 {
            let index = i as u64 * 3 + j;
            let device =
                DeviceNode::start(fabricate_chip(&process, index), &process, params, MacAddress([0, 1, 2, 3, 4, index as u8]), format!("d{index}"))
                    .unwrap();
            registry.enroll(&device).unwrap();
        }
    }
    let text = registry.to_json();
    let back = Registry::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    assert_eq!(back.len(), 6);
}

#[test]
fn event_logs() {
    let config = ScenarioConfig {
        n_devices: 5,
        n_transactions: 25,
        bundle_size: 10,
        difficulty_bits: 5,
        attack_mix: AttackMix { spoof_attempts: 3, tamper_attempts: 2 },
        master_seed: 8,
        scheme: idlink::keygen::Scheme::Elgamal,
        id_bits: 64,
        ..ScenarioConfig::default()
    };
    let (_, log) = run_scenario_logged(&config).unwrap();
    let text = log.to_jsonl();
    let back = EventLog::parse(&text).unwrap();
    assert_eq!(back.to_jsonl(), text);
    assert_eq!(back, log);
}

#[test]
fn fabricated_dumps_are_reproducible() {
    let dumps = |seed| {
        let process = FabProcess::new(256, seed).unwrap();
        (0..5).map(|i| emit_chip_dump(&read_chip_id(&fabricate_chip(&process, i), &process, 0))).collect::<Vec<_>>()
    };
    assert_eq!(dumps(7), dumps(7));
    assert_ne!(dumps(7), dumps(8));
}
