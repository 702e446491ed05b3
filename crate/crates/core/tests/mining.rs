use idlink::blockchain::{
    block_hash, meets_difficulty, mine_block, mine_block_parallel, BlockChainState, Difficulty,
};
use idlink::keygen::{sha256, Digest};
use proptest::prelude::*;

fn leaves(tag: u64, n: u64) -> Vec<Digest> {
    (0..n).map(|i| sha256(format!("{tag}:{i}").as_bytes())).collect()
}

/// Attempts per block are geometric with mean 2^d and standard deviation
/// about 2^d; the sample mean of 400 blocks sits within 4 standard errors.
#[test]
fn mean_attempts_at_difficulty_8() {
    let mut chain = BlockChainState::new(Difficulty::new(8).unwrap());
    let blocks = 400u64;
    let total: u64 = (0..blocks).map(|b| chain.append_block(leaves(b, 5)).unwrap()).sum();
    let mean = total as f64 / blocks as f64;
    let se = 256.0 / (blocks as f64).sqrt();
    assert!((mean - 256.0).abs() < 4.0 * se, "mean {mean}");
    assert!(chain.verify_all().is_valid());
}

/// Leading-zero counting checked against a string rendering of the hash.
#[test]
fn difficulty_predicate_matches_bit_string() {
    for i in 0..2000u32 {
        let h = sha256(&i.to_be_bytes());
        let zeros = h.0.iter().map(|b| format!("{b:08b}")).collect::<String>().find('1').unwrap_or(256);
        for bits in 1..=12 {
            assert_eq!(meets_difficulty(&h, Difficulty::new(bits).unwrap()), zeros >= bits as usize);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn parallel_mining_finds_the_serial_nonce(seed: u64, bits in 1u32..=12, threads in 1usize..=6, start in 0u64..100_000) {
        let root = sha256(&seed.to_be_bytes());
        let prev = sha256(&(!seed).to_be_bytes());
        let d = Difficulty::new(bits).unwrap();
        let serial = mine_block(root, prev, d, start).unwrap();
        let parallel = mine_block_parallel(root, prev, d, start, threads).unwrap();
        prop_assert_eq!(&serial.block, &parallel.block);
        prop_assert_eq!(serial.attempts, parallel.attempts);
        prop_assert!(meets_difficulty(&block_hash(&serial.block), d));
    }

    #[test]
    fn tamper_cascade(len in 1usize..8, seed: u64, bits in 4u32..=10) {
        let mut chain = BlockChainState::new(Difficulty::new(bits).unwrap());
        for b in 0..len {
            chain.append_block(leaves(seed ^ b as u64, 3)).unwrap();
        }
        for i in 0..len {
            let new_root = sha256(&[i as u8, 0xff]);
            let (repaired, cost) = chain.tamper_and_repair(i, new_root).unwrap();
            prop_assert_eq!(cost.blocks_remined, len - i);
            prop_assert_eq!(cost.per_block_attempts.len(), len - i);
            prop_assert_eq!(cost.total_hash_attempts, cost.per_block_attempts.iter().sum::<u64>());
            prop_assert!(repaired.validate_chain().is_valid());
            prop_assert_eq!(&repaired.blocks[..i], &chain.blocks[..i]);
            // The bundle still holds the honest leaves.
            prop_assert_eq!(repaired.audit_bundles().first_bad_block(), Some(i));

            let mut unrepaired = chain.clone();
            unrepaired.blocks[i].merkle_root = new_root;
            prop_assert_eq!(unrepaired.verify_all().first_bad_block(), Some(i));
        }
    }
}
