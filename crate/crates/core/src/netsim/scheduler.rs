//! Builds the event sequence of a scenario from its seed.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::link::challenge;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Device `sender` hands its data to device `recipient`.
    Transfer { sender: u64, recipient: u64 },
    /// Attacker chip `attacker_chip` claims device `victim`'s address and
    /// answers challenge `nonce` (hex).
    Spoof {
        victim: u64,
        attacker_chip: u64,
        nonce: String,
    },
    /// The miner seals every queued transfer into a block.
    Mine,
    /// Flip one bit of one leaf in a copy of the ledger; with `repair`, also
    /// re-mine the cascade. Selectors are reduced modulo the ledger shape at
    /// execution time.
    Tamper {
        block_selector: u64,
        leaf_selector: u64,
        bit_selector: u64,
        repair: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub tick: u64,
    /// Tiebreak within a tick; also the event's position in the log.
    pub seq: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Transfers occupy ticks `0..n_transactions`; a mine follows each full
/// bundle in the same tick, plus one flush at the end. Spoofs land on
/// uniformly random transfer ticks. Tampers come after the last block.
pub fn schedule(config: &ScenarioConfig) -> Vec<SimEvent> {
    // Queue keyed by (tick, insertion order); payloads live beside it.
    let mut heap = BinaryHeap::new();
    let mut payloads: Vec<Option<EventKind>> = Vec::new();
    let mut push = |heap: &mut BinaryHeap<Reverse<(u64, usize)>>, tick: u64, kind: EventKind| {
        heap.push(Reverse((tick, payloads.len())));
        payloads.push(Some(kind));
    };

    let mut rng = seed::stream("schedule", &[config.master_seed]);
    let n = config.n_devices;
    for tick in 0..config.n_transactions {
        let sender = rng.gen_range(0..n);
        let recipient = if n == 1 { 0 } else { (sender + rng.gen_range(1..n)) % n };
        push(&mut heap, tick, EventKind::Transfer { sender, recipient });
        if (tick + 1) % config.bundle_size == 0 {
            push(&mut heap, tick, EventKind::Mine);
        }
    }
    if config.n_transactions % config.bundle_size != 0 {
        push(&mut heap, config.n_transactions, EventKind::Mine);
    }

    let mut spoof_rng = seed::stream("spoof-schedule", &[config.master_seed]);
    for attempt in 0..config.attack_mix.spoof_attempts {
        let tick = spoof_rng.gen_range(0..config.n_transactions);
        let victim = spoof_rng.gen_range(0..n);
        let nonce = challenge(spoof_rng.gen());
        push(
            &mut heap,
            tick,
            EventKind::Spoof {
                victim,
                attacker_chip: attempt,
                nonce: hex::encode(nonce),
            },
        );
    }

    let mut tamper_rng = seed::stream("tamper-schedule", &[config.master_seed]);
    for attempt in 0..config.attack_mix.tamper_attempts {
        push(
            &mut heap,
            config.n_transactions + 1,
            EventKind::Tamper {
                block_selector: tamper_rng.gen(),
                leaf_selector: tamper_rng.gen(),
                bit_selector: tamper_rng.gen(),
                repair: attempt % 2 == 1,
            },
        );
    }

    let mut events = Vec::with_capacity(heap.len());
    while let Some(Reverse((tick, slot))) = heap.pop() {
        events.push(SimEvent {
            tick,
            seq: events.len() as u64,
            kind: payloads[slot].take().expect("each event is popped once"),
        });
    }
    events
}
