//! Simulation state and event execution.

use crate::blockchain::{merkle_root, BlockChainState, Difficulty};
use crate::chip_identity::{fabricate_chip, FabProcess};
use crate::keygen::{sha256, sha256_concat, DerivationParams, Digest, Scheme};
use crate::link::{authenticate, link_transfer, AuthOutcome, DeviceNode, Impostor, MacAddress, Registry, CHALLENGE_LEN};
use crate::seed;
use crate::transaction_chain::{unit_hash, verify_link, TransactionUnit};

use super::scheduler::EventKind;
use super::{ScenarioConfig, SimError, SimMetrics};
use rand::RngCore;

pub(crate) struct World {
    config: ScenarioConfig,
    attacker_process: FabProcess,
    params: DerivationParams,
    devices: Vec<DeviceNode>,
    registry: Registry,
    /// The verifier's view of each device's current unit.
    known_units: Vec<TransactionUnit>,
    /// Verified transfers waiting for the miner.
    queue: Vec<Digest>,
    ledger: BlockChainState,
    /// Block hashes as published when each block was mined.
    published: Vec<Digest>,
    pub metrics: SimMetrics,
}

impl World {
    /// Fabricates, starts and enrolls every device.
    pub fn build(config: &ScenarioConfig) -> Result<Self, SimError> {
        config.validate()?;
        let process = FabProcess::new(config.id_bits, config.master_seed)?;
        let attacker_process = FabProcess::new(config.id_bits, !config.master_seed)?;
        let params = match config.scheme {
            Scheme::Rsa => DerivationParams::rsa_default(),
            Scheme::Elgamal => DerivationParams::elgamal_default(),
        };
        let mut registry = Registry::default();
        let mut devices = Vec::with_capacity(config.n_devices as usize);
        for i in 0..config.n_devices {
            let mut mac = [0u8; 6];
            seed::stream("mac", &[config.master_seed, i]).fill_bytes(&mut mac);
            let device = DeviceNode::start(
                fabricate_chip(&process, i),
                &process,
                &params,
                MacAddress(mac),
                config.device_label(i),
            )?;
            registry.enroll(&device)?;
            devices.push(device);
        }
        let known_units = devices.iter().map(|d| d.logical_node.unit.clone()).collect();
        Ok(Self {
            config: config.clone(),
            attacker_process,
            params,
            devices,
            registry,
            known_units,
            queue: Vec::new(),
            ledger: BlockChainState::new(Difficulty::new(config.difficulty_bits)?),
            published: Vec::new(),
            metrics: SimMetrics::default(),
        })
    }

    pub fn ledger(&self) -> &BlockChainState {
        &self.ledger
    }

    fn device_index(&self, index: u64) -> Result<usize, SimError> {
        if index < self.config.n_devices {
            Ok(index as usize)
        } else {
            Err(SimError::Event(format!("device {index} does not exist")))
        }
    }

    /// Whether the verifier accepts `unit` as a hand-off from device `from`.
    fn accepts_transfer(&self, from: usize, unit: &TransactionUnit) -> bool {
        unit.prev_hash == unit_hash(&self.known_units[from])
            && verify_link(&self.devices[from].public_key(), unit).is_valid()
    }

    /// Runs one event and returns a digest of its observable outcome.
    pub fn execute(&mut self, kind: &EventKind) -> Result<Digest, SimError> {
        match kind {
            EventKind::Transfer { sender, recipient } => {
                let (s, r) = (self.device_index(*sender)?, self.device_index(*recipient)?);
                self.metrics.transfers_scheduled += 1;
                let unit = link_transfer(&self.devices[s], &self.devices[r])?;
                if self.accepts_transfer(s, &unit) {
                    let h = unit_hash(&unit);
                    self.devices[r].receive(unit.clone())?;
                    self.known_units[r] = unit;
                    self.queue.push(h);
                    self.metrics.transfers_ok += 1;
                    Ok(h)
                } else {
                    self.metrics.transfers_rejected += 1;
                    Ok(sha256(b"transfer-rejected"))
                }
            }
            EventKind::Spoof {
                victim,
                attacker_chip,
                nonce,
            } => {
                let v = self.device_index(*victim)?;
                let mut challenge = [0u8; CHALLENGE_LEN];
                hex::decode_to_slice(nonce, &mut challenge)
                    .map_err(|e| SimError::Event(format!("spoof nonce: {e}")))?;
                let chip = fabricate_chip(&self.attacker_process, *attacker_chip);
                let impostor = Impostor::new(chip, &self.attacker_process, &self.params, &self.devices[v])?;
                let response = impostor.respond(challenge)?;
                let victim_key = self.devices[v].public_key();
                let auth = authenticate(&mut self.registry, &victim_key, &challenge, &response);

                let target = (v + 1) % self.devices.len();
                let forged = impostor.forge_transfer(&self.devices[target].public_key())?;
                let forged_ok = self.accepts_transfer(v, &forged);

                self.metrics.spoofs_attempted += 1;
                let accepted = auth.is_accept() || forged_ok;
                if accepted {
                    self.metrics.spoofs_accepted += 1;
                }
                let auth_code = match auth {
                    AuthOutcome::Accept => 0u8,
                    AuthOutcome::Reject(reason) => 1 + reason as u8,
                };
                Ok(sha256_concat(&[&response.to_wire(), &[auth_code, forged_ok as u8]]))
            }
            EventKind::Mine => {
                if self.queue.is_empty() {
                    return Ok(Digest::ZERO);
                }
                let leaves = std::mem::take(&mut self.queue);
                let attempts = self.ledger.append_block(leaves)?;
                self.metrics.blocks_mined += 1;
                self.metrics.total_hash_attempts += attempts;
                let tip = self.ledger.tip_hash();
                self.published.push(tip);
                Ok(tip)
            }
            EventKind::Tamper {
                block_selector,
                leaf_selector,
                bit_selector,
                repair,
            } => {
                if self.ledger.is_empty() {
                    return Ok(Digest::ZERO);
                }
                let mut copy = self.ledger.clone();
                let block = (block_selector % copy.len() as u64) as usize;
                let leaves = &mut copy.bundles[block];
                let leaf = (leaf_selector % leaves.len() as u64) as usize;
                leaves[leaf] = leaves[leaf].with_bit_flipped((bit_selector % 256) as usize);
                let new_root = merkle_root(leaves)?;

                let tampered = if *repair {
                    let (repaired, report) = copy.tamper_and_repair(block, new_root)?;
                    self.metrics.tampers_repaired += 1;
                    self.metrics.repair_hash_attempts += report.total_hash_attempts;
                    repaired
                } else {
                    copy.blocks[block].merkle_root = new_root;
                    copy
                };
                let detected = !tampered.verify_all().is_valid() || tampered.block_hashes() != self.published;
                self.metrics.tampers_attempted += 1;
                if detected {
                    self.metrics.tampers_detected += 1;
                }
                Ok(sha256_concat(&[tampered.tip_hash().as_bytes(), &[detected as u8]]))
            }
        }
    }
}
