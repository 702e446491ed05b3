use serde::{Deserialize, Serialize};

use super::SimError;
use crate::chip_identity::MIN_ID_BITS;
use crate::keygen::Scheme;

/// Largest difficulty accepted for simulated mining.
pub const MAX_SIM_DIFFICULTY: u32 = 32;

pub const SSD_CONTROLLER: &str = "ssd-controller";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackMix {
    pub spoof_attempts: u64,
    pub tamper_attempts: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_name: String,
    pub n_devices: u64,
    pub n_transactions: u64,
    pub bundle_size: u64,
    pub difficulty_bits: u32,
    pub attack_mix: AttackMix,
    pub master_seed: u64,
    pub scheme: Scheme,
    pub id_bits: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario_name: "iot".into(),
            n_devices: 100,
            n_transactions: 1000,
            bundle_size: 256,
            difficulty_bits: 12,
            attack_mix: AttackMix {
                spoof_attempts: 0,
                tamper_attempts: 0,
            },
            master_seed: 0,
            scheme: Scheme::Rsa,
            id_bits: 256,
        }
    }
}

impl ScenarioConfig {
    /// Storage appliance whose SSD cache controllers carry identification
    /// chips in place of their DRAM. Behaves like the default population.
    pub fn ssd_controller() -> Self {
        Self {
            scenario_name: SSD_CONTROLLER.into(),
            n_devices: 32,
            ..Self::default()
        }
    }

    /// Preset by name: `iot` (the default) or `ssd-controller`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "iot" => Some(Self::default()),
            SSD_CONTROLLER => Some(Self::ssd_controller()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |m: String| Err(SimError::Config(m));
        if self.n_devices == 0 {
            return fail("n_devices must be positive".into());
        }
        if self.n_transactions == 0 {
            return fail("n_transactions must be positive".into());
        }
        if self.bundle_size == 0 {
            return fail("bundle_size must be positive".into());
        }
        if !(1..=MAX_SIM_DIFFICULTY).contains(&self.difficulty_bits) {
            return fail(format!("difficulty_bits must be in 1..={MAX_SIM_DIFFICULTY}"));
        }
        if self.id_bits < MIN_ID_BITS {
            return fail(format!("id_bits must be at least {MIN_ID_BITS}"));
        }
        Ok(())
    }

    /// Label given to device `index`.
    pub fn device_label(&self, index: u64) -> String {
        if self.scenario_name == SSD_CONTROLLER {
            format!("ssd-cache-controller-{index}")
        } else {
            format!("{}-device-{index}", self.scenario_name)
        }
    }
}
