//! Deterministic discrete-event simulation of an enrolled device
//! population.
//!
//! Devices hand data to each other through the link layer, a single miner
//! seals verified transfers into blocks, impostors try to answer challenges
//! for addresses they do not own, and tamperers edit ledger copies. Ticks are
//! logical; every random choice comes from the master seed, so a config
//! always produces the same report and event log.

mod config;
mod event_log;
mod scheduler;
mod world;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockchain::LedgerError;
use crate::chip_identity::ChipError;
use crate::keygen::{sha256, Digest, KeyError};
use crate::link::LinkError;
use crate::transaction_chain::ChainError;

pub use config::{AttackMix, ScenarioConfig, MAX_SIM_DIFFICULTY, SSD_CONTROLLER};
pub use event_log::{EventLog, LogEntry, EVENT_LOG_FORMAT, EVENT_LOG_VERSION};
pub use scheduler::{schedule, EventKind, SimEvent};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario config: {0}")]
    Config(String),
    #[error(transparent)]
    Chip(#[from] ChipError),
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("bad event: {0}")]
    Event(String),
    #[error("event log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("event log version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("event log was recorded for a different config")]
    ConfigMismatch,
    #[error("event log is truncated: {0}")]
    Truncated(String),
    #[error("event log hash chain breaks at event {seq}")]
    Corrupted { seq: u64 },
    #[error("replay diverges from the log at event {seq}")]
    Diverged { seq: u64 },
    #[error("replayed report differs from the recorded one")]
    ReportMismatch,
}

/// Outcome counters. Everything here is a function of the config.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimMetrics {
    pub transfers_scheduled: u64,
    pub transfers_ok: u64,
    pub transfers_rejected: u64,
    pub spoofs_attempted: u64,
    pub spoofs_accepted: u64,
    pub tampers_attempted: u64,
    pub tampers_detected: u64,
    /// Tampers that also re-mined the cascade after the edited block.
    pub tampers_repaired: u64,
    pub blocks_mined: u64,
    /// Hashes spent by the honest miner.
    pub total_hash_attempts: u64,
    /// Hashes spent by tamperers re-mining.
    pub repair_hash_attempts: u64,
    /// Hex hash of the final block, empty if nothing was mined.
    pub ledger_tip: String,
}

impl SimMetrics {
    pub fn digest(&self) -> Digest {
        sha256(&serde_json::to_vec(self).expect("metrics json"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub scenario_name: String,
    #[serde(flatten)]
    pub metrics: SimMetrics,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        f64::deserialize(d).map(Duration::from_secs_f64)
    }
}

impl SimReport {
    pub fn to_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report json");
        // Keep the key name explicit about its unit.
        if let Some(obj) = value.as_object_mut() {
            if let Some(w) = obj.remove("wall_time") {
                obj.insert("wall_time_secs".into(), w);
            }
        }
        serde_json::to_string_pretty(&value).expect("report json")
    }

    pub fn summary_table(&self) -> String {
        let m = &self.metrics;
        let rows: [(&str, String); 13] = [
            ("scenario", self.scenario_name.clone()),
            ("transfers scheduled", m.transfers_scheduled.to_string()),
            ("transfers ok", m.transfers_ok.to_string()),
            ("transfers rejected", m.transfers_rejected.to_string()),
            ("spoofs attempted", m.spoofs_attempted.to_string()),
            ("spoofs accepted", m.spoofs_accepted.to_string()),
            ("tampers attempted", m.tampers_attempted.to_string()),
            ("tampers detected", m.tampers_detected.to_string()),
            ("tampers re-mined", m.tampers_repaired.to_string()),
            ("blocks mined", m.blocks_mined.to_string()),
            ("mining hash attempts", m.total_hash_attempts.to_string()),
            ("repair hash attempts", m.repair_hash_attempts.to_string()),
            ("wall time", format!("{:.3} s", self.wall_time.as_secs_f64())),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

fn finish(config: &ScenarioConfig, world: &world::World, started: Instant) -> SimReport {
    let mut metrics = world.metrics.clone();
    metrics.ledger_tip = if world.ledger().is_empty() {
        String::new()
    } else {
        world.ledger().tip_hash().to_hex()
    };
    SimReport {
        scenario_name: config.scenario_name.clone(),
        metrics,
        wall_time: started.elapsed(),
    }
}

/// Runs a scenario and returns its report together with the event log
/// that [`replay`] accepts.
pub fn run_scenario_logged(config: &ScenarioConfig) -> Result<(SimReport, EventLog), SimError> {
    let started = Instant::now();
    let mut world = world::World::build(config)?;
    let events = schedule(config);
    let mut entries = Vec::with_capacity(events.len());
    for event in events {
        let outcome = world.execute(&event.kind)?;
        entries.push(LogEntry { event, outcome });
    }
    let report = finish(config, &world, started);
    let log = EventLog {
        config: config.clone(),
        entries,
        report_digest: report.metrics.digest(),
    };
    Ok((report, log))
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<SimReport, SimError> {
    run_scenario_logged(config).map(|(report, _)| report)
}

/// Re-executes a recorded log against `config`, checking every event's
/// outcome and the final report against what was recorded.
pub fn replay(config: &ScenarioConfig, log_text: &str) -> Result<SimReport, SimError> {
    let log = EventLog::parse(log_text)?;
    replay_log(config, &log)
}

pub fn replay_log(config: &ScenarioConfig, log: &EventLog) -> Result<SimReport, SimError> {
    if &log.config != config {
        return Err(SimError::ConfigMismatch);
    }
    let started = Instant::now();
    let mut world = world::World::build(config)?;
    let mut last: Option<(u64, u64)> = None;
    for (i, entry) in log.entries.iter().enumerate() {
        let event = &entry.event;
        let key = (event.tick, event.seq);
        if event.seq != i as u64 || last.is_some_and(|prev| prev >= key) {
            return Err(SimError::Diverged { seq: event.seq });
        }
        last = Some(key);
        if world.execute(&event.kind)? != entry.outcome {
            return Err(SimError::Diverged { seq: event.seq });
        }
    }
    let report = finish(config, &world, started);
    if report.metrics.digest() != log.report_digest {
        return Err(SimError::ReportMismatch);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::Scheme;

    fn small(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n_devices: 8,
            n_transactions: 40,
            bundle_size: 16,
            difficulty_bits: 8,
            attack_mix: AttackMix { spoof_attempts: 10, tamper_attempts: 6 },
            master_seed: seed,
            scheme: Scheme::Elgamal,
            id_bits: 128,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn small_scenario_outcomes() {
        let report = run_scenario(&small(1)).unwrap();
        let m = &report.metrics;
        assert_eq!(m.transfers_ok, 40);
        assert_eq!(m.transfers_ok + m.transfers_rejected, m.transfers_scheduled);
        assert_eq!(m.blocks_mined, 3);
        assert_eq!((m.spoofs_attempted, m.spoofs_accepted), (10, 0));
        assert_eq!((m.tampers_attempted, m.tampers_detected, m.tampers_repaired), (6, 6, 3));
        assert!(m.repair_hash_attempts > 0);
    }

    #[test]
    fn run_is_a_function_of_config() {
        let a = run_scenario(&small(2)).unwrap();
        let b = run_scenario(&small(2)).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_ne!(a.metrics, run_scenario(&small(3)).unwrap().metrics);
    }

    #[test]
    fn replay_reproduces_and_checks_config() {
        let (report, log) = run_scenario_logged(&small(4)).unwrap();
        let text = log.to_jsonl();
        assert_eq!(EventLog::parse(&text).unwrap(), log);
        assert_eq!(replay(&small(4), &text).unwrap().metrics, report.metrics);
        assert!(matches!(replay(&small(5), &text), Err(SimError::ConfigMismatch)));
    }

    #[test]
    fn invalid_configs() {
        for bad in [
            ScenarioConfig { n_devices: 0, ..small(0) },
            ScenarioConfig { bundle_size: 0, ..small(0) },
            ScenarioConfig { difficulty_bits: 0, ..small(0) },
            ScenarioConfig { difficulty_bits: 40, ..small(0) },
            ScenarioConfig { id_bits: 4, ..small(0) },
        ] {
            assert!(matches!(run_scenario(&bad), Err(SimError::Config(_))));
        }
    }

    #[test]
    fn ssd_controller_preset() {
        let config = ScenarioConfig::named("ssd-controller").unwrap();
        assert_eq!(config.device_label(3), "ssd-cache-controller-3");
        assert!(ScenarioConfig::named("unknown").is_none());
        let run = ScenarioConfig {
            n_transactions: 20,
            difficulty_bits: 6,
            scheme: Scheme::Elgamal,
            ..config
        };
        let report = run_scenario(&run).unwrap();
        assert_eq!(report.scenario_name, "ssd-controller");
        assert_eq!(report.metrics.transfers_ok, 20);
    }

    #[test]
    fn report_json_and_table() {
        let report = run_scenario(&small(6)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["spoofs_accepted"], 0);
        assert!(json["wall_time_secs"].is_f64());
        assert!(report.summary_table().contains("spoofs accepted"));
    }
}
