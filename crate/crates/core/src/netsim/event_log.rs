//! JSON-lines event log.
//!
//! ```text
//! {"format":"idlink-event-log","version":1,"event_count":N,"config":{…}}
//! {"tick":0,"seq":0,"kind":"transfer","sender":3,"recipient":7,"outcome":"…","chain":"…"}
//! …
//! {"end":true,"event_count":N,"report_digest":"…"}
//! ```
//!
//! `outcome` digests what the event produced; `chain` is
//! `sha256(previous chain ∥ canonical JSON of [event, outcome])`, starting
//! from all zeros, so an edited line breaks the chain from that point on.

use serde::{Deserialize, Serialize};

use super::scheduler::SimEvent;
use super::{ScenarioConfig, SimError};
use crate::keygen::{sha256_concat, Digest};

pub const EVENT_LOG_FORMAT: &str = "idlink-event-log";
pub const EVENT_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub event: SimEvent,
    pub outcome: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventLog {
    pub config: ScenarioConfig,
    pub entries: Vec<LogEntry>,
    pub report_digest: Digest,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
    event_count: u64,
    config: ScenarioConfig,
}

#[derive(Serialize, Deserialize)]
struct EventLine {
    #[serde(flatten)]
    event: SimEvent,
    outcome: String,
    chain: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Trailer {
    end: bool,
    event_count: u64,
    report_digest: String,
}

fn chain_step(prev: &Digest, entry: &LogEntry) -> Digest {
    let canonical = serde_json::to_vec(&(&entry.event, entry.outcome.to_hex())).expect("event json");
    sha256_concat(&[prev.as_bytes(), &canonical])
}

impl EventLog {
    pub fn to_jsonl(&self) -> String {
        let header = Header {
            format: EVENT_LOG_FORMAT.into(),
            version: EVENT_LOG_VERSION,
            event_count: self.entries.len() as u64,
            config: self.config.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header json");
        out.push('\n');
        let mut chain = Digest::ZERO;
        for entry in &self.entries {
            chain = chain_step(&chain, entry);
            let line = EventLine {
                event: entry.event.clone(),
                outcome: entry.outcome.to_hex(),
                chain: chain.to_hex(),
            };
            out.push_str(&serde_json::to_string(&line).expect("event json"));
            out.push('\n');
        }
        let trailer = Trailer {
            end: true,
            event_count: self.entries.len() as u64,
            report_digest: self.report_digest.to_hex(),
        };
        out.push_str(&serde_json::to_string(&trailer).expect("trailer json"));
        out.push('\n');
        out
    }

    /// Parses and checks structure, version and the hash chain. Whether the
    /// events actually reproduce is checked by replaying them.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let err = |line: usize, message: String| SimError::Log { line, message };
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        let Some(&(_, first)) = lines.first() else {
            return Err(SimError::Truncated("log is empty".into()));
        };
        let header: Header = serde_json::from_str(first).map_err(|e| err(1, e.to_string()))?;
        if header.format != EVENT_LOG_FORMAT {
            return Err(err(1, format!("not an event log: {}", header.format)));
        }
        if header.version != EVENT_LOG_VERSION {
            return Err(SimError::VersionMismatch {
                found: header.version,
                expected: EVENT_LOG_VERSION,
            });
        }
        let Some(&(last_no, last)) = lines.last().filter(|_| lines.len() >= 2) else {
            return Err(SimError::Truncated("no trailer".into()));
        };
        let trailer: Trailer = serde_json::from_str(last)
            .map_err(|_| SimError::Truncated(format!("line {last_no} is not a trailer")))?;
        let body = &lines[1..lines.len() - 1];
        if !trailer.end || trailer.event_count != header.event_count || body.len() as u64 != header.event_count {
            return Err(SimError::Truncated(format!(
                "header announces {} events, found {}",
                header.event_count,
                body.len()
            )));
        }

        let mut chain = Digest::ZERO;
        let mut entries = Vec::with_capacity(body.len());
        for &(line_no, text) in body {
            let raw: EventLine = serde_json::from_str(text).map_err(|e| err(line_no, e.to_string()))?;
            let entry = LogEntry {
                outcome: Digest::from_hex(&raw.outcome).map_err(|e| err(line_no, e.to_string()))?,
                event: raw.event,
            };
            chain = chain_step(&chain, &entry);
            if chain.to_hex() != raw.chain {
                return Err(SimError::Corrupted { seq: entry.event.seq });
            }
            entries.push(entry);
        }
        Ok(Self {
            config: header.config,
            entries,
            report_digest: Digest::from_hex(&trailer.report_digest).map_err(|e| err(last_no, e.to_string()))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keygen::Scheme;
    use crate::netsim::{replay, run_scenario_logged, AttackMix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config() -> ScenarioConfig {
        ScenarioConfig {
            n_devices: 6,
            n_transactions: 30,
            bundle_size: 8,
            difficulty_bits: 6,
            attack_mix: AttackMix { spoof_attempts: 5, tamper_attempts: 4 },
            master_seed: 11,
            scheme: Scheme::Elgamal,
            id_bits: 64,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn truncation_is_reported() {
        let (_, log) = run_scenario_logged(&config()).unwrap();
        let text = log.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        for keep in [0, 1, lines.len() / 2, lines.len() - 1] {
            let cut = lines[..keep].join("\n");
            assert!(matches!(EventLog::parse(&cut), Err(SimError::Truncated(_))), "keep {keep}");
        }
    }

    #[test]
    fn version_is_checked() {
        let (_, log) = run_scenario_logged(&config()).unwrap();
        let text = log.to_jsonl().replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(
            EventLog::parse(&text),
            Err(SimError::VersionMismatch { found: 2, expected: 1 })
        ));
    }

    /// Rewrites a single numeric or hex field of a random event and expects
    /// some error from parse or replay.
    #[test]
    fn edited_events_never_replay_cleanly() {
        let cfg = config();
        let (_, log) = run_scenario_logged(&cfg).unwrap();
        let text = log.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let idx = rng.gen_range(1..lines.len() - 1);
            let mut value: serde_json::Value = serde_json::from_str(lines[idx]).unwrap();
            let obj = value.as_object_mut().unwrap();
            let keys: Vec<String> = obj.keys().filter(|k| k.as_str() != "kind").cloned().collect();
            let key = &keys[rng.gen_range(0..keys.len())];
            let field = obj.get_mut(key).unwrap();
            match field {
                serde_json::Value::Number(n) => *field = (n.as_u64().unwrap() + 1).into(),
                serde_json::Value::Bool(b) => *field = (!*b).into(),
                serde_json::Value::String(s) => {
                    let first = if s.starts_with('0') { "1" } else { "0" };
                    *field = format!("{first}{}", &s[1..]).into();
                }
                other => panic!("unexpected field {other}"),
            }
            let mut edited: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            edited[idx] = value.to_string();
            assert!(replay(&cfg, &edited.join("\n")).is_err(), "edit of {key} on line {idx} went unnoticed");
        }
    }
}
