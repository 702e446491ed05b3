//! Physical-to-logical identity binding for connected devices.
//!
//! The crate simulates chips that carry a manufacturing-random identification
//! code, derives RSA or ElGamal key pairs from that code, and uses the public
//! key as the device's logical address. On top of that sit a signed
//! hash-chained transfer log, a Merkle-bundled proof-of-work ledger, a
//! challenge-response authenticator and a deterministic device-network
//! simulator.
//!
//! Module map:
//!
//! * [`chip_identity`]: simulated chip population, readout noise, aging and
//!   log-domain uniqueness statistics.
//! * [`keygen`]: SHA-256, primality, chip-derived key pairs, textbook
//!   signatures.
//! * [`transaction_chain`]: transaction units and signed hash chaining.
//! * [`blockchain`]: Merkle roots, nonce mining, chain validation and the
//!   tamper-repair cascade.
//! * [`link`]: ID cores, devices, enrollment registry and authentication.
//! * [`netsim`]: deterministic discrete-event scenarios and replay.

pub mod bits;
pub mod blockchain;
pub mod chip_identity;
pub mod keygen;
pub mod link;
pub mod netsim;
mod seed;
pub mod transaction_chain;

pub use bits::BitString;
pub use keygen::Digest;
