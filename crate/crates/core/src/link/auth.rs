//! Challenge-response authentication of logical addresses.
//!
//! The verifier sends a fresh 32-byte nonce; the device answers with a
//! signature over `sha256(nonce ∥ claimed key)`. Only the chip that produced
//! the key can produce that signature. Wire frame:
//! `nonce (32 bytes) ∥ u32 len ∥ key bytes ∥ u32 len ∥ signature bytes`,
//! lengths big-endian, key and signature in their canonical encodings.

use rand::RngCore;

use super::{make_id_core, DeviceNode, IdCore, LinkError, MacAddress, Registry};
use crate::chip_identity::{Chip, FabProcess};
use crate::keygen::wire::{Reader, Writer};
use crate::keygen::{self, sha256_concat, DerivationParams, Digest, KeyError, PublicKey, Signature, Verdict};
use crate::seed;
use crate::transaction_chain::{self, LogicalNode, TransactionUnit};

pub const CHALLENGE_LEN: usize = 32;

/// A fresh nonce from the verifier's seeded stream.
pub fn challenge(verifier_rng_seed: u64) -> [u8; CHALLENGE_LEN] {
    let mut nonce = [0u8; CHALLENGE_LEN];
    seed::stream("challenge", &[verifier_rng_seed]).fill_bytes(&mut nonce);
    nonce
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengeResponse {
    pub challenge_nonce: [u8; CHALLENGE_LEN],
    pub claimed_public_key: PublicKey,
    pub response_signature: Signature,
}

impl ChallengeResponse {
    pub fn to_wire(&self) -> Vec<u8> {
        let mut w = Writer::default();
        for b in self.challenge_nonce {
            w.u8(b);
        }
        w.bytes(&self.claimed_public_key.to_canonical_bytes());
        w.bytes(&self.response_signature.to_canonical_bytes());
        w.finish()
    }

    pub fn from_wire(bytes: &[u8]) -> Result<Self, KeyError> {
        let mut r = Reader::new(bytes);
        let mut challenge_nonce = [0u8; CHALLENGE_LEN];
        for b in &mut challenge_nonce {
            *b = r.u8()?;
        }
        let claimed_public_key = PublicKey::from_canonical_bytes(r.bytes()?)?;
        let response_signature = Signature::from_canonical_bytes(r.bytes()?)?;
        r.end()?;
        Ok(Self {
            challenge_nonce,
            claimed_public_key,
            response_signature,
        })
    }
}

fn response_digest(nonce: &[u8; CHALLENGE_LEN], claimed: &PublicKey) -> Digest {
    sha256_concat(&[nonce, &claimed.to_canonical_bytes()])
}

fn answer(core: &IdCore, claimed: &PublicKey, nonce: [u8; CHALLENGE_LEN]) -> Result<ChallengeResponse, LinkError> {
    Ok(ChallengeResponse {
        challenge_nonce: nonce,
        claimed_public_key: claimed.clone(),
        response_signature: core.sign(&response_digest(&nonce, claimed))?,
    })
}

/// An honest device answering for its own address.
pub fn respond(device: &DeviceNode, nonce: [u8; CHALLENGE_LEN]) -> Result<ChallengeResponse, LinkError> {
    answer(&device.id_core, &device.public_key(), nonce)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    UnknownAddress,
    Replay,
    BadSignature,
    /// Response does not match the issued nonce or claimed key, or its
    /// signature is structurally invalid.
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthOutcome {
    Accept,
    Reject(RejectReason),
}

impl AuthOutcome {
    pub fn is_accept(&self) -> bool {
        matches!(self, AuthOutcome::Accept)
    }
}

/// Verifies a response to `nonce` for `claimed`. Every nonce presented for an
/// enrolled address is remembered and refused the second time.
pub fn authenticate(
    registry: &mut Registry,
    claimed: &PublicKey,
    nonce: &[u8; CHALLENGE_LEN],
    response: &ChallengeResponse,
) -> AuthOutcome {
    use AuthOutcome::Reject;
    if !registry.is_enrolled(claimed) {
        return Reject(RejectReason::UnknownAddress);
    }
    if !registry.record_nonce(*nonce) {
        return Reject(RejectReason::Replay);
    }
    if &response.challenge_nonce != nonce || &response.claimed_public_key != claimed {
        return Reject(RejectReason::Malformed);
    }
    match keygen::verify(&response_digest(nonce, claimed), &response.response_signature, claimed) {
        Verdict::Valid => AuthOutcome::Accept,
        Verdict::Invalid => Reject(RejectReason::BadSignature),
        Verdict::Malformed(_) => Reject(RejectReason::Malformed),
    }
}

/// A device with its own chip that claims someone else's address: it copies
/// the victim's MAC, public key and current transaction unit, but can only
/// sign with keys derived from its own chip.
#[derive(Debug, Clone)]
pub struct Impostor {
    pub chip: Chip,
    pub id_core: IdCore,
    pub mac_address: MacAddress,
    pub claimed_public_key: PublicKey,
    pub stolen_unit: TransactionUnit,
}

impl Impostor {
    pub fn new(
        chip: Chip,
        process: &FabProcess,
        params: &DerivationParams,
        victim: &DeviceNode,
    ) -> Result<Self, LinkError> {
        Ok(Self {
            id_core: make_id_core(&chip, process, params)?,
            chip,
            mac_address: victim.mac_address,
            claimed_public_key: victim.public_key(),
            stolen_unit: victim.logical_node.unit.clone(),
        })
    }

    pub fn respond(&self, nonce: [u8; CHALLENGE_LEN]) -> Result<ChallengeResponse, LinkError> {
        answer(&self.id_core, &self.claimed_public_key, nonce)
    }

    /// A transfer that pretends to come from the victim.
    pub fn forge_transfer(&self, recipient: &PublicKey) -> Result<TransactionUnit, LinkError> {
        let node = LogicalNode {
            unit: self.stolen_unit.clone(),
            secret_key: self.id_core.secret_key(),
        };
        Ok(transaction_chain::transfer(&node, recipient)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip_identity::fabricate_chip;
    use crate::transaction_chain::verify_link;

    fn setup(params: &DerivationParams) -> (FabProcess, DeviceNode, Registry) {
        let process = FabProcess::new(256, 77).unwrap();
        let device =
            DeviceNode::start(fabricate_chip(&process, 0), &process, params, MacAddress([2, 0, 0, 0, 0, 1]), "d").unwrap();
        let mut registry = Registry::default();
        registry.enroll(&device).unwrap();
        (process, device, registry)
    }

    #[test]
    fn honest_device_is_accepted_once_per_nonce() {
        for params in [DerivationParams::rsa_default(), DerivationParams::elgamal_default()] {
            let (_, device, mut registry) = setup(&params);
            let nonce = challenge(1);
            let response = respond(&device, nonce).unwrap();
            assert_eq!(authenticate(&mut registry, &device.public_key(), &nonce, &response), AuthOutcome::Accept);
            assert_eq!(
                authenticate(&mut registry, &device.public_key(), &nonce, &response),
                AuthOutcome::Reject(RejectReason::Replay)
            );
        }
    }

    #[test]
    fn unknown_address() {
        let params = DerivationParams::elgamal_default();
        let (process, _, mut registry) = setup(&params);
        let stranger =
            DeviceNode::start(fabricate_chip(&process, 9), &process, &params, MacAddress::default(), "s").unwrap();
        let nonce = challenge(2);
        let response = respond(&stranger, nonce).unwrap();
        assert_eq!(
            authenticate(&mut registry, &stranger.public_key(), &nonce, &response),
            AuthOutcome::Reject(RejectReason::UnknownAddress)
        );
    }

    #[test]
    fn impostor_with_cloned_mac_is_rejected() {
        let params = DerivationParams::elgamal_default();
        let (process, victim, mut registry) = setup(&params);
        for attempt in 0..1000u64 {
            let impostor = Impostor::new(fabricate_chip(&process, 1 + attempt), &process, &params, &victim).unwrap();
            assert_eq!(impostor.mac_address, victim.mac_address);
            let nonce = challenge(100 + attempt);
            let response = impostor.respond(nonce).unwrap();
            assert_eq!(
                authenticate(&mut registry, &victim.public_key(), &nonce, &response),
                AuthOutcome::Reject(RejectReason::BadSignature)
            );
        }
    }

    #[test]
    fn forged_transfer_fails_link_check() {
        let params = DerivationParams::rsa_default();
        let (process, victim, _) = setup(&params);
        let impostor = Impostor::new(fabricate_chip(&process, 5), &process, &params, &victim).unwrap();
        let forged = impostor.forge_transfer(&impostor.id_core.public_key()).unwrap();
        assert!(!verify_link(&victim.public_key(), &forged).is_valid());
    }

    #[test]
    fn mismatched_nonce_or_key_is_malformed() {
        let params = DerivationParams::elgamal_default();
        let (_, device, mut registry) = setup(&params);
        let response = respond(&device, challenge(3)).unwrap();
        assert_eq!(
            authenticate(&mut registry, &device.public_key(), &challenge(4), &response),
            AuthOutcome::Reject(RejectReason::Malformed)
        );
    }

    #[test]
    fn wire_round_trip() {
        let (_, device, _) = setup(&DerivationParams::rsa_default());
        let response = respond(&device, challenge(5)).unwrap();
        let wire = response.to_wire();
        assert_eq!(&wire[..32], &challenge(5));
        assert_eq!(ChallengeResponse::from_wire(&wire).unwrap(), response);
        assert!(ChallengeResponse::from_wire(&wire[..wire.len() - 1]).is_err());
    }
}
