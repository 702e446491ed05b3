//! Binding of physical chips to logical addresses.
//!
//! An [`IdCore`] reads its chip's ID and runs the key generator on it, so the
//! device's public key (its logical address) is a function of the silicon.
//! The secret key is re-derived at every start instead of being stored. A
//! [`DeviceNode`] couples that core with the transaction state used on the
//! logical network, plus a legacy MAC address that anyone can rewrite and
//! that no check depends on.

mod auth;
mod registry;

use std::fmt;

use thiserror::Error;

use crate::chip_identity::{read_chip_id, Chip, ChipId, FabProcess};
use crate::keygen::{self, DerivationParams, Digest, KeyError, KeyMaterial, PublicKey, Scheme, SecretKey, Signature};
use crate::transaction_chain::{self, make_genesis, ChainError, LogicalNode, TransactionUnit};

pub use auth::{
    authenticate, challenge, respond, AuthOutcome, ChallengeResponse, Impostor, RejectReason, CHALLENGE_LEN,
};
pub use registry::{chip_commitment, EnrollmentRecord, Registry, REGISTRY_FORMAT, REGISTRY_FORMAT_VERSION};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinkError {
    #[error(transparent)]
    Key(#[from] KeyError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("enrollment requires a noise-free chip readout")]
    NoisyReadout,
    #[error("prime erasure applies to RSA cores only")]
    NotApplicable,
    #[error("logical address {0} is already enrolled")]
    DuplicateEnrollment(String),
    #[error("unit is addressed to a different public key")]
    AddressMismatch,
    #[error("registry format: {0}")]
    Format(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MacAddress(pub [u8; 6]);

impl fmt::Debug for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e, g] = self.0;
        write!(f, "{a:02x}:{b:02x}:{c:02x}:{d:02x}:{e:02x}:{g:02x}")
    }
}

/// Chip ID, key generator parameters and the key pair they produce.
#[derive(Debug, Clone)]
pub struct IdCore {
    chip_id: ChipId,
    params: DerivationParams,
    key: KeyMaterial,
    primes_erased: bool,
}

/// Reads `chip` and derives its key pair.
pub fn make_id_core(chip: &Chip, process: &FabProcess, params: &DerivationParams) -> Result<IdCore, LinkError> {
    if process.stability() < 1.0 {
        return Err(LinkError::NoisyReadout);
    }
    let chip_id = read_chip_id(chip, process, 0);
    let key = params.derive(&chip_id)?;
    Ok(IdCore {
        chip_id,
        params: params.clone(),
        key,
        primes_erased: false,
    })
}

impl IdCore {
    pub fn scheme(&self) -> Scheme {
        self.params.scheme()
    }

    pub fn chip_id(&self) -> &ChipId {
        &self.chip_id
    }

    pub fn params(&self) -> &DerivationParams {
        &self.params
    }

    pub fn public_key(&self) -> PublicKey {
        self.key.public_key()
    }

    pub fn secret_key(&self) -> SecretKey {
        self.key.secret_key()
    }

    pub fn key_material(&self) -> &KeyMaterial {
        &self.key
    }

    pub fn primes_erased(&self) -> bool {
        self.primes_erased
    }

    pub fn sign(&self, digest: &Digest) -> Result<Signature, KeyError> {
        keygen::sign(digest, &self.key.secret_key())
    }

    /// Forgets the RSA primes; `d` and `n` remain. Idempotent.
    pub fn erase_primes(mut self) -> Result<IdCore, LinkError> {
        match &mut self.key {
            KeyMaterial::Rsa(rsa) => {
                rsa.erase_primes();
                self.primes_erased = true;
                Ok(self)
            }
            KeyMaterial::Elgamal(_) => Err(LinkError::NotApplicable),
        }
    }

    /// Whether re-running the key generator on the stored chip ID gives
    /// back this core's public key.
    pub fn rederives(&self) -> bool {
        self.params
            .derive(&self.chip_id)
            .is_ok_and(|k| k.public_key() == self.key.public_key())
    }
}

/// A connected device: chip, ID core, transaction state and MAC.
#[derive(Debug, Clone)]
pub struct DeviceNode {
    pub chip: Chip,
    pub id_core: IdCore,
    pub logical_node: LogicalNode,
    /// Freely editable; carries no authentication weight.
    pub mac_address: MacAddress,
    pub label: String,
}

impl DeviceNode {
    /// Powers up a device: derives keys from the chip, erases RSA primes, and
    /// starts a fresh transaction history rooted at its own key.
    pub fn start(
        chip: Chip,
        process: &FabProcess,
        params: &DerivationParams,
        mac_address: MacAddress,
        label: impl Into<String>,
    ) -> Result<Self, LinkError> {
        let mut id_core = make_id_core(&chip, process, params)?;
        if id_core.scheme() == Scheme::Rsa {
            id_core = id_core.erase_primes()?;
        }
        let logical_node = make_genesis(id_core.key_material())?;
        Ok(Self {
            chip,
            id_core,
            logical_node,
            mac_address,
            label: label.into(),
        })
    }

    pub fn public_key(&self) -> PublicKey {
        self.id_core.public_key()
    }

    /// Takes over `unit` as this device's current transaction unit.
    pub fn receive(&mut self, unit: TransactionUnit) -> Result<(), LinkError> {
        if unit.public_key != self.public_key() {
            return Err(LinkError::AddressMismatch);
        }
        self.logical_node.unit = unit;
        Ok(())
    }
}

/// Hands the sender's data to the recipient through chip-derived keys. The
/// unit has exactly the plain transaction-chain layout.
pub fn link_transfer(sender: &DeviceNode, recipient: &DeviceNode) -> Result<TransactionUnit, LinkError> {
    Ok(transaction_chain::transfer(&sender.logical_node, &recipient.public_key())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chip_identity::{fabricate_chip, fabricate_run};
    use crate::keygen::{sha256, verify};
    use crate::transaction_chain::verify_link;
    use std::collections::HashSet;

    fn process() -> FabProcess {
        FabProcess::new(256, 31).unwrap()
    }

    #[test]
    fn same_chip_same_address() {
        let p = process();
        let chip = fabricate_chip(&p, 0);
        for params in [DerivationParams::rsa_default(), DerivationParams::elgamal_default()] {
            let a = make_id_core(&chip, &p, &params).unwrap();
            let b = make_id_core(&chip, &p, &params).unwrap();
            assert_eq!(a.public_key(), b.public_key());
            assert!(a.rederives());
            let digest = sha256(b"core");
            assert!(verify(&digest, &a.sign(&digest).unwrap(), &a.public_key()).is_valid());
        }
    }

    #[test]
    fn distinct_chips_distinct_addresses() {
        let p = FabProcess::new(64, 8).unwrap();
        let params = DerivationParams::rsa_default();
        let keys: HashSet<_> = fabricate_run(&p, 100)
            .unwrap()
            .iter()
            .map(|c| make_id_core(c, &p, &params).unwrap().public_key())
            .collect();
        assert_eq!(keys.len(), 100);
    }

    #[test]
    fn noisy_process_cannot_enroll() {
        let p = process().with_stability(0.999).unwrap();
        let chip = fabricate_chip(&p, 0);
        assert_eq!(
            make_id_core(&chip, &p, &DerivationParams::elgamal_default()).unwrap_err(),
            LinkError::NoisyReadout
        );
    }

    #[test]
    fn prime_erasure() {
        let p = process();
        let core = make_id_core(&fabricate_chip(&p, 1), &p, &DerivationParams::rsa_default()).unwrap();
        let KeyMaterial::Rsa(before) = core.key_material().clone() else { panic!() };
        assert!(before.p().is_some());
        let erased = core.erase_primes().unwrap();
        let KeyMaterial::Rsa(after) = erased.key_material() else { panic!() };
        assert!(erased.primes_erased());
        assert_eq!((after.p(), after.q()), (None, None));
        let digest = sha256(b"erased");
        assert!(verify(&digest, &erased.sign(&digest).unwrap(), &erased.public_key()).is_valid());
        let twice = erased.clone().erase_primes().unwrap();
        assert_eq!(twice.key_material(), erased.key_material());

        let elgamal = make_id_core(&fabricate_chip(&p, 1), &p, &DerivationParams::elgamal_default()).unwrap();
        assert_eq!(elgamal.erase_primes().unwrap_err(), LinkError::NotApplicable);
    }

    #[test]
    fn link_transfer_is_a_plain_transfer() {
        let p = process();
        let params = DerivationParams::rsa_default();
        let a = DeviceNode::start(fabricate_chip(&p, 0), &p, &params, MacAddress::default(), "a").unwrap();
        let mut b = DeviceNode::start(fabricate_chip(&p, 1), &p, &params, MacAddress::default(), "b").unwrap();
        let unit = link_transfer(&a, &b).unwrap();
        assert!(verify_link(&a.public_key(), &unit).is_valid());
        let bytes = unit.to_canonical_bytes();
        assert_eq!(TransactionUnit::from_canonical_bytes(&bytes).unwrap(), unit);
        b.receive(unit.clone()).unwrap();
        assert_eq!(b.logical_node.unit, unit);
        let mut c = a.clone();
        assert_eq!(c.receive(unit), Err(LinkError::AddressMismatch));
    }

    #[test]
    fn mac_display() {
        assert_eq!(MacAddress([0, 0x1b, 0x44, 0x11, 0x3a, 0xb7]).to_string(), "00:1b:44:11:3a:b7");
    }
}
