//! Hashing, primality and chip-derived key pairs.
//!
//! Both derivations are deterministic functions of the chip ID and their
//! parameters, which is what couples one public key to one chip. Signatures
//! are textbook (unpadded) RSA and ElGamal over the SHA-256 digest.

mod digest;
mod elgamal;
mod keys;
mod prime;
mod rsa;
mod serial;
pub(crate) mod wire;

use thiserror::Error;

pub use digest::{sha256, sha256_concat, Digest};
pub use elgamal::{derive_elgamal_keypair, elgamal_from_hashed_id, is_primitive_root, ElgamalGroup, ElgamalKeyMaterial};
pub use keys::{rsa_decrypt, rsa_encrypt, sign, verify, KeyMaterial, PublicKey, Scheme, SecretKey, Signature, Verdict};
pub use prime::{extended_gcd, is_probable_prime, mod_inverse, next_prime_at_or_after, DEFAULT_MR_ROUNDS};
pub use rsa::{derive_rsa_keypair, RsaKeyMaterial, DEFAULT_PUBLIC_EXPONENT};
pub use serial::{key_material_to_json, parse_key_file, public_key_to_json, KeyFile, KEY_FORMAT, KEY_FORMAT_VERSION};

/// Prime offsets used for desk-scale RSA derivation; both are prime, hence
/// coprime.
pub const DEFAULT_RSA_OFFSETS: (u64, u64) = (104_729, 1_299_709);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KeyError {
    #[error("chip id is empty")]
    MalformedId,
    #[error("rsa offsets must be positive")]
    ZeroOffset,
    #[error("public exponent {0} must be odd and at least 3")]
    InvalidExponent(u64),
    #[error("elgamal modulus must be at least 5")]
    GroupTooSmall,
    #[error("elgamal modulus is not prime")]
    NotPrime,
    #[error("generator is not a primitive root of the modulus")]
    NotPrimitiveRoot,
    #[error("inconsistent key material: {0}")]
    Inconsistent(&'static str),
    #[error("no usable ephemeral exponent for signing")]
    SigningFailed,
    #[error("encoding error: {0}")]
    Encoding(String),
}

/// Parameters that, together with a chip ID, determine a key pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivationParams {
    Rsa { offset1: u64, offset2: u64, e: u64 },
    Elgamal(ElgamalGroup),
}

impl DerivationParams {
    pub fn rsa_default() -> Self {
        DerivationParams::Rsa {
            offset1: DEFAULT_RSA_OFFSETS.0,
            offset2: DEFAULT_RSA_OFFSETS.1,
            e: DEFAULT_PUBLIC_EXPONENT,
        }
    }

    pub fn elgamal_default() -> Self {
        DerivationParams::Elgamal(ElgamalGroup::desk_scale())
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            DerivationParams::Rsa { .. } => Scheme::Rsa,
            DerivationParams::Elgamal(_) => Scheme::Elgamal,
        }
    }

    pub fn derive(&self, chip_id: &crate::chip_identity::ChipId) -> Result<KeyMaterial, KeyError> {
        match self {
            DerivationParams::Rsa { offset1, offset2, e } => {
                derive_rsa_keypair(chip_id, *offset1, *offset2, *e).map(KeyMaterial::Rsa)
            }
            DerivationParams::Elgamal(group) => derive_elgamal_keypair(chip_id, group).map(KeyMaterial::Elgamal),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::chip_identity::{fabricate_run, read_chip_id, FabProcess};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashSet;

    #[test]
    fn toy_rsa_signature_vector() {
        let sk = SecretKey::Rsa { n: 2021u32.into(), d: 1433u32.into() };
        let pk = PublicKey::Rsa { e: 65537u32.into(), n: 2021u32.into() };
        let mut five = [0u8; 32];
        five[31] = 5;
        let digest = Digest(five);
        let Signature::Rsa(s) = sign(&digest, &sk).unwrap() else { panic!() };
        // 5^1433 mod 2021 by plain repeated multiplication.
        let expected = (0..1433).fold(1u64, |acc, _| acc * 5 % 2021);
        assert_eq!(s, expected.into());
        assert_eq!(s.modpow(&65537u32.into(), &2021u32.into()), 5u32.into());
        assert!(verify(&digest, &Signature::Rsa(s), &pk).is_valid());
    }

    fn desk_keys(seed: u64) -> Vec<KeyMaterial> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        [DerivationParams::rsa_default(), DerivationParams::elgamal_default()]
            .iter()
            .map(|params| params.derive(&crate::chip_identity::ChipId::new(BitString::random(&mut rng, 256))).unwrap())
            .collect()
    }

    #[test]
    fn round_trip_and_foreign_key_rejection() {
        let mine = desk_keys(1);
        let theirs = desk_keys(2);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for (key, other) in mine.iter().zip(&theirs) {
            for _ in 0..100 {
                let digest = Digest(rng.gen());
                let sig = sign(&digest, &key.secret_key()).unwrap();
                assert!(verify(&digest, &sig, &key.public_key()).is_valid());
                assert!(!verify(&digest, &sig, &other.public_key()).is_valid());
            }
        }
    }

    #[test]
    fn every_single_bit_flip_is_rejected() {
        for key in desk_keys(4) {
            let digest = sha256(b"single-bit sweep");
            let sig = sign(&digest, &key.secret_key()).unwrap();
            for bit in 0..256 {
                assert_eq!(verify(&digest.with_bit_flipped(bit), &sig, &key.public_key()), Verdict::Invalid);
            }
        }
    }

    #[test]
    fn out_of_range_components_are_malformed() {
        let keys = desk_keys(5);
        let KeyMaterial::Rsa(rsa) = &keys[0] else { panic!() };
        let digest = sha256(b"m");
        assert!(verify(&digest, &Signature::Rsa(rsa.n().clone()), &keys[0].public_key()).is_malformed());
        let zero = Signature::Elgamal { r: 0u32.into(), s: 1u32.into() };
        assert!(verify(&digest, &zero, &keys[1].public_key()).is_malformed());
        let rsa_sig = sign(&digest, &keys[0].secret_key()).unwrap();
        assert!(verify(&digest, &rsa_sig, &keys[1].public_key()).is_malformed());
    }

    #[test]
    fn derived_public_keys_are_pairwise_distinct() {
        let process = FabProcess::new(64, 2024).unwrap();
        let chips = fabricate_run(&process, 1000).unwrap();
        for params in [DerivationParams::elgamal_default(), DerivationParams::rsa_default()] {
            let keys: HashSet<PublicKey> = chips
                .iter()
                .map(|chip| params.derive(&read_chip_id(chip, &process, 0)).unwrap().public_key())
                .collect();
            assert_eq!(keys.len(), 1000, "{:?}", params.scheme());
        }
    }

    #[test]
    fn canonical_bytes_round_trip() {
        for key in desk_keys(6) {
            let pk = key.public_key();
            assert_eq!(PublicKey::from_canonical_bytes(&pk.to_canonical_bytes()).unwrap(), pk);
            let sig = sign(&sha256(b"x"), &key.secret_key()).unwrap();
            assert_eq!(Signature::from_canonical_bytes(&sig.to_canonical_bytes()).unwrap(), sig);
        }
        assert!(PublicKey::from_canonical_bytes(&[9]).is_err());
        assert!(Signature::from_canonical_bytes(&[1, 0, 0, 0, 1, 0]).is_err());
    }
}
