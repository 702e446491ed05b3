//! RSA key pairs whose primes are found next to the chip's identification
//! code.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;

use super::keys::{PublicKey, SecretKey};
use super::prime::{is_probable_prime, mod_inverse, next_prime_at_or_after, DEFAULT_MR_ROUNDS};
use super::KeyError;
use crate::chip_identity::ChipId;

pub const DEFAULT_PUBLIC_EXPONENT: u64 = 65537;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaKeyMaterial {
    e: BigUint,
    n: BigUint,
    d: BigUint,
    primes: Option<(BigUint, BigUint)>,
}

impl RsaKeyMaterial {
    /// Reassembles key material from stored components. Primes, when given,
    /// must multiply to `n`.
    pub fn from_parts(
        e: BigUint,
        n: BigUint,
        d: BigUint,
        primes: Option<(BigUint, BigUint)>,
    ) -> Result<Self, KeyError> {
        if let Some((p, q)) = &primes {
            if (p * q) != n {
                return Err(KeyError::Inconsistent("p·q does not equal n"));
            }
        }
        Ok(Self { e, n, d, primes })
    }

    pub fn e(&self) -> &BigUint {
        &self.e
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn d(&self) -> &BigUint {
        &self.d
    }

    /// `None` once the primes have been erased.
    pub fn p(&self) -> Option<&BigUint> {
        self.primes.as_ref().map(|(p, _)| p)
    }

    pub fn q(&self) -> Option<&BigUint> {
        self.primes.as_ref().map(|(_, q)| q)
    }

    /// Drops `p` and `q`; `(e, n, d)` still sign and verify.
    pub fn erase_primes(&mut self) {
        self.primes = None;
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey::Rsa {
            e: self.e.clone(),
            n: self.n.clone(),
        }
    }

    pub fn secret_key(&self) -> SecretKey {
        SecretKey::Rsa {
            n: self.n.clone(),
            d: self.d.clone(),
        }
    }
}

/// Derives an RSA key pair from a chip ID `C`.
///
/// `p` is the first prime at or after `C + offset1`, `q` the first prime at
/// or after `C + offset2` other than `p`. While `gcd(e, (p−1)(q−1)) ≠ 1`,
/// `q` and then `p` alternately move to their next prime. `d` is the
/// inverse of `e` modulo `(p−1)(q−1)`.
pub fn derive_rsa_keypair(
    chip_id: &ChipId,
    offset1: u64,
    offset2: u64,
    e: u64,
) -> Result<RsaKeyMaterial, KeyError> {
    if chip_id.is_empty() {
        return Err(KeyError::MalformedId);
    }
    if offset1 == 0 || offset2 == 0 {
        return Err(KeyError::ZeroOffset);
    }
    if e < 3 || e % 2 == 0 {
        return Err(KeyError::InvalidExponent(e));
    }
    if offset1.gcd(&offset2) != 1 {
        log::warn!("rsa offsets {offset1} and {offset2} share a factor");
    }

    let base = chip_id.bits.to_biguint();
    let e = BigUint::from(e);
    let next_after = |x: &BigUint, skip: &BigUint| {
        let mut candidate = next_prime_at_or_after(&(x + 1u32), DEFAULT_MR_ROUNDS);
        if &candidate == skip {
            candidate = next_prime_at_or_after(&(candidate + 1u32), DEFAULT_MR_ROUNDS);
        }
        candidate
    };

    let mut p = next_prime_at_or_after(&(&base + offset1), DEFAULT_MR_ROUNDS);
    let mut q = next_prime_at_or_after(&(&base + offset2), DEFAULT_MR_ROUNDS);
    if q == p {
        q = next_after(&q, &p);
    }

    let mut advance_q = true;
    let (phi, d) = loop {
        let phi = (&p - 1u32) * (&q - 1u32);
        if let Some(d) = mod_inverse(&e, &phi) {
            break (phi, d);
        }
        if advance_q {
            q = next_after(&q, &p);
        } else {
            p = next_after(&p, &q);
        }
        advance_q = !advance_q;
    };
    debug_assert!((&e * &d % &phi).is_one());
    debug_assert!(is_probable_prime(&p, 4) && is_probable_prime(&q, 4));

    Ok(RsaKeyMaterial {
        n: &p * &q,
        e,
        d,
        primes: Some((p, q)),
    })
}
