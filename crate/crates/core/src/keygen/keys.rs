use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::digest::{sha256_concat, Digest};
use super::elgamal::ElgamalKeyMaterial;
use super::prime::mod_inverse;
use super::rsa::RsaKeyMaterial;
use super::wire::{Reader, Writer};
use super::KeyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rsa,
    Elgamal,
}

impl Scheme {
    pub(crate) fn tag(self) -> u8 {
        match self {
            Scheme::Rsa => 1,
            Scheme::Elgamal => 2,
        }
    }
}

/// A logical address.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PublicKey {
    Rsa { e: BigUint, n: BigUint },
    Elgamal { p: BigUint, g: BigUint, y: BigUint },
}

#[derive(Clone, PartialEq, Eq)]
pub enum SecretKey {
    Rsa { n: BigUint, d: BigUint },
    Elgamal { p: BigUint, g: BigUint, x: BigUint },
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SecretKey({:?}, <redacted>)", self.scheme())
    }
}

/// A derived key pair of either scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyMaterial {
    Rsa(RsaKeyMaterial),
    Elgamal(ElgamalKeyMaterial),
}

impl KeyMaterial {
    pub fn scheme(&self) -> Scheme {
        match self {
            KeyMaterial::Rsa(_) => Scheme::Rsa,
            KeyMaterial::Elgamal(_) => Scheme::Elgamal,
        }
    }

    pub fn public_key(&self) -> PublicKey {
        match self {
            KeyMaterial::Rsa(k) => k.public_key(),
            KeyMaterial::Elgamal(k) => k.public_key(),
        }
    }

    pub fn secret_key(&self) -> SecretKey {
        match self {
            KeyMaterial::Rsa(k) => k.secret_key(),
            KeyMaterial::Elgamal(k) => k.secret_key(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Signature {
    Rsa(BigUint),
    Elgamal { r: BigUint, s: BigUint },
}

impl Signature {
    pub fn scheme(&self) -> Scheme {
        match self {
            Signature::Rsa(_) => Scheme::Rsa,
            Signature::Elgamal { .. } => Scheme::Elgamal,
        }
    }

    /// Tag byte followed by length-prefixed big-endian components.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.u8(self.scheme().tag());
        match self {
            Signature::Rsa(s) => w.int(s),
            Signature::Elgamal { r, s } => {
                w.int(r);
                w.int(s);
            }
        }
        w.finish()
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let mut r = Reader::new(bytes);
        let sig = Self::read(&mut r)?;
        r.end()?;
        Ok(sig)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, KeyError> {
        match r.u8()? {
            1 => Ok(Signature::Rsa(r.int()?)),
            2 => Ok(Signature::Elgamal { r: r.int()?, s: r.int()? }),
            tag => Err(KeyError::Encoding(format!("unknown signature tag {tag}"))),
        }
    }
}

impl PublicKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            PublicKey::Rsa { .. } => Scheme::Rsa,
            PublicKey::Elgamal { .. } => Scheme::Elgamal,
        }
    }

    /// Tag byte followed by length-prefixed big-endian components. This is the
    /// byte form that gets hashed and signed wherever a key is referenced.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.u8(self.scheme().tag());
        match self {
            PublicKey::Rsa { e, n } => {
                w.int(e);
                w.int(n);
            }
            PublicKey::Elgamal { p, g, y } => {
                w.int(p);
                w.int(g);
                w.int(y);
            }
        }
        w.finish()
    }

    pub fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, KeyError> {
        let mut r = Reader::new(bytes);
        let key = Self::read(&mut r)?;
        r.end()?;
        Ok(key)
    }

    pub(crate) fn read(r: &mut Reader<'_>) -> Result<Self, KeyError> {
        match r.u8()? {
            1 => Ok(PublicKey::Rsa { e: r.int()?, n: r.int()? }),
            2 => Ok(PublicKey::Elgamal {
                p: r.int()?,
                g: r.int()?,
                y: r.int()?,
            }),
            tag => Err(KeyError::Encoding(format!("unknown key tag {tag}"))),
        }
    }

    /// Short printable handle: the first 8 bytes of the key's hash.
    pub fn fingerprint(&self) -> String {
        hex::encode(&super::sha256(&self.to_canonical_bytes()).0[..8])
    }
}

impl SecretKey {
    pub fn scheme(&self) -> Scheme {
        match self {
            SecretKey::Rsa { .. } => Scheme::Rsa,
            SecretKey::Elgamal { .. } => Scheme::Elgamal,
        }
    }
}

/// Outcome of a signature check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid,
    /// Components out of range, or the signature does not match the key's
    /// scheme.
    Malformed(&'static str),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn is_malformed(&self) -> bool {
        matches!(self, Verdict::Malformed(_))
    }
}

/// Textbook signature over the digest value (no padding).
///
/// RSA: `s = m^d mod n`. ElGamal: `(r, s)` with `r = g^k mod p` and
/// `s = (m − x·r)·k⁻¹ mod (p−1)`, where `m` is the digest reduced mod `p−1`
/// and `k` starts at `sha256(digest ∥ x) mod (p−1)` and steps by one until it
/// is a unit mod `p−1` yielding `s ≠ 0`.
pub fn sign(digest: &Digest, key: &SecretKey) -> Result<Signature, KeyError> {
    match key {
        SecretKey::Rsa { n, d } => {
            let m = digest.to_biguint() % n;
            Ok(Signature::Rsa(m.modpow(d, n)))
        }
        SecretKey::Elgamal { p, g, x } => {
            let order = p - 1u32;
            let m = digest.to_biguint() % &order;
            let seed = sha256_concat(&[digest.as_bytes(), &x.to_bytes_be()]);
            let mut k = seed.to_biguint() % &order;
            let mut tried = BigUint::zero();
            while tried < order {
                if let Some(k_inv) = (!k.is_zero()).then(|| mod_inverse(&k, &order)).flatten() {
                    let r = g.modpow(&k, p);
                    let xr = x * &r % &order;
                    let s = (&m + &order - xr) % &order * k_inv % &order;
                    if !s.is_zero() {
                        return Ok(Signature::Elgamal { r, s });
                    }
                }
                k = (k + 1u32) % &order;
                tried += 1u32;
            }
            Err(KeyError::SigningFailed)
        }
    }
}

pub fn verify(digest: &Digest, signature: &Signature, key: &PublicKey) -> Verdict {
    match (signature, key) {
        (Signature::Rsa(s), PublicKey::Rsa { e, n }) => {
            if s >= n {
                return Verdict::Malformed("rsa signature not below modulus");
            }
            let m = digest.to_biguint() % n;
            if s.modpow(e, n) == m {
                Verdict::Valid
            } else {
                Verdict::Invalid
            }
        }
        (Signature::Elgamal { r, s }, PublicKey::Elgamal { p, g, y }) => {
            let order = p - 1u32;
            if r.is_zero() || r >= p {
                return Verdict::Malformed("elgamal r outside [1, p-1]");
            }
            if s.is_zero() || s >= &order {
                return Verdict::Malformed("elgamal s outside [1, p-2]");
            }
            let m = digest.to_biguint() % &order;
            let lhs = g.modpow(&m, p);
            let rhs = y.modpow(r, p) * r.modpow(s, p) % p;
            if lhs == rhs {
                Verdict::Valid
            } else {
                Verdict::Invalid
            }
        }
        _ => Verdict::Malformed("signature scheme does not match key"),
    }
}

/// Textbook RSA encryption, `m^e mod n`. Used to check the key-pair identity.
pub fn rsa_encrypt(m: &BigUint, key: &PublicKey) -> Option<BigUint> {
    match key {
        PublicKey::Rsa { e, n } if m < n => Some(m.modpow(e, n)),
        _ => None,
    }
}

pub fn rsa_decrypt(c: &BigUint, key: &SecretKey) -> Option<BigUint> {
    match key {
        SecretKey::Rsa { n, d } if c < n => Some(c.modpow(d, n)),
        _ => None,
    }
}

