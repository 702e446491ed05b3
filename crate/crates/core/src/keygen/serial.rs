//! JSON layout for key material.
//!
//! ```json
//! {"format":"idlink-key","version":1,"scheme":"rsa",
//!  "public":{"e":"10001","n":"…"},
//!  "secret":{"d":"…","p":"…","q":"…"}}
//! ```
//!
//! Integers are lowercase hex without leading zeros. `secret` is omitted for
//! public-only files; RSA `p`/`q` are omitted once erased.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::elgamal::ElgamalKeyMaterial;
use super::keys::{KeyMaterial, PublicKey, Scheme};
use super::rsa::RsaKeyMaterial;
use super::KeyError;

pub const KEY_FORMAT: &str = "idlink-key";
pub const KEY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFileJson {
    format: String,
    version: u32,
    scheme: Scheme,
    public: PublicJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    secret: Option<SecretJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PublicJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    e: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SecretJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<String>,
}

/// A parsed key file: always a public key, optionally the full key pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyFile {
    pub public_key: PublicKey,
    pub key_material: Option<KeyMaterial>,
}

pub fn int_to_hex(v: &BigUint) -> String {
    format!("{v:x}")
}

pub fn int_from_hex(text: &str) -> Result<BigUint, KeyError> {
    let canonical = !text.is_empty()
        && text.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
        && (text == "0" || !text.starts_with('0'));
    if !canonical {
        return Err(KeyError::Encoding(format!("not a canonical lowercase hex integer: {text:?}")));
    }
    BigUint::parse_bytes(text.as_bytes(), 16).ok_or_else(|| KeyError::Encoding(text.to_string()))
}

fn field(value: &Option<String>, name: &str) -> Result<BigUint, KeyError> {
    match value {
        Some(v) => int_from_hex(v),
        None => Err(KeyError::Encoding(format!("missing field {name}"))),
    }
}

fn hex(v: &BigUint) -> Option<String> {
    Some(int_to_hex(v))
}

pub fn public_key_to_json(key: &PublicKey) -> String {
    let file = KeyFileJson {
        format: KEY_FORMAT.into(),
        version: KEY_FORMAT_VERSION,
        scheme: key.scheme(),
        public: public_json(key),
        secret: None,
    };
    serde_json::to_string(&file).expect("key json")
}

pub fn key_material_to_json(key: &KeyMaterial) -> String {
    let secret = match key {
        KeyMaterial::Rsa(k) => SecretJson {
            d: hex(k.d()),
            p: k.p().and_then(hex),
            q: k.q().and_then(hex),
            x: None,
        },
        KeyMaterial::Elgamal(k) => SecretJson {
            x: hex(k.x()),
            ..Default::default()
        },
    };
    let file = KeyFileJson {
        format: KEY_FORMAT.into(),
        version: KEY_FORMAT_VERSION,
        scheme: key.scheme(),
        public: public_json(&key.public_key()),
        secret: Some(secret),
    };
    serde_json::to_string(&file).expect("key json")
}

fn public_json(key: &PublicKey) -> PublicJson {
    match key {
        PublicKey::Rsa { e, n } => PublicJson {
            e: hex(e),
            n: hex(n),
            ..Default::default()
        },
        PublicKey::Elgamal { p, g, y } => PublicJson {
            p: hex(p),
            g: hex(g),
            y: hex(y),
            ..Default::default()
        },
    }
}

pub fn parse_key_file(text: &str) -> Result<KeyFile, KeyError> {
    let file: KeyFileJson = serde_json::from_str(text).map_err(|e| KeyError::Encoding(e.to_string()))?;
    if file.format != KEY_FORMAT || file.version != KEY_FORMAT_VERSION {
        return Err(KeyError::Encoding(format!(
            "unsupported key format {} v{}",
            file.format, file.version
        )));
    }
    let public = &file.public;
    let public_key = match file.scheme {
        Scheme::Rsa => PublicKey::Rsa {
            e: field(&public.e, "e")?,
            n: field(&public.n, "n")?,
        },
        Scheme::Elgamal => PublicKey::Elgamal {
            p: field(&public.p, "p")?,
            g: field(&public.g, "g")?,
            y: field(&public.y, "y")?,
        },
    };
    let key_material = match (&file.secret, &public_key) {
        (None, _) => None,
        (Some(secret), PublicKey::Rsa { e, n }) => {
            let primes = match (&secret.p, &secret.q) {
                (Some(p), Some(q)) => Some((int_from_hex(p)?, int_from_hex(q)?)),
                (None, None) => None,
                _ => return Err(KeyError::Encoding("rsa primes must appear together".into())),
            };
            Some(KeyMaterial::Rsa(RsaKeyMaterial::from_parts(
                e.clone(),
                n.clone(),
                field(&secret.d, "d")?,
                primes,
            )?))
        }
        (Some(secret), PublicKey::Elgamal { p, g, y }) => Some(KeyMaterial::Elgamal(ElgamalKeyMaterial::from_parts(
            p.clone(),
            g.clone(),
            field(&secret.x, "x")?,
            y.clone(),
        )?)),
    };
    Ok(KeyFile {
        public_key,
        key_material,
    })
}
