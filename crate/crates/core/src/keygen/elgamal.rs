//! ElGamal key pairs whose secret exponent is the hashed chip ID.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::digest::sha256;
use super::keys::{PublicKey, SecretKey};
use super::prime::{is_probable_prime, DEFAULT_MR_ROUNDS};
use super::KeyError;
use crate::chip_identity::ChipId;

/// A prime modulus and a generator of its multiplicative group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElgamalGroup {
    p: BigUint,
    g: BigUint,
}

// 2q + 1 with q = 2^254 + 0x17fbf prime; 5 is the smallest primitive root.
const DESK_P_HEX: &str = "800000000000000000000000000000000000000000000000000000000002ff7f";
const DESK_Q_HEX: &str = "4000000000000000000000000000000000000000000000000000000000017fbf";
const DESK_G: u32 = 5;

impl ElgamalGroup {
    /// Accepts `g` as given; primitivity is not checked.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self, KeyError> {
        if p < BigUint::from(5u32) {
            return Err(KeyError::GroupTooSmall);
        }
        if !is_probable_prime(&p, DEFAULT_MR_ROUNDS) {
            return Err(KeyError::NotPrime);
        }
        if g < BigUint::from(2u32) || g >= p {
            return Err(KeyError::NotPrimitiveRoot);
        }
        Ok(Self { p, g })
    }

    /// Checks `g` against the distinct prime factors of `p − 1`.
    pub fn with_factorization(p: BigUint, g: BigUint, factors: &[BigUint]) -> Result<Self, KeyError> {
        let group = Self::new(p, g)?;
        let order = &group.p - 1u32;
        let mut rest = order.clone();
        for f in factors {
            if f.is_zero() || !(&order % f).is_zero() {
                return Err(KeyError::Inconsistent("factor does not divide p-1"));
            }
            while (&rest % f).is_zero() {
                rest /= f;
            }
        }
        if !rest.is_one() {
            return Err(KeyError::Inconsistent("factorization of p-1 is incomplete"));
        }
        if !is_primitive_root(&group.g, &group.p, factors) {
            return Err(KeyError::NotPrimitiveRoot);
        }
        Ok(group)
    }

    /// The built-in 256-bit safe-prime group used at desk scale.
    pub fn desk_scale() -> Self {
        let p = BigUint::parse_bytes(DESK_P_HEX.as_bytes(), 16).expect("constant");
        Self {
            p,
            g: BigUint::from(DESK_G),
        }
    }

    pub fn desk_scale_factors() -> Vec<BigUint> {
        vec![
            BigUint::from(2u32),
            BigUint::parse_bytes(DESK_Q_HEX.as_bytes(), 16).expect("constant"),
        ]
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }
}

/// `g` generates the whole group iff `g^((p−1)/f) ≠ 1` for every prime
/// factor `f` of `p − 1`.
pub fn is_primitive_root(g: &BigUint, p: &BigUint, factors: &[BigUint]) -> bool {
    let order = p - 1u32;
    factors.iter().all(|f| !g.modpow(&(&order / f), p).is_one())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElgamalKeyMaterial {
    p: BigUint,
    g: BigUint,
    x: BigUint,
    y: BigUint,
}

impl ElgamalKeyMaterial {
    pub fn from_parts(p: BigUint, g: BigUint, x: BigUint, y: BigUint) -> Result<Self, KeyError> {
        if x.is_zero() || x >= &p - 1u32 || g.modpow(&x, &p) != y {
            return Err(KeyError::Inconsistent("y does not equal g^x mod p"));
        }
        Ok(Self { p, g, x, y })
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn x(&self) -> &BigUint {
        &self.x
    }

    pub fn y(&self) -> &BigUint {
        &self.y
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey::Elgamal {
            p: self.p.clone(),
            g: self.g.clone(),
            y: self.y.clone(),
        }
    }

    pub fn secret_key(&self) -> SecretKey {
        SecretKey::Elgamal {
            p: self.p.clone(),
            g: self.g.clone(),
            x: self.x.clone(),
        }
    }
}

/// `x = sha256(chip_id) mod (p−1)` (zero maps to one), `y = g^x mod p`.
pub fn derive_elgamal_keypair(chip_id: &ChipId, group: &ElgamalGroup) -> Result<ElgamalKeyMaterial, KeyError> {
    if chip_id.is_empty() {
        return Err(KeyError::MalformedId);
    }
    let hashed = sha256(chip_id.bits.as_bytes()).to_biguint();
    Ok(elgamal_from_hashed_id(&hashed, group))
}

/// The derivation after hashing, exposed so the arithmetic can be checked
/// against hand-computed values.
pub fn elgamal_from_hashed_id(hashed: &BigUint, group: &ElgamalGroup) -> ElgamalKeyMaterial {
    let mut x = hashed % (&group.p - 1u32);
    if x.is_zero() {
        x = BigUint::one();
    }
    let y = group.g.modpow(&x, &group.p);
    ElgamalKeyMaterial {
        p: group.p.clone(),
        g: group.g.clone(),
        x,
        y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::keygen::keys::{sign, verify};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn naive_pow(g: u64, x: u64, p: u64) -> u64 {
        (0..x).fold(1, |acc, _| acc * g % p)
    }

    fn prime_factors(mut n: u64) -> Vec<BigUint> {
        let mut out = Vec::new();
        let mut f = 2;
        while f * f <= n {
            if n % f == 0 {
                out.push(BigUint::from(f));
                while n % f == 0 {
                    n /= f;
                }
            }
            f += 1;
        }
        if n > 1 {
            out.push(BigUint::from(n));
        }
        out
    }

    /// Smallest g whose powers cover every residue.
    fn brute_primitive_root(p: u64) -> u64 {
        (2..p)
            .find(|&g| {
                let mut seen = vec![false; p as usize];
                (1..p).for_each(|x| seen[naive_pow(g, x, p) as usize] = true);
                seen[1..].iter().all(|s| *s)
            })
            .unwrap()
    }

    #[test]
    fn toy_group_vector() {
        let group = ElgamalGroup::new(BigUint::from(23u32), BigUint::from(5u32)).unwrap();
        let key = elgamal_from_hashed_id(&BigUint::from(37u32), &group);
        assert_eq!(key.x(), &BigUint::from(15u32));
        assert_eq!(key.y(), &BigUint::from(19u32));
        assert_eq!(naive_pow(5, 15, 23), 19);
    }

    #[test]
    fn zero_exponent_clamps_to_one() {
        let group = ElgamalGroup::new(BigUint::from(23u32), BigUint::from(5u32)).unwrap();
        let key = elgamal_from_hashed_id(&BigUint::from(44u32), &group);
        assert_eq!(key.x(), &BigUint::one());
        assert_eq!(key.y(), &BigUint::from(5u32));
    }

    #[test]
    fn square_and_multiply_matches_naive() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for p in [11u64, 23, 101] {
            let g = brute_primitive_root(p);
            let group =
                ElgamalGroup::with_factorization(BigUint::from(p), BigUint::from(g), &prime_factors(p - 1)).unwrap();
            for _ in 0..50 {
                let id = ChipId::new(BitString::random(&mut rng, 64));
                let key = derive_elgamal_keypair(&id, &group).unwrap();
                let x: u64 = key.x().try_into().unwrap();
                assert!((1..=p - 2).contains(&x));
                assert_eq!(key.y(), &BigUint::from(naive_pow(g, x, p)));
                assert_eq!(key, derive_elgamal_keypair(&id, &group).unwrap());
            }
        }
    }

    #[test]
    fn primitive_root_check() {
        let factors = prime_factors(22);
        assert!(ElgamalGroup::with_factorization(BigUint::from(23u32), BigUint::from(5u32), &factors).is_ok());
        // 2 has order 11 mod 23.
        assert_eq!(
            ElgamalGroup::with_factorization(BigUint::from(23u32), BigUint::from(2u32), &factors),
            Err(KeyError::NotPrimitiveRoot)
        );
        assert!(ElgamalGroup::with_factorization(BigUint::from(23u32), BigUint::from(5u32), &[BigUint::from(2u32)]).is_err());
        assert_eq!(ElgamalGroup::new(BigUint::from(3u32), BigUint::from(2u32)), Err(KeyError::GroupTooSmall));
        assert_eq!(ElgamalGroup::new(BigUint::from(21u32), BigUint::from(2u32)), Err(KeyError::NotPrime));
    }

    #[test]
    fn desk_group_is_a_safe_prime_group() {
        let desk = ElgamalGroup::desk_scale();
        let factors = ElgamalGroup::desk_scale_factors();
        assert_eq!(desk.p().bits(), 256);
        assert!(is_probable_prime(&factors[1], DEFAULT_MR_ROUNDS));
        assert_eq!(&factors[1] * 2u32 + 1u32, *desk.p());
        let checked = ElgamalGroup::with_factorization(desk.p().clone(), desk.g().clone(), &factors).unwrap();
        assert_eq!(checked, desk);
        // Nothing smaller than 5 generates the group.
        for g in 2u32..5 {
            assert!(!is_primitive_root(&BigUint::from(g), desk.p(), &factors));
        }
    }

    #[test]
    fn desk_scale_sign_verify() {
        let group = ElgamalGroup::desk_scale();
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        let key = derive_elgamal_keypair(&ChipId::new(BitString::random(&mut rng, 256)), &group).unwrap();
        for _ in 0..100 {
            let digest = crate::keygen::Digest(rng.gen());
            let sig = sign(&digest, &key.secret_key()).unwrap();
            assert!(verify(&digest, &sig, &key.public_key()).is_valid());
        }
    }

    #[test]
    fn rejects_empty_id() {
        assert_eq!(
            derive_elgamal_keypair(&ChipId::new(BitString::default()), &ElgamalGroup::desk_scale()),
            Err(KeyError::MalformedId)
        );
    }
}
