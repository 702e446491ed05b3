//! Primality testing and modular-inverse arithmetic on arbitrary-precision
//! integers.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use super::digest::sha256_concat;

/// Miller–Rabin rounds used by key derivation.
pub const DEFAULT_MR_ROUNDS: u32 = 24;

const FIXED_BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = 2000usize;
        let mut composite = vec![false; limit];
        let mut primes = Vec::new();
        for i in 2..limit {
            if !composite[i] {
                primes.push(i as u32);
                for j in (i * i..limit).step_by(i) {
                    composite[j] = true;
                }
            }
        }
        primes
    })
}

/// Miller–Rabin with a witness schedule fixed by `n`: the first twelve prime
/// bases (exact below 3.3·10^24), then bases hashed from `n`. Never rejects a
/// prime; a composite survives with probability at most `4^-rounds`.
pub fn is_probable_prime(n: &BigUint, rounds: u32) -> bool {
    assert!(rounds >= 1, "at least one Miller-Rabin round is required");
    if n < &BigUint::from(2u32) {
        return false;
    }
    for &p in small_primes() {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // Every composite below 2000² has a factor in the table.
    if n < &BigUint::from(2000u32 * 2000) {
        return true;
    }

    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let n_bytes = n.to_bytes_be();
    let span = n - 3u32;
    let witness = |round: u32| -> BigUint {
        match FIXED_BASES.get(round as usize) {
            Some(&b) => BigUint::from(b),
            None => {
                let h = sha256_concat(&[b"mr-witness", &n_bytes, &round.to_be_bytes()]);
                h.to_biguint() % &span + 2u32
            }
        }
    };

    'rounds: for round in 0..rounds {
        let a = witness(round);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'rounds;
            }
        }
        return false;
    }
    true
}

/// Smallest probable prime `≥ start`.
pub fn next_prime_at_or_after(start: &BigUint, rounds: u32) -> BigUint {
    let two = BigUint::from(2u32);
    if start <= &two {
        return two;
    }
    let mut candidate = start.clone();
    if candidate.is_even() {
        candidate += 1u32;
    }
    while !is_probable_prime(&candidate, rounds) {
        candidate += 2u32;
    }
    candidate
}

/// Extended Euclid: returns `(g, x, y)` with `a·x + b·y = g = gcd(a, b)`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_x, mut x) = (BigInt::one(), BigInt::zero());
    let (mut old_y, mut y) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_x = &old_x - &q * &x;
        old_x = std::mem::replace(&mut x, next_x);
        let next_y = &old_y - &q * &y;
        old_y = std::mem::replace(&mut y, next_y);
    }
    (old_r, old_x, old_y)
}

/// `a⁻¹ mod m`, or `None` when `gcd(a, m) ≠ 1`.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    if m.is_zero() {
        return None;
    }
    let m_signed = BigInt::from_biguint(Sign::Plus, m.clone());
    let a_signed = BigInt::from_biguint(Sign::Plus, a % m);
    let (g, x, _) = extended_gcd(&a_signed, &m_signed);
    if !g.is_one() {
        return None;
    }
    x.mod_floor(&m_signed).to_biguint()
}
