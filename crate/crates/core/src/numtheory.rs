//! Arbitrary-precision integer helpers used by every protocol role.
//!
//! Exponentiation is backed by [`BigUint::modpow`]; primality testing,
//! prime generation and the modular inverse live here.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Random-base Miller-Rabin rounds; each round lets a composite through with
/// probability at most 1/4, so 40 rounds bound the error by 2^-80.
pub const MILLER_RABIN_ROUNDS: usize = 40;

const SMALL_PRIME_LIMIT: u32 = 1000;

fn small_primes() -> &'static [u32] {
    static PRIMES: std::sync::OnceLock<Vec<u32>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut sieve = vec![true; SMALL_PRIME_LIMIT as usize];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i < sieve.len() {
            if sieve[i] {
                (i * i..sieve.len()).step_by(i).for_each(|j| sieve[j] = false);
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(i, &p)| p.then_some(i as u32))
            .collect()
    })
}

/// Returns `base^exp mod modulus`.
pub fn mod_exp(base: &BigUint, exp: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u32) {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    Ok(base.modpow(exp, modulus))
}

/// Inverse of `a` modulo `modulus` via the extended Euclidean algorithm,
/// normalized into `[1, modulus - 1]`.
pub fn mod_inv(a: &BigUint, modulus: &BigUint) -> Result<BigUint> {
    if *modulus < BigUint::from(2u32) {
        return Err(Error::Parameter("modulus must be at least 2".into()));
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % modulus), m.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(Error::NotInvertible);
    }
    let inv = old_s.mod_floor(&m);
    Ok(inv.to_biguint().expect("mod_floor result is non-negative"))
}

pub fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    a.gcd(b)
}

/// Smallest integer whose square is at least `n`.
pub fn ceil_sqrt(n: &BigUint) -> BigUint {
    let root = n.sqrt();
    if &root * &root == *n {
        root
    } else {
        root + 1u32
    }
}

/// Uniform sample from the inclusive range `[low, high]`.
pub fn sample_inclusive<R: Rng + ?Sized>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    assert!(low <= high, "empty sampling range");
    rng.gen_biguint_range(low, &(high + 1u32))
}

/// Primality test with the default Miller-Rabin round count, drawing bases
/// from `rng`.
pub fn is_probable_prime_with<R: Rng + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    is_probable_prime_rounds(n, MILLER_RABIN_ROUNDS, rng)
}

/// Primality test using the thread-local generator for witness selection.
pub fn is_probable_prime(n: &BigUint) -> bool {
    is_probable_prime_with(n, &mut rand::thread_rng())
}

fn is_probable_prime_rounds<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in small_primes() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    // No factor below SMALL_PRIME_LIMIT and n below its square: prime.
    if *n < BigUint::from(SMALL_PRIME_LIMIT * SMALL_PRIME_LIMIT) {
        return true;
    }

    let n_minus_one = n - 1u32;
    let shift = n_minus_one
        .trailing_zeros()
        .expect("n - 1 is nonzero for n > 2");
    let odd = &n_minus_one >> shift;
    let high = n - &two;
    'witness: for _ in 0..rounds {
        let a = sample_inclusive(rng, &two, &high);
        let mut x = a.modpow(&odd, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..shift {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Returns a probable prime of exactly `bits` bits.
pub fn gen_prime<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> Result<BigUint> {
    if bits < 2 {
        return Err(Error::Parameter("prime size must be at least 2 bits".into()));
    }
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        if bits > 2 {
            candidate.set_bit(0, true);
        }
        if is_probable_prime_with(&candidate, rng) {
            return Ok(candidate);
        }
    }
}

/// Smallest probable prime strictly greater than `n`.
pub fn next_prime_after(n: &BigUint) -> BigUint {
    let mut candidate = n + 1u32;
    if candidate <= BigUint::from(2u32) {
        return BigUint::from(2u32);
    }
    if candidate.is_even() {
        candidate += 1u32;
    }
    while !is_probable_prime(&candidate) {
        candidate += 2u32;
    }
    candidate
}
