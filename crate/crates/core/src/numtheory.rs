//! Number-theoretic helpers: primality, inverses, square roots mod p.

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Miller-Rabin rounds used for every primality decision.
pub const MILLER_RABIN_ROUNDS: usize = 64;

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberError {
    #[error("{a} is not invertible modulo {modulus}")]
    NotInvertible { a: BigInt, modulus: BigInt },
    #[error("modulus {0} is not a prime congruent to 3 mod 4")]
    BadModulus(BigInt),
    #[error("{a} is not a quadratic residue modulo {p}")]
    NonResidue { a: BigInt, p: BigInt },
}

/// Probable-prime test: trial division by small primes, then Miller-Rabin.
///
/// Values below `2^64` get the deterministic word-sized test. Larger values
/// run [`MILLER_RABIN_ROUNDS`] rounds with witnesses drawn from a generator
/// seeded by the candidate itself, so the answer is a pure function of `n`.
pub fn is_probable_prime(n: &BigInt) -> bool {
    let Some(n) = n.to_biguint() else {
        return false;
    };
    if n < BigUint::from(2u32) {
        return false;
    }
    for &p in &SMALL_PRIMES {
        if n == BigUint::from(p) {
            return true;
        }
        if (&n % p).is_zero() {
            return false;
        }
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let n_minus_1 = &n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let seed = n.iter_u64_digits().fold(0x9e37_79b9_7f4a_7c15u64, |h, w| {
        h.rotate_left(17) ^ w.wrapping_mul(0xff51_afd7_ed55_8ccd)
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two = BigUint::from(2u32);

    'witness: for round in 0..MILLER_RABIN_ROUNDS {
        let a = if round == 0 {
            two.clone()
        } else {
            rng.gen_biguint_range(&two, &n_minus_1)
        };
        let mut x = a.modpow(&d, &n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, &n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Deterministic Miller-Rabin for word-sized inputs.
///
/// The first twelve primes as witnesses decide primality exactly for every
/// `n < 2^64`. Callers have already removed small factors.
fn is_prime_u64(n: u64) -> bool {
    fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
        (u128::from(a) * u128::from(b) % u128::from(m)) as u64
    }
    fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
        let mut acc = 1u64;
        base %= m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, m);
            }
            base = mul_mod(base, base, m);
            exp >>= 1;
        }
        acc
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Draws a probable prime of exactly `bits` bits with `p ≡ 3 (mod 4)`.
pub fn random_prime_3_mod_4<R: Rng + ?Sized>(bits: u64, rng: &mut R) -> BigInt {
    assert!(bits >= 3, "need at least 3 bits for a prime congruent to 3 mod 4");
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(1, true);
        c.set_bit(0, true);
        let c = BigInt::from_biguint(Sign::Plus, c);
        if is_probable_prime(&c) {
            return c;
        }
    }
}

/// Inverse of `a` modulo `m`, reduced into `[0, m)`.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Result<BigInt, NumberError> {
    let ext = a.mod_floor(m).extended_gcd(m);
    if !ext.gcd.is_one() {
        return Err(NumberError::NotInvertible {
            a: a.clone(),
            modulus: m.clone(),
        });
    }
    Ok(ext.x.mod_floor(m))
}

/// Gcd of a list by iterated Euclid; the empty list yields 0.
pub fn gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(values: I) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |g, v| if g.is_one() { g } else { g.gcd(v) })
}

/// Square root of `a` modulo a prime `p ≡ 3 (mod 4)`, as `a^((p+1)/4) mod p`.
///
/// The candidate root is squared back and compared, so a non-residue is an
/// error rather than a wrong answer.
pub fn sqrt_mod_p(a: &BigInt, p: &BigInt) -> Result<BigInt, NumberError> {
    if p.is_negative() || p.mod_floor(&BigInt::from(4)) != BigInt::from(3) {
        return Err(NumberError::BadModulus(p.clone()));
    }
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Ok(a);
    }
    let exp: BigInt = (p + 1u32) >> 2;
    let r = a.modpow(&exp, p);
    if (&r * &r).mod_floor(p) != a {
        return Err(NumberError::NonResidue { a, p: p.clone() });
    }
    Ok(r)
}

/// Integer value as `f64`, saturating to infinity for huge values.
pub(crate) fn to_f64_lossy(v: &BigInt) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
