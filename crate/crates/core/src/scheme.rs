//! The Cao-Li quadratic-form cryptosystem: key generation, encryption and
//! the legitimate CRT-based decryption.
//!
//! A private key is a list of primes `p_i ≡ 3 (mod 4)` together with two unit
//! lower-triangular matrices `P1`, `P2`. The CRT basis `λ_i` (with
//! `λ_i ≡ δ_ij mod p_j`) forms `Λ = diag(λ)`, and the public key is the
//! symmetric matrix `B = P2ᵀ P1ᵀ Λ P1 P2`. A message `x` with `0 ≤ x_i ≤ d`
//! encrypts to `y = x B xᵀ`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

use crate::exactmat::MatrixError;
use crate::numtheory::{self, NumberError};
use crate::{IntMatrix, IntVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("could not draw {n} primes of {bits} bits with p_i > i(i+1)d; raise the prime size")]
    PrimesTooSmall { n: usize, bits: u64 },
    #[error("entry bound below 1: prime p_{index} = {prime} does not exceed {needed}")]
    BoundTooSmall {
        index: usize,
        prime: BigInt,
        needed: BigInt,
    },
    #[error("invalid private key: {0}")]
    InvalidKey(String),
    #[error("message has length {got}, expected {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("message entry x_{index} = {value} outside [0, {bound}]")]
    MessageOutOfRange {
        index: usize,
        value: BigInt,
        bound: BigInt,
    },
    #[error("ciphertext must be non-negative")]
    NegativeCiphertext,
    #[error("invalid ciphertext: {0}")]
    InvalidCiphertext(String),
    #[error(transparent)]
    Number(#[from] NumberError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Parameters for key generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    pub n: usize,
    pub d: BigInt,
    pub min_prime_bits: u64,
    pub rng_seed: u64,
}

impl SchemeParams {
    pub fn new(n: usize, d: impl Into<BigInt>, min_prime_bits: u64, rng_seed: u64) -> Self {
        Self {
            n,
            d: d.into(),
            min_prime_bits,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if self.n < 1 {
            return Err(SchemeError::InvalidParams("n must be at least 1".into()));
        }
        if self.d < BigInt::one() {
            return Err(SchemeError::InvalidParams("d must be at least 1".into()));
        }
        if self.min_prime_bits < 8 {
            return Err(SchemeError::InvalidParams(
                "min_prime_bits must be at least 8".into(),
            ));
        }
        Ok(())
    }
}

/// `i(i+1)d` for the 1-based index `i`.
fn index_weight(i: usize, d: &BigInt) -> BigInt {
    BigInt::from(i) * BigInt::from(i + 1) * d
}

/// Draws `n` distinct primes `≡ 3 (mod 4)` of `min_prime_bits` bits, sorted
/// ascending, each satisfying `p_i > i(i+1)d`.
pub fn generate_primes<R: Rng + ?Sized>(
    params: &SchemeParams,
    rng: &mut R,
) -> Result<Vec<BigInt>, SchemeError> {
    params.validate()?;
    let bits = params.min_prime_bits;
    // Small bit sizes have few admissible primes; give up instead of spinning.
    let max_draws = (params.n as u64).saturating_mul(bits).saturating_mul(200).max(10_000);
    let mut found = BTreeSet::new();
    let mut draws = 0u64;
    while found.len() < params.n {
        if draws >= max_draws {
            return Err(SchemeError::PrimesTooSmall { n: params.n, bits });
        }
        draws += 1;
        found.insert(numtheory::random_prime_3_mod_4(bits, rng));
    }
    let primes: Vec<BigInt> = found.into_iter().collect();
    for (k, p) in primes.iter().enumerate() {
        if *p <= index_weight(k + 1, &params.d) {
            return Err(SchemeError::PrimesTooSmall { n: params.n, bits });
        }
    }
    Ok(primes)
}

/// CRT basis `λ_i = m_i'·m_i` with `m_i = Πp / p_i` and `m_i' = m_i⁻¹ mod p_i`.
pub fn compute_lambdas(primes: &[BigInt]) -> Result<Vec<BigInt>, SchemeError> {
    let modulus: BigInt = primes.iter().product();
    primes
        .iter()
        .map(|p| {
            let m = &modulus / p;
            let m_inv = numtheory::mod_inverse(&m, p).map_err(|_| {
                SchemeError::InvalidKey(format!("prime {p} is repeated or shares a factor"))
            })?;
            Ok(m_inv * m)
        })
        .collect()
}

/// Entry bound for the secret matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryBound {
    /// `β² = min_i p_i / (i(i+1)d)`, kept exact.
    pub beta_squared: BigRational,
    /// Largest integer strictly below `β`.
    pub cap: BigInt,
}

impl EntryBound {
    /// `β` as a float, for display only.
    pub fn beta_approx(&self) -> f64 {
        let num = numtheory::to_f64_lossy(self.beta_squared.numer());
        let den = numtheory::to_f64_lossy(self.beta_squared.denom());
        let ratio = num / den;
        if ratio.is_finite() {
            ratio.sqrt()
        } else {
            // Huge ratio: go through the integer square root instead.
            let q = self.beta_squared.to_integer();
            numtheory::to_f64_lossy(&q.sqrt())
        }
    }
}

/// Computes `β` and the integer cap `M` with `M²·i(i+1)·d < p_i` for every `i`.
pub fn compute_beta(primes: &[BigInt], d: &BigInt) -> Result<EntryBound, SchemeError> {
    if primes.is_empty() {
        return Err(SchemeError::InvalidParams("no primes".into()));
    }
    let mut beta_squared: Option<BigRational> = None;
    let mut cap: Option<BigInt> = None;
    for (k, p) in primes.iter().enumerate() {
        let w = index_weight(k + 1, d);
        if *p <= w {
            return Err(SchemeError::BoundTooSmall {
                index: k + 1,
                prime: p.clone(),
                needed: w,
            });
        }
        let ratio = BigRational::new(p.clone(), w.clone());
        // M² ≤ (p-1)/w  ⇔  M²·w < p
        let m = ((p - 1u32) / &w).sqrt();
        beta_squared = Some(match beta_squared {
            Some(b) if b <= ratio => b,
            _ => ratio,
        });
        cap = Some(match cap {
            Some(c) if c <= m => c,
            _ => m,
        });
    }
    Ok(EntryBound {
        beta_squared: beta_squared.expect("non-empty"),
        cap: cap.expect("non-empty"),
    })
}

/// Unit lower-triangular `n×n` matrix with strict-lower entries uniform in `[0, cap]`.
pub fn generate_secret_matrix<R: Rng + ?Sized>(n: usize, cap: &BigInt, rng: &mut R) -> IntMatrix {
    use num_bigint::RandBigInt;
    let mut m = IntMatrix::identity(n);
    let upper = cap + 1u32;
    for i in 1..n {
        for j in 0..i {
            m.set(i, j, rng.gen_bigint_range(&BigInt::zero(), &upper));
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    b: IntMatrix,
    d: BigInt,
}

impl PublicKey {
    /// Wraps a public matrix after checking it is square, symmetric and non-negative.
    pub fn new(b: IntMatrix, d: BigInt) -> Result<Self, SchemeError> {
        if !b.is_square() {
            return Err(SchemeError::InvalidKey("public matrix is not square".into()));
        }
        if !b.is_symmetric() {
            return Err(SchemeError::InvalidKey("public matrix is not symmetric".into()));
        }
        if !b.is_non_negative() {
            return Err(SchemeError::InvalidKey("public matrix has a negative entry".into()));
        }
        if d < BigInt::one() {
            return Err(SchemeError::InvalidKey("message bound must be at least 1".into()));
        }
        Ok(Self { b, d })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.b
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.b.n_rows()
    }

    pub fn encrypt(&self, msg: &Message) -> Result<Ciphertext, SchemeError> {
        msg.check(self.n(), &self.d)?;
        Ok(Ciphertext(self.b.quadratic_form(&msg.0)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    primes: Vec<BigInt>,
    p1: IntMatrix,
    p2: IntMatrix,
    lambdas: Vec<BigInt>,
    product: IntMatrix,
    d: BigInt,
}

impl PrivateKey {
    /// Assembles a private key from its secret parts, checking every key invariant.
    pub fn from_parts(
        primes: Vec<BigInt>,
        p1: IntMatrix,
        p2: IntMatrix,
        d: BigInt,
    ) -> Result<Self, SchemeError> {
        let n = primes.len();
        if n == 0 {
            return Err(SchemeError::InvalidKey("no primes".into()));
        }
        if d < BigInt::one() {
            return Err(SchemeError::InvalidKey("message bound must be at least 1".into()));
        }
        let four = BigInt::from(4);
        for (k, p) in primes.iter().enumerate() {
            if p.mod_floor(&four) != BigInt::from(3) {
                return Err(SchemeError::InvalidKey(format!("p_{} = {p} is not 3 mod 4", k + 1)));
            }
            if !numtheory::is_probable_prime(p) {
                return Err(SchemeError::InvalidKey(format!("p_{} = {p} is not prime", k + 1)));
            }
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SchemeError::InvalidKey(
                "primes must be distinct and strictly ascending".into(),
            ));
        }
        let bound = compute_beta(&primes, &d)?;
        for (name, m) in [("P1", &p1), ("P2", &p2)] {
            if m.n_rows() != n || !m.is_unit_lower_triangular() {
                return Err(SchemeError::InvalidKey(format!(
                    "{name} is not a {n}x{n} unit lower-triangular matrix"
                )));
            }
            if m.entries().iter().any(|e| e.is_negative() || *e > bound.cap) {
                return Err(SchemeError::InvalidKey(format!(
                    "{name} has an entry outside [0, {}]",
                    bound.cap
                )));
            }
        }
        let lambdas = compute_lambdas(&primes)?;
        let product = p1.mat_mul(&p2)?;
        Ok(Self {
            primes,
            p1,
            p2,
            lambdas,
            product,
            d,
        })
    }

    pub fn primes(&self) -> &[BigInt] {
        &self.primes
    }

    pub fn p1(&self) -> &IntMatrix {
        &self.p1
    }

    pub fn p2(&self) -> &IntMatrix {
        &self.p2
    }

    pub fn lambdas(&self) -> &[BigInt] {
        &self.lambdas
    }

    /// `P = P1·P2`.
    pub fn product(&self) -> &IntMatrix {
        &self.product
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.primes.len()
    }

    /// `B = Pᵀ Λ P` with `P = P1·P2`.
    pub fn public_key(&self) -> PublicKey {
        let lam = IntMatrix::diagonal(&self.lambdas);
        let b = self
            .product
            .transpose()
            .mat_mul(&lam)
            .and_then(|m| m.mat_mul(&self.product))
            .expect("square factors of equal size");
        PublicKey { b, d: self.d.clone() }
    }

    pub fn decrypt(&self, y: &Ciphertext) -> Result<Message, SchemeError> {
        decrypt_with(&self.primes, &self.lambdas, &self.product, &self.d, y)
    }
}

/// Shared decryption path: CRT square roots, then `x = z·(Pᵀ)⁻¹` by substitution.
///
/// The result is range-checked and re-encrypted; `zΛzᵀ` equals `xBxᵀ`
/// whenever `z = x·Pᵀ` holds exactly, which substitution guarantees.
pub(crate) fn decrypt_with(
    primes: &[BigInt],
    lambdas: &[BigInt],
    product: &IntMatrix,
    d: &BigInt,
    y: &Ciphertext,
) -> Result<Message, SchemeError> {
    let z = recover_z(y, primes).map_err(|e| match e {
        SchemeError::Number(NumberError::NonResidue { p, .. }) => {
            SchemeError::InvalidCiphertext(format!("not a square modulo {p}"))
        }
        other => other,
    })?;
    let x = product.transpose().solve_unit_upper(&z)?;
    let msg = Message(x);
    if let Err(e) = msg.check(primes.len(), d) {
        return Err(SchemeError::InvalidCiphertext(e.to_string()));
    }
    let y_again: BigInt = lambdas
        .iter()
        .zip(z.iter())
        .map(|(l, zk)| l * zk * zk)
        .sum();
    if y_again != y.0 {
        return Err(SchemeError::InvalidCiphertext(
            "re-encryption does not reproduce the ciphertext".into(),
        ));
    }
    Ok(msg)
}

/// Generates a key pair deterministically from `params.rng_seed`.
pub fn keygen(params: &SchemeParams) -> Result<(PrivateKey, PublicKey), SchemeError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let primes = generate_primes(params, &mut rng)?;
    let bound = compute_beta(&primes, &params.d)?;
    let p1 = generate_secret_matrix(params.n, &bound.cap, &mut rng);
    let p2 = generate_secret_matrix(params.n, &bound.cap, &mut rng);
    let sk = PrivateKey::from_parts(primes, p1, p2, params.d.clone())?;
    let pk = sk.public_key();
    Ok((sk, pk))
}

/// Plaintext block `x` with `0 ≤ x_i ≤ d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message(pub IntVector);

impl Message {
    pub fn new(entries: Vec<BigInt>) -> Self {
        Self(IntVector::new(entries))
    }

    pub fn from_u64s(entries: &[u64]) -> Self {
        Self::new(entries.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// Uniform message in `[0, d]^n`.
    pub fn random<R: Rng + ?Sized>(n: usize, d: &BigInt, rng: &mut R) -> Self {
        use num_bigint::RandBigInt;
        let upper = d + 1u32;
        Self::new(
            (0..n)
                .map(|_| rng.gen_bigint_range(&BigInt::zero(), &upper))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[BigInt] {
        self.0.entries()
    }

    pub fn check(&self, n: usize, d: &BigInt) -> Result<(), SchemeError> {
        if self.0.len() != n {
            return Err(SchemeError::MessageLength {
                expected: n,
                got: self.0.len(),
            });
        }
        for (i, v) in self.0.iter().enumerate() {
            if v.is_negative() || v > d {
                return Err(SchemeError::MessageOutOfRange {
                    index: i + 1,
                    value: v.clone(),
                    bound: d.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(pub BigInt);

impl Ciphertext {
    pub fn new(y: BigInt) -> Result<Self, SchemeError> {
        if y.is_negative() {
            return Err(SchemeError::NegativeCiphertext);
        }
        Ok(Self(y))
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

pub fn encrypt(pk: &PublicKey, msg: &Message) -> Result<Ciphertext, SchemeError> {
    pk.encrypt(msg)
}

pub fn decrypt(sk: &PrivateKey, y: &Ciphertext) -> Result<Message, SchemeError> {
    sk.decrypt(y)
}

/// Per-prime square roots of `y`, each the unique root below `p_k/2`.
pub fn recover_z(y: &Ciphertext, primes: &[BigInt]) -> Result<IntVector, SchemeError> {
    primes
        .iter()
        .map(|p| {
            let r = numtheory::sqrt_mod_p(&y.0.mod_floor(p), p)?;
            // p odd: exactly one of r, p - r lies below p/2 when r ≠ 0
            Ok(if (&r << 1u32) < *p { r } else { p - r })
        })
        .collect::<Result<Vec<_>, SchemeError>>()
        .map(IntVector::new)
}

/// Bit length of each prime, for summaries.
pub fn prime_bit_lengths(primes: &[BigInt]) -> Vec<u64> {
    primes.iter().map(|p| p.bits()).collect()
}

/// Convenience for reporting `M` as a machine integer when it fits.
pub fn cap_as_u64(bound: &EntryBound) -> Option<u64> {
    bound.cap.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| b(v)).collect()).collect())
            .unwrap()
    }

    fn worked_key() -> PrivateKey {
        PrivateKey::from_parts(
            vec![b(3), b(7)],
            mat(&[&[1, 0], &[1, 1]]),
            IntMatrix::identity(2),
            b(1),
        )
        .unwrap()
    }

    #[test]
    fn lambdas_for_three_and_seven() {
        let l = compute_lambdas(&[b(3), b(7)]).unwrap();
        assert_eq!(l, vec![b(7), b(15)]);
        assert_eq!(l[0].mod_floor(&b(3)), b(1));
        assert_eq!(l[0].mod_floor(&b(7)), b(0));
        assert_eq!(l[1].mod_floor(&b(3)), b(0));
        assert_eq!(l[1].mod_floor(&b(7)), b(1));
        assert_eq!(compute_lambdas(&[b(11)]).unwrap(), vec![b(1)]);
        assert!(compute_lambdas(&[b(7), b(7)]).is_err());
    }

    #[test]
    fn lambdas_sum_to_one_mod_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let params = SchemeParams::new(6, 1, 40, rng.gen());
            let primes = generate_primes(&params, &mut rng).unwrap();
            let l = compute_lambdas(&primes).unwrap();
            let modulus: BigInt = primes.iter().product();
            let s: BigInt = l.iter().sum();
            assert_eq!(s.mod_floor(&modulus), b(1));
            for (i, li) in l.iter().enumerate() {
                for (j, pj) in primes.iter().enumerate() {
                    assert_eq!(li.mod_floor(pj), if i == j { b(1) } else { b(0) });
                }
            }
        }
    }

    #[test]
    fn beta_for_worked_primes() {
        let bound = compute_beta(&[b(3), b(7)], &b(1)).unwrap();
        assert_eq!(bound.beta_squared, BigRational::new(b(7), b(6)));
        assert_eq!(bound.cap, b(1));
        assert!((bound.beta_approx() - (7.0f64 / 6.0).sqrt()).abs() < 1e-12);
        // 1²·1·2 < 3 and 1²·2·3 < 7, but 2²·1·2 = 8 ≥ 3
        assert!(b(4) * b(2) >= b(3));
        assert!(matches!(
            compute_beta(&[b(3), b(7)], &b(2)),
            Err(SchemeError::BoundTooSmall { index: 1, .. })
        ));
    }

    #[test]
    fn beta_grows_with_primes() {
        let p = BigInt::parse_bytes(b"340282366920938463463374607431768211507", 10).unwrap();
        let bound = compute_beta(&[p], &b(1)).unwrap();
        assert!(bound.cap > b(1_000_000_000_000));
    }

    #[test]
    fn cap_satisfies_z_bound_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1i64, 5, 100] {
            let params = SchemeParams::new(10, d, 24, 0);
            let primes = generate_primes(&params, &mut rng).unwrap();
            let bound = compute_beta(&primes, &b(d)).unwrap();
            let m = &bound.cap;
            for (k, p) in primes.iter().enumerate() {
                let k1 = (k + 1) as i64;
                // d·M²·k(k+1)/2 < p_k/2  ⇔  d·M²·k(k+1) < p_k
                assert!(b(d) * m * m * b(k1 * (k1 + 1)) < *p);
                let m1 = m + 1;
                let tight = primes.iter().enumerate().any(|(i, q)| {
                    let i1 = (i + 1) as i64;
                    b(d) * &m1 * &m1 * b(i1 * (i1 + 1)) >= *q
                });
                assert!(tight, "M is not maximal");
            }
        }
    }

    #[test]
    fn primes_are_sorted_distinct_and_admissible() {
        for seed in 0..100u64 {
            let params = SchemeParams::new(5, 3, 12, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let primes = generate_primes(&params, &mut rng).unwrap();
            assert!(primes.windows(2).all(|w| w[0] < w[1]));
            for (k, p) in primes.iter().enumerate() {
                assert_eq!(p.mod_floor(&b(4)), b(3));
                assert!(p.bits() >= 12);
                assert!(*p > index_weight(k + 1, &b(3)));
            }
        }
        let params = SchemeParams::new(1, 1, 8, 9);
        let p = generate_primes(&params, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0] > b(2));
    }

    #[test]
    fn too_many_small_primes_is_an_error() {
        // only 13 primes ≡ 3 mod 4 have exactly 8 bits
        let params = SchemeParams::new(20, 1, 8, 1);
        assert!(matches!(
            generate_primes(&params, &mut ChaCha8Rng::seed_from_u64(1)),
            Err(SchemeError::PrimesTooSmall { .. })
        ));
        let params = SchemeParams::new(12, 100, 8, 1);
        assert!(matches!(keygen(&params), Err(SchemeError::PrimesTooSmall { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(SchemeParams::new(0, 1, 64, 0).validate().is_err());
        assert!(SchemeParams::new(2, 0, 64, 0).validate().is_err());
        assert!(SchemeParams::new(2, 1, 7, 0).validate().is_err());
    }

    #[test]
    fn secret_matrix_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(generate_secret_matrix(1, &b(100), &mut rng), IntMatrix::identity(1));
        let mut seen = BTreeSet::new();
        for _ in 0..64 {
            let m = generate_secret_matrix(2, &b(1), &mut rng);
            assert!(m.is_unit_lower_triangular());
            seen.insert(m.get(1, 0).clone());
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![b(0), b(1)]);
        let m = generate_secret_matrix(6, &b(9), &mut rng);
        assert!(m.is_unit_lower_triangular());
        assert!(m.entries().iter().all(|e| *e >= b(0) && *e <= b(9)));
    }

    #[test]
    fn identity_secrets_give_diagonal_public_key() {
        let sk = PrivateKey::from_parts(
            vec![b(3), b(7)],
            IntMatrix::identity(2),
            IntMatrix::identity(2),
            b(1),
        )
        .unwrap();
        assert_eq!(*sk.public_key().matrix(), IntMatrix::diagonal(&[b(7), b(15)]));
    }

    #[test]
    fn worked_instance_end_to_end() {
        let sk = worked_key();
        let pk = sk.public_key();
        assert_eq!(*pk.matrix(), mat(&[&[22, 15], &[15, 15]]));
        let y = pk.encrypt(&Message::from_u64s(&[1, 1])).unwrap();
        assert_eq!(y, Ciphertext(b(67)));
        assert_eq!(recover_z(&y, sk.primes()).unwrap(), IntVector::new(vec![b(1), b(2)]));
        assert_eq!(sk.decrypt(&y).unwrap(), Message::from_u64s(&[1, 1]));

        let zero = pk.encrypt(&Message::from_u64s(&[0, 0])).unwrap();
        assert_eq!(zero, Ciphertext(b(0)));
        assert_eq!(recover_z(&zero, sk.primes()).unwrap(), IntVector::zeros(2));
        assert_eq!(sk.decrypt(&zero).unwrap(), Message::from_u64s(&[0, 0]));
        assert_eq!(pk.encrypt(&Message::from_u64s(&[0, 1])).unwrap(), Ciphertext(b(15)));
    }

    #[test]
    fn encrypt_validates_message() {
        let pk = worked_key().public_key();
        assert!(matches!(
            pk.encrypt(&Message::from_u64s(&[1, 2])),
            Err(SchemeError::MessageOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            pk.encrypt(&Message::from_u64s(&[1])),
            Err(SchemeError::MessageLength { expected: 2, got: 1 })
        ));
        assert!(Ciphertext::new(b(-1)).is_err());
    }

    #[test]
    fn decrypt_rejects_non_message_ciphertexts() {
        let sk = worked_key();
        // all 3·7 residues: only the four messages in {0,1}² decrypt
        let mut ok = 0;
        for y in 0..200 {
            if sk.decrypt(&Ciphertext(b(y))).is_ok() {
                ok += 1;
            }
        }
        assert_eq!(ok, 4);
        assert!(matches!(
            sk.decrypt(&Ciphertext(b(68))),
            Err(SchemeError::InvalidCiphertext(_))
        ));
    }

    #[test]
    fn from_parts_rejects_bad_keys() {
        let p1 = mat(&[&[1, 0], &[1, 1]]);
        let id = IntMatrix::identity(2);
        assert!(PrivateKey::from_parts(vec![b(7), b(3)], p1.clone(), id.clone(), b(1)).is_err());
        assert!(PrivateKey::from_parts(vec![b(5), b(7)], p1.clone(), id.clone(), b(1)).is_err());
        assert!(PrivateKey::from_parts(vec![b(3), b(15)], p1.clone(), id.clone(), b(1)).is_err());
        let big = mat(&[&[1, 0], &[2, 1]]);
        assert!(PrivateKey::from_parts(vec![b(3), b(7)], big, id.clone(), b(1)).is_err());
        let upper = mat(&[&[1, 1], &[0, 1]]);
        assert!(PrivateKey::from_parts(vec![b(3), b(7)], upper, id, b(1)).is_err());
    }

    #[test]
    fn keygen_is_deterministic_and_consistent() {
        for seed in 0..100u64 {
            let params = SchemeParams::new(4, 7, 32, seed);
            let (sk, pk) = keygen(&params).unwrap();
            let (sk2, pk2) = keygen(&params).unwrap();
            assert_eq!(sk, sk2);
            assert_eq!(pk, pk2);
            assert!(pk.matrix().is_symmetric());
            assert!(pk.matrix().is_non_negative());
            let p1t = sk.p1().transpose();
            let p2t = sk.p2().transpose();
            let lam = IntMatrix::diagonal(sk.lambdas());
            let b_again = p2t
                .mat_mul(&p1t)
                .unwrap()
                .mat_mul(&lam)
                .unwrap()
                .mat_mul(sk.p1())
                .unwrap()
                .mat_mul(sk.p2())
                .unwrap();
            assert_eq!(&b_again, pk.matrix());
        }
    }

    #[test]
    fn round_trip_and_z_bound_across_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for n in 1..=16 {
            for d in [1i64, 5, 100] {
                let (sk, pk) = keygen(&SchemeParams::new(n, d, 64, rng.gen())).unwrap();
                for _ in 0..4 {
                    let x = Message::random(n, &b(d), &mut rng);
                    let y = pk.encrypt(&x).unwrap();
                    let z = recover_z(&y, sk.primes()).unwrap();
                    assert_eq!(z, x.0.mul_mat(&sk.product().transpose()).unwrap());
                    for (zk, pk) in z.iter().zip(sk.primes()) {
                        assert!(*zk >= b(0) && (zk << 1u32) < *pk);
                    }
                    assert_eq!(sk.decrypt(&y).unwrap(), x);
                }
            }
        }
    }
}
