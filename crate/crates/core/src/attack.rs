//! Private-key recovery from a Cao-Li public key.
//!
//! Because `P = P1·P2` is unit lower-triangular, `B = Pᵀ Λ P` can be peeled
//! apart by a bottom-up row elimination: row `j` of the reduced matrix is
//! `λ_j·p_j`, so the multiplier for row `i` is the exact quotient
//! `b_ji / b_jj = p_ji`. The diagonal of the reduced matrix is `Λ`; dividing
//! each row by it leaves `P`. The primes then fall out of gcds of the `λ`s,
//! since `p_i` divides every `λ_j` (`j ≠ i`) and `λ_i − 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

use crate::exactmat::{self, MatrixError};
use crate::numtheory;
use crate::scheme::{self, Ciphertext, Message, PublicKey, SchemeError};
use crate::IntMatrix;

/// Default bound on the cofactors tried when refining a gcd candidate.
pub const DEFAULT_MAX_COFACTOR: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("public matrix is not square and symmetric")]
    NotSymmetric,
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },
    #[error("inexact division in row {row}, column {col}: {source}")]
    InexactDivision {
        row: usize,
        col: usize,
        source: MatrixError,
    },
    #[error("reduced matrix is not unit lower-triangular with non-negative entries (row {row})")]
    NotTriangular { row: usize },
}

/// Elimination output: `λ̂` and `P̂` with `P̂ᵀ·diag(λ̂)·P̂ = B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub lambdas: Vec<BigInt>,
    pub p_matrix: IntMatrix,
}

/// Splits a public matrix into `Λ` and unit lower-triangular `P`.
///
/// Rows are reduced bottom-up, `i = n-1, …, 1`, subtracting `(b_ji / b_jj)·b_j`
/// for `j = n, …, i+1`. Every quotient must be exact; anything else means the
/// matrix did not come from a Cao-Li key. Indices in errors are 1-based.
pub fn algorithm_a(b: &IntMatrix) -> Result<Factorization, AttackError> {
    if !b.is_symmetric() {
        return Err(AttackError::NotSymmetric);
    }
    let n = b.n_rows();
    let mut rows: Vec<Vec<BigInt>> = b.rows().map(<[BigInt]>::to_vec).collect();

    for i in (0..n.saturating_sub(1)).rev() {
        for j in (i + 1..n).rev() {
            let pivot = &rows[j][j];
            if pivot.is_zero() {
                return Err(AttackError::ZeroPivot { row: j + 1 });
            }
            let q = exactmat::exact_div(&rows[j][i], pivot).map_err(|source| {
                AttackError::InexactDivision {
                    row: j + 1,
                    col: i + 1,
                    source,
                }
            })?;
            if q.is_zero() {
                continue;
            }
            let (head, tail) = rows.split_at_mut(j);
            for (dst, src) in head[i].iter_mut().zip(&tail[0]) {
                *dst -= &q * src;
            }
        }
    }

    let mut lambdas = Vec::with_capacity(n);
    let mut p_rows = Vec::with_capacity(n);
    for (i, row) in rows.into_iter().enumerate() {
        let lambda = row[i].clone();
        if !lambda.is_positive() {
            return Err(AttackError::ZeroPivot { row: i + 1 });
        }
        let reduced = exactmat::Vector::new(row)
            .exact_div(&lambda)
            .map_err(|source| AttackError::InexactDivision {
                row: i + 1,
                col: i + 1,
                source,
            })?;
        let reduced = reduced.into_entries();
        if reduced[i + 1..].iter().any(|e| !e.is_zero()) || reduced.iter().any(Signed::is_negative)
        {
            return Err(AttackError::NotTriangular { row: i + 1 });
        }
        lambdas.push(lambda);
        p_rows.push(reduced);
    }
    let p_matrix = IntMatrix::from_rows(p_rows).map_err(|_| AttackError::NotSymmetric)?;
    Ok(Factorization { lambdas, p_matrix })
}

/// `d_i = gcd(λ_1, …, λ_i − 1, …, λ_n)` for every `i`.
pub fn recover_prime_candidates(lambdas: &[BigInt]) -> Vec<BigInt> {
    (0..lambdas.len())
        .map(|i| {
            let shifted = &lambdas[i] - 1u32;
            let others = lambdas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| l);
            numtheory::gcd_all(std::iter::once(&shifted).chain(others)).abs()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateStatus {
    /// `d_i` itself is the prime.
    Exact,
    /// `d_i = c·p̂` for the recorded cofactor `c > 1`.
    Cofactor(u64),
    Failed,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CandidateStatus::Exact => write!(f, "exact"),
            CandidateStatus::Cofactor(c) => write!(f, "cofactor({c})"),
            CandidateStatus::Failed => write!(f, "failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeCandidate {
    pub d: BigInt,
    pub p_hat: Option<BigInt>,
    pub status: CandidateStatus,
}

/// Refines `d_i` to a prime by trial cofactors `c = 1, 2, …, max_cofactor`.
///
/// The first quotient `d_i / c` that is a probable prime `≡ 3 (mod 4)` and
/// reproduces the pattern `λ_j mod p̂ = δ_ij` is accepted.
pub fn refine_candidate(
    d_i: &BigInt,
    lambdas: &[BigInt],
    index: usize,
    max_cofactor: u64,
) -> PrimeCandidate {
    let failed = PrimeCandidate {
        d: d_i.clone(),
        p_hat: None,
        status: CandidateStatus::Failed,
    };
    if *d_i < BigInt::from(2) {
        return failed;
    }
    let four = BigInt::from(4);
    let three = BigInt::from(3);
    for c in 1..=max_cofactor {
        let c_big = BigInt::from(c);
        if c_big > *d_i {
            break;
        }
        let (q, r) = d_i.div_rem(&c_big);
        if !r.is_zero() || q.mod_floor(&four) != three || !numtheory::is_probable_prime(&q) {
            continue;
        }
        let pattern_holds = lambdas.iter().enumerate().all(|(j, l)| {
            let r = l.mod_floor(&q);
            if j == index {
                r.is_one()
            } else {
                r.is_zero()
            }
        });
        if !pattern_holds {
            continue;
        }
        return PrimeCandidate {
            d: d_i.clone(),
            p_hat: Some(q),
            status: if c == 1 {
                CandidateStatus::Exact
            } else {
                CandidateStatus::Cofactor(c)
            },
        };
    }
    failed
}

/// Everything the attacker learns from the public matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredKey {
    pub lambdas: Vec<BigInt>,
    pub p_matrix: IntMatrix,
    pub candidates: Vec<PrimeCandidate>,
}

impl RecoveredKey {
    /// Recovers `Λ`, `P` and the primes from `B`.
    pub fn from_public(pk: &PublicKey, max_cofactor: u64) -> Result<Self, AttackError> {
        let Factorization { lambdas, p_matrix } = algorithm_a(pk.matrix())?;
        let candidates = recover_prime_candidates(&lambdas)
            .iter()
            .enumerate()
            .map(|(i, d)| refine_candidate(d, &lambdas, i, max_cofactor))
            .collect();
        Ok(Self {
            lambdas,
            p_matrix,
            candidates,
        })
    }

    /// 1-based indices whose prime could not be recovered.
    pub fn failed_indices(&self) -> Vec<usize> {
        self.candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| c.p_hat.is_none())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn all_recovered(&self) -> bool {
        self.candidates.iter().all(|c| c.p_hat.is_some())
    }

    pub fn primes(&self) -> Option<Vec<BigInt>> {
        self.candidates.iter().map(|c| c.p_hat.clone()).collect()
    }

    /// Decrypts using recovered material only, validating by re-encryption
    /// under `pk`.
    pub fn decrypt(&self, pk: &PublicKey, y: &Ciphertext) -> Result<Message, BreakFailure> {
        let primes = self.primes().ok_or_else(|| BreakFailure::MissingPrimes {
            indices: self.failed_indices(),
        })?;
        let msg = scheme::decrypt_with(&primes, &self.lambdas, &self.p_matrix, pk.d(), y)
            .map_err(|e| BreakFailure::Decryption(e.to_string()))?;
        match pk.encrypt(&msg) {
            Ok(y2) if y2 == *y => Ok(msg),
            Ok(_) => Err(BreakFailure::Decryption(
                "recovered message does not re-encrypt to the ciphertext".into(),
            )),
            Err(e) => Err(BreakFailure::Decryption(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BreakFailure {
    #[error("primes not recovered at indices {indices:?}")]
    MissingPrimes { indices: Vec<usize> },
    #[error("{0}")]
    Decryption(String),
}

impl From<SchemeError> for BreakFailure {
    fn from(e: SchemeError) -> Self {
        BreakFailure::Decryption(e.to_string())
    }
}

/// Runs the whole attack: key recovery, then decryption of each ciphertext.
///
/// Ciphertexts are processed in parallel; results keep input order.
pub fn full_break(
    pk: &PublicKey,
    ciphertexts: &[Ciphertext],
    max_cofactor: u64,
) -> Result<(RecoveredKey, Vec<Result<Message, BreakFailure>>), AttackError> {
    let key = RecoveredKey::from_public(pk, max_cofactor)?;
    let results = ciphertexts.par_iter().map(|y| key.decrypt(pk, y)).collect();
    Ok((key, results))
}
