//! The Cao-Li public-key cryptosystem and a complete key-recovery attack.
//!
//! * [`exactmat`]: exact dense integer matrices, generic over the scalar.
//! * [`scheme`]: key generation, encryption, CRT decryption.
//! * [`attack`]: bottom-up elimination of the public matrix, gcd prime
//!   recovery and ciphertext-only decryption.
//! * [`sim`]: seeded Monte-Carlo harness measuring recovery rates.

pub mod attack;
pub mod exactmat;
pub mod numtheory;
pub mod scheme;
pub mod sim;

use num_bigint::BigInt;

/// Arbitrary-precision integer matrix.
pub type IntMatrix = exactmat::Matrix<BigInt>;
/// Arbitrary-precision integer row vector.
pub type IntVector = exactmat::Vector<BigInt>;
/// Machine-word matrix, handy for small oracles.
pub type SmallMatrix = exactmat::Matrix<i64>;

pub use attack::{
    algorithm_a, full_break, recover_prime_candidates, refine_candidate, AttackError,
    BreakFailure, CandidateStatus, PrimeCandidate, RecoveredKey,
};
pub use scheme::{
    decrypt, encrypt, keygen, Ciphertext, Message, PrivateKey, PublicKey, SchemeError,
    SchemeParams,
};
pub use sim::{coprimality_heuristic, render_report, run_trials, TrialConfig, TrialStats};
