//! Monte-Carlo measurement of how often the gcd step recovers each prime.
//!
//! Every trial generates its own key from `base_seed ^ trial`, breaks it
//! with the public matrix alone, and grades the result against the private
//! key it started from.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::attack::{self, AttackError, CandidateStatus};
use crate::scheme::{self, Message, SchemeError, SchemeParams};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("trial {trial}: attack failed on an honest key: {source}")]
    Attack { trial: u64, source: AttackError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialConfig {
    pub trials: u64,
    pub n: usize,
    pub d: BigInt,
    pub min_prime_bits: u64,
    pub base_seed: u64,
    pub max_cofactor: u64,
}

impl TrialConfig {
    pub fn new(trials: u64, n: usize, d: impl Into<BigInt>, min_prime_bits: u64, base_seed: u64) -> Self {
        Self {
            trials,
            n,
            d: d.into(),
            min_prime_bits,
            base_seed,
            max_cofactor: attack::DEFAULT_MAX_COFACTOR,
        }
    }

    pub fn seed_for(&self, trial: u64) -> u64 {
        self.base_seed ^ trial
    }

    pub fn scheme_params(&self, trial: u64) -> SchemeParams {
        SchemeParams {
            n: self.n,
            d: self.d.clone(),
            min_prime_bits: self.min_prime_bits,
            rng_seed: self.seed_for(trial),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.trials < 1 {
            return Err(SimError::NoTrials);
        }
        self.scheme_params(0).validate()?;
        Ok(())
    }
}

/// Outcome counts for one index (or summed over all of them).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexCounts {
    /// `d_i = p_i`
    pub exact: u64,
    /// `d_i = 2·p_i` and refinement found `p_i`
    pub cofactor2: u64,
    /// some other small cofactor, refinement found `p_i`
    pub other_cofactor: u64,
    pub failed: u64,
}

impl IndexCounts {
    pub fn total(&self) -> u64 {
        self.exact + self.cofactor2 + self.other_cofactor + self.failed
    }

    fn add(&mut self, other: &IndexCounts) {
        self.exact += other.exact;
        self.cofactor2 += other.cofactor2;
        self.other_cofactor += other.other_cofactor;
        self.failed += other.failed;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub config: TrialConfig,
    pub per_index: Vec<IndexCounts>,
    pub messages_attempted: u64,
    pub messages_recovered: u64,
    /// `1/ζ(n−1)`; absent for `n < 3`.
    pub heuristic_bound: Option<f64>,
}

impl TrialStats {
    pub fn aggregate(&self) -> IndexCounts {
        let mut acc = IndexCounts::default();
        for c in &self.per_index {
            acc.add(c);
        }
        acc
    }

    pub fn exact_fraction(&self) -> f64 {
        let agg = self.aggregate();
        ratio(agg.exact, agg.total())
    }

    pub fn message_fraction(&self) -> f64 {
        ratio(self.messages_recovered, self.messages_attempted)
    }

    /// Flat `name=value` lines, one per field.
    pub fn to_key_values(&self) -> String {
        let agg = self.aggregate();
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "trials={}", c.trials);
        let _ = writeln!(out, "n={}", c.n);
        let _ = writeln!(out, "d={}", c.d);
        let _ = writeln!(out, "min_prime_bits={}", c.min_prime_bits);
        let _ = writeln!(out, "base_seed={}", c.base_seed);
        let _ = writeln!(out, "max_cofactor={}", c.max_cofactor);
        let _ = writeln!(out, "exact_count={}", agg.exact);
        let _ = writeln!(out, "cofactor2_count={}", agg.cofactor2);
        let _ = writeln!(out, "other_cofactor_count={}", agg.other_cofactor);
        let _ = writeln!(out, "failed_count={}", agg.failed);
        let _ = writeln!(out, "messages_attempted={}", self.messages_attempted);
        let _ = writeln!(out, "messages_recovered={}", self.messages_recovered);
        match self.heuristic_bound {
            Some(h) => {
                let _ = writeln!(out, "heuristic_bound={h:.12}");
            }
            None => {
                let _ = writeln!(out, "heuristic_bound=none");
            }
        }
        for (i, ic) in self.per_index.iter().enumerate() {
            let _ = writeln!(out, "index{}.exact={}", i + 1, ic.exact);
            let _ = writeln!(out, "index{}.cofactor2={}", i + 1, ic.cofactor2);
            let _ = writeln!(out, "index{}.other_cofactor={}", i + 1, ic.other_cofactor);
            let _ = writeln!(out, "index{}.failed={}", i + 1, ic.failed);
        }
        out
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

struct TrialOutcome {
    per_index: Vec<IndexCounts>,
    recovered: bool,
}

fn run_one(cfg: &TrialConfig, trial: u64) -> Result<TrialOutcome, SimError> {
    let params = cfg.scheme_params(trial);
    let (sk, pk) = scheme::keygen(&params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    rng.set_stream(1);
    let msg = Message::random(cfg.n, &cfg.d, &mut rng);
    let y = pk.encrypt(&msg)?;

    let (key, results) = attack::full_break(&pk, std::slice::from_ref(&y), cfg.max_cofactor)
        .map_err(|source| SimError::Attack { trial, source })?;

    let per_index = key
        .candidates
        .iter()
        .zip(sk.primes())
        .map(|(cand, p)| {
            let mut c = IndexCounts::default();
            let found = cand.p_hat.as_ref() == Some(p);
            if cand.d == *p {
                c.exact = 1;
            } else if found && cand.status == CandidateStatus::Cofactor(2) && cand.d == p * 2u32 {
                c.cofactor2 = 1;
            } else if found && matches!(cand.status, CandidateStatus::Cofactor(_)) {
                c.other_cofactor = 1;
            } else {
                c.failed = 1;
            }
            c
        })
        .collect();
    let recovered = matches!(&results[0], Ok(m) if *m == msg);
    Ok(TrialOutcome {
        per_index,
        recovered,
    })
}

/// Runs `cfg.trials` independent key-generation-and-break trials.
///
/// Trials execute in parallel; the stats are integer sums and therefore
/// identical for any scheduling.
pub fn run_trials(cfg: &TrialConfig) -> Result<TrialStats, SimError> {
    cfg.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_one(cfg, t))
        .collect::<Result<_, _>>()?;

    let mut per_index = vec![IndexCounts::default(); cfg.n];
    let mut recovered = 0;
    for o in &outcomes {
        for (acc, c) in per_index.iter_mut().zip(&o.per_index) {
            acc.add(c);
        }
        recovered += u64::from(o.recovered);
    }
    Ok(TrialStats {
        config: cfg.clone(),
        per_index,
        messages_attempted: cfg.trials,
        messages_recovered: recovered,
        heuristic_bound: coprimality_heuristic(cfg.n).ok(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("the coprimality estimate needs n >= 3, got {0}")]
pub struct HeuristicDomainError(pub usize);

/// Riemann zeta at an integer `s ≥ 2`.
///
/// Partial sum up to `N − 1` plus the Euler-Maclaurin tail
/// `N^{1−s}/(s−1) + N^{−s}/2 + Σ B_{2j}/(2j)!·s(s+1)…(s+2j−2)·N^{−s−2j+1}`;
/// with `N = 64` and three Bernoulli terms the truncation error is far below
/// `1e-15`.
pub fn zeta(s: u32) -> f64 {
    assert!(s >= 2, "zeta diverges at s = 1");
    const N: u32 = 64;
    // B_2/2!, B_4/4!, B_6/6!
    const BERNOULLI: [f64; 3] = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0];
    let sf = f64::from(s);
    let nf = f64::from(N);
    let head: f64 = (1..N).rev().map(|k| f64::from(k).powf(-sf)).sum();
    let mut tail = nf.powf(1.0 - sf) / (sf - 1.0) + 0.5 * nf.powf(-sf);
    let mut rising = sf;
    for (j, bj) in BERNOULLI.iter().enumerate() {
        let j = j as f64;
        if j > 0.0 {
            rising *= (sf + 2.0 * j - 1.0) * (sf + 2.0 * j);
        }
        tail += bj * rising * nf.powf(-sf - 2.0 * j - 1.0);
    }
    head + tail
}

/// Probability estimate `1/ζ(n−1)` that the gcd step returns exactly `p_i`.
pub fn coprimality_heuristic(n: usize) -> Result<f64, HeuristicDomainError> {
    if n < 3 {
        return Err(HeuristicDomainError(n));
    }
    let k = u32::try_from(n - 1).unwrap_or(u32::MAX);
    // ζ(k) − 1 < 2^{1−k}; beyond k = 60 it is below f64 resolution
    if k > 60 {
        return Ok(1.0);
    }
    Ok(1.0 / zeta(k))
}

/// Plain-text summary of a simulation; field order is fixed.
pub fn render_report(stats: &TrialStats) -> String {
    let c = &stats.config;
    let agg = stats.aggregate();
    let total = agg.total();
    let mut out = String::new();
    let _ = writeln!(out, "key recovery simulation");
    let _ = writeln!(
        out,
        "trials={} n={} d={} min_prime_bits={} base_seed={} max_cofactor={}",
        c.trials, c.n, c.d, c.min_prime_bits, c.base_seed, c.max_cofactor
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "per-index prime recovery:");
    let _ = writeln!(
        out,
        "{:>6} {:>8} {:>10} {:>15} {:>8} {:>15}",
        "index", "exact", "cofactor2", "other_cofactor", "failed", "exact_fraction"
    );
    for (i, ic) in stats.per_index.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>10} {:>15} {:>8} {:>15.4}",
            i + 1,
            ic.exact,
            ic.cofactor2,
            ic.other_cofactor,
            ic.failed,
            ratio(ic.exact, ic.total())
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "aggregate over {total} indices:");
    let _ = writeln!(out, "  exact (d_i = p_i)          {:.4}", ratio(agg.exact, total));
    let _ = writeln!(out, "  cofactor 2 (d_i = 2 p_i)   {:.4}", ratio(agg.cofactor2, total));
    let _ = writeln!(out, "  other small cofactor       {:.4}", ratio(agg.other_cofactor, total));
    let _ = writeln!(out, "  failed                     {:.4}", ratio(agg.failed, total));
    let _ = writeln!(
        out,
        "  prime recovered            {:.4}",
        ratio(agg.exact + agg.cofactor2 + agg.other_cofactor, total)
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "messages recovered: {}/{} ({:.4})",
        stats.messages_recovered,
        stats.messages_attempted,
        stats.message_fraction()
    );
    match stats.heuristic_bound {
        Some(h) => {
            let _ = writeln!(out, "heuristic: lower bound {h:.4} = 1/zeta({})", c.n - 1);
        }
        None => {
            let _ = writeln!(out, "heuristic: n/a (needs n >= 3)");
        }
    }
    let _ = writeln!(
        out,
        "note: the chance that n-1 random integers are coprime is 1/zeta(n-1), not zeta(n-1);\n      \
         zeta(k) >= 1, and 1/zeta(2) = 6/pi^2 ~ 0.6079 is the worst case."
    );
    out
}
