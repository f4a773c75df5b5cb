//! `caoli` command-line tool: key generation, encryption, decryption,
//! the public-key attack, and the recovery-rate simulation.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 partial attack
//! recovery, 3 internal assertion (a public matrix that does not factor).

pub mod keyfile;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use caoli_core::attack::{self, AttackError, DEFAULT_MAX_COFACTOR};
use caoli_core::scheme::{self, compute_beta};
use caoli_core::sim::{self, TrialConfig};
use caoli_core::{Ciphertext, Message, RecoveredKey, SchemeParams};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "caoli", version, about = "Cao-Li cryptosystem and key-recovery attack")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a key pair
    Keygen(KeygenArgs),
    /// Encrypt a message block under a public key
    Encrypt(EncryptArgs),
    /// Decrypt a ciphertext with a private key
    Decrypt(DecryptArgs),
    /// Recover the private key from a public key and decrypt ciphertexts
    Attack(AttackArgs),
    /// Measure prime and message recovery rates over random keys
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "1")]
    pub d: BigInt,
    #[arg(long, default_value_t = 64)]
    pub min_prime_bits: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Private key output path
    #[arg(long, default_value = "caoli.priv")]
    pub private: PathBuf,
    /// Public key output path
    #[arg(long, default_value = "caoli.pub")]
    pub public: PathBuf,
}

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long)]
    pub pubkey: PathBuf,
    /// Comma-separated entries, e.g. `1,0,3`
    #[arg(long, conflicts_with = "message_file")]
    pub message: Option<String>,
    /// File holding the comma-separated message; stdin when neither is given
    #[arg(long)]
    pub message_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long)]
    pub privkey: PathBuf,
    /// Decimal ciphertext; read from stdin when omitted
    pub ciphertext: Option<String>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long)]
    pub pubkey: PathBuf,
    /// File with one decimal ciphertext per line
    #[arg(long)]
    pub ciphertexts: Option<PathBuf>,
    /// Where to write the recovered-key report (stdout when omitted)
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_COFACTOR)]
    pub max_cofactor: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "1")]
    pub d: BigInt,
    #[arg(long, default_value_t = 64)]
    pub min_prime_bits: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_MAX_COFACTOR)]
    pub max_cofactor: u64,
    /// Also write the report to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the stats as `name=value` lines to this file
    #[arg(long)]
    pub kv: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io { .. } => 1,
            CliError::Internal(_) => 3,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    io::stdin()
        .read_to_string(&mut s)
        .map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        })?;
    Ok(s)
}

fn load_public(path: &Path) -> Result<caoli_core::PublicKey, CliError> {
    keyfile::parse_public(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_private(path: &Path) -> Result<caoli_core::PrivateKey, CliError> {
    keyfile::parse_private(&read_file(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn seed_or_entropy(seed: Option<u64>, err: &mut dyn Write) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        let _ = writeln!(err, "seed: {s}");
        s
    })
}

/// Parses `1,0,3` into a message.
pub fn parse_message(text: &str) -> Result<Message, CliError> {
    let entries = text
        .trim()
        .split(',')
        .enumerate()
        .map(|(i, tok)| {
            tok.trim()
                .parse::<BigInt>()
                .map_err(|_| invalid(format!("message entry {}: invalid integer {tok:?}", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Message::new(entries))
}

pub fn format_message(msg: &Message) -> String {
    msg.entries()
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_ciphertext(text: &str) -> Result<Ciphertext, CliError> {
    let y = text
        .trim()
        .parse::<BigInt>()
        .map_err(|_| invalid(format!("invalid ciphertext {:?}", text.trim())))?;
    Ciphertext::new(y).map_err(invalid)
}

pub fn cmd_keygen(args: &KeygenArgs, err: &mut dyn Write) -> Result<i32, CliError> {
    let seed = seed_or_entropy(args.seed, err);
    let params = SchemeParams {
        n: args.n,
        d: args.d.clone(),
        min_prime_bits: args.min_prime_bits,
        rng_seed: seed,
    };
    params.validate().map_err(invalid)?;
    let (sk, pk) = scheme::keygen(&params).map_err(invalid)?;
    write_file(&args.private, &keyfile::format_private(&sk))?;
    write_file(&args.public, &keyfile::format_public(&pk))?;

    let bound = compute_beta(sk.primes(), sk.d()).map_err(invalid)?;
    let bits: Vec<String> = scheme::prime_bit_lengths(sk.primes())
        .iter()
        .map(ToString::to_string)
        .collect();
    let _ = writeln!(err, "beta ~ {:.6e}", bound.beta_approx());
    let _ = writeln!(err, "entry cap M = {}", bound.cap);
    let _ = writeln!(err, "prime bits: {}", bits.join(" "));
    Ok(0)
}

pub fn cmd_encrypt(args: &EncryptArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let pk = load_public(&args.pubkey)?;
    let text = match (&args.message, &args.message_file) {
        (Some(m), _) => m.clone(),
        (None, Some(path)) => read_file(path)?,
        (None, None) => read_stdin()?,
    };
    let msg = parse_message(&text)?;
    let y = pk.encrypt(&msg).map_err(invalid)?;
    let _ = writeln!(out, "{}", y.value());
    Ok(0)
}

pub fn cmd_decrypt(args: &DecryptArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let sk = load_private(&args.privkey)?;
    let text = match &args.ciphertext {
        Some(t) => t.clone(),
        None => read_stdin()?,
    };
    let y = parse_ciphertext(&text)?;
    let msg = sk
        .decrypt(&y)
        .map_err(|e| invalid(format!("invalid ciphertext ({e})")))?;
    let _ = writeln!(out, "{}", format_message(&msg));
    Ok(0)
}

/// Human-readable description of a recovered key.
pub fn render_recovered(key: &RecoveredKey) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "recovered key (n = {})", key.lambdas.len());
    let _ = writeln!(s, "lambda:");
    for (i, l) in key.lambdas.iter().enumerate() {
        let _ = writeln!(s, "  {} {l}", i + 1);
    }
    let _ = writeln!(s, "P:");
    for row in key.p_matrix.rows() {
        let row: Vec<String> = row.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "  {}", row.join(" "));
    }
    let _ = writeln!(s, "primes:");
    for (i, c) in key.candidates.iter().enumerate() {
        let p_hat = c.p_hat.as_ref().map_or_else(|| "-".to_string(), ToString::to_string);
        let _ = writeln!(s, "  {} d={} p={} status={}", i + 1, c.d, p_hat, c.status);
    }
    s
}

pub fn cmd_attack(args: &AttackArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let pk = load_public(&args.pubkey)?;
    let ciphertexts = match &args.ciphertexts {
        Some(path) => read_file(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(parse_ciphertext)
            .collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let (key, results) = attack::full_break(&pk, &ciphertexts, args.max_cofactor).map_err(|e| {
        let what = match e {
            AttackError::InexactDivision { .. } => "inexact division",
            AttackError::ZeroPivot { .. } => "zero pivot",
            AttackError::NotTriangular { .. } => "non-triangular factor",
            AttackError::NotSymmetric => "asymmetric matrix",
        };
        CliError::Internal(format!(
            "{what}: the public matrix is not a well-formed Cao-Li key ({e})"
        ))
    })?;

    let report = render_recovered(&key);
    match &args.report {
        Some(path) => write_file(path, &report)?,
        None => {
            let _ = write!(out, "{report}");
        }
    }
    for r in &results {
        match r {
            Ok(m) => {
                let _ = writeln!(out, "{}", format_message(m));
            }
            Err(attack::BreakFailure::MissingPrimes { indices }) => {
                let idx: Vec<String> = indices.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "FAIL indices={}", idx.join(","));
            }
            Err(attack::BreakFailure::Decryption(why)) => {
                let _ = writeln!(out, "FAIL invalid ciphertext: {why}");
            }
        }
    }
    Ok(if key.all_recovered() { 0 } else { 2 })
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let seed = seed_or_entropy(args.seed, err);
    let mut cfg = TrialConfig::new(args.trials, args.n, args.d.clone(), args.min_prime_bits, seed);
    cfg.max_cofactor = args.max_cofactor;
    let stats = sim::run_trials(&cfg).map_err(invalid)?;
    let report = sim::render_report(&stats);
    let _ = write!(out, "{report}");
    if let Some(path) = &args.out {
        write_file(path, &report)?;
    }
    if let Some(path) = &args.kv {
        write_file(path, &stats.to_key_values())?;
    }
    Ok(0)
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Keygen(a) => cmd_keygen(a, err),
        Command::Encrypt(a) => cmd_encrypt(a, out),
        Command::Decrypt(a) => cmd_decrypt(a, out),
        Command::Attack(a) => cmd_attack(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    match dispatch(&cli, &mut out, &mut err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
