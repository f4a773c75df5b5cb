//! Versioned plain-text key files.
//!
//! ```text
//! caoli-pub v1          caoli-priv v1
//! n d                   n d
//! <n rows of B>         p_1 ... p_n
//!                       <n rows of P1>
//!                       <n rows of P2>
//! ```
//!
//! All integers are decimal and space-separated. Parsing is strict and
//! errors carry the 1-based line number.

use std::fmt::Write as _;

use caoli_core::{IntMatrix, PrivateKey, PublicKey};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

pub const PUBLIC_MAGIC: &str = "caoli-pub v1";
pub const PRIVATE_MAGIC: &str = "caoli-priv v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        msg: msg.into(),
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            last: 0,
        }
    }

    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l.trim_end_matches('\r')))
            }
            None => Err(err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn finish(mut self) -> Result<(), ParseError> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(err(i + 1, "unexpected trailing content"));
            }
        }
        Ok(())
    }
}

fn parse_ints(line_no: usize, line: &str, expected: usize, what: &str) -> Result<Vec<BigInt>, ParseError> {
    let vals = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<BigInt>()
                .map_err(|_| err(line_no, format!("invalid integer {tok:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != expected {
        return Err(err(
            line_no,
            format!("expected {expected} {what}, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

fn parse_header(lines: &mut Lines<'_>, magic: &str) -> Result<(usize, BigInt), ParseError> {
    let (no, l) = lines.next_line("header")?;
    if l.trim() != magic {
        return Err(err(no, format!("expected header {magic:?}")));
    }
    let (no, l) = lines.next_line("`n d` line")?;
    let nd = parse_ints(no, l, 2, "integers (n d)")?;
    let n = usize::try_from(&nd[0])
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| err(no, "n must be a positive integer"))?;
    if nd[1] < BigInt::one() {
        return Err(err(no, "d must be at least 1"));
    }
    Ok((n, nd[1].clone()))
}

fn parse_rows(lines: &mut Lines<'_>, n: usize, name: &str) -> Result<(IntMatrix, usize), ParseError> {
    let mut rows = Vec::with_capacity(n);
    let mut first = 0;
    for r in 0..n {
        let (no, l) = lines.next_line(&format!("row {} of {name}", r + 1))?;
        if r == 0 {
            first = no;
        }
        let row = parse_ints(no, l, n, &format!("entries in row {} of {name}", r + 1))?;
        if let Some(c) = row.iter().position(Signed::is_negative) {
            return Err(err(no, format!("negative entry in column {} of {name}", c + 1)));
        }
        rows.push(row);
    }
    let m = IntMatrix::from_rows(rows).map_err(|e| err(first, e.to_string()))?;
    Ok((m, first))
}

pub fn format_public(pk: &PublicKey) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{PUBLIC_MAGIC}");
    let _ = writeln!(out, "{} {}", pk.n(), pk.d());
    let _ = writeln!(out, "{}", pk.matrix());
    out
}

pub fn parse_public(text: &str) -> Result<PublicKey, ParseError> {
    let mut lines = Lines::new(text);
    let (n, d) = parse_header(&mut lines, PUBLIC_MAGIC)?;
    let (b, first) = parse_rows(&mut lines, n, "B")?;
    for i in 0..n {
        for j in 0..i {
            if b.get(i, j) != b.get(j, i) {
                return Err(err(
                    first + i,
                    format!("B is not symmetric: entry ({}, {}) differs from ({}, {})", i + 1, j + 1, j + 1, i + 1),
                ));
            }
        }
    }
    lines.finish()?;
    PublicKey::new(b, d).map_err(|e| err(first, e.to_string()))
}

pub fn format_private(sk: &PrivateKey) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{PRIVATE_MAGIC}");
    let _ = writeln!(out, "{} {}", sk.n(), sk.d());
    let primes: Vec<String> = sk.primes().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "{}", primes.join(" "));
    let _ = writeln!(out, "{}", sk.p1());
    let _ = writeln!(out, "{}", sk.p2());
    out
}

pub fn parse_private(text: &str) -> Result<PrivateKey, ParseError> {
    let mut lines = Lines::new(text);
    let (n, d) = parse_header(&mut lines, PRIVATE_MAGIC)?;
    let (no, l) = lines.next_line("prime line")?;
    let primes = parse_ints(no, l, n, "primes")?;
    let (p1, p1_line) = parse_rows(&mut lines, n, "P1")?;
    let (p2, p2_line) = parse_rows(&mut lines, n, "P2")?;
    for (m, line, name) in [(&p1, p1_line, "P1"), (&p2, p2_line, "P2")] {
        if !m.is_unit_lower_triangular() {
            return Err(err(line, format!("{name} is not unit lower-triangular")));
        }
    }
    lines.finish()?;
    PrivateKey::from_parts(primes, p1, p2, d).map_err(|e| err(no, e.to_string()))
}
