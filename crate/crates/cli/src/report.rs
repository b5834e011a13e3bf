//! Report envelope, exit codes and shared parsing helpers.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use skewmat::field::{is_prime, Field};
use skewmat::json::JsonError;
use skewmat::skewset::Pos;

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;
pub const EXIT_SUITE: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or unreduced input.
    Validation(String),
    /// A resource cap was hit; the partial report is still printed.
    Cap(String, Box<Report>),
    /// An invariant failed; the report carries a reproducer.
    Invariant(String, Box<Report>),
    /// Golden cases failed.
    Suite(Vec<String>, Box<Report>),
    Other(anyhow::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Cap(..) => EXIT_CAP,
            CliError::Invariant(..) => EXIT_INVARIANT,
            CliError::Suite(..) => EXIT_SUITE,
            CliError::Other(_) => 1,
        }
    }

    pub fn report(&self) -> Option<&Report> {
        match self {
            CliError::Cap(_, r) | CliError::Invariant(_, r) | CliError::Suite(_, r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Cap(m, _) => write!(f, "resource cap reached: {m}"),
            CliError::Invariant(m, _) => write!(f, "invariant violated: {m}"),
            CliError::Suite(ids, _) => write!(f, "failing cases: {}", ids.join(", ")),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

/// JSON errors only arise while reading input, so all of them are validation errors.
impl From<JsonError> for CliError {
    fn from(e: JsonError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Everything printed on stdout. Wall-clock timing goes to stderr so the
/// report stays byte-identical across runs.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub seed: Option<u64>,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, digest: String, seed: Option<u64>, results: Value) -> Report {
        Report {
            command: command.into(),
            input_digest: digest,
            seed,
            results,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "results": self.results,
        })
    }

    pub fn render(&self, pretty: bool) -> String {
        let v = self.to_json();
        if pretty {
            serde_json::to_string_pretty(&v).expect("reports serialize")
        } else {
            serde_json::to_string(&v).expect("reports serialize")
        }
    }
}

pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    let hex: String = out.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

pub fn read_input(path: &Path) -> Result<(Vec<u8>, Value), CliError> {
    let bytes = std::fs::read(path).map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| validation(format!("{} is not UTF-8", path.display())))?;
    let value = skewmat::json::parse(text)?;
    Ok((bytes, value))
}

/// Field names on the command line: Q, p, GF(p), p^k, GF(p^k), GF(q).
pub fn parse_field(s: &str) -> Result<Field, CliError> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("q") || t.eq_ignore_ascii_case("rational") {
        return Ok(Field::rational());
    }
    let inner = t
        .strip_prefix("GF(")
        .or_else(|| t.strip_prefix("gf("))
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(t);
    let bad = || validation(format!("cannot parse field \"{s}\""));
    let (p, k) = match inner.split_once('^') {
        Some((p, k)) => (p.trim().parse::<u64>().map_err(|_| bad())?, k.trim().parse::<usize>().map_err(|_| bad())?),
        None => prime_power(inner.trim().parse::<u64>().map_err(|_| bad())?).ok_or_else(bad)?,
    };
    let f = if k == 1 { Field::gf(p) } else { Field::gfq_default(p, k) };
    f.map_err(|e| validation(e.to_string()))
}

fn prime_power(q: u64) -> Option<(u64, usize)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    if !is_prime(p) {
        return None;
    }
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    (r == 1).then_some((p, k))
}

pub fn positions_json(s: &BTreeSet<Pos>) -> Value {
    Value::Array(s.iter().map(|&(i, j)| json!([i, j])).collect())
}

/// "Δ" or "Δ+{(1,2),(3,1)}" when the set contains the diagonal, else the
/// plain list "{(1,1),(1,2)}".
pub fn diagonal_summary(n: usize, s: &BTreeSet<Pos>) -> String {
    let list = |it: &mut dyn Iterator<Item = &Pos>| it.map(|(i, j)| format!("({i},{j})")).collect::<Vec<_>>().join(",");
    if !(1..=n).all(|i| s.contains(&(i, i))) {
        return format!("{{{}}}", list(&mut s.iter()));
    }
    let extra = list(&mut s.iter().filter(|(i, j)| i != j));
    if extra.is_empty() {
        "Δ".to_string()
    } else {
        format!("Δ+{{{extra}}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names() {
        assert_eq!(parse_field("Q").unwrap(), Field::rational());
        assert_eq!(parse_field("GF(7)").unwrap(), Field::gf(7).unwrap());
        assert_eq!(parse_field("5").unwrap(), Field::gf(5).unwrap());
        assert_eq!(parse_field("GF(9)").unwrap(), Field::gfq_default(3, 2).unwrap());
        assert_eq!(parse_field("2^3").unwrap(), Field::gfq_default(2, 3).unwrap());
        assert!(parse_field("GF(6)").is_err());
        assert!(parse_field("R").is_err());
    }

    #[test]
    fn summary_and_digest() {
        let s: BTreeSet<Pos> = [(1, 1), (2, 2), (1, 2)].into_iter().collect();
        assert_eq!(diagonal_summary(2, &s), "Δ+{(1,2)}");
        assert_ne!(digest(&[b"ab", b"c"]), digest(&[b"a", b"bc"]));
        assert!(digest(&[b""]).starts_with("sha256:"));
    }
}
