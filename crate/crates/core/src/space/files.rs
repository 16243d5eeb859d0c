//! Solution files: a structured text format holding one orbit candidate.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a read
//! back yields bit-identical values. Coefficients are listed in lexicographic
//! `(k₁, k₂)` order and zero entries are kept: the file is the full dense
//! state.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{MultiIndex, Params, SymCoeffs, Trunc};

pub const SOLUTION_HEADER: &str = "boussinesq solution v1";

#[derive(Debug, Error)]
pub enum FileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("solution file malformed: {0}")]
    Malformed(String),
}

fn bad(msg: impl Into<String>) -> FileError {
    FileError::Malformed(msg.into())
}

/// Serialize a solution to its text form.
pub fn solution_to_string(p: &Params, x: &SymCoeffs<f64>) -> String {
    let t = x.trunc();
    let mut s = String::new();
    let _ = writeln!(s, "{SOLUTION_HEADER}");
    let _ = writeln!(s, "lambda = {}", p.lambda);
    let _ = writeln!(s, "L = {}", p.l);
    let _ = writeln!(s, "nu = {}", p.nu);
    let _ = writeln!(s, "m1 = {}", t.m1);
    let _ = writeln!(s, "m2 = {}", t.m2);
    let _ = writeln!(s, "c00 = {}", x.c00());
    let _ = writeln!(s, "coeffs = {}", t.len());
    for (i, v) in x.data().iter().enumerate() {
        let k = t.at(i);
        let _ = writeln!(s, "{} {} {}", k.k1, k.k2, v);
    }
    s
}

pub fn write_solution(path: &Path, p: &Params, x: &SymCoeffs<f64>) -> Result<(), FileError> {
    std::fs::write(path, solution_to_string(p, x))?;
    Ok(())
}

/// Parse a solution from its text form.
pub fn solution_from_str(text: &str) -> Result<(Params, SymCoeffs<f64>), FileError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == SOLUTION_HEADER => {}
        other => return Err(bad(format!("expected header {SOLUTION_HEADER:?}, got {other:?}"))),
    }

    let mut lambda = None;
    let mut l = None;
    let mut nu = None;
    let mut m1 = None;
    let mut m2 = None;
    let mut c00 = None;
    let mut count = None;
    for line in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "lambda" => lambda = Some(parse_f64(value)?),
            "L" => l = Some(parse_f64(value)?),
            "nu" => nu = Some(parse_f64(value)?),
            "m1" => m1 = Some(parse_usize(value)?),
            "m2" => m2 = Some(parse_usize(value)?),
            "c00" => c00 = Some(parse_f64(value)?),
            "coeffs" => {
                count = Some(parse_usize(value)?);
                break;
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }

    let missing = |name: &str| bad(format!("missing field {name:?}"));
    let p = Params {
        lambda: lambda.ok_or_else(|| missing("lambda"))?,
        l: l.ok_or_else(|| missing("L"))?,
        nu: nu.ok_or_else(|| missing("nu"))?,
        m1: m1.ok_or_else(|| missing("m1"))?,
        m2: m2.ok_or_else(|| missing("m2"))?,
    };
    p.validate().map_err(|e| bad(e.to_string()))?;
    let count = count.ok_or_else(|| missing("coeffs"))?;
    let trunc = Trunc::new(p.m1, p.m2);
    if count != trunc.len() {
        return Err(bad(format!(
            "coefficient count {count} does not match truncation size {}",
            trunc.len()
        )));
    }

    let mut x = SymCoeffs::<f64>::zeros(trunc);
    x.set_c00(c00.ok_or_else(|| missing("c00"))?);
    let mut seen = 0usize;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let k1: i64 = it
            .next()
            .ok_or_else(|| bad("truncated coefficient line"))?
            .parse()
            .map_err(|_| bad(format!("bad k1 in {line:?}")))?;
        let k2: i64 = it
            .next()
            .ok_or_else(|| bad("truncated coefficient line"))?
            .parse()
            .map_err(|_| bad(format!("bad k2 in {line:?}")))?;
        let v = parse_f64(it.next().ok_or_else(|| bad("missing value"))?)?;
        if it.next().is_some() {
            return Err(bad(format!("trailing tokens in {line:?}")));
        }
        let k = MultiIndex::new(k1, k2);
        if !trunc.contains(k) {
            return Err(bad(format!("coefficient index {k:?} outside truncation")));
        }
        x.set(k, v);
        seen += 1;
    }
    if seen != count {
        return Err(bad(format!("expected {count} coefficients, found {seen}")));
    }
    Ok((p, x))
}

pub fn read_solution(path: &Path) -> Result<(Params, SymCoeffs<f64>), FileError> {
    let text = std::fs::read_to_string(path)?;
    solution_from_str(&text)
}

fn parse_f64(s: &str) -> Result<f64, FileError> {
    let v: f64 = s
        .parse()
        .map_err(|_| bad(format!("bad float literal {s:?}")))?;
    if !v.is_finite() {
        return Err(bad(format!("non-finite value {s:?}")));
    }
    Ok(v)
}

fn parse_usize(s: &str) -> Result<usize, FileError> {
    s.parse()
        .map_err(|_| bad(format!("bad integer literal {s:?}")))
}
