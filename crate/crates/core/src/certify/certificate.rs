//! Proof certificates: a structured text record of a successful contraction
//! argument, designed so an independent implementation can re-check it.
//!
//! Interval endpoints are serialized with one outward step before shortest
//! round-trip formatting: the printed decimal for a lower endpoint is
//! strictly below the computed bound as a real number (and conversely for
//! upper endpoints), so a re-verifier treating the decimals as exact reals
//! stays sound. Exact values (parameters, coefficients, the validated
//! radius) are printed shortest-round-trip and re-parse bit-identically.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::interval::Interval;
use crate::space::files::FileError;
use crate::space::Params;

use super::{eval_radii_poly, BoundSet, CertifyOutcome};

pub const CERTIFICATE_HEADER: &str = "boussinesq certificate v1";

#[derive(Clone, Debug)]
pub struct Certificate {
    pub params: Params,
    pub c00: f64,
    /// SHA-256 of the exact bytes of the solution file the proof ran on.
    pub solution_sha256: String,
    pub solution_file: String,
    pub bounds: BoundSet,
    pub r_min: Interval,
    pub r_max: Interval,
    pub r_star: f64,
    pub p_at_r_star: Interval,
    pub c0_error: f64,
    pub l2_error: f64,
    pub wall_time_secs: f64,
    /// Complete effective configuration of the proof run, echoed for
    /// reproducibility.
    pub config: Vec<(String, String)>,
}

impl Certificate {
    pub fn from_outcome(
        params: Params,
        c00: f64,
        solution_sha256: String,
        solution_file: String,
        outcome: &CertifyOutcome,
        wall_time_secs: f64,
        config: Vec<(String, String)>,
    ) -> Certificate {
        Certificate {
            params,
            c00,
            solution_sha256,
            solution_file,
            bounds: outcome.bounds,
            r_min: outcome.radii.r_min,
            r_max: outcome.radii.r_max,
            r_star: outcome.radii.r_star,
            p_at_r_star: outcome.radii.p_at_r_star,
            c0_error: outcome.c0_error,
            l2_error: outcome.l2_error,
            wall_time_secs,
            config,
        }
    }
}

/// Decimal strictly below the value (as a real), parsing back within one ulp.
fn dec_down(v: f64) -> String {
    format!("{}", v.next_down())
}

/// Decimal strictly above the value.
fn dec_up(v: f64) -> String {
    format!("{}", v.next_up())
}

fn iv_line(name: &str, iv: &Interval) -> String {
    format!("{name} = {} {}\n", dec_down(iv.lo()), dec_up(iv.hi()))
}

pub fn certificate_to_string(c: &Certificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CERTIFICATE_HEADER}");
    let _ = writeln!(s, "[params]");
    let _ = writeln!(s, "lambda = {}", c.params.lambda);
    let _ = writeln!(s, "L = {}", c.params.l);
    let _ = writeln!(s, "nu = {}", c.params.nu);
    let _ = writeln!(s, "m1 = {}", c.params.m1);
    let _ = writeln!(s, "m2 = {}", c.params.m2);
    let _ = writeln!(s, "c00 = {}", c.c00);
    let _ = writeln!(s, "[solution]");
    let _ = writeln!(s, "file = {}", c.solution_file);
    let _ = writeln!(s, "sha256 = {}", c.solution_sha256);
    let _ = writeln!(s, "[bounds]");
    s.push_str(&iv_line("Y", &c.bounds.y));
    s.push_str(&iv_line("Z0", &c.bounds.z0));
    s.push_str(&iv_line("Z1", &c.bounds.z1));
    s.push_str(&iv_line("Z2", &c.bounds.z2));
    let _ = writeln!(s, "[radius]");
    s.push_str(&iv_line("r_min", &c.r_min));
    s.push_str(&iv_line("r_max", &c.r_max));
    let _ = writeln!(s, "r_star = {}", c.r_star);
    s.push_str(&iv_line("p_at_r_star", &c.p_at_r_star));
    let _ = writeln!(s, "[errors]");
    let _ = writeln!(s, "c0 = {}", dec_up(c.c0_error));
    let _ = writeln!(s, "l2 = {}", dec_up(c.l2_error));
    let _ = writeln!(s, "[meta]");
    let _ = writeln!(s, "wall_time_secs = {}", c.wall_time_secs);
    let _ = writeln!(s, "[config]");
    for (k, v) in &c.config {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn write_certificate(path: &Path, c: &Certificate) -> Result<(), FileError> {
    std::fs::write(path, certificate_to_string(c)).map_err(FileError::Io)
}

pub fn certificate_from_str(text: &str) -> Result<Certificate, FileError> {
    let bad = |m: String| FileError::Malformed(m);
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CERTIFICATE_HEADER => {}
        other => {
            return Err(bad(format!(
                "expected header {CERTIFICATE_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut section = String::new();
    let mut kv: Vec<(String, String, String)> = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
        kv.push((section.clone(), k.trim().to_string(), v.trim().to_string()));
    }
    let get = |sec: &str, key: &str| -> Result<String, FileError> {
        kv.iter()
            .find(|(s, k, _)| s == sec && k == key)
            .map(|(_, _, v)| v.clone())
            .ok_or_else(|| bad(format!("missing [{sec}] {key}")))
    };
    let getf = |sec: &str, key: &str| -> Result<f64, FileError> {
        get(sec, key)?
            .parse()
            .map_err(|_| bad(format!("bad float in [{sec}] {key}")))
    };
    let getiv = |sec: &str, key: &str| -> Result<Interval, FileError> {
        let v = get(sec, key)?;
        let mut it = v.split_whitespace();
        let lo: f64 = it
            .next()
            .ok_or_else(|| bad(format!("missing endpoints in [{sec}] {key}")))?
            .parse()
            .map_err(|_| bad(format!("bad lower endpoint in [{sec}] {key}")))?;
        let hi: f64 = it
            .next()
            .ok_or_else(|| bad(format!("missing upper endpoint in [{sec}] {key}")))?
            .parse()
            .map_err(|_| bad(format!("bad upper endpoint in [{sec}] {key}")))?;
        Interval::new(lo, hi).map_err(|e| bad(format!("[{sec}] {key}: {e}")))
    };

    let params = Params {
        lambda: getf("params", "lambda")?,
        l: getf("params", "L")?,
        nu: getf("params", "nu")?,
        m1: getf("params", "m1")? as usize,
        m2: getf("params", "m2")? as usize,
    };
    let config = kv
        .iter()
        .filter(|(s, _, _)| s == "config")
        .map(|(_, k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(Certificate {
        params,
        c00: getf("params", "c00")?,
        solution_sha256: get("solution", "sha256")?,
        solution_file: get("solution", "file")?,
        bounds: BoundSet {
            y: getiv("bounds", "Y")?,
            z0: getiv("bounds", "Z0")?,
            z1: getiv("bounds", "Z1")?,
            z2: getiv("bounds", "Z2")?,
        },
        r_min: getiv("radius", "r_min")?,
        r_max: getiv("radius", "r_max")?,
        r_star: getf("radius", "r_star")?,
        p_at_r_star: getiv("radius", "p_at_r_star")?,
        c0_error: getf("errors", "c0")?,
        l2_error: getf("errors", "l2")?,
        wall_time_secs: getf("meta", "wall_time_secs")?,
        config,
    })
}

pub fn read_certificate(path: &Path) -> Result<Certificate, FileError> {
    let text = std::fs::read_to_string(path)?;
    certificate_from_str(&text)
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("certificate check failed: {0}")]
    Failed(String),
}

/// Re-check a certificate against its solution file.
///
/// The default check re-verifies everything that does not require redoing
/// the bound computations: the solution digest, parameter agreement, the
/// truncation condition, the negativity of the radii polynomial at `r_star`
/// evaluated from the stored (outward-widened) bound intervals, and the 4r
/// error bounds. With `full`, the four bounds are recomputed from the
/// solution and must reproduce the stored enclosures.
pub fn verify_certificate(
    cert_path: &Path,
    solution_path: &Path,
    full: bool,
) -> Result<(), VerifyError> {
    use sha2::Digest;

    let cert = read_certificate(cert_path)?;
    let bytes = std::fs::read(solution_path).map_err(FileError::Io)?;
    let digest = hex::encode(sha2::Sha256::digest(&bytes));
    let fail = |m: String| Err(VerifyError::Failed(m));
    if digest != cert.solution_sha256 {
        return fail(format!(
            "solution digest mismatch: file {digest}, certificate {}",
            cert.solution_sha256
        ));
    }
    let text = String::from_utf8(bytes).map_err(|e| VerifyError::Failed(e.to_string()))?;
    let (p, x) = crate::space::files::solution_from_str(&text)?;
    if p != cert.params {
        return fail("parameter mismatch between certificate and solution".into());
    }
    if x.c00() != cert.c00 {
        return fail("mean mode mismatch between certificate and solution".into());
    }
    if !super::check_cond_m(&p) {
        return fail("truncation condition does not hold".into());
    }
    let p_at = eval_radii_poly(&cert.bounds, cert.r_star);
    if p_at.hi() >= 0.0 {
        return fail(format!(
            "radii polynomial not verifiably negative at r_star (p = {p_at})"
        ));
    }
    let four_r = Interval::point(4.0) * Interval::point(cert.r_star);
    if cert.c0_error < four_r.hi() || cert.l2_error < four_r.hi() {
        return fail("stored error bounds are below 4 r_star".into());
    }

    if full {
        let outcome = super::certify(&p, &x).map_err(|e| VerifyError::Failed(e.to_string()))?;
        let stored = [
            ("Y", cert.bounds.y, outcome.bounds.y),
            ("Z0", cert.bounds.z0, outcome.bounds.z0),
            ("Z1", cert.bounds.z1, outcome.bounds.z1),
            ("Z2", cert.bounds.z2, outcome.bounds.z2),
        ];
        for (name, was, now) in stored {
            // the stored enclosure is the recomputed one widened by exactly
            // one serialization step per endpoint
            let rewidened = Interval::new(now.lo().next_down(), now.hi().next_up())
                .expect("widening keeps order");
            if was != rewidened {
                return fail(format!(
                    "recomputed bound {name} = {now} does not reproduce stored {was}"
                ));
            }
        }
    }
    Ok(())
}
