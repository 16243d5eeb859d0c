//! Proof orchestration: from a solution file to a written certificate.
//!
//! The mean mode is frozen at the file's value and Newton re-polishes the
//! remaining coefficients whenever the truncation changed or the stored
//! candidate is stale; if trailing coefficients carry too much relative
//! mass the truncation is widened 25% and the polish re-run, so the defect
//! bound Y stays small. The certificate always hashes the exact solution
//! file the proof ran on (the refined file is written next to the
//! certificate when refinement changed anything).

use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::Digest;
use thiserror::Error;

use crate::certify::{certify, Certificate, CertifyError};
use crate::solver::{newton_fixed_c00, NewtonCfg, SolveError};
use crate::space::files::{read_solution, solution_to_string, FileError};
use crate::space::{Params, SymCoeffs, Trunc};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("m override ({0}, {1}) is below the stored truncation; only upward overrides are allowed")]
    OverrideBelowStored(usize, usize),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Certify(e) => e.exit_code(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProveCfg {
    /// Certify at this truncation instead of the stored one (upward only).
    pub m_override: Option<(usize, usize)>,
    pub newton: NewtonCfg,
    /// Trailing-coefficient relative mass above which the truncation is
    /// widened by 25% and Newton re-run.
    pub border_tol: f64,
    /// Cap on widening rounds.
    pub max_grow: usize,
    /// Echoed verbatim into the certificate.
    pub config_echo: Vec<(String, String)>,
}

impl Default for ProveCfg {
    fn default() -> Self {
        ProveCfg {
            m_override: None,
            newton: NewtonCfg::default(),
            border_tol: 1e-14,
            max_grow: 4,
            config_echo: Vec::new(),
        }
    }
}

#[derive(Debug)]
pub struct ProveArtifacts {
    pub certificate: Certificate,
    /// Path of the solution file the certificate refers to (the input, or a
    /// refined copy written next to the certificate).
    pub solution_used: PathBuf,
}

fn grown(t: Trunc) -> Trunc {
    Trunc::new((t.m1 * 5).div_ceil(4), (t.m2 * 5).div_ceil(4))
}

/// Prove the orbit in `solution_path` and write the certificate to
/// `cert_path`.
pub fn prove_file(
    solution_path: &Path,
    cert_path: &Path,
    cfg: &ProveCfg,
) -> Result<ProveArtifacts, PipelineError> {
    let started = Instant::now();
    let (mut params, mut x) = read_solution(solution_path)?;
    let mut refined = false;

    if let Some((m1, m2)) = cfg.m_override {
        if m1 < params.m1 || m2 < params.m2 {
            return Err(PipelineError::OverrideBelowStored(m1, m2));
        }
        if (m1, m2) != (params.m1, params.m2) {
            params = params.with_trunc(m1, m2);
            x = x.zero_pad(params.trunc());
            let (xx, _) = newton_fixed_c00(&params, x, &cfg.newton)?;
            x = xx;
            refined = true;
        }
    }

    for _ in 0..cfg.max_grow {
        if x.border_ratio() <= cfg.border_tol {
            break;
        }
        let t = grown(params.trunc());
        params = params.with_trunc(t.m1, t.m2);
        x = x.zero_pad(t);
        let (xx, _) = newton_fixed_c00(&params, x, &cfg.newton)?;
        x = xx;
        refined = true;
    }

    let (solution_used, bytes) = if refined {
        let path = cert_path.with_extension("solution.txt");
        let text = solution_to_string(&params, &x);
        std::fs::write(&path, &text).map_err(FileError::Io)?;
        (path, text.into_bytes())
    } else {
        (
            solution_path.to_path_buf(),
            std::fs::read(solution_path).map_err(FileError::Io)?,
        )
    };
    let digest = hex::encode(sha2::Sha256::digest(&bytes));

    let outcome = certify(&params, &x)?;
    let certificate = Certificate::from_outcome(
        params,
        x.c00(),
        digest,
        solution_used
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        &outcome,
        started.elapsed().as_secs_f64(),
        effective_config(cfg, &params),
    );
    crate::certify::write_certificate(cert_path, &certificate)?;
    Ok(ProveArtifacts {
        certificate,
        solution_used,
    })
}

/// Certify in-memory data (no refinement, no files); used by tests and by
/// callers that manage their own state.
pub fn prove_data(
    params: &Params,
    x: &SymCoeffs<f64>,
) -> Result<crate::certify::CertifyOutcome, CertifyError> {
    certify(params, x)
}

fn effective_config(cfg: &ProveCfg, params: &Params) -> Vec<(String, String)> {
    let mut out = vec![
        ("lambda".into(), format!("{}", params.lambda)),
        ("L".into(), format!("{}", params.l)),
        ("nu".into(), format!("{}", params.nu)),
        ("m1".into(), format!("{}", params.m1)),
        ("m2".into(), format!("{}", params.m2)),
        ("newton_tol".into(), format!("{}", cfg.newton.tol)),
        ("newton_max_iter".into(), format!("{}", cfg.newton.max_iter)),
        ("border_tol".into(), format!("{}", cfg.border_tol)),
        ("max_grow".into(), format!("{}", cfg.max_grow)),
    ];
    out.extend(cfg.config_echo.iter().cloned());
    out
}
