//! Floating-point machinery: Newton iteration, branch continuation in λ, and
//! the approximate inverse used by the certification step.
//!
//! Orbits are found with an augmented square system: the trivially satisfied
//! equation at the origin is replaced by the energy constraint
//! `E(c₀₀, x) = E_target`, which pins down the otherwise free mean mode. For
//! certification the mean mode is frozen instead and Newton runs on `f`
//! alone.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::problem::{
    df_dc00, energy_gradient_with, energy_with, jacobian_block, residual_with, Evaluated,
};
use crate::space::files::FileError;
use crate::space::{MultiIndex, Params, SymCoeffs};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("jacobian is singular")]
    SingularJacobian,
    #[error("newton did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("continuation step underflow at lambda = {lambda} (step {step:.3e})")]
    StepUnderflow { lambda: f64, step: f64 },
    #[error(transparent)]
    File(#[from] FileError),
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonCfg {
    /// Convergence threshold on the ∞-norm of the (augmented) residual at
    /// unit solution scale. The effective threshold is `tol · max(1, s²)`
    /// with `s = max(|c₀₀|, max|x_k|)`: the evaluation of `f` carries an
    /// f64 rounding floor quadratic in the solution amplitude, so a fixed
    /// threshold below that floor would spin forever on large orbits.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonCfg {
    fn default() -> Self {
        // Y must come out near 1e-12 for radii around 1e-11, so the numerics
        // are pushed well below that.
        NewtonCfg {
            tol: 1e-13,
            max_iter: 30,
        }
    }
}

impl NewtonCfg {
    /// Effective threshold at the scale of the iterate.
    pub fn tol_at(&self, x: &SymCoeffs<f64>) -> f64 {
        let s = x.max_abs().max(x.c00().abs());
        self.tol * s.powi(2).max(1.0)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual_inf: f64,
}

/// The augmented numerical system: unknowns `(c₀₀, x)` with equations
/// `E(c₀₀, x) - E_target = 0` and `f_k = 0` for `k ∈ F_m`.
#[derive(Clone, Copy, Debug)]
pub struct AugmentedSystem {
    pub params: Params,
    pub e_target: f64,
}

impl AugmentedSystem {
    pub fn dim(&self) -> usize {
        1 + self.params.trunc().len()
    }

    fn residual_vec(&self, x: &SymCoeffs<f64>, ev: &Evaluated<f64>) -> DVector<f64> {
        let t = self.params.trunc();
        let mut r = DVector::zeros(self.dim());
        r[0] = energy_with(ev, &self.params) - self.e_target;
        let f = residual_with(ev, x, &self.params, t);
        r.rows_mut(1, t.len()).copy_from_slice(&f);
        r
    }

    fn jacobian(&self, x: &SymCoeffs<f64>, ev: &Evaluated<f64>) -> DMatrix<f64> {
        let t = self.params.trunc();
        let n = t.len();
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let (de_dc00, de_dx) = energy_gradient_with(ev, x, &self.params);
        jac[(0, 0)] = de_dc00;
        for (col, g) in de_dx.iter().enumerate() {
            jac[(0, col + 1)] = *g;
        }
        for (row, k) in t.iter().enumerate() {
            jac[(row + 1, 0)] = df_dc00(x, k);
        }
        let block = jacobian_block(x, &self.params, t);
        for row in 0..n {
            for col in 0..n {
                jac[(row + 1, col + 1)] = block[row * n + col];
            }
        }
        jac
    }
}

/// Newton on the augmented system. The guess carries `c₀₀` inside the
/// coefficient container; the result does too.
pub fn newton_augmented(
    sys: &AugmentedSystem,
    guess: SymCoeffs<f64>,
    cfg: &NewtonCfg,
) -> Result<(SymCoeffs<f64>, Diagnostics), SolveError> {
    let t = sys.params.trunc();
    assert_eq!(guess.trunc(), t, "guess truncation must match the system");
    let mut x = guess;
    for it in 0..=cfg.max_iter {
        let ev = Evaluated::full(&x);
        let r = sys.residual_vec(&x, &ev);
        let rinf = r.amax();
        if rinf < cfg.tol_at(&x) {
            return Ok((
                x,
                Diagnostics {
                    iterations: it,
                    residual_inf: rinf,
                },
            ));
        }
        if it == cfg.max_iter || !rinf.is_finite() {
            return Err(SolveError::NoConvergence {
                iterations: it,
                residual: rinf,
            });
        }
        let jac = sys.jacobian(&x, &ev);
        let delta = jac
            .lu()
            .solve(&r)
            .ok_or(SolveError::SingularJacobian)?;
        x.set_c00(x.c00() - delta[0]);
        for (i, v) in x.data_mut().iter_mut().enumerate() {
            *v -= delta[i + 1];
        }
    }
    unreachable!()
}

/// Newton on `f` alone with `c₀₀` frozen (the validation-side system).
pub fn newton_fixed_c00(
    p: &Params,
    guess: SymCoeffs<f64>,
    cfg: &NewtonCfg,
) -> Result<(SymCoeffs<f64>, Diagnostics), SolveError> {
    let t = p.trunc();
    assert_eq!(guess.trunc(), t);
    let n = t.len();
    let mut x = guess;
    for it in 0..=cfg.max_iter {
        let ev = Evaluated::new(&x, t);
        let f = residual_with(&ev, &x, p, t);
        let r = DVector::from_vec(f);
        let rinf = r.amax();
        if rinf < cfg.tol_at(&x) {
            return Ok((
                x,
                Diagnostics {
                    iterations: it,
                    residual_inf: rinf,
                },
            ));
        }
        if it == cfg.max_iter || !rinf.is_finite() {
            return Err(SolveError::NoConvergence {
                iterations: it,
                residual: rinf,
            });
        }
        let block = jacobian_block(&x, p, t);
        let jac = DMatrix::from_row_slice(n, n, &block);
        let delta = jac.lu().solve(&r).ok_or(SolveError::SingularJacobian)?;
        for (i, v) in x.data_mut().iter_mut().enumerate() {
            *v -= delta[i];
        }
    }
    unreachable!()
}

/// Single-mode initial guess near a bifurcation from the trivial state.
///
/// With `c₀₀ = 0` the leading-order balance of `f_mode` against the
/// quadratic feedback through the doubled modes gives the amplitude
/// `b² = μ_mode / (2/μ_{2·mode} [+ 4/μ_{(0,2k₂)} if k₁>0])`; the doubled
/// modes are seeded at their forced values. A heuristic, validated only by
/// whether Newton subsequently converges.
pub fn seed_branch(mode: MultiIndex, p: &Params, amplitude: Option<f64>) -> SymCoeffs<f64> {
    assert!(mode.in_quarter(), "seed mode must lie in Z²₊");
    let t = p.trunc();
    let mu_at = |k: MultiIndex| crate::problem::mu_unchecked::<f64>(k, p);
    let double = MultiIndex::new(2 * mode.k1, 2 * mode.k2);
    let vertical = MultiIndex::new(0, 2 * mode.k2);
    let amp = amplitude.unwrap_or_else(|| {
        let mut denom = 2.0 / mu_at(double);
        if mode.k1 > 0 {
            denom += 4.0 / mu_at(vertical);
        }
        let b2 = mu_at(mode) / denom;
        if b2 > 0.0 {
            b2.sqrt()
        } else {
            0.1
        }
    });
    let mut x = SymCoeffs::zeros(t);
    if amp == 0.0 {
        return x;
    }
    x.set(mode, amp);
    if t.contains(double) {
        x.set(double, amp * amp / mu_at(double));
    }
    if mode.k1 > 0 && t.contains(vertical) {
        x.set(vertical, 2.0 * amp * amp / mu_at(vertical));
    }
    x
}

/// One converged point of a solution branch.
#[derive(Clone, Debug)]
pub struct BranchEntry {
    pub params: Params,
    pub x: SymCoeffs<f64>,
    pub e_target: f64,
    pub residual_inf: f64,
    pub norm_nu: f64,
    pub energy: f64,
}

impl BranchEntry {
    pub fn from_converged(
        params: Params,
        x: SymCoeffs<f64>,
        e_target: f64,
        diag: &Diagnostics,
    ) -> BranchEntry {
        let norm_nu = x.norm_nu(params.nu);
        let energy = crate::problem::energy(&x, &params);
        BranchEntry {
            params,
            x,
            e_target,
            residual_inf: diag.residual_inf,
            norm_nu,
            energy,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Branch {
    pub entries: Vec<BranchEntry>,
}

#[derive(Clone, Copy, Debug)]
pub struct ContinueCfg {
    pub dlambda: f64,
    pub dlambda_min: f64,
    pub newton: NewtonCfg,
    /// Converged points with `max|x_k|` at or below this are treated as a
    /// collapse onto the trivial family and rejected (0 disables).
    pub nontrivial_floor: f64,
}

impl Default for ContinueCfg {
    fn default() -> Self {
        ContinueCfg {
            dlambda: 5e-3,
            dlambda_min: 1e-7,
            newton: NewtonCfg::default(),
            nontrivial_floor: 1e-6,
        }
    }
}

/// Continuation failure carrying whatever prefix of the branch was computed.
#[derive(Debug, Error)]
#[error("{source}")]
pub struct ContinueFailure {
    pub partial: Branch,
    pub source: SolveError,
}

/// Natural continuation in λ: fixed-parameter steps with the previous
/// solution as predictor and `E_target` held at the starting entry's value.
/// Steps halve on failure down to `dlambda_min` and re-double after repeated
/// successes.
pub fn continue_branch(
    start: BranchEntry,
    lambda_end: f64,
    cfg: &ContinueCfg,
) -> Result<Branch, ContinueFailure> {
    let e_target = start.e_target;
    let dir = (lambda_end - start.params.lambda).signum();
    let mut branch = Branch {
        entries: vec![start],
    };
    if dir == 0.0 || branch.entries[0].params.lambda == lambda_end {
        return Ok(branch);
    }
    let mut step = cfg.dlambda.abs().max(cfg.dlambda_min);
    let mut streak = 0usize;
    loop {
        let cur = branch.entries.last().unwrap();
        if cur.params.lambda == lambda_end {
            return Ok(branch);
        }
        let mut lambda_next = cur.params.lambda + dir * step;
        if (lambda_end - lambda_next) * dir <= 0.0 {
            lambda_next = lambda_end;
        }
        let params = Params {
            lambda: lambda_next,
            ..cur.params
        };
        let sys = AugmentedSystem { params, e_target };
        let attempt = newton_augmented(&sys, cur.x.clone(), &cfg.newton).and_then(|(x, diag)| {
            if cfg.nontrivial_floor > 0.0 && x.max_abs() <= cfg.nontrivial_floor {
                Err(SolveError::NoConvergence {
                    iterations: diag.iterations,
                    residual: diag.residual_inf,
                })
            } else {
                Ok((x, diag))
            }
        });
        match attempt {
            Ok((x, diag)) => {
                branch
                    .entries
                    .push(BranchEntry::from_converged(params, x, e_target, &diag));
                streak += 1;
                if streak >= 3 && step < cfg.dlambda.abs() {
                    step = (2.0 * step).min(cfg.dlambda.abs());
                    streak = 0;
                }
            }
            Err(_) => {
                streak = 0;
                step *= 0.5;
                if step < cfg.dlambda_min {
                    return Err(ContinueFailure {
                        source: SolveError::StepUnderflow {
                            lambda: cur.params.lambda,
                            step,
                        },
                        partial: branch,
                    });
                }
            }
        }
    }
}

/// Dense approximate inverse `A^(m) ≈ J⁻¹`. Quality is certified later by
/// the Z₀ bound, never assumed here.
pub fn approx_inverse(j: &DMatrix<f64>) -> Result<DMatrix<f64>, SolveError> {
    j.clone()
        .lu()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or(SolveError::SingularJacobian)
}

pub const MANIFEST_HEADER: &str = "boussinesq branch manifest v1";

/// Write the branch manifest: one line per solution file with its λ, energy,
/// and weighted norm.
pub fn write_manifest(path: &Path, rows: &[(f64, f64, f64, String)]) -> Result<(), FileError> {
    let mut s = String::new();
    let _ = writeln!(s, "{MANIFEST_HEADER}");
    let _ = writeln!(s, "count = {}", rows.len());
    let _ = writeln!(s, "# lambda energy norm_nu path");
    for (lambda, energy, norm, file) in rows {
        let _ = writeln!(s, "{lambda} {energy} {norm} {file}");
    }
    std::fs::write(path, s).map_err(FileError::Io)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn params(lambda: f64, m: usize) -> Params {
        Params {
            lambda,
            l: TWO_PI,
            nu: 1.01,
            m1: m,
            m2: m,
        }
    }

    #[test]
    fn exact_constant_solution_converges_immediately() {
        let p = params(0.3, 4);
        let a = 0.25;
        let mut guess = SymCoeffs::<f64>::zeros(p.trunc());
        guess.set_c00(a);
        let sys = AugmentedSystem {
            params: p,
            e_target: a * a / 2.0 + a * a * a / 3.0,
        };
        let (x, diag) = newton_augmented(&sys, guess, &NewtonCfg::default()).unwrap();
        assert!(diag.iterations <= 1);
        assert!((x.c00() - a).abs() < 1e-13);
    }

    #[test]
    fn perturbed_constant_recovers_quadratically() {
        let p = params(0.3, 4);
        let a = 0.25;
        let mut guess = SymCoeffs::<f64>::zeros(p.trunc());
        guess.set_c00(a + 1e-3);
        guess.set(MultiIndex::new(0, 1), 1e-3);
        let sys = AugmentedSystem {
            params: p,
            e_target: a * a / 2.0 + a * a * a / 3.0,
        };
        let (x, diag) = newton_augmented(&sys, guess, &NewtonCfg::default()).unwrap();
        // quadratic convergence from an O(1e-3) defect: a couple of steps
        assert!(diag.iterations <= 4, "took {} iterations", diag.iterations);
        assert!((x.c00() - a).abs() < 1e-12);
        assert!(x.max_abs() < 1e-12);
    }

    #[test]
    fn hopeless_guess_reports_no_convergence() {
        let p = params(0.3, 4);
        let mut guess = SymCoeffs::<f64>::zeros(p.trunc());
        guess.set_c00(50.0);
        guess.set(MultiIndex::new(0, 1), 40.0);
        let sys = AugmentedSystem {
            params: p,
            e_target: 0.01,
        };
        let r = newton_augmented(
            &sys,
            guess,
            &NewtonCfg {
                tol: 1e-13,
                max_iter: 2,
            },
        );
        assert!(matches!(
            r,
            Err(SolveError::NoConvergence { .. }) | Err(SolveError::SingularJacobian)
        ));
    }

    #[test]
    fn approx_inverse_of_diagonal() {
        let n = 12;
        let j = DMatrix::<f64>::from_fn(n, n, |i, k| if i == k { (i + 1) as f64 * 0.7 } else { 0.0 });
        let inv = approx_inverse(&j).unwrap();
        for i in 0..n {
            assert!((inv[(i, i)] - 1.0 / ((i + 1) as f64 * 0.7)).abs() < 1e-14);
        }
        let residual = DMatrix::<f64>::identity(n, n) - inv * &j;
        assert!(residual.amax() < 1e-12);
    }

    #[test]
    fn approx_inverse_rejects_singular() {
        let j = DMatrix::<f64>::zeros(5, 5);
        assert!(matches!(
            approx_inverse(&j),
            Err(SolveError::SingularJacobian)
        ));
    }

    #[test]
    fn random_well_conditioned_inverse_is_tight() {
        let n = 20;
        let mut state = 0xabcdef12u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let j = DMatrix::<f64>::from_fn(n, n, |i, k| {
            if i == k {
                4.0 + next()
            } else {
                0.3 * next()
            }
        });
        let inv = approx_inverse(&j).unwrap();
        let residual = DMatrix::<f64>::identity(n, n) - inv * &j;
        assert!(residual.amax() < 1e-10);
    }

    #[test]
    fn zero_length_continuation_returns_single_entry() {
        let p = params(0.3, 4);
        let a = 0.25;
        let mut x = SymCoeffs::<f64>::zeros(p.trunc());
        x.set_c00(a);
        let entry = BranchEntry::from_converged(
            p,
            x,
            a * a / 2.0 + a * a * a / 3.0,
            &Diagnostics {
                iterations: 0,
                residual_inf: 0.0,
            },
        );
        let branch = continue_branch(
            entry,
            0.3,
            &ContinueCfg {
                nontrivial_floor: 0.0,
                ..ContinueCfg::default()
            },
        )
        .unwrap();
        assert_eq!(branch.entries.len(), 1);
    }
}
