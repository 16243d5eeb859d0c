//! The rigorous core: existence certification by the radii polynomial
//! approach, entirely in outward-rounded interval arithmetic.
//!
//! Around a numerical orbit `x̄` (mean mode frozen) the Newton-like operator
//! `T(x) = x - A f(x)` is shown to contract a ball `B_r(x̄)` by producing
//! certified bounds
//!
//! - `Y  ≥ ‖A f(x̄)‖_ν`                                   (defect),
//! - `Z₀ ≥ ‖I - A A†‖`                                    (inverse quality),
//! - `Z₁ + Z₂ r ≥ sup ‖A (Df(x̄ + rv) - A†) u‖_ν`          (Lipschitz part),
//!
//! and checking that `p(r) = Y + (Z₀ + Z₁ - 1) r + Z₂ r²` is provably
//! negative at a verified radius. `A` is the numerical inverse block padded
//! with the diagonal tail `μ_k⁻¹`; `A†` the Jacobian block padded with
//! `μ_k`. A successful check plus injectivity of `A` yields a unique true
//! orbit within distance `r` of `x̄`, with C⁰ and L² errors at most `4r`.

mod bounds;
mod certificate;
mod radii;

pub use bounds::{bound_y, bound_z0, bound_z1, bound_z2};
pub use certificate::{
    certificate_from_str, certificate_to_string, read_certificate, verify_certificate,
    write_certificate, Certificate, VerifyError, CERTIFICATE_HEADER,
};
pub use radii::{error_bounds, eval_radii_poly, radii_polynomial, RadiiResult};

use thiserror::Error;

use crate::interval::{pi_interval, Interval, IntervalError, IvMatrix};
use crate::problem::jacobian_block;
use crate::solver::{approx_inverse, SolveError};
use crate::space::{nu_powers, MultiIndex, Params, SymCoeffs, Trunc};

#[derive(Debug, Error)]
pub enum CertifyError {
    /// The truncation condition `m₂ ≥ max{m₁, L/(2π²√λ)}` could not be
    /// verified; every tail lemma depends on it.
    #[error("truncation condition m2 >= max(m1, L/(2 pi^2 sqrt(lambda))) not verifiable")]
    CondM,
    /// Injectivity of the operator A could not be verified.
    #[error("injectivity of A not verifiable (Z0 = {z0})")]
    Injectivity { z0: f64 },
    /// The sign of `μ_k` at a tail index could not be verified.
    #[error("sign of mu at {k:?} not verifiable")]
    MuSign { k: MultiIndex },
    /// All bounds were computed but no radius with `p(r) < 0` verifies.
    #[error("radii polynomial admits no verifiable negative value")]
    NoNegativeRadius,
    /// The numerical Jacobian block could not be inverted at all.
    #[error("approximate inverse unavailable: {0}")]
    ApproxInverse(#[from] SolveError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

impl CertifyError {
    /// Process exit code classification: 2 = bounds computed but no negative
    /// radius, 3 = precondition failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CertifyError::NoNegativeRadius => 2,
            CertifyError::CondM
            | CertifyError::Injectivity { .. }
            | CertifyError::MuSign { .. }
            | CertifyError::ApproxInverse(_) => 3,
            CertifyError::Interval(_) => 1,
        }
    }
}

/// Which diagonal the tail of a block-plus-diagonal operator carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    /// `μ_k` on `I_m` (the approximate Jacobian A†).
    Mu,
    /// `μ_k⁻¹` on `I_m` (the approximate inverse A).
    MuInverse,
}

/// A linear operator that is a finite block on `F_m × F_m` plus a diagonal
/// tail on `I_m`.
#[derive(Clone, Debug)]
pub struct TailOperator {
    pub block: IvMatrix,
    pub trunc: Trunc,
    pub kind: TailKind,
}

impl TailOperator {
    pub fn new(block: IvMatrix, trunc: Trunc, kind: TailKind) -> TailOperator {
        assert_eq!(block.rows(), trunc.len());
        assert_eq!(block.cols(), trunc.len());
        TailOperator { block, trunc, kind }
    }
}

/// The four certified quantities; the upper endpoints are the bounds.
#[derive(Clone, Copy, Debug)]
pub struct BoundSet {
    pub y: Interval,
    pub z0: Interval,
    pub z1: Interval,
    pub z2: Interval,
}

/// Interval values of `μ` over the box `|k₁| ≤ n1, 1 ≤ |k₂| ≤ n2`, with
/// positivity-checked reciprocals cached. `μ` is even in both components.
pub struct MuBox {
    n1: usize,
    n2: usize,
    raw: Vec<Interval>,
    inv_pos: Vec<Option<Interval>>,
}

impl MuBox {
    pub fn build(p: &Params, n1: usize, n2: usize) -> MuBox {
        let mut raw = Vec::with_capacity((n1 + 1) * n2);
        let mut inv_pos = Vec::with_capacity((n1 + 1) * n2);
        for k1 in 0..=n1 {
            for k2 in 1..=n2 {
                let mu = crate::problem::mu_unchecked::<Interval>(
                    MultiIndex::new(k1 as i64, k2 as i64),
                    p,
                );
                raw.push(mu);
                inv_pos.push(if mu.is_strictly_positive() {
                    Some(mu.recip().expect("positive interval is invertible"))
                } else {
                    None
                });
            }
        }
        MuBox {
            n1,
            n2,
            raw,
            inv_pos,
        }
    }

    #[inline]
    fn slot(&self, k: MultiIndex) -> usize {
        let a1 = k.k1.unsigned_abs() as usize;
        let a2 = k.k2.unsigned_abs() as usize;
        debug_assert!(a1 <= self.n1 && 1 <= a2 && a2 <= self.n2, "mu box too small");
        a1 * self.n2 + (a2 - 1)
    }

    #[inline]
    pub fn mu(&self, k: MultiIndex) -> Interval {
        self.raw[self.slot(k)]
    }

    /// `μ_k⁻¹` with verified positivity (required wherever a tail lemma's
    /// monotonicity argument is in play).
    #[inline]
    pub fn inv_mu_pos(&self, k: MultiIndex) -> Result<Interval, CertifyError> {
        self.inv_pos[self.slot(k)].ok_or(CertifyError::MuSign { k })
    }

    /// `μ_k⁻¹` requiring only a verified sign (the Y tail needs no
    /// monotonicity).
    #[inline]
    pub fn inv_mu(&self, k: MultiIndex) -> Result<Interval, CertifyError> {
        let mu = self.raw[self.slot(k)];
        mu.recip().map_err(|_| CertifyError::MuSign { k })
    }
}

/// Precomputed certification context: weights and symbol values shared by
/// all four bounds.
pub struct CertCtx {
    pub params: Params,
    pub trunc: Trunc,
    pub nu_pows: Vec<Interval>,
    pub inv_nu_pows: Vec<Interval>,
    pub mu: MuBox,
}

impl CertCtx {
    pub fn new(params: Params) -> CertCtx {
        let trunc = params.trunc();
        let max_abs = 4 * (trunc.m1 + trunc.m2);
        let nu_pows = nu_powers::<Interval>(params.nu, max_abs);
        let inv_nu_pows = nu_pows
            .iter()
            .map(|w| w.recip().expect("nu powers are positive"))
            .collect();
        let mu = MuBox::build(&params, 4 * trunc.m1, 4 * trunc.m2);
        CertCtx {
            params,
            trunc,
            nu_pows,
            inv_nu_pows,
            mu,
        }
    }
}

/// Interval verification of the truncation condition
/// `m₂ ≥ max{m₁, L/(2π²√λ)}`. Returns false when the inequality cannot be
/// proven.
pub fn check_cond_m(p: &Params) -> bool {
    if p.validate().is_err() || p.m2 < p.m1 {
        return false;
    }
    let pi = pi_interval();
    let sqrt_lambda = match Interval::point(p.lambda).sqrt() {
        Ok(s) => s,
        Err(_) => return false,
    };
    let denom = Interval::point(2.0) * pi * pi * sqrt_lambda;
    match Interval::point(p.l).try_div(denom) {
        Ok(bound) => bound.hi() <= p.m2 as f64,
        Err(_) => false,
    }
}

/// Injectivity of `A`: the finite block is injective when `Z₀ < 1` (then
/// `A^(m)·A†` has a verified inverse, so the square block `A^(m)` is onto,
/// hence injective), and the diagonal tail has no zero entry when `μ > 0` is
/// verified on the ring `R₁` (ring monotonicity propagates positivity to all
/// of `I_m` under the truncation condition).
pub fn verify_a_injective(z0: &Interval, ctx: &CertCtx) -> bool {
    z0.hi() < 1.0 && min_mu_positive_on_r1(ctx)
}

pub(crate) fn min_mu_positive_on_r1(ctx: &CertCtx) -> bool {
    ctx.trunc
        .ring(1)
        .all(|k| ctx.mu.mu(k).is_strictly_positive())
}

/// Everything a successful certification produces.
#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub bounds: BoundSet,
    pub radii: RadiiResult,
    pub c0_error: f64,
    pub l2_error: f64,
}

/// Run the whole contraction argument for a frozen-`c₀₀` candidate `x̄`.
///
/// Preconditions are verified, never assumed: the truncation condition, the
/// positivity of every tail symbol the lemmas touch, and the injectivity of
/// `A`. Any failure aborts with no certificate.
pub fn certify(p: &Params, xbar: &SymCoeffs<f64>) -> Result<CertifyOutcome, CertifyError> {
    if !check_cond_m(p) {
        return Err(CertifyError::CondM);
    }
    let ctx = CertCtx::new(*p);
    if !min_mu_positive_on_r1(&ctx) {
        let k = ctx
            .trunc
            .ring(1)
            .find(|&k| !ctx.mu.mu(k).is_strictly_positive())
            .expect("a failing ring index exists");
        return Err(CertifyError::MuSign { k });
    }

    let trunc = p.trunc();
    assert_eq!(xbar.trunc(), trunc, "candidate truncation must match params");

    // numerical approximate inverse (floats, promoted to point intervals)
    let n = trunc.len();
    let jac_float = jacobian_block::<f64>(xbar, p, trunc);
    let a_float = approx_inverse(&nalgebra::DMatrix::from_row_slice(n, n, &jac_float))?;
    let a_rows: Vec<f64> = a_float.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
    let a = TailOperator::new(
        IvMatrix::from_points(n, n, &a_rows),
        trunc,
        TailKind::MuInverse,
    );

    // interval Jacobian block (exact data, outward rounded arithmetic)
    let xbar_iv = xbar.to_intervals();
    let dblock = jacobian_block::<Interval>(&xbar_iv, p, trunc);
    let adag = TailOperator::new(
        IvMatrix::from_fn(n, n, |i, j| dblock[i * n + j]),
        trunc,
        TailKind::Mu,
    );

    let y = bound_y(&xbar_iv, &a, &ctx)?;
    let z0 = bound_z0(&a, &adag, &ctx)?;
    let z1 = bound_z1(&xbar_iv, &a, &ctx)?;
    let z2 = bound_z2(&a, &ctx)?;
    let bounds = BoundSet { y, z0, z1, z2 };

    if !verify_a_injective(&z0, &ctx) {
        return Err(CertifyError::Injectivity { z0: z0.hi() });
    }

    let radii = radii_polynomial(&bounds)?;
    let (c0_error, l2_error) = error_bounds(radii.r_star);
    Ok(CertifyOutcome {
        bounds,
        radii,
        c0_error,
        l2_error,
    })
}
