//! The radii polynomial `p(r) = Y + (Z₀ + Z₁ - 1) r + Z₂ r²` and the
//! placement of a verified radius.

use crate::interval::Interval;

use super::{BoundSet, CertifyError};

/// Outcome of a successful negativity search.
#[derive(Clone, Copy, Debug)]
pub struct RadiiResult {
    /// Enclosure of the smaller root of `p`.
    pub r_min: Interval,
    /// Enclosure of the larger root of `p`.
    pub r_max: Interval,
    /// The validated radius: `p(r_star) < 0` holds with interval rigor.
    pub r_star: f64,
    /// The verified enclosure of `p(r_star)`; its upper endpoint is negative.
    pub p_at_r_star: Interval,
}

/// Interval evaluation of `p(r)` at a point radius.
pub fn eval_radii_poly(b: &BoundSet, r: f64) -> Interval {
    let r = Interval::point(r);
    b.y + (b.z0 + b.z1 - Interval::ONE) * r + b.z2 * r * r
}

/// Find a validated radius.
///
/// The quadratic formula gives enclosures of both roots; the radius is then
/// placed just above the smaller root (factor `1 + 1e-3`) and verified by a
/// direct interval evaluation. If the placement fails to verify, it is
/// bisected toward the vertex of the parabola, where the sign has the most
/// room. All failures collapse to `NoNegativeRadius`.
pub fn radii_polynomial(b: &BoundSet) -> Result<RadiiResult, CertifyError> {
    let one = Interval::ONE;
    let lin = b.z0 + b.z1 - one; // must be provably negative
    if lin.hi() >= 0.0 {
        return Err(CertifyError::NoNegativeRadius);
    }
    if b.z2.lo() < 0.0 || b.y.lo() < 0.0 {
        // bounds are sums of absolute values; a negative lower endpoint here
        // only widens the following arithmetic, but a genuinely negative
        // upper endpoint would be a bug upstream
        debug_assert!(b.z2.hi() >= 0.0 && b.y.hi() >= 0.0);
    }

    let four = Interval::point(4.0);
    let disc = lin * lin - four * b.z2 * b.y;
    if disc.lo() <= 0.0 {
        return Err(CertifyError::NoNegativeRadius);
    }
    let sq = disc.sqrt().map_err(|_| CertifyError::NoNegativeRadius)?;
    let neg_lin = -lin; // = 1 - Z₀ - Z₁ > 0
    let two_a = Interval::point(2.0) * b.z2;

    let (r_min, r_max) = if b.z2.lo() > 0.0 {
        let r_min = (neg_lin - sq)
            .try_div(two_a)
            .map_err(|_| CertifyError::NoNegativeRadius)?;
        let r_max = (neg_lin + sq)
            .try_div(two_a)
            .map_err(|_| CertifyError::NoNegativeRadius)?;
        // p(0) = Y ≥ 0 forces both roots nonnegative; clamp interval slack
        (
            Interval::new(r_min.lo().max(0.0), r_min.hi().max(0.0)).unwrap_or(r_min),
            r_max,
        )
    } else {
        // degenerate quadratic coefficient: linear root only
        let root = b.y.try_div(neg_lin).map_err(|_| CertifyError::NoNegativeRadius)?;
        (root, Interval::new(root.lo(), f64::MAX).expect("ordered"))
    };

    // vertex of the parabola (pure float heuristic; rigor comes from the
    // final interval evaluation)
    let vertex = if b.z2.hi() > 0.0 {
        (neg_lin.midpoint() / (2.0 * b.z2.midpoint().max(f64::MIN_POSITIVE))).max(0.0)
    } else {
        r_min.hi() * 2.0 + 1.0
    };

    let mut candidate = r_min.hi() * (1.0 + 1e-3);
    if candidate <= 0.0 {
        candidate = vertex * 1e-6;
    }
    if candidate <= 0.0 {
        return Err(CertifyError::NoNegativeRadius);
    }

    let mut p_at = eval_radii_poly(b, candidate);
    if p_at.hi() >= 0.0 {
        // walk toward the vertex until the evaluation verifies
        let mut lo = candidate;
        let mut verified = None;
        for _ in 0..120 {
            lo = 0.5 * (lo + vertex);
            let trial = eval_radii_poly(b, lo);
            if trial.hi() < 0.0 {
                verified = Some((lo, trial));
                break;
            }
        }
        match verified {
            Some((r, pr)) => {
                candidate = r;
                p_at = pr;
            }
            None => return Err(CertifyError::NoNegativeRadius),
        }
    }
    Ok(RadiiResult {
        r_min,
        r_max,
        r_star: candidate,
        p_at_r_star: p_at,
    })
}

/// C⁰ and L² error bounds for a validated radius: both equal `4 r`, by the
/// comparison between the symmetrized full-lattice norm and the quarter
/// norm. Upper endpoints of the interval product are returned.
pub fn error_bounds(r_star: f64) -> (f64, f64) {
    let b = (Interval::point(4.0) * Interval::point(r_star)).hi();
    (b, b)
}
