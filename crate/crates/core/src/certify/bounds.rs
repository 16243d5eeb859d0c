//! The four radii-polynomial bounds, each a finite interval computation.
//!
//! Index-set bookkeeping follows the support arithmetic of the quadratic
//! nonlinearity: `f(x̄)` vanishes identically outside `F_{2m-1}`; the
//! Jacobian kernel columns `C̄_{·,q}` vanish outside `F_{2m}` for `q ∈ F_m`
//! and outside `F_{3m}` for `q ∈ F_{2m}`; and for `q` beyond `F_{2m}` the
//! whole column collapses to the single tail term handled by the ring
//! reduction.

use num_traits::Zero;
use rayon::prelude::*;

use crate::interval::{mat_mul_verified, Interval, IvMatrix};
use crate::problem::{c_kj, residual_with, Evaluated};
use crate::space::{op_norm_block, MultiIndex, SymCoeffs};

use super::{CertCtx, CertifyError, TailKind, TailOperator};

/// `Y ≥ ‖A f(x̄)‖_ν`: the finite block goes through `A^(m)`, the reachable
/// tail `F_{2m-1} \ F_m` through `μ_k⁻¹`, and everything further is exactly
/// zero.
pub fn bound_y(
    xbar: &SymCoeffs<Interval>,
    a: &TailOperator,
    ctx: &CertCtx,
) -> Result<Interval, CertifyError> {
    assert_eq!(a.kind, TailKind::MuInverse);
    let t = ctx.trunc;
    let ev = Evaluated::full(xbar);
    let f_fm = residual_with(&ev, xbar, &ctx.params, t);

    let f_col = IvMatrix::from_fn(t.len(), 1, |i, _| f_fm[i]);
    let y_block = mat_mul_verified(&a.block, &f_col)?;
    let mut y = Interval::ZERO;
    for (i, k) in t.iter().enumerate() {
        y += y_block[(i, 0)].abs() * ctx.nu_pows[k.abs_sum()];
    }

    let wide = crate::space::Trunc::new(2 * t.m1 - 1, 2 * t.m2 - 1);
    for k in wide.iter_minus(t) {
        // x̄_k = 0 here, so f_k = -(c²)_k
        let fk = -ev.c2.get_signed(k.k1, k.k2);
        if fk.is_zero() {
            continue;
        }
        let w = ctx.mu.inv_mu(k)?;
        y += (w * fk).abs() * ctx.nu_pows[k.abs_sum()];
    }
    Ok(y)
}

/// `Z₀ = ‖I - A A†‖`. The product collapses to the finite blocks: on the
/// tail both operators are the mutually inverse diagonals, exactly.
pub fn bound_z0(
    a: &TailOperator,
    adag: &TailOperator,
    ctx: &CertCtx,
) -> Result<Interval, CertifyError> {
    assert_eq!(a.kind, TailKind::MuInverse);
    assert_eq!(adag.kind, TailKind::Mu);
    let g = mat_mul_verified(&a.block, &adag.block)?;
    let idx: Vec<MultiIndex> = ctx.trunc.iter().collect();
    let z0 = op_norm_block(
        |i, j| {
            let delta = if i == j { Interval::ONE } else { Interval::ZERO };
            delta - g[(i, j)]
        },
        &idx,
        &idx,
        ctx.params.nu,
    );
    Ok(z0)
}

/// `Z₁ ≥ ‖A Γ‖` where `Γ` is the Jacobian kernel with its `F_m × F_m` block
/// removed, via the three column regimes:
///
/// 1. `q ∈ F_m`: the column passes only through the diagonal tail of `A`;
///    exact finite sum over `s ∈ F_{2m} \ F_m`.
/// 2. `q ∈ F_{2m} \ F_m`: a block contribution through `A^(m)` (batched as
///    verified matrix products) plus the exact tail sum over `F_{3m} \ F_m`.
/// 3. `q ∈ I_{2m}`: the column passes only through the diagonal tail, and
///    `|C̄_{s,q}|` is bounded by the triangle inequality over the (at most
///    four) signed images of `q`. Each image contributes the same sum by
///    evenness, so
///    `B(q) ≤ 𝓑(q) = 8 Σ_{p ∈ F_m^± ∪ {0}} |μ_{p+q}⁻¹ c̄_p| ν^|p|`
///    (the `p = 0` term carries the mean mode, reached on the diagonal
///    `s = q`). The sup of `𝓑` over the whole tail is attained on the ring
///    `R₂` by ring monotonicity; every `μ` the sum touches is verified
///    positive, which is what keeps the descent order-preserving. Terms with
///    `(p+q)₂ = 0` never occur in the exact column sum and are skipped.
pub fn bound_z1(
    xbar: &SymCoeffs<Interval>,
    a: &TailOperator,
    ctx: &CertCtx,
) -> Result<Interval, CertifyError> {
    assert_eq!(a.kind, TailKind::MuInverse);
    let t = ctx.trunc;
    let two = Interval::point(2.0);

    // ring R₁ = F_{2m} \ F_m with per-row weights |μ_s⁻¹| ν^|s|
    let r1_idx: Vec<MultiIndex> = t.scaled(2).iter_minus(t).collect();
    let r1_weights: Vec<Interval> = r1_idx
        .iter()
        .map(|&s| Ok(ctx.mu.inv_mu_pos(s)? * ctx.nu_pows[s.abs_sum()]))
        .collect::<Result<_, CertifyError>>()?;

    // case 1: q ∈ F_m
    let cols_fm: Vec<MultiIndex> = t.iter().collect();
    let b1 = cols_fm
        .par_iter()
        .map(|&q| {
            let mut acc = Interval::ZERO;
            for (s, w) in r1_idx.iter().zip(&r1_weights) {
                let cbar = c_kj(xbar, *s, q);
                if cbar.is_zero() {
                    continue;
                }
                acc += cbar.abs() * *w;
            }
            two * acc * ctx.inv_nu_pows[q.abs_sum()]
        })
        .reduce(|| Interval::ZERO, Interval::max);

    // case 2: q ∈ F_{2m} \ F_m, block part batched through A^(m)
    let tail_idx: Vec<MultiIndex> = t.scaled(3).iter_minus(t).collect();
    let tail_weights: Vec<Option<Interval>> = tail_idx
        .iter()
        .map(|&s| {
            ctx.mu
                .inv_mu_pos(s)
                .ok()
                .map(|inv| inv * ctx.nu_pows[s.abs_sum()])
        })
        .collect();
    let fm_weights: Vec<Interval> = cols_fm
        .iter()
        .map(|k| ctx.nu_pows[k.abs_sum()])
        .collect();

    let mut b2 = Interval::ZERO;
    const CHUNK: usize = 1536;
    for chunk in r1_idx.chunks(CHUNK) {
        let cbar_block = IvMatrix::from_fn(t.len(), chunk.len(), |i, c| {
            c_kj(xbar, cols_fm[i], chunk[c])
        });
        let g = mat_mul_verified(&a.block, &cbar_block)?;
        let chunk_max = chunk
            .par_iter()
            .enumerate()
            .map(|(c, &q)| -> Result<Interval, CertifyError> {
                let mut s1 = Interval::ZERO;
                for i in 0..t.len() {
                    let v = g[(i, c)];
                    if v.is_zero() {
                        continue;
                    }
                    s1 += v.abs() * fm_weights[i];
                }
                let mut s2 = Interval::ZERO;
                for (s, w) in tail_idx.iter().zip(&tail_weights) {
                    let cbar = c_kj(xbar, *s, q);
                    if cbar.is_zero() {
                        continue;
                    }
                    let w = w.ok_or(CertifyError::MuSign { k: *s })?;
                    s2 += cbar.abs() * w;
                }
                Ok(two * (s1 + s2) * ctx.inv_nu_pows[q.abs_sum()])
            })
            .try_reduce(|| Interval::ZERO, |x, y| Ok(x.max(y)))?;
        b2 = b2.max(chunk_max);
    }

    // case 3: q ∈ R₂ dominates the rest of the tail
    let mut signed_support: Vec<(i64, i64, Interval)> = t
        .iter_signed()
        .filter_map(|p| {
            let v = xbar.sym_at(p.k1, p.k2).abs();
            if v.is_zero() {
                None
            } else {
                Some((p.k1, p.k2, v * ctx.nu_pows[p.abs_sum()]))
            }
        })
        .collect();
    if !xbar.c00().is_zero() {
        signed_support.push((0, 0, xbar.c00().abs()));
    }
    let eight = Interval::point(8.0);
    let r2_idx: Vec<MultiIndex> = t.ring(2).collect();
    let b3 = r2_idx
        .par_iter()
        .map(|&q| -> Result<Interval, CertifyError> {
            let mut acc = Interval::ZERO;
            for &(p1, p2, ref w) in &signed_support {
                let s = MultiIndex::new(p1 + q.k1, p2 + q.k2);
                if s.k2 == 0 {
                    continue;
                }
                acc += ctx.mu.inv_mu_pos(s)? * *w;
            }
            Ok(eight * acc)
        })
        .try_reduce(|| Interval::ZERO, |x, y| Ok(x.max(y)))?;

    Ok(b1.max(b2).max(b3))
}

/// `Z₂ = 32 · max{‖A^(m)‖, max_{k ∈ R₁} μ_k⁻¹}`: the quadratic term's
/// Lipschitz constant, with the tail sup reduced to the first ring by ring
/// monotonicity and the factor 32 = 2·16 from the norm bound on symmetrized
/// convolutions.
pub fn bound_z2(a: &TailOperator, ctx: &CertCtx) -> Result<Interval, CertifyError> {
    assert_eq!(a.kind, TailKind::MuInverse);
    let idx: Vec<MultiIndex> = ctx.trunc.iter().collect();
    let block_norm = op_norm_block(|i, j| a.block[(i, j)], &idx, &idx, ctx.params.nu);
    let mut tail = Interval::ZERO;
    for k in ctx.trunc.ring(1) {
        tail = tail.max(ctx.mu.inv_mu_pos(k)?);
    }
    Ok(Interval::point(32.0) * block_norm.max(tail))
}
