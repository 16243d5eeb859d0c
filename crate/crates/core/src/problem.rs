//! The Boussinesq zero-finding map.
//!
//! In Fourier space the orbit equation becomes `f_k(x) = μ_k x_k - (c²(x))_k`
//! for `k ∈ Z²₊`, with the linear symbol
//! `μ_k = (L²/4π²)(k₁²/k₂²) + 4π²λk₂² - 1` and `c(x) = c₀₀ + sym(x)`. This
//! module evaluates f, its Jacobian entries `∂f_k/∂x_j = μ_k δ_{k,j} - 2C_{k,j}`,
//! and the conserved energy used to close the otherwise underdetermined
//! numerical system. All of it is generic over the scalar kind.

use rayon::prelude::*;
use thiserror::Error;

use crate::space::{
    alpha_conv_row0, conv_even, conv_row0, Coeff, MultiIndex, Params, QuarterGrid, SymCoeffs,
    Trunc,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("domain error: {0}")]
    Domain(&'static str),
}

/// The linear symbol `μ_k(L, λ)`. Fails for `k₂ = 0` where the symbol is not
/// defined (those modes carry no equation).
pub fn mu<S: Coeff>(k: MultiIndex, p: &Params) -> Result<S, ProblemError> {
    if k.k2 == 0 {
        return Err(ProblemError::Domain("mu is undefined at k2 = 0"));
    }
    Ok(mu_unchecked(k, p))
}

/// `μ_k` without the `k₂ ≠ 0` check; callers iterate index sets that never
/// produce `k₂ = 0`.
pub fn mu_unchecked<S: Coeff>(k: MultiIndex, p: &Params) -> S {
    debug_assert!(k.k2 != 0);
    let pi = S::pi();
    let four_pi_sq = S::from_f64(4.0) * pi * pi;
    let l = S::from_f64(p.l);
    let lam = S::from_f64(p.lambda);
    // squares of lattice indices are exact in f64 at every size used here
    let k1sq = S::from_f64((k.k1 * k.k1) as f64);
    let k2sq = S::from_f64((k.k2 * k.k2) as f64);
    (l * l).div_val(four_pi_sq) * k1sq.div_val(k2sq) + four_pi_sq * lam * k2sq
        - S::from_f64(1.0)
}

/// Shared per-iterate data: the symmetrized sequence and its square.
pub struct Evaluated<S> {
    pub c: QuarterGrid<S>,
    pub c2: QuarterGrid<S>,
}

impl<S: Coeff> Evaluated<S> {
    /// Evaluate `c(x)` and `c²(x)` on the output box covering `range`.
    pub fn new(x: &SymCoeffs<S>, range: Trunc) -> Evaluated<S> {
        let c = QuarterGrid::from_c(x);
        let t = x.trunc();
        let full = (2 * t.m1 - 1, 2 * t.m2 - 1);
        let out1 = range.m1.min(full.0).max(1);
        let out2 = range.m2.min(full.1).max(1);
        let c2 = conv_even(&c, &c, out1, out2);
        Evaluated { c, c2 }
    }

    /// Evaluate with the full product support `F_{2m-1}`.
    pub fn full(x: &SymCoeffs<S>) -> Evaluated<S> {
        let t = x.trunc();
        Evaluated::new(x, Trunc::new(2 * t.m1 - 1, 2 * t.m2 - 1))
    }
}

/// Residual `f_k(x)` for every `k` in `range`, in the layout order of
/// `range`. Beyond `F_{2m-1}` the residual vanishes identically (support
/// arithmetic), so nothing is ever evaluated there.
pub fn residual<S: Coeff>(x: &SymCoeffs<S>, p: &Params, range: Trunc) -> Vec<S> {
    let ev = Evaluated::new(x, range);
    residual_with(&ev, x, p, range)
}

/// Residual from precomputed convolution parts. The parts must cover
/// `range` (up to the full product support, beyond which `c²` is truly zero).
pub fn residual_with<S: Coeff>(
    ev: &Evaluated<S>,
    x: &SymCoeffs<S>,
    p: &Params,
    range: Trunc,
) -> Vec<S> {
    let t = x.trunc();
    debug_assert!(ev.c2.n1() >= range.m1.min(2 * t.m1 - 1));
    debug_assert!(ev.c2.n2() >= range.m2.min(2 * t.m2 - 1));
    range
        .iter()
        .map(|k| mu_unchecked::<S>(k, p) * x.get(k) - ev.c2.get_signed(k.k1, k.k2))
        .collect()
}

/// The symmetrized convolution kernel `C_{k,j}(x)` of the Jacobian: the
/// derivative of `(c²(x))_k` with respect to `x_j` is `2 C_{k,j}(x)`. All
/// lookups resolve through `c(x)`, so the mean mode contributes on the
/// diagonal.
#[inline]
pub fn c_kj<S: Coeff>(x: &SymCoeffs<S>, k: MultiIndex, j: MultiIndex) -> S {
    let mut s = x.c_at(k.k1 - j.k1, k.k2 - j.k2) + x.c_at(k.k1 + j.k1, k.k2 + j.k2);
    if j.k1 > 0 {
        s = s + x.c_at(k.k1 - j.k1, k.k2 + j.k2) + x.c_at(k.k1 + j.k1, k.k2 - j.k2);
    }
    s
}

/// One Jacobian entry `∂f_k/∂x_j (x) = μ_k δ_{k,j} - 2 C_{k,j}(x)`.
pub fn jacobian_entry<S: Coeff>(x: &SymCoeffs<S>, k: MultiIndex, j: MultiIndex, p: &Params) -> S {
    let mut v = -(S::from_f64(2.0) * c_kj(x, k, j));
    if k == j {
        v = v + mu_unchecked::<S>(k, p);
    }
    v
}

/// Dense Jacobian block over `trunc × trunc`, row-major in the layout order
/// of `trunc` (rows are equations k, columns unknowns j).
pub fn jacobian_block<S: Coeff>(x: &SymCoeffs<S>, p: &Params, trunc: Trunc) -> Vec<S> {
    let n = trunc.len();
    let mut out = vec![S::zero(); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(row, slot)| {
        let k = trunc.at(row);
        for (col, val) in slot.iter_mut().enumerate() {
            let j = trunc.at(col);
            *val = jacobian_entry(x, k, j, p);
        }
    });
    out
}

/// The conserved energy
/// `E = Σ_{k₂=0} [2λπ²(α*α)_k + ½(c*c)_k + ⅓(c*c*c)_k]` with `α_k = c_k k₂`.
/// The `k₁` sum is finite by support arithmetic (`|k₁| ≤ 3(m₁-1)`).
pub fn energy<S: Coeff>(x: &SymCoeffs<S>, p: &Params) -> S {
    let ev = Evaluated::full(x);
    energy_with(&ev, p)
}

/// Energy from precomputed convolution parts (which must cover the full
/// support, as produced by [`Evaluated::full`]).
pub fn energy_with<S: Coeff>(ev: &Evaluated<S>, p: &Params) -> S {
    let aa0 = alpha_conv_row0(&ev.c);
    let ccc0 = conv_row0(&ev.c2, &ev.c);
    let pi = S::pi();
    let w_alpha = S::from_f64(2.0) * S::from_f64(p.lambda) * pi * pi;
    let half = S::from_f64(0.5);
    let third = S::from_f64(1.0).div_val(S::from_f64(3.0));

    let term = |k1: usize| -> S {
        let mut t = S::zero();
        if k1 < aa0.len() {
            t = t + w_alpha * aa0[k1];
        }
        t = t + half * ev.c2.get(k1, 0);
        if k1 < ccc0.len() {
            t = t + third * ccc0[k1];
        }
        t
    };

    // sum over k₁ ∈ Z of an even sequence
    let reach = ccc0.len().max(aa0.len());
    let mut e = term(0);
    let two = S::from_f64(2.0);
    for k1 in 1..reach {
        e = e + two * term(k1);
    }
    e
}

/// Gradient of the energy with respect to `(c₀₀, x)`, used by the augmented
/// Newton system. Exploits translation invariance of the `k₂ = 0` row sums:
/// with `S_c(k₂) = Σ_{t∈Z} c_{(t,k₂)}` and likewise `S_{c²}`,
///
/// `∂E/∂c₀₀ = c₀₀ + S_{c²}(0)` and
/// `∂E/∂x_j = mult(j) · [(1 - 4λπ²j₂²) S_c(j₂) + S_{c²}(j₂)]`
///
/// where `mult(j)` counts the signed images of `j` (2 if `j₁ = 0`, else 4).
pub fn energy_gradient(x: &SymCoeffs<f64>, p: &Params) -> (f64, Vec<f64>) {
    let ev = Evaluated::full(x);
    energy_gradient_with(&ev, x, p)
}

pub fn energy_gradient_with(
    ev: &Evaluated<f64>,
    x: &SymCoeffs<f64>,
    p: &Params,
) -> (f64, Vec<f64>) {
    let t = x.trunc();
    let row_sum = |g: &QuarterGrid<f64>, k2: usize| -> f64 {
        let mut s = g.get(0, k2);
        for k1 in 1..g.n1() {
            s += 2.0 * g.get(k1, k2);
        }
        s
    };
    let s_c: Vec<f64> = (0..t.m2).map(|k2| row_sum(&ev.c, k2)).collect();
    let s_c2: Vec<f64> = (0..2 * t.m2 - 1).map(|k2| row_sum(&ev.c2, k2)).collect();

    let d_c00 = x.c00() + s_c2[0];
    let four_pi_sq_lam = 4.0 * std::f64::consts::PI.powi(2) * p.lambda;
    let grad = t
        .iter()
        .map(|j| {
            let mult = if j.k1 == 0 { 2.0 } else { 4.0 };
            let j2 = j.k2 as usize;
            let j2sq = (j.k2 * j.k2) as f64;
            mult * ((1.0 - four_pi_sq_lam * j2sq) * s_c[j2] + s_c2[j2])
        })
        .collect();
    (d_c00, grad)
}

/// Derivative of `f_k` in the `c₀₀` direction: `-2 c(x)_k`, which on the
/// quarter lattice is just `-2 x_k`.
pub fn df_dc00<S: Coeff>(x: &SymCoeffs<S>, k: MultiIndex) -> S {
    -(S::from_f64(2.0) * x.get(k))
}
