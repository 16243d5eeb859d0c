//! The symmetry-reduced sequence space.
//!
//! Independent Fourier modes of an even/even space-time periodic function
//! live on the quarter lattice `Z²₊ = {(k₁,k₂) : k₁ ≥ 0, k₂ > 0}` together
//! with the mean mode `c₀₀`; the remaining modes are determined by
//! `c_{±k₁,±k₂} = c_k` and `c_{k₁,0} = 0` for `k₁ ≠ 0`. This module provides
//! the finite truncations `F_m` and their tails, rings, and signed variants;
//! the coefficient container; the weighted ℓ¹ norm `‖x‖_ν = Σ |x_k| ν^|k|`;
//! convolution products of symmetrized sequences; and the weighted operator
//! norm of finite blocks. Everything is generic over the scalar kind so the
//! same code path serves plain floats and verified intervals.

pub mod files;

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::interval::{pi_interval, Interval};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Scalar kinds the sequence machinery is generic over: `f64` for numerics,
/// [`Interval`] for certified computation.
pub trait Coeff:
    Copy
    + PartialEq
    + Send
    + Sync
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Enclosure of the absolute value.
    fn abs_val(self) -> Self;
    /// Division. For intervals the caller must guarantee `0 ∉ rhs`;
    /// violating that is a bug and panics.
    fn div_val(self, rhs: Self) -> Self;
    /// Enclosure of π (the nearest float for `f64`).
    fn pi() -> Self;
    /// Upper bound of the value as a float (the value itself for `f64`).
    fn upper(self) -> f64;
    /// Enclosure of `max(a, b)`.
    fn max_of(a: Self, b: Self) -> Self;
}

impl Coeff for f64 {
    #[inline]
    fn from_f64(v: f64) -> f64 {
        v
    }
    #[inline]
    fn abs_val(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn div_val(self, rhs: f64) -> f64 {
        self / rhs
    }
    #[inline]
    fn pi() -> f64 {
        std::f64::consts::PI
    }
    #[inline]
    fn upper(self) -> f64 {
        self
    }
    #[inline]
    fn max_of(a: f64, b: f64) -> f64 {
        a.max(b)
    }
}

impl Coeff for Interval {
    #[inline]
    fn from_f64(v: f64) -> Interval {
        Interval::point(v)
    }
    #[inline]
    fn abs_val(self) -> Interval {
        self.abs()
    }
    #[inline]
    fn div_val(self, rhs: Interval) -> Interval {
        self.try_div(rhs)
            .expect("interval division by an interval containing zero")
    }
    #[inline]
    fn pi() -> Interval {
        pi_interval()
    }
    #[inline]
    fn upper(self) -> f64 {
        self.hi()
    }
    #[inline]
    fn max_of(a: Interval, b: Interval) -> Interval {
        a.max(b)
    }
}

/// A lattice index `(k₁, k₂)`. Signed so the same type serves the quarter
/// lattice and full-lattice contexts.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub k1: i64,
    pub k2: i64,
}

impl std::fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

impl MultiIndex {
    #[inline]
    pub fn new(k1: i64, k2: i64) -> MultiIndex {
        MultiIndex { k1, k2 }
    }

    /// `|k| = |k₁| + |k₂|`.
    #[inline]
    pub fn abs_sum(&self) -> usize {
        (self.k1.unsigned_abs() + self.k2.unsigned_abs()) as usize
    }

    #[inline]
    pub fn in_quarter(&self) -> bool {
        self.k1 >= 0 && self.k2 > 0
    }
}

/// The finite truncation `F_m = {k ∈ Z²₊ : k₁ < m₁, k₂ < m₂}` together with
/// the derived sets: the tail `I_m`, the rings `R_n = F_{(n+1)m} \ F_{nm}`,
/// and the signed box `F_m^± = {|k₁| < m₁, 0 < |k₂| < m₂}`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Trunc {
    pub m1: usize,
    pub m2: usize,
}

impl Trunc {
    pub fn new(m1: usize, m2: usize) -> Trunc {
        assert!(m1 >= 1 && m2 >= 1, "truncation sizes must be positive");
        Trunc { m1, m2 }
    }

    /// Number of quarter-lattice indices in `F_m`.
    #[inline]
    pub fn len(&self) -> usize {
        self.m1 * (self.m2 - 1)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn contains(&self, k: MultiIndex) -> bool {
        k.in_quarter() && (k.k1 as usize) < self.m1 && (k.k2 as usize) < self.m2
    }

    /// Position of `k` in the lexicographic enumeration of `F_m`.
    #[inline]
    pub fn index_of(&self, k: MultiIndex) -> Option<usize> {
        if self.contains(k) {
            Some(k.k1 as usize * (self.m2 - 1) + (k.k2 as usize - 1))
        } else {
            None
        }
    }

    /// Inverse of [`Trunc::index_of`].
    #[inline]
    pub fn at(&self, idx: usize) -> MultiIndex {
        let w = self.m2 - 1;
        MultiIndex::new((idx / w) as i64, (idx % w + 1) as i64)
    }

    /// Lexicographic enumeration of `F_m` (the layout order of every matrix
    /// and vector indexed by this truncation).
    pub fn iter(self) -> impl Iterator<Item = MultiIndex> {
        (0..self.len()).map(move |i| self.at(i))
    }

    /// `F_{nm}` (both components scaled).
    pub fn scaled(&self, n: usize) -> Trunc {
        Trunc::new(self.m1 * n, self.m2 * n)
    }

    /// Indices of this truncation not contained in `inner`.
    pub fn iter_minus(self, inner: Trunc) -> impl Iterator<Item = MultiIndex> {
        self.iter().filter(move |&k| !inner.contains(k))
    }

    /// The ring `R_n = F_{(n+1)m} \ F_{nm}`.
    pub fn ring(self, n: usize) -> impl Iterator<Item = MultiIndex> {
        self.scaled(n + 1).iter_minus(self.scaled(n))
    }

    /// The signed box `F_m^±` (excludes the whole `k₂ = 0` row).
    pub fn iter_signed(self) -> impl Iterator<Item = MultiIndex> {
        let (m1, m2) = (self.m1 as i64, self.m2 as i64);
        ((1 - m1)..m1).flat_map(move |k1| {
            ((1 - m2)..m2)
                .filter(|&k2| k2 != 0)
                .map(move |k2| MultiIndex::new(k1, k2))
        })
    }

    pub fn contains_signed(&self, k: MultiIndex) -> bool {
        (k.k1.unsigned_abs() as usize) < self.m1
            && k.k2 != 0
            && (k.k2.unsigned_abs() as usize) < self.m2
    }
}

/// Problem and proof parameters: dispersion coefficient λ, temporal frequency
/// scale L (time period `2π/L`), norm decay rate ν, and the truncation m.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub lambda: f64,
    pub l: f64,
    pub nu: f64,
    pub m1: usize,
    pub m2: usize,
}

impl Params {
    pub fn validate(&self) -> Result<(), SpaceError> {
        let fail = |msg: &str| Err(SpaceError::InvalidParams(msg.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail("lambda must be positive and finite");
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return fail("L must be positive and finite");
        }
        if !(self.nu > 1.0 && self.nu.is_finite()) {
            return fail("nu must exceed 1");
        }
        if self.m1 < 1 || self.m2 < 2 {
            return fail("truncation requires m1 >= 1 and m2 >= 2");
        }
        Ok(())
    }

    pub fn trunc(&self) -> Trunc {
        Trunc::new(self.m1, self.m2)
    }

    pub fn with_trunc(mut self, m1: usize, m2: usize) -> Params {
        self.m1 = m1;
        self.m2 = m2;
        self
    }
}

/// One orbit candidate: the mean mode `c₀₀` plus finitely many quarter-lattice
/// coefficients supported on `F_m`. The even/even symmetry is implicit and
/// never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymCoeffs<S> {
    trunc: Trunc,
    c00: S,
    data: Vec<S>,
}

impl<S: Coeff> SymCoeffs<S> {
    pub fn zeros(trunc: Trunc) -> SymCoeffs<S> {
        SymCoeffs {
            trunc,
            c00: S::zero(),
            data: vec![S::zero(); trunc.len()],
        }
    }

    pub fn trunc(&self) -> Trunc {
        self.trunc
    }

    pub fn c00(&self) -> S {
        self.c00
    }

    pub fn set_c00(&mut self, v: S) {
        self.c00 = v;
    }

    /// Stored coefficient at a quarter-lattice index; zero outside `F_m`.
    #[inline]
    pub fn get(&self, k: MultiIndex) -> S {
        match self.trunc.index_of(k) {
            Some(i) => self.data[i],
            None => S::zero(),
        }
    }

    /// Panics if `k ∉ F_m`.
    pub fn set(&mut self, k: MultiIndex, v: S) {
        let i = self
            .trunc
            .index_of(k)
            .unwrap_or_else(|| panic!("index {k:?} outside the stored truncation"));
        self.data[i] = v;
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Value of `sym(x)` at any signed index: zero on the `k₂ = 0` row,
    /// `x_{|k₁|,|k₂|}` elsewhere.
    #[inline]
    pub fn sym_at(&self, k1: i64, k2: i64) -> S {
        if k2 == 0 {
            S::zero()
        } else {
            self.get(MultiIndex::new(k1.abs(), k2.abs()))
        }
    }

    /// Value of `c(x) = c₀₀ + sym(x)` at any signed index.
    #[inline]
    pub fn c_at(&self, k1: i64, k2: i64) -> S {
        if k2 == 0 {
            if k1 == 0 {
                self.c00
            } else {
                S::zero()
            }
        } else {
            self.get(MultiIndex::new(k1.abs(), k2.abs()))
        }
    }

    /// The weighted ℓ¹ norm `‖x‖_ν = Σ_{k∈Z²₊} |x_k| ν^|k|`. `c₀₀` is not a
    /// coordinate of the space and is excluded.
    pub fn norm_nu(&self, nu: f64) -> S {
        let pows = nu_powers::<S>(nu, self.trunc.m1 + self.trunc.m2);
        let mut acc = S::zero();
        for (i, v) in self.data.iter().enumerate() {
            let k = self.trunc.at(i);
            acc = acc + v.abs_val() * pows[k.abs_sum()];
        }
        acc
    }

    /// Same coefficients on a larger truncation.
    pub fn zero_pad(&self, bigger: Trunc) -> SymCoeffs<S> {
        assert!(bigger.m1 >= self.trunc.m1 && bigger.m2 >= self.trunc.m2);
        let mut out = SymCoeffs::zeros(bigger);
        out.c00 = self.c00;
        for (i, v) in self.data.iter().enumerate() {
            out.set(self.trunc.at(i), *v);
        }
        out
    }

    /// Largest stored |x_k| on the outermost rows `k₁ = m₁-1` or `k₂ = m₂-1`,
    /// relative to the largest |x_k| overall. Gauges whether the truncation
    /// is wide enough.
    pub fn border_ratio(&self) -> f64 {
        let mut all: f64 = 0.0;
        let mut border: f64 = 0.0;
        for (i, v) in self.data.iter().enumerate() {
            let k = self.trunc.at(i);
            let mag = v.abs_val().upper();
            all = all.max(mag);
            if k.k1 as usize == self.trunc.m1 - 1 || k.k2 as usize == self.trunc.m2 - 1 {
                border = border.max(mag);
            }
        }
        if all == 0.0 {
            0.0
        } else {
            border / all
        }
    }
}

impl SymCoeffs<f64> {
    /// Lift to degenerate intervals for certified computation.
    pub fn to_intervals(&self) -> SymCoeffs<Interval> {
        SymCoeffs {
            trunc: self.trunc,
            c00: Interval::point(self.c00),
            data: self.data.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Powers `ν^0 .. ν^max_abs` in the scalar kind `S`.
pub fn nu_powers<S: Coeff>(nu: f64, max_abs: usize) -> Vec<S> {
    let base = S::from_f64(nu);
    let mut out = Vec::with_capacity(max_abs + 1);
    out.push(S::from_f64(1.0));
    for i in 0..max_abs {
        let next = out[i] * base;
        out.push(next);
    }
    out
}

/// An even/even function of the full lattice, stored on the quarter
/// `k₁ ∈ [0, n₁) × k₂ ∈ [0, n₂)` including the `k₂ = 0` row.
#[derive(Clone, Debug)]
pub struct QuarterGrid<S> {
    n1: usize,
    n2: usize,
    data: Vec<S>,
}

impl<S: Coeff> QuarterGrid<S> {
    pub fn zeros(n1: usize, n2: usize) -> QuarterGrid<S> {
        QuarterGrid {
            n1,
            n2,
            data: vec![S::zero(); n1 * n2],
        }
    }

    /// The symmetrized sequence `c(x) = c₀₀ + sym(x)` as a grid.
    pub fn from_c(x: &SymCoeffs<S>) -> QuarterGrid<S> {
        let (n1, n2) = (x.trunc().m1, x.trunc().m2);
        let mut g = QuarterGrid::zeros(n1, n2);
        g.data[0] = x.c00();
        for (i, v) in x.data().iter().enumerate() {
            let k = x.trunc().at(i);
            g.data[k.k1 as usize * n2 + k.k2 as usize] = *v;
        }
        g
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn get(&self, k1: usize, k2: usize) -> S {
        if k1 < self.n1 && k2 < self.n2 {
            self.data[k1 * self.n2 + k2]
        } else {
            S::zero()
        }
    }

    /// Even/even resolution of any signed index; zero outside the stored box.
    #[inline]
    pub fn get_signed(&self, k1: i64, k2: i64) -> S {
        self.get(k1.unsigned_abs() as usize, k2.unsigned_abs() as usize)
    }

    pub fn set(&mut self, k1: usize, k2: usize, v: S) {
        assert!(k1 < self.n1 && k2 < self.n2);
        self.data[k1 * self.n2 + k2] = v;
    }
}

/// Full convolution of two even/even sequences, restricted to the output box
/// `k₁ ∈ [0, out1) × k₂ ∈ [0, out2)`. Passing `out1 = a.n1 + b.n1 - 1` (and
/// likewise for `out2`) yields the complete support; that full product of two
/// `F_m`-supported factors is supported in `F_{2m-1}` plus the `k₂ = 0` row.
pub fn conv_even<S: Coeff>(
    a: &QuarterGrid<S>,
    b: &QuarterGrid<S>,
    out1: usize,
    out2: usize,
) -> QuarterGrid<S> {
    let (an1, an2) = (a.n1 as i64, a.n2 as i64);
    let mut out = QuarterGrid::zeros(out1, out2);
    out.data
        .par_chunks_mut(out2)
        .enumerate()
        .for_each(|(k1, row)| {
            let k1 = k1 as i64;
            for (k2, slot) in row.iter_mut().enumerate() {
                let k2 = k2 as i64;
                let mut acc = S::zero();
                for j1 in (1 - an1)..an1 {
                    for j2 in (1 - an2)..an2 {
                        let av = a.get_signed(j1, j2);
                        if av.is_zero() {
                            continue;
                        }
                        let bv = b.get_signed(k1 - j1, k2 - j2);
                        if bv.is_zero() {
                            continue;
                        }
                        acc = acc + av * bv;
                    }
                }
                *slot = acc;
            }
        });
    out
}

/// `(c(x) * c(x))_k` on the full support `F_{2m-1}` plus the `k₂ = 0` row.
pub fn conv_square<S: Coeff>(x: &SymCoeffs<S>) -> QuarterGrid<S> {
    let c = QuarterGrid::from_c(x);
    let (m1, m2) = (x.trunc().m1, x.trunc().m2);
    conv_even(&c, &c, 2 * m1 - 1, 2 * m2 - 1)
}

/// Row `k₂ = 0` of the convolution `a * b`: the values `(a*b)_{(k₁,0)}` for
/// `k₁ ∈ [0, a.n1 + b.n1 - 1)`. The inner sum runs over the signed support
/// of `b`.
pub fn conv_row0<S: Coeff>(a: &QuarterGrid<S>, b: &QuarterGrid<S>) -> Vec<S> {
    let (bn1, bn2) = (b.n1 as i64, b.n2 as i64);
    let len = a.n1 + b.n1 - 1;
    (0..len as i64)
        .map(|k1| {
            let mut acc = S::zero();
            for j1 in (1 - bn1)..bn1 {
                for j2 in (1 - bn2)..bn2 {
                    let bv = b.get_signed(j1, j2);
                    if bv.is_zero() {
                        continue;
                    }
                    let av = a.get_signed(k1 - j1, -j2);
                    if av.is_zero() {
                        continue;
                    }
                    acc = acc + av * bv;
                }
            }
            acc
        })
        .collect()
}

/// `(c(x)*c(x)*c(x))_{(k₁,0)}` for `k₁ ∈ [0, 3(m₁-1)]`, the only third-order
/// values the energy needs.
pub fn conv_triple_row0<S: Coeff>(x: &SymCoeffs<S>) -> Vec<S> {
    let c = QuarterGrid::from_c(x);
    let c2 = conv_square(x);
    conv_row0(&c2, &c)
}

/// Row `k₂ = 0` of `α * α` where `α_k = c_k k₂` (odd in `k₂`):
/// `(α*α)_{(k₁,0)} = -Σ_{j} j₂² c_{(j₁,j₂)} c_{(k₁-j₁,j₂)}`.
pub fn alpha_conv_row0<S: Coeff>(c: &QuarterGrid<S>) -> Vec<S> {
    let (n1, n2) = (c.n1 as i64, c.n2 as i64);
    let len = 2 * c.n1 - 1;
    (0..len as i64)
        .map(|k1| {
            let mut acc = S::zero();
            for j1 in (1 - n1)..n1 {
                for j2 in (1 - n2)..n2 {
                    if j2 == 0 {
                        continue;
                    }
                    let cv = c.get_signed(j1, j2);
                    if cv.is_zero() {
                        continue;
                    }
                    let cw = c.get_signed(k1 - j1, j2);
                    if cw.is_zero() {
                        continue;
                    }
                    acc = acc - S::from_f64((j2 * j2) as f64) * cv * cw;
                }
            }
            acc
        })
        .collect()
}

/// Weighted operator norm of a finite block: `max_j ν^{-|j|} Σ_k |M_{k,j}| ν^{|k|}`
/// with `M` given entrywise by `get(row, col)` over the listed index sets.
///
/// This is the whole norm only for operators supported on the block; for
/// block-plus-diagonal-tail operators the caller combines it with the sup of
/// the tail over whatever finite set its monotonicity argument justifies.
pub fn op_norm_block<S: Coeff>(
    get: impl Fn(usize, usize) -> S,
    rows: &[MultiIndex],
    cols: &[MultiIndex],
    nu: f64,
) -> S {
    let max_abs = rows
        .iter()
        .chain(cols.iter())
        .map(|k| k.abs_sum())
        .max()
        .unwrap_or(0);
    let pows = nu_powers::<S>(nu, max_abs);
    let mut best = S::zero();
    for (j, jk) in cols.iter().enumerate() {
        let mut col = S::zero();
        for (i, ik) in rows.iter().enumerate() {
            let v = get(i, j);
            if v.is_zero() {
                continue;
            }
            col = col + v.abs_val() * pows[ik.abs_sum()];
        }
        let weighted = col.div_val(pows[jk.abs_sum()]);
        best = S::max_of(best, weighted);
    }
    best
}
