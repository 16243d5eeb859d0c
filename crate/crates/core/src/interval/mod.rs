//! Self-contained interval arithmetic with outward rounding.
//!
//! Directed rounding is done in software: results computed in the default
//! round-to-nearest mode are stepped one representable value outward where the
//! rounding direction is unknown. No FPU mode is ever touched, so every
//! operation is a pure function and values are freely shareable across
//! threads.
//!
//! The containment contract: for every operation `op` and all points `a ∈ A`,
//! `b ∈ B`, the real number `op(a, b)` lies in `op(A, B)`.

mod matmul;

pub use matmul::{mat_mul_verified, IvMatrix, MidRad};

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    /// An operation was applied outside its mathematical domain
    /// (division by an interval containing zero, square root of a
    /// negative-reaching interval, NaN endpoints at construction).
    #[error("interval domain error: {0}")]
    Domain(&'static str),
    /// Matrix dimensions do not agree.
    #[error("shape mismatch: left is {lrows}x{lcols}, right is {rrows}x{rcols}")]
    Shape {
        lrows: usize,
        lcols: usize,
        rrows: usize,
        rcols: usize,
    },
}

/// A closed interval `[lo, hi]` of reals with `f64` endpoints.
///
/// Invariants: `lo <= hi`, neither endpoint is NaN, and at least one endpoint
/// is finite. `lo = -inf` / `hi = +inf` may appear after overflow and mean
/// "unbounded on that side".
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[inline]
fn step_down(x: f64) -> f64 {
    x.next_down()
}

#[inline]
fn step_up(x: f64) -> f64 {
    x.next_up()
}

/// Lower bound for `a + b`: exact when the float sum is exact, else one step
/// down. The error term of `two_sum` tells which.
#[inline]
pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err < 0.0 {
        step_down(s)
    } else {
        s
    }
}

/// Upper bound for `a + b`.
#[inline]
pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err > 0.0 {
        step_up(s)
    } else {
        s
    }
}

#[inline]
pub(crate) fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

#[inline]
pub(crate) fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

/// Upper bound for `a * b`; the nearest rounding is off by at most half an
/// ulp, so one step up always suffices.
#[inline]
pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    step_up(a * b)
}

impl Interval {
    /// Fallible constructor enforcing the invariants.
    pub fn new(lo: f64, hi: f64) -> Result<Interval, IntervalError> {
        if lo.is_nan() || hi.is_nan() {
            return Err(IntervalError::Domain("NaN endpoint"));
        }
        if lo > hi {
            return Err(IntervalError::Domain("lo > hi"));
        }
        if lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(IntervalError::Domain("empty infinite endpoint"));
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[v, v]`. Panics on NaN.
    #[inline]
    pub fn point(v: f64) -> Interval {
        assert!(!v.is_nan(), "NaN is not a valid interval point");
        Interval { lo: v, hi: v }
    }

    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Smallest interval with `f64` endpoints containing both `a` and `b`.
    #[inline]
    pub fn hull(a: Interval, b: Interval) -> Interval {
        Interval {
            lo: a.lo.min(b.lo),
            hi: a.hi.max(b.hi),
        }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Upper bound on the width `hi - lo`.
    pub fn width(&self) -> f64 {
        sub_up(self.hi, self.lo)
    }

    pub fn midpoint(&self) -> f64 {
        let m = self.lo + 0.5 * (self.hi - self.lo);
        if m.is_finite() {
            m
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// True if every point of the interval is strictly positive.
    #[inline]
    pub fn is_strictly_positive(&self) -> bool {
        self.lo > 0.0
    }

    #[inline]
    pub fn straddles_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    /// Enclosure of `|x|` over the interval.
    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Enclosure of `max(a, b)` (pointwise over both intervals).
    pub fn max(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Enclosure of `min(a, b)`.
    pub fn min(self, other: Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    /// Division; fails if the divisor interval contains zero.
    pub fn try_div(self, rhs: Interval) -> Result<Interval, IntervalError> {
        if rhs.straddles_zero() {
            return Err(IntervalError::Domain("division by interval containing 0"));
        }
        if self.lo == 0.0 && self.hi == 0.0 {
            return Ok(Interval::ZERO);
        }
        let c1 = self.lo / rhs.lo;
        let c2 = self.lo / rhs.hi;
        let c3 = self.hi / rhs.lo;
        let c4 = self.hi / rhs.hi;
        let lo = c1.min(c2).min(c3.min(c4));
        let hi = c1.max(c2).max(c3.max(c4));
        // Same zero-endpoint care as multiplication: an underflowed quotient
        // may hide a sign.
        let divisor_pos = rhs.lo > 0.0;
        let lo = if lo == 0.0 {
            let can_negative = if divisor_pos { self.lo < 0.0 } else { self.hi > 0.0 };
            if can_negative {
                -f64::from_bits(1)
            } else {
                0.0
            }
        } else {
            step_down(lo)
        };
        let hi = if hi == 0.0 {
            let can_positive = if divisor_pos { self.hi > 0.0 } else { self.lo < 0.0 };
            if can_positive {
                f64::from_bits(1)
            } else {
                0.0
            }
        } else {
            step_up(hi)
        };
        Ok(Interval { lo, hi })
    }

    /// Enclosure of `1/x`; fails if the interval contains zero.
    pub fn recip(self) -> Result<Interval, IntervalError> {
        Interval::ONE.try_div(self)
    }

    /// Square root. Requires `lo >= 0`.
    pub fn sqrt(self) -> Result<Interval, IntervalError> {
        if self.lo < 0.0 {
            return Err(IntervalError::Domain("sqrt of interval reaching below 0"));
        }
        let lo = step_down(self.lo.sqrt()).max(0.0);
        let hi = step_up(self.hi.sqrt());
        Ok(Interval { lo, hi })
    }

    /// Integer power with correct sign handling: even powers of sign-mixed
    /// intervals stay nonnegative. Negative exponents require `0 ∉ a`.
    pub fn pow_int(self, n: i64) -> Result<Interval, IntervalError> {
        if n < 0 {
            let p = self.pow_int(-n)?;
            return p.recip();
        }
        if n == 0 {
            return Ok(Interval::ONE);
        }
        let n = n as u64;
        if n.is_multiple_of(2) {
            // x^even = |x|^even, monotone on the nonnegative half-line.
            Ok(self.abs().powu_nonneg(n))
        } else if self.hi <= 0.0 {
            Ok(-(-self).powu_nonneg(n))
        } else if self.lo >= 0.0 {
            Ok(self.powu_nonneg(n))
        } else {
            // odd power of a sign-mixed interval: monotone, endpoints map to
            // endpoints.
            let lo = -(-Interval::point(self.lo)).powu_nonneg(n).hi;
            let hi = Interval::point(self.hi).powu_nonneg(n).hi;
            Ok(Interval { lo, hi })
        }
    }

    /// Repeated-squaring power of an interval with `lo >= 0`.
    fn powu_nonneg(self, n: u64) -> Interval {
        debug_assert!(self.lo >= 0.0);
        let mut acc = Interval::ONE;
        let mut base = self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        acc
    }
}

/// Enclosure of π, two ulps wide.
pub fn pi_interval() -> Interval {
    // consts::PI is the nearest f64 to π, so stepping one ulp out on both
    // sides encloses the real value.
    Interval {
        lo: step_down(std::f64::consts::PI),
        hi: step_up(std::f64::consts::PI),
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: sub_down(self.lo, rhs.hi),
            hi: sub_up(self.hi, rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        if (self.lo == 0.0 && self.hi == 0.0) || (rhs.lo == 0.0 && rhs.hi == 0.0) {
            return Interval::ZERO;
        }
        #[inline]
        fn prod(x: f64, y: f64) -> f64 {
            // 0 * inf cannot contribute a real endpoint; treat it as 0.
            if x == 0.0 || y == 0.0 {
                0.0
            } else {
                x * y
            }
        }
        let c1 = prod(self.lo, rhs.lo);
        let c2 = prod(self.lo, rhs.hi);
        let c3 = prod(self.hi, rhs.lo);
        let c4 = prod(self.hi, rhs.hi);
        let lo = c1.min(c2).min(c3.min(c4));
        let hi = c1.max(c2).max(c3.max(c4));
        // A zero endpoint is exact unless a product of opposite-signed
        // (resp. same-signed) tiny factors underflowed to it.
        let lo = if lo == 0.0 {
            let can_negative =
                (self.hi > 0.0 && rhs.lo < 0.0) || (self.lo < 0.0 && rhs.hi > 0.0);
            if can_negative {
                -f64::from_bits(1)
            } else {
                0.0
            }
        } else {
            step_down(lo)
        };
        let hi = if hi == 0.0 {
            let can_positive =
                (self.hi > 0.0 && rhs.hi > 0.0) || (self.lo < 0.0 && rhs.lo < 0.0);
            if can_positive {
                f64::from_bits(1)
            } else {
                0.0
            }
        } else {
            step_up(hi)
        };
        Interval { lo, hi }
    }
}

impl AddAssign for Interval {
    #[inline]
    fn add_assign(&mut self, rhs: Interval) {
        *self = *self + rhs;
    }
}

impl SubAssign for Interval {
    #[inline]
    fn sub_assign(&mut self, rhs: Interval) {
        *self = *self - rhs;
    }
}

impl MulAssign for Interval {
    #[inline]
    fn mul_assign(&mut self, rhs: Interval) {
        *self = *self * rhs;
    }
}

impl num_traits::Zero for Interval {
    fn zero() -> Interval {
        Interval::ZERO
    }
    fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }
}

impl From<f64> for Interval {
    fn from(v: f64) -> Interval {
        Interval::point(v)
    }
}
