//! Verified dense interval matrix products.
//!
//! The fast path stores interval matrices in midpoint-radius form, runs plain
//! floating gemm on the midpoint and magnitude parts, and adds a rigorous
//! bound for everything the fast loops may have lost: the input radii, the
//! accumulated gemm rounding error (the classic `γ_k` bound, valid for any
//! summation order, with or without FMA), and underflow slack. The result
//! encloses the exact interval-matrix product entrywise.

use rayon::prelude::*;

use super::{add_up, mul_up, sub_down, sub_up, Interval, IntervalError};

/// Midpoint-radius form of one interval. Conversion in either direction only
/// widens.
#[derive(Clone, Copy, Debug)]
pub struct MidRad {
    pub mid: f64,
    pub rad: f64,
}

impl MidRad {
    pub fn from_interval(iv: Interval) -> MidRad {
        let mid = iv.midpoint();
        let rad = sub_up(mid, iv.lo()).max(sub_up(iv.hi(), mid));
        MidRad { mid, rad }
    }

    pub fn to_interval(self) -> Interval {
        Interval::new(sub_down(self.mid, self.rad), add_up(self.mid, self.rad))
            .expect("midpoint-radius form is always a valid interval")
    }
}

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug)]
pub struct IvMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IvMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IvMatrix {
        IvMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> IvMatrix {
        let mut m = IvMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Interval) -> IvMatrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IvMatrix { rows, cols, data }
    }

    /// Lift a row-major float matrix to degenerate (point) intervals.
    pub fn from_points(rows: usize, cols: usize, vals: &[f64]) -> IvMatrix {
        assert_eq!(vals.len(), rows * cols);
        IvMatrix {
            rows,
            cols,
            data: vals.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Interval] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for IvMatrix {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IvMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

/// Upper bound on `γ_n = n·u / (1 - n·u)`, the relative error envelope of an
/// n-term floating dot product.
fn gamma_up(n: usize) -> f64 {
    let u = 0.5 * f64::EPSILON;
    let num = mul_up(n as f64, u);
    let den = sub_down(1.0, num);
    (num / den).next_up()
}

/// Row-major gemm `C = A·B` in plain f64, partitioned into fixed row blocks.
/// The partition is independent of the thread count, so the result is
/// bit-identical no matter how rayon schedules the blocks.
fn gemm_rowmajor(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.fill(0.0);
        return;
    }
    const ROW_BLOCK: usize = 512;
    c.par_chunks_mut(ROW_BLOCK * n)
        .enumerate()
        .for_each(|(blk, c_blk)| {
            let i0 = blk * ROW_BLOCK;
            let mrows = c_blk.len() / n;
            unsafe {
                matrixmultiply::dgemm(
                    mrows,
                    k,
                    n,
                    1.0,
                    a.as_ptr().add(i0 * k),
                    k as isize,
                    1,
                    b.as_ptr(),
                    n as isize,
                    1,
                    0.0,
                    c_blk.as_mut_ptr(),
                    n as isize,
                    1,
                );
            }
        });
}

/// Verified product of two interval matrices.
///
/// The output contains, entrywise, the exact interval-matrix product
/// `Σ_l A[i,l]·B[l,j]` evaluated in real arithmetic.
pub fn mat_mul_verified(a: &IvMatrix, b: &IvMatrix) -> Result<IvMatrix, IntervalError> {
    if a.cols != b.rows {
        return Err(IntervalError::Shape {
            lrows: a.rows,
            lcols: a.cols,
            rrows: b.rows,
            rcols: b.cols,
        });
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);

    let exact_zero = |mat: &IvMatrix| mat.data.iter().all(|iv| iv.lo() == 0.0 && iv.hi() == 0.0);
    if exact_zero(a) || exact_zero(b) {
        return Ok(IvMatrix::zeros(m, n));
    }

    let mut a_mid = vec![0.0f64; m * k];
    let mut a_rad = vec![0.0f64; m * k];
    for (idx, iv) in a.data.iter().enumerate() {
        let mr = MidRad::from_interval(*iv);
        a_mid[idx] = mr.mid;
        a_rad[idx] = mr.rad;
    }
    let mut b_mid = vec![0.0f64; k * n];
    let mut b_rad = vec![0.0f64; k * n];
    for (idx, iv) in b.data.iter().enumerate() {
        let mr = MidRad::from_interval(*iv);
        b_mid[idx] = mr.mid;
        b_rad[idx] = mr.rad;
    }
    let a_is_point = a_rad.iter().all(|&r| r == 0.0);
    let b_is_point = b_rad.iter().all(|&r| r == 0.0);

    // midpoint product
    let mut c_mid = vec![0.0f64; m * n];
    gemm_rowmajor(m, k, n, &a_mid, &b_mid, &mut c_mid);

    // |Am|·|Bm| for the rounding-error envelope; reuse the mid buffers.
    for v in a_mid.iter_mut() {
        *v = v.abs();
    }
    let a_abs = a_mid;
    for v in b_mid.iter_mut() {
        *v = v.abs();
    }
    let b_abs = b_mid;
    let mut t = vec![0.0f64; m * n];
    gemm_rowmajor(m, k, n, &a_abs, &b_abs, &mut t);

    // |Am|·Br
    let mut r1 = Vec::new();
    if !b_is_point {
        r1 = vec![0.0f64; m * n];
        gemm_rowmajor(m, k, n, &a_abs, &b_rad, &mut r1);
    }

    // Ar·(|Bm| + Br), the |Bm|+Br sum taken with upward rounding
    let mut r2 = Vec::new();
    if !a_is_point {
        let mut w = b_abs;
        if !b_is_point {
            for (wv, &rv) in w.iter_mut().zip(b_rad.iter()) {
                *wv = add_up(*wv, rv);
            }
        }
        r2 = vec![0.0f64; m * n];
        gemm_rowmajor(m, k, n, &a_rad, &w, &mut r2);
    }

    // One inflation factor covers the underestimate of every plain-f64 sum
    // above, and γ covers the rounding of the midpoint gemm itself.
    let g = gamma_up(k + 2);
    let inflate = (1.0 / sub_down(1.0, g)).next_up();
    let under = (k as f64 + 4.0) * f64::MIN_POSITIVE;

    let mut out = Vec::with_capacity(m * n);
    for idx in 0..m * n {
        let mut rad = mul_up(g, mul_up(t[idx], inflate));
        if !b_is_point {
            rad = add_up(rad, mul_up(r1[idx], inflate));
        }
        if !a_is_point {
            rad = add_up(rad, mul_up(r2[idx], inflate));
        }
        rad = add_up(rad, under);
        out.push(
            Interval::new(sub_down(c_mid[idx], rad), add_up(c_mid[idx], rad))
                .expect("verified product endpoints are ordered"),
        );
    }
    Ok(IvMatrix {
        rows: m,
        cols: n,
        data: out,
    })
}
