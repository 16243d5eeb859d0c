//! Shared test support: independent high-precision reference computations.
//!
//! Everything here recomputes quantities from first principles on the full
//! signed lattice in double-double arithmetic, deliberately bypassing the
//! library's index bookkeeping, convolutions, and interval code. Only raw
//! input data (coefficient values, the numerical inverse block) is taken
//! from the library types.

#![allow(dead_code)]

use boussinesq::space::{MultiIndex, Params, SymCoeffs, Trunc};
use ddouble::Dd;

/// A dense full-lattice array over `k₁ ∈ [-half1, half1] × k₂ ∈ [-half2, half2]`.
pub struct FullGrid {
    pub half1: i64,
    pub half2: i64,
    pub vals: Vec<Dd>,
}

impl FullGrid {
    pub fn zeros(half1: i64, half2: i64) -> FullGrid {
        let n = ((2 * half1 + 1) * (2 * half2 + 1)) as usize;
        FullGrid {
            half1,
            half2,
            vals: vec![Dd::ZERO; n],
        }
    }

    pub fn idx(&self, k1: i64, k2: i64) -> usize {
        debug_assert!(k1.abs() <= self.half1 && k2.abs() <= self.half2);
        ((k1 + self.half1) * (2 * self.half2 + 1) + (k2 + self.half2)) as usize
    }

    pub fn get(&self, k1: i64, k2: i64) -> Dd {
        if k1.abs() <= self.half1 && k2.abs() <= self.half2 {
            self.vals[self.idx(k1, k2)]
        } else {
            Dd::ZERO
        }
    }

    pub fn set(&mut self, k1: i64, k2: i64, v: Dd) {
        let i = self.idx(k1, k2);
        self.vals[i] = v;
    }
}

/// Build the symmetrized bi-infinite sequence `c(x) = c₀₀ + sym(x)` on a
/// full grid by explicit sign loops.
pub fn full_c_grid(x: &SymCoeffs<f64>, half1: i64, half2: i64) -> FullGrid {
    let mut g = FullGrid::zeros(half1, half2);
    g.set(0, 0, Dd::from_f64(x.c00()));
    let t = x.trunc();
    for (i, &v) in x.data().iter().enumerate() {
        let k = t.at(i);
        if v == 0.0 {
            continue;
        }
        for s1 in [-1i64, 1] {
            for s2 in [-1i64, 1] {
                let (a, b) = (s1 * k.k1, s2 * k.k2);
                if a.abs() <= half1 && b.abs() <= half2 {
                    g.set(a, b, Dd::from_f64(v));
                }
            }
        }
    }
    g
}

/// Full convolution `(a*b)` by the double loop over the signed lattice.
pub fn full_conv(a: &FullGrid, b: &FullGrid, half1: i64, half2: i64) -> FullGrid {
    let mut out = FullGrid::zeros(half1, half2);
    for k1 in -half1..=half1 {
        for k2 in -half2..=half2 {
            let mut acc = Dd::ZERO;
            for j1 in -a.half1..=a.half1 {
                for j2 in -a.half2..=a.half2 {
                    let av = a.get(j1, j2);
                    if av.hi == 0.0 && av.lo == 0.0 {
                        continue;
                    }
                    acc = acc + av * b.get(k1 - j1, k2 - j2);
                }
            }
            out.set(k1, k2, acc);
        }
    }
    out
}

pub fn dd_mu(k: MultiIndex, p: &Params) -> Dd {
    let pi2 = Dd::PI * Dd::PI;
    let four_pi2 = Dd::from_i64(4) * pi2;
    let l2 = Dd::from_f64(p.l) * Dd::from_f64(p.l);
    let k1sq = Dd::from_i64(k.k1 * k.k1);
    let k2sq = Dd::from_i64(k.k2 * k.k2);
    l2 / four_pi2 * (k1sq / k2sq) + four_pi2 * Dd::from_f64(p.lambda) * k2sq - Dd::ONE
}

pub fn dd_nu_pow(nu: f64, e: usize) -> Dd {
    Dd::from_f64(nu).powi(e as i64)
}

/// `|k| = |k₁| + |k₂|`.
pub fn abs_sum(k: MultiIndex) -> usize {
    (k.k1.unsigned_abs() + k.k2.unsigned_abs()) as usize
}

/// The residual `f_k(x̄)` over a truncation, from the full-lattice square.
pub fn dd_residual(x: &SymCoeffs<f64>, p: &Params, range: Trunc) -> Vec<Dd> {
    let t = x.trunc();
    let (h1, h2) = (2 * (t.m1 as i64 - 1) + 1, 2 * (t.m2 as i64 - 1) + 1);
    let c = full_c_grid(x, h1, h2);
    let c2 = full_conv(&c, &c, h1, h2);
    range
        .iter()
        .map(|k| {
            let xk = Dd::from_f64(x.get(k));
            dd_mu(k, p) * xk - c2.get(k.k1, k.k2)
        })
        .collect()
}

/// The Jacobian kernel entry `C_{k,j}(x̄)` with all lookups through `c(x̄)`.
pub fn dd_c_kj(c: &FullGrid, k: MultiIndex, j: MultiIndex) -> Dd {
    let mut s = c.get(k.k1 - j.k1, k.k2 - j.k2) + c.get(k.k1 + j.k1, k.k2 + j.k2);
    if j.k1 > 0 {
        s = s + c.get(k.k1 - j.k1, k.k2 + j.k2) + c.get(k.k1 + j.k1, k.k2 - j.k2);
    }
    s
}

/// Exact `‖A f(x̄)‖_ν` for the block-plus-diagonal operator: block entries
/// from the supplied float matrix, tail `μ_k⁻¹`, both in double-double.
/// `f(x̄)` vanishes outside `F_{2m-1}` so this is the whole norm.
pub fn oracle_y(x: &SymCoeffs<f64>, p: &Params, a_block: &[f64]) -> Dd {
    let t = x.trunc();
    let n = t.len();
    let wide = Trunc::new(2 * t.m1 - 1, 2 * t.m2 - 1);
    let f_wide = dd_residual(x, p, wide);
    let pos = |k: MultiIndex| wide.index_of(k).expect("index in wide range");

    let mut y = Dd::ZERO;
    for (row, k) in t.iter().enumerate() {
        let mut acc = Dd::ZERO;
        for (col, j) in t.iter().enumerate() {
            acc = acc + Dd::from_f64(a_block[row * n + col]) * f_wide[pos(j)];
        }
        y = y + acc.abs() * dd_nu_pow(p.nu, abs_sum(k));
    }
    for k in wide.iter_minus(t) {
        let fk = f_wide[pos(k)];
        y = y + (fk / dd_mu(k, p)).abs() * dd_nu_pow(p.nu, abs_sum(k));
    }
    y
}

/// Exact block norm `‖I - A^(m) D^(m)f(x̄)‖` in double-double.
pub fn oracle_z0(x: &SymCoeffs<f64>, p: &Params, a_block: &[f64]) -> Dd {
    let t = x.trunc();
    let n = t.len();
    let (h1, h2) = (2 * t.m1 as i64, 2 * t.m2 as i64);
    let c = full_c_grid(x, h1, h2);

    // D^(m)f entries in dd
    let idx: Vec<MultiIndex> = t.iter().collect();
    let mut d = vec![Dd::ZERO; n * n];
    for (r, &k) in idx.iter().enumerate() {
        for (col, &j) in idx.iter().enumerate() {
            let mut v = -(Dd::from_i64(2) * dd_c_kj(&c, k, j));
            if k == j {
                v = v + dd_mu(k, p);
            }
            d[r * n + col] = v;
        }
    }
    let mut best = Dd::ZERO;
    for (col, &j) in idx.iter().enumerate() {
        let mut sum = Dd::ZERO;
        for (r, &k) in idx.iter().enumerate() {
            let mut acc = Dd::ZERO;
            for l in 0..n {
                acc = acc + Dd::from_f64(a_block[r * n + l]) * d[l * n + col];
            }
            let b = if r == col { Dd::ONE - acc } else { -acc };
            sum = sum + b.abs() * dd_nu_pow(p.nu, abs_sum(k));
        }
        let w = sum / dd_nu_pow(p.nu, abs_sum(j));
        if w > best {
            best = w;
        }
    }
    best
}

/// Column sums of `A Γ` truncated to rows and columns in `F_{8m}`:
/// `max_q ν^{-|q|} Σ_{s ∈ F_8m} |(AΓ)_{s,q}| ν^{|s|}`.
pub fn oracle_z1(x: &SymCoeffs<f64>, p: &Params, a_block: &[f64]) -> Dd {
    let t = x.trunc();
    let n = t.len();
    let reach = t.scaled(8);
    let (h1, h2) = (t.m1 as i64, t.m2 as i64);
    let c = full_c_grid(x, h1, h2);
    let idx: Vec<MultiIndex> = t.iter().collect();

    let gamma = |j: MultiIndex, q: MultiIndex| -> Dd {
        if t.contains(j) && t.contains(q) {
            Dd::ZERO
        } else {
            -(Dd::from_i64(2) * dd_c_kj(&c, j, q))
        }
    };

    let mut best = Dd::ZERO;
    for q in reach.iter() {
        let mut col = Dd::ZERO;
        for s in reach.iter() {
            let entry = if let Some(r) = t.index_of(s) {
                let mut acc = Dd::ZERO;
                for (cidx, &j) in idx.iter().enumerate() {
                    let g = gamma(j, q);
                    if g.hi == 0.0 && g.lo == 0.0 {
                        continue;
                    }
                    acc = acc + Dd::from_f64(a_block[r * n + cidx]) * g;
                }
                acc
            } else {
                gamma(s, q) / dd_mu(s, p)
            };
            if entry.hi == 0.0 && entry.lo == 0.0 {
                continue;
            }
            col = col + entry.abs() * dd_nu_pow(p.nu, abs_sum(s));
        }
        let w = col / dd_nu_pow(p.nu, abs_sum(q));
        if w > best {
            best = w;
        }
    }
    best
}

/// `32 ‖A‖` with columns truncated to `F_{8m}`.
pub fn oracle_z2(x: &SymCoeffs<f64>, p: &Params, a_block: &[f64]) -> Dd {
    let t = x.trunc();
    let n = t.len();
    let idx: Vec<MultiIndex> = t.iter().collect();
    let mut best = Dd::ZERO;
    for (col, &j) in idx.iter().enumerate() {
        let mut sum = Dd::ZERO;
        for (r, &k) in idx.iter().enumerate() {
            sum = sum
                + Dd::from_f64(a_block[r * n + col]).abs() * dd_nu_pow(p.nu, abs_sum(k));
        }
        let w = sum / dd_nu_pow(p.nu, abs_sum(j));
        if w > best {
            best = w;
        }
    }
    for q in t.scaled(8).iter_minus(t) {
        let w = (Dd::ONE / dd_mu(q, p)).abs();
        if w > best {
            best = w;
        }
    }
    Dd::from_i64(32) * best
}

/// Random dense candidate with geometric decay, plus a mean mode.
pub fn random_candidate(
    rng: &mut impl rand::Rng,
    trunc: Trunc,
    scale: f64,
    decay: f64,
) -> SymCoeffs<f64> {
    let mut x = SymCoeffs::<f64>::zeros(trunc);
    x.set_c00(scale * (rng.random::<f64>() - 0.5));
    for k in trunc.iter() {
        let v = scale * (rng.random::<f64>() - 0.5) * decay.powi(abs_sum(k) as i32);
        x.set(k, v);
    }
    x
}
