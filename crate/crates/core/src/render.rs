//! Grid evaluation of an orbit in physical space.
//!
//! From the stored quarter-lattice coefficients,
//! `u(t,y) = c₀₀ + Σ_k mult(k) x_k cos(L k₁ t) cos(2π k₂ y)` with
//! `mult = 2` for `k₁ = 0` and `4` otherwise (the signed images of each
//! stored mode). Even/even symmetry and the periods are inherited exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::space::{Params, SymCoeffs};

pub struct Grid {
    pub ts: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major `u[t_index][y_index]`.
    pub values: Vec<f64>,
}

/// Sample `u` on the inclusive uniform grid `[0, 2π/L] × [0, 1]`.
/// Requires `nt, ny ≥ 2`.
pub fn eval_grid(x: &SymCoeffs<f64>, p: &Params, nt: usize, ny: usize) -> Grid {
    assert!(nt >= 2 && ny >= 2, "grid needs at least 2 samples per axis");
    let t = x.trunc();
    let period = 2.0 * std::f64::consts::PI / p.l;
    let ts: Vec<f64> = (0..nt)
        .map(|i| period * i as f64 / (nt - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..ny).map(|j| j as f64 / (ny - 1) as f64).collect();

    // cosine tables per mode component
    let ct: Vec<Vec<f64>> = (0..t.m1)
        .map(|k1| ts.iter().map(|&tt| (p.l * k1 as f64 * tt).cos()).collect())
        .collect();
    let cy: Vec<Vec<f64>> = (0..t.m2)
        .map(|k2| {
            ys.iter()
                .map(|&yy| (2.0 * std::f64::consts::PI * k2 as f64 * yy).cos())
                .collect()
        })
        .collect();

    let mut values = vec![x.c00(); nt * ny];
    for (idx, &v) in x.data().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let k = t.at(idx);
        let mult = if k.k1 == 0 { 2.0 } else { 4.0 };
        let row_t = &ct[k.k1 as usize];
        let row_y = &cy[k.k2 as usize];
        for i in 0..nt {
            let w = mult * v * row_t[i];
            let out = &mut values[i * ny..(i + 1) * ny];
            for (j, o) in out.iter_mut().enumerate() {
                *o += w * row_y[j];
            }
        }
    }
    Grid { ts, ys, values }
}

/// CSV with a `t/y` header row of y samples and one row per t sample.
pub fn grid_to_csv(g: &Grid) -> String {
    let mut s = String::new();
    s.push_str("t/y");
    for y in &g.ys {
        let _ = write!(s, ",{y}");
    }
    s.push('\n');
    for (i, t) in g.ts.iter().enumerate() {
        let _ = write!(s, "{t}");
        for j in 0..g.ys.len() {
            let _ = write!(s, ",{}", g.values[i * g.ys.len() + j]);
        }
        s.push('\n');
    }
    s
}

pub fn write_grid_csv(path: &Path, g: &Grid) -> std::io::Result<()> {
    std::fs::write(path, grid_to_csv(g))
}
