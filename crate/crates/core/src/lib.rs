//! Periodic orbits of the ill-posed Boussinesq equation
//! `u_tt = u_yy + λ u_yyyy + (u²)_yy`.
//!
//! The crate has two halves. The floating-point half finds orbits: a
//! symmetry-reduced Fourier discretization (`space`, `problem`), Newton
//! iteration on an energy-augmented system, and natural parameter
//! continuation in λ (`solver`). The rigorous half (`certify`) proves that a
//! true orbit exists near a numerical one: it evaluates the radii-polynomial
//! bounds Y, Z₀, Z₁, Z₂ in outward-rounded interval arithmetic (`interval`)
//! and emits a proof certificate with explicit C⁰ and L² error bounds.

pub mod certify;
pub mod interval;
pub mod pipeline;
pub mod problem;
pub mod render;
pub mod solver;
pub mod space;

pub use interval::{Interval, IntervalError};
pub use space::{MultiIndex, Params, SymCoeffs, Trunc};
