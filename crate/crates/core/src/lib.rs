//! Numerical laboratory for global `W^{2,δ}` estimates of singular fully
//! nonlinear elliptic inequalities.
//!
//! The crate works on uniform grids over `[-1, 1]^n` (`n ≤ 3`) restricted to
//! the closed unit ball, and provides:
//!
//! * [`grid`]: grids, masks, cell-counting measure and sampled fields, plus
//!   the `gf1` text format in [`gf1`];
//! * [`calculus`]: finite-difference derivatives, closed-form symmetric
//!   eigenvalues, Pucci extremal operators, the p-Laplacian and the residuals
//!   of the singular inequalities;
//! * [`contact`]: the sliding-paraboloid engine (inf-convolution by separable
//!   lower envelopes) and its brute-force oracle;
//! * [`maximal`]: the discrete Hardy–Littlewood maximal function, Vitali
//!   selection and the (θ, Θ) covering lemma check;
//! * [`regularity`]: decay curves, exponent fits, the dyadic level-set sum,
//!   two estimators of the `W^{2,δ}` norm, normalization, estimate ratios and
//!   the density scan;
//! * [`solutions`]: manufactured solutions with exact derivatives, the barrier
//!   profile and a discrete viscosity sub-test.
//!
//! With the default `parallel` feature the per-node kernels run on rayon;
//! without it the same code paths run sequentially.

pub mod balls;
pub mod calculus;
pub mod contact;
mod error;
mod exact;
mod exec;
pub mod gf1;
pub mod grid;
pub mod maximal;
pub mod regularity;
pub mod solutions;

pub use error::{Error, Result};
pub use grid::{Field, Grid, GridFunction, Mask, Point};

/// Returns `true` when the crate was built with the rayon back end.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
