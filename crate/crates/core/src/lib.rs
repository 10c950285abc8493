//! Finite-dimensional models of dyadic maximal operators, Lorentz sequence
//! space bounds and bilinear Fourier multipliers.
//!
//! The crate is organised bottom-up:
//!
//! * [`dyadic`]: the `2^N`-atom dyadic probability space, conditional
//!   expectations and martingale differences;
//! * [`matrix`]: complex matrices with index offsets and the structural
//!   transforms (zero insertion, translation, triangles);
//! * [`maximal`]: certified lower bounds for the maximal-operator constants
//!   `h_p(A)`, their weak and mixed variants, `H(A)`, and the discrete
//!   bilinear model `V_A`;
//! * [`lorentz`]: weight sequences and the `d(w,1)` / `d*(w,1)` norms;
//! * [`counterexamples`]: sign-pattern matrices, Rademacher witnesses and
//!   banded weight matrices;
//! * [`harmonic`]: periodic grids, smooth Littlewood-Paley bumps, grid
//!   martingales and the bilinear operator `W_σ`;
//! * [`symbols`]: symbol breakup, lattice Fourier coefficients,
//!   resynthesis, sampled `‖σ‖_H` and multiplier-norm certificates;
//! * [`experiments`]: the command-line experiment runner.

pub mod counterexamples;
pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod harmonic;
pub mod lorentz;
pub mod matrix;
pub mod maximal;
pub(crate) mod numeric;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
