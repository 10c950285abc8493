//! Periodic-grid harmonic analysis in one dimension: smooth bumps,
//! Littlewood-Paley projections, grid martingales, the bilinear operator
//! `W_σ` and paraproducts.
//!
//! The real line is replaced by a torus of period `L`; statements about
//! `R` are only meaningful for band-limited functions, and results carry a
//! flag when a band is not fully resolved.

mod bilinear;
mod bumps;
mod grid;
mod operators;
mod paraproduct;

pub use bilinear::{
    apply_bilinear, apply_bilinear_direct, sigma_callable, sigma_from_matrix, Symbol, SymbolFn, SymbolMeta, DIRECT_LIMIT,
};
pub use bumps::{make_bumps, phi_hat, phi_hat_j, psi_hat, psi_hat_j, zeta_hat, BumpKit};
pub use grid::{GridFunction, PeriodicGrid};
pub use operators::{
    cross_norm, grid_mart_diff, lp_project, Banded, CrossKind, CrossNorm, CrossOptions, LpVariant, MartVariant,
};
pub use paraproduct::{
    paraproduct, paraproduct_summand, paraproduct_symbol, paraproduct_via_symbol, summand_spectrum_check,
    Paraproduct, SpectrumCheck,
};
