//! Symbol analysis: dyadic breakup, windowed Fourier coefficients and
//! resynthesis, the sampled `H` norm, Marcinkiewicz-type symbol families and
//! lower certificates for bilinear multiplier norms.

mod expansion;
mod families;
mod hnorm;
mod multiplier;

pub use expansion::{
    band_samples, coefficient_table, fourier_coefficients, resynthesize, symbol_breakup, CoefficientBlock,
    CoefficientTable, CutoffError, Resynthesis, ResynthesisReport, RESYNTHESIS_SAMPLES,
};
pub use families::{log_ratio, marcinkiewicz_symbol, SymbolFamily};
pub use hnorm::{h_functional, h_norm_estimate, sampled_matrix, DerivativeFn, HNormOptions, HNormReport, RangeValue};
pub use multiplier::{
    equivalence_experiment, estimate_multiplier_norm, log_log_slope, multiplier_ratio, BoundednessReport,
    EquivalenceOptions, EquivalenceRow, Exponents, FamilyMember, MultiplierMode, MultiplierOptions,
};

#[cfg(test)]
mod tests;
