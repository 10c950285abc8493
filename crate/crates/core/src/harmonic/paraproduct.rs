//! Paraproducts: the symbols
//! `τ_L = Σ_j Σ_{k ≤ j−3} φ̂_j(ξ) φ̂_k(η)`, `τ_U(ξ,η) = τ_L(η,ξ)` and the
//! diagonal remainder `τ_D = Σ_{|j−k| ≤ 2} φ̂_j(ξ) φ̂_k(η)`, with all sums
//! running over the grid band.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bilinear::{apply_bilinear, Symbol, SymbolMeta};
use super::bumps::{phi_hat_j, psi_hat_j};
use super::grid::{GridFunction, PeriodicGrid};
use crate::error::{bail, Result};
use crate::numeric::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Paraproduct {
    Lower,
    Upper,
    Diagonal,
}

/// `Σ_{k ≤ j−3}` of the band bumps at `η`: `ψ̂(2^{3−j} η)` for `η ≠ 0` and 0 at
/// the zero frequency, which no band bump reaches.
fn low_sum(j: i32, eta: f64) -> f64 {
    if eta == 0.0 {
        0.0
    } else {
        psi_hat_j(j - 3, eta)
    }
}

fn tau_lower(grid: PeriodicGrid, xi: f64, eta: f64) -> f64 {
    grid.lp_band().map(|j| phi_hat_j(j, xi) * low_sum(j, eta)).sum()
}

fn tau_diagonal(grid: PeriodicGrid, xi: f64, eta: f64) -> f64 {
    let band = grid.lp_band();
    let mut s = 0.0;
    for j in band.clone() {
        let a = phi_hat_j(j, xi);
        if a == 0.0 {
            continue;
        }
        for k in (j - 2).max(*band.start())..=(j + 2).min(*band.end()) {
            s += a * phi_hat_j(k, eta);
        }
    }
    s
}

/// The symbol of a paraproduct on `grid`.
pub fn paraproduct_symbol(grid: PeriodicGrid, which: Paraproduct) -> Symbol {
    let meta = |name: &str, support: &str| SymbolMeta {
        provenance: format!("paraproduct_{name}"),
        support: support.into(),
        truncated: false,
    };
    match which {
        Paraproduct::Lower => Symbol::callable(
            grid,
            Arc::new(move |x, y| C64::new(tau_lower(grid, x, y), 0.0)),
            meta("lower", "|η| ≤ |ξ|/2"),
        ),
        Paraproduct::Upper => Symbol::callable(
            grid,
            Arc::new(move |x, y| C64::new(tau_lower(grid, y, x), 0.0)),
            meta("upper", "|ξ| ≤ |η|/2"),
        ),
        Paraproduct::Diagonal => Symbol::callable(
            grid,
            Arc::new(move |x, y| C64::new(tau_diagonal(grid, x, y), 0.0)),
            meta("diagonal", "|ξ|/16 ≤ |η| ≤ 16|ξ|"),
        ),
    }
}

/// `Δ̃_j f · S̃_{j−3} g` with the band partial sum (zero mean part dropped).
pub fn paraproduct_summand(f: &GridFunction, g: &GridFunction, j: i32) -> Result<GridFunction> {
    let a = f.multiply_spectrum(|xi| phi_hat_j(j, xi));
    let b = g.multiply_spectrum(|eta| low_sum(j, eta));
    a.mul(&b)
}

/// Paraproduct evaluated through its summands:
/// `Π_L(f,g) = Σ_j Δ̃_j f · S̃_{j−3} g`, `Π_U(f,g) = Π_L(g,f)` and
/// `Π_D(f,g) = Σ_{|j−k| ≤ 2} Δ̃_j f · Δ̃_k g`.
pub fn paraproduct(f: &GridFunction, g: &GridFunction, which: Paraproduct) -> Result<GridFunction> {
    if f.grid() != g.grid() {
        bail!(Shape, "paraproduct inputs live on different grids");
    }
    let grid = f.grid();
    let band = grid.lp_band();
    let mut acc = GridFunction::zeros(grid);
    match which {
        Paraproduct::Lower | Paraproduct::Upper => {
            let (x, y) = if which == Paraproduct::Lower { (f, g) } else { (g, f) };
            for j in band {
                acc = acc.add(&paraproduct_summand(x, y, j)?)?;
            }
        }
        Paraproduct::Diagonal => {
            let pieces: Vec<(GridFunction, GridFunction)> = band
                .clone()
                .map(|j| (f.multiply_spectrum(|xi| phi_hat_j(j, xi)), g.multiply_spectrum(|xi| phi_hat_j(j, xi))))
                .collect();
            let lo = *band.start();
            for j in band.clone() {
                for k in (j - 2).max(lo)..=(j + 2).min(*band.end()) {
                    let p = pieces[(j - lo) as usize].0.mul(&pieces[(k - lo) as usize].1)?;
                    acc = acc.add(&p)?;
                }
            }
        }
    }
    Ok(acc)
}

/// Paraproduct evaluated through its tabulated symbol.
pub fn paraproduct_via_symbol(f: &GridFunction, g: &GridFunction, which: Paraproduct) -> Result<GridFunction> {
    let sigma = paraproduct_symbol(f.grid(), which).into_table()?;
    apply_bilinear(&sigma, f, g)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub j: i32,
    /// Largest coefficient modulus outside `2^{j−2} ≤ |ζ| ≤ 2^{j+2}`.
    pub leakage: f64,
    /// Largest coefficient modulus overall.
    pub peak: f64,
    /// The summand's spectrum `|ζ| ≤ 2^{j+1} + 2^{j−2}` stays below Nyquist,
    /// so no aliasing can occur.
    pub resolved: bool,
}

/// Where the spectrum of `Δ̃_j f · S̃_{j−3} g` lives.
pub fn summand_spectrum_check(f: &GridFunction, g: &GridFunction, j: i32) -> Result<SpectrumCheck> {
    let s = paraproduct_summand(f, g, j)?;
    let grid = f.grid();
    let (lo, hi) = (2f64.powi(j - 2), 2f64.powi(j + 2));
    let mut leakage = 0.0_f64;
    let mut peak = 0.0_f64;
    for (q, z) in s.spectrum().iter().enumerate() {
        let xi = grid.frequency(q).abs();
        peak = peak.max(z.norm());
        if xi < lo || xi > hi {
            leakage = leakage.max(z.norm());
        }
    }
    let resolved = 2f64.powi(j + 1) + 2f64.powi(j - 2) < grid.nyquist();
    Ok(SpectrumCheck { j, leakage, peak, resolved })
}
