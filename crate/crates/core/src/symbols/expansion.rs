//! Dyadic breakup of a symbol and its windowed Fourier expansion
//!
//! `σ_{jk}(2^{j+3}t, 2^{k+3}s) = Σ_{ν,ρ} a_{jk}(ν,ρ) e^{2πi(tν+sρ)} ζ̂(t) ζ̂(s)`
//!
//! on the period-1 torus `[−1/2, 1/2)²`, which contains the support of
//! `φ̂(8t) φ̂(8s)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::harmonic::{phi_hat_j, zeta_hat, Symbol, SymbolMeta};
use crate::numeric::{fft_forward, is_power_of_two, pairs, C64};

/// `σ_{jk}(ξ,η) = σ(ξ,η) φ̂(2^{−j}ξ) φ̂(2^{−k}η)`.
pub fn symbol_breakup(sigma: &Symbol, j: i32, k: i32) -> Symbol {
    let grid = sigma.grid();
    let meta = SymbolMeta {
        provenance: format!("breakup({j},{k}) of {}", sigma.meta.provenance),
        support: format!("D_{{{j},{k}}}"),
        truncated: sigma.meta.truncated,
    };
    match sigma.table_values() {
        Some(values) => {
            let m = grid.points();
            let fr = grid.frequencies();
            let v = values
                .iter()
                .enumerate()
                .map(|(i, z)| z * (phi_hat_j(j, fr[i / m]) * phi_hat_j(k, fr[i % m])))
                .collect();
            Symbol::table(grid, v, meta).expect("entries stay finite")
        }
        None => {
            let s = sigma.clone();
            Symbol::callable(
                grid,
                Arc::new(move |x, y| {
                    let w = phi_hat_j(j, x) * phi_hat_j(k, y);
                    if w == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        s.eval(x, y) * w
                    }
                }),
                meta,
            )
        }
    }
}

/// Coefficients `a_{jk}(ν, ρ)` for `|ν|, |ρ| ≤ K`, row-major in `ν`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub j: i32,
    pub k: i32,
    #[serde(with = "pairs")]
    pub data: Vec<C64>,
}

impl CoefficientBlock {
    fn width(&self) -> usize {
        (self.data.len() as f64).sqrt().round() as usize
    }

    pub fn cutoff(&self) -> usize {
        self.width() / 2
    }

    pub fn get(&self, nu: i64, rho: i64) -> Option<C64> {
        let c = self.cutoff() as i64;
        if nu.abs() > c || rho.abs() > c {
            return None;
        }
        Some(self.data[((nu + c) * (2 * c + 1) + rho + c) as usize])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub cutoff: usize,
    pub quadrature: usize,
    /// Table symbols were sampled off-grid by interpolation.
    pub interpolated: bool,
    pub blocks: Vec<CoefficientBlock>,
}

impl CoefficientTable {
    pub fn block(&self, j: i32, k: i32) -> Option<&CoefficientBlock> {
        self.blocks.iter().find(|b| b.j == j && b.k == k)
    }

    pub fn get(&self, j: i32, k: i32, nu: i64, rho: i64) -> Option<C64> {
        self.block(j, k)?.get(nu, rho)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_quadrature(cutoff: usize, quadrature: usize) -> Result<()> {
    if quadrature < 4 || !is_power_of_two(quadrature) {
        bail!(Argument, "quadrature size must be a power of two ≥ 4, got {quadrature}");
    }
    if 4 * cutoff > quadrature {
        bail!(Aliasing, "cutoff {cutoff} exceeds a quarter of the quadrature size {quadrature}");
    }
    Ok(())
}

/// Trapezoidal quadrature of `a_{jk}(ν,ρ)` on `Q × Q` points of the torus.
pub fn fourier_coefficients(sigma: &Symbol, j: i32, k: i32, cutoff: usize, quadrature: usize) -> Result<CoefficientBlock> {
    check_quadrature(cutoff, quadrature)?;
    let q = quadrature;
    let t: Vec<f64> = (0..q).map(|m| -0.5 + m as f64 / q as f64).collect();
    let win: Vec<f64> = t.iter().map(|&x| phi_hat_j(-3, x)).collect();
    let (sx, sy) = (2f64.powi(j + 3), 2f64.powi(k + 3));
    let mut rows: Vec<Vec<C64>> = (0..q)
        .into_par_iter()
        .map(|m| {
            let mut row = vec![C64::new(0.0, 0.0); q];
            if win[m] != 0.0 {
                for (n, slot) in row.iter_mut().enumerate() {
                    if win[n] != 0.0 {
                        *slot = sigma.eval(sx * t[m], sy * t[n]) * (win[m] * win[n]);
                    }
                }
                fft_forward(&mut row);
            }
            row
        })
        .collect();
    // Column transforms on the rows' spectra, restricted to the kept ρ.
    let c = cutoff as i64;
    let keep: Vec<usize> = (-c..=c).map(|r| r.rem_euclid(q as i64) as usize).collect();
    let cols: Vec<Vec<C64>> = keep
        .iter()
        .map(|&r| {
            let mut col: Vec<C64> = rows.iter().map(|row| row[r]).collect();
            fft_forward(&mut col);
            col
        })
        .collect();
    rows.clear();
    let scale = 1.0 / (q * q) as f64;
    let mut data = Vec::with_capacity(keep.len() * keep.len());
    for (a, &nu) in keep.iter().enumerate() {
        for (b, col) in cols.iter().enumerate() {
            // t starts at −1/2, contributing e^{iπν} e^{iπρ}.
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            data.push(col[nu] * (scale * sign));
        }
    }
    Ok(CoefficientBlock { j, k, data })
}

/// Blocks for every `(j, k)` in the given index ranges.
pub fn coefficient_table(
    sigma: &Symbol,
    js: std::ops::RangeInclusive<i32>,
    ks: std::ops::RangeInclusive<i32>,
    cutoff: usize,
    quadrature: usize,
) -> Result<CoefficientTable> {
    check_quadrature(cutoff, quadrature)?;
    let pairs: Vec<(i32, i32)> = js.flat_map(|j| ks.clone().map(move |k| (j, k))).collect();
    let blocks = pairs
        .into_iter()
        .map(|(j, k)| fourier_coefficients(sigma, j, k, cutoff, quadrature))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientTable { cutoff, quadrature, interpolated: sigma.is_table(), blocks })
}

/// Partial sums of `τ^{ν,ρ}` at one point for every cutoff `0..=K`.
fn partial_sums(table: &CoefficientTable, cutoff: usize, xi: f64, eta: f64) -> Vec<C64> {
    let c = cutoff as i64;
    let mut out = vec![C64::new(0.0, 0.0); cutoff + 1];
    for b in &table.blocks {
        let (tx, sy) = (xi * 2f64.powi(-b.j - 3), eta * 2f64.powi(-b.k - 3));
        let w = zeta_hat(tx) * zeta_hat(sy);
        if w == 0.0 {
            continue;
        }
        let ex: Vec<C64> = (-c..=c).map(|v| C64::from_polar(1.0, std::f64::consts::TAU * v as f64 * tx)).collect();
        let ey: Vec<C64> = (-c..=c).map(|v| C64::from_polar(1.0, std::f64::consts::TAU * v as f64 * sy)).collect();
        let mut acc = C64::new(0.0, 0.0);
        for (shell, slot) in out.iter_mut().enumerate() {
            let s = shell as i64;
            for nu in -s..=s {
                for rho in -s..=s {
                    if nu.abs() == s || rho.abs() == s {
                        let a = b.get(nu, rho).expect("cutoff within block");
                        acc += a * ex[(nu + c) as usize] * ey[(rho + c) as usize];
                    }
                }
            }
            *slot += acc * w;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffError {
    pub cutoff: usize,
    pub sup_error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResynthesisReport {
    pub cutoff: usize,
    /// Sample points per axis.
    pub samples: usize,
    pub errors: Vec<CutoffError>,
    /// The sup error never increased with the cutoff.
    pub monotone: bool,
}

pub struct Resynthesis {
    pub symbol: Symbol,
    pub report: ResynthesisReport,
}

/// Sample frequencies `±2^{i + (l + 1/2)/s}` over the annuli `i` whose
/// breakup pieces are all present in an index range.
pub fn band_samples(range: std::ops::RangeInclusive<i32>, per_annulus: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for i in *range.start()..*range.end() {
        for l in 0..per_annulus {
            let x = 2f64.powf(i as f64 + (l as f64 + 0.5) / per_annulus as f64);
            out.push(x);
            out.push(-x);
        }
    }
    out
}

/// Points sampled per annulus per sign by [`resynthesize`].
pub const RESYNTHESIS_SAMPLES: usize = 4;

/// `Σ_{|ν|,|ρ| ≤ K} τ^{ν,ρ}` from a coefficient table, with the `ζ̂` windows
/// applied per `(j, k)` term and the lattice phase `e^{2πi 2^{−j−3} ξ ν}`.
/// The report compares against `σ` on the annuli fully covered by the table.
pub fn resynthesize(sigma: &Symbol, table: &CoefficientTable, cutoff: usize) -> Result<Resynthesis> {
    if cutoff > table.cutoff {
        bail!(Argument, "coefficients are only available to cutoff {}, asked for {cutoff}", table.cutoff);
    }
    if table.blocks.is_empty() {
        bail!(Argument, "coefficient table is empty");
    }
    let jr = table.blocks.iter().map(|b| b.j).min().unwrap()..=table.blocks.iter().map(|b| b.j).max().unwrap();
    let kr = table.blocks.iter().map(|b| b.k).min().unwrap()..=table.blocks.iter().map(|b| b.k).max().unwrap();
    for j in jr.clone() {
        for k in kr.clone() {
            if table.block(j, k).is_none() {
                bail!(Argument, "coefficient block ({j},{k}) is missing");
            }
        }
    }
    let xs = band_samples(jr, RESYNTHESIS_SAMPLES);
    let ys = band_samples(kr, RESYNTHESIS_SAMPLES);
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let errs: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(x, y)| {
            let target = sigma.eval(x, y);
            partial_sums(table, cutoff, x, y).into_iter().map(|s| (s - target).norm()).collect()
        })
        .collect();
    let errors: Vec<CutoffError> = (0..=cutoff)
        .map(|c| CutoffError { cutoff: c, sup_error: errs.iter().map(|e| e[c]).fold(0.0, f64::max) })
        .collect();
    let monotone = errors.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    let shared = Arc::new(table.clone());
    let symbol = Symbol::callable(
        sigma.grid(),
        Arc::new(move |x, y| partial_sums(&shared, cutoff, x, y)[cutoff]),
        SymbolMeta {
            provenance: format!("resynthesis K={cutoff} of {}", sigma.meta.provenance),
            support: sigma.meta.support.clone(),
            truncated: sigma.meta.truncated,
        },
    );
    Ok(Resynthesis {
        symbol,
        report: ResynthesisReport { cutoff, samples: xs.len().max(ys.len()), errors, monotone },
    })
}
