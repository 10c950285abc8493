use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bumps::{phi_hat_j, psi_hat_j};
use super::grid::{GridFunction, PeriodicGrid};
use crate::error::{bail, Result};
use crate::numeric::{fft_forward, fft_inverse, stream_rng, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpVariant {
    /// `Δ̃_j`: multiply by `φ̂(2^{−j}ξ)`.
    Delta,
    /// `S̃_j`: multiply by `ψ̂(2^{−j}ξ)`.
    PartialSum,
}

/// A grid operator output with a flag telling whether the band was fully
/// resolved by the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Banded {
    pub function: GridFunction,
    pub faithful: bool,
}

/// Littlewood-Paley projection. Indices outside the grid band give the zero
/// function (or, for partial sums above the band, the identity) and are
/// flagged as not faithful.
pub fn lp_project(f: &GridFunction, j: i32, variant: LpVariant) -> Banded {
    let grid = f.grid();
    let function = match variant {
        LpVariant::Delta => f.multiply_spectrum(|xi| phi_hat_j(j, xi)),
        LpVariant::PartialSum => f.multiply_spectrum(|xi| psi_hat_j(j, xi)),
    };
    let faithful = match variant {
        LpVariant::Delta => grid.is_faithful(j),
        // ψ̂(2^{−j}·) needs its transition 2^j ≤ |ξ| ≤ 2^{j+1} resolved.
        LpVariant::PartialSum => grid.is_faithful(j) || grid.is_faithful(j + 1),
    };
    Banded { function, faithful }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MartVariant {
    Expectation,
    Difference,
}

fn block_average(values: &[C64], cell: usize) -> Vec<C64> {
    let inv = 1.0 / cell as f64;
    values
        .chunks_exact(cell)
        .flat_map(|c| {
            let m = c.iter().sum::<C64>() * inv;
            std::iter::repeat_n(m, cell)
        })
        .collect()
}

fn cell_points(grid: PeriodicGrid, k: i32) -> Result<usize> {
    if !grid.martingale_levels().contains(&k) {
        let r = grid.martingale_levels();
        bail!(Argument, "level {k} does not align with the grid (levels {}..={})", r.start(), r.end());
    }
    Ok(1usize << (grid.log_resolution() - k))
}

/// `E_k f` over dyadic cells of side `2^{−k}` anchored at 0, or
/// `Δ_k f = E_k f − E_{k−1} f`.
pub fn grid_mart_diff(f: &GridFunction, k: i32, variant: MartVariant) -> Result<GridFunction> {
    let grid = f.grid();
    let fine = block_average(f.values(), cell_points(grid, k)?);
    match variant {
        MartVariant::Expectation => GridFunction::new(grid, fine),
        MartVariant::Difference => {
            let coarse = block_average(f.values(), cell_points(grid, k - 1)?);
            GridFunction::new(grid, fine.iter().zip(&coarse).map(|(a, b)| a - b).collect())
        }
    }
}

fn mart_diff_raw(values: &[C64], grid: PeriodicGrid, k: i32) -> Vec<C64> {
    let b = grid.log_resolution();
    let fine = block_average(values, 1 << (b - k));
    let coarse = block_average(values, 1 << (b - k + 1));
    fine.iter().zip(&coarse).map(|(a, b)| a - b).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossKind {
    /// `Δ_k ∘ Δ̃_j`.
    MartThenLp { k: i32, j: i32 },
    /// `V_r = Σ_j Δ_j Δ̃_{j+r}` over all martingale differences of the grid.
    Vr { r: i32 },
    /// `V_r^* = Σ_j Δ̃_{j+r} Δ_j`.
    VrAdjoint { r: i32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for CrossOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 20_000, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossNorm {
    pub kind: CrossKind,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Every Littlewood-Paley index involved is resolved by the grid.
    pub faithful: bool,
}

struct CrossOperator {
    grid: PeriodicGrid,
    kind: CrossKind,
    freqs: Vec<f64>,
}

impl CrossOperator {
    fn mart_range(&self) -> std::ops::RangeInclusive<i32> {
        let r = self.grid.martingale_levels();
        r.start() + 1..=*r.end()
    }

    fn lp(&self, values: &[C64], j: i32) -> Vec<C64> {
        let mut c = values.to_vec();
        fft_forward(&mut c);
        let inv = 1.0 / c.len() as f64;
        for (z, &xi) in c.iter_mut().zip(&self.freqs) {
            *z *= phi_hat_j(j, xi) * inv;
        }
        fft_inverse(&mut c);
        c
    }

    fn apply(&self, x: &[C64], adjoint: bool) -> Vec<C64> {
        let g = self.grid;
        let (r, adj) = match self.kind {
            CrossKind::MartThenLp { k, j } => {
                return if adjoint {
                    self.lp(&mart_diff_raw(x, g, k), j)
                } else {
                    mart_diff_raw(&self.lp(x, j), g, k)
                };
            }
            CrossKind::Vr { r } => (r, adjoint),
            CrossKind::VrAdjoint { r } => (r, !adjoint),
        };
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        if !adj {
            let mut spec = x.to_vec();
            fft_forward(&mut spec);
            let inv = 1.0 / spec.len() as f64;
            for j in self.mart_range() {
                let mut c: Vec<C64> =
                    spec.iter().zip(&self.freqs).map(|(&z, &xi)| z * (phi_hat_j(j + r, xi) * inv)).collect();
                if c.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                fft_inverse(&mut c);
                for (o, d) in out.iter_mut().zip(mart_diff_raw(&c, g, j)) {
                    *o += d;
                }
            }
        } else {
            let mut acc = vec![C64::new(0.0, 0.0); x.len()];
            for j in self.mart_range() {
                let mut d = mart_diff_raw(x, g, j);
                fft_forward(&mut d);
                for ((a, z), &xi) in acc.iter_mut().zip(&d).zip(&self.freqs) {
                    *a += z * phi_hat_j(j + r, xi);
                }
            }
            let inv = 1.0 / acc.len() as f64;
            acc.iter_mut().for_each(|z| *z *= inv);
            fft_inverse(&mut acc);
            out = acc;
        }
        out
    }

    fn faithful(&self) -> bool {
        match self.kind {
            CrossKind::MartThenLp { j, .. } => self.grid.is_faithful(j),
            CrossKind::Vr { r } | CrossKind::VrAdjoint { r } => {
                let band = self.grid.lp_band();
                self.mart_range().all(|j| !band.contains(&(j + r)) || self.grid.is_faithful(j + r))
            }
        }
    }
}

/// Operator norm on `L_2` of the grid by power iteration on `T^*T`.
pub fn cross_norm(kind: CrossKind, grid: PeriodicGrid, opts: &CrossOptions) -> Result<CrossNorm> {
    if let CrossKind::MartThenLp { k, .. } = kind {
        if !(grid.martingale_levels().start() + 1..=*grid.martingale_levels().end()).contains(&k) {
            bail!(Argument, "martingale level {k} outside the grid");
        }
    }
    if !(opts.tol >= 0.0 && opts.max_iters > 0) {
        bail!(Argument, "cross-norm needs tol ≥ 0 and max_iters ≥ 1");
    }
    let op = CrossOperator { grid, kind, freqs: grid.frequencies() };
    let mut rng = stream_rng(opts.seed, 0);
    let mut x: Vec<C64> =
        (0..grid.points()).map(|_| C64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
    crate::numeric::normalize(&mut x);
    let mut value = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iters {
        iterations += 1;
        let y = op.apply(&x, false);
        let mut z = op.apply(&y, true);
        // ‖T x‖² for unit x; this Rayleigh quotient only increases.
        let next = crate::numeric::l2_norm(&y);
        if crate::numeric::normalize(&mut z) == 0.0 {
            value = 0.0;
            converged = true;
            break;
        }
        x = z;
        let done = (next - value).abs() <= opts.tol * next;
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(CrossNorm { kind, value, iterations, converged, faithful: op.faithful() })
}
