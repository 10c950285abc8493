use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::harmonic::Symbol;
use crate::matrix::Matrix;
use crate::maximal::{estimate_h, EstimateOptions, Mode};
use crate::numeric::C64;

/// Exact partial derivative `∂^order σ` along an axis (0 for `ξ`, 1 for `η`).
pub type DerivativeFn = Arc<dyn Fn(usize, usize, f64, f64) -> C64 + Send + Sync>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HNormOptions {
    /// `J`: the sampled matrix is indexed by `−J..=J` on both axes.
    pub index_range: usize,
    /// Log-uniform points on `[1, 2)` per sign and axis.
    pub samples: usize,
    /// Derivative order `N`; 0 gives the plain sampled norm.
    pub order: usize,
    pub estimate: EstimateOptions,
}

impl Default for HNormOptions {
    fn default() -> Self {
        Self { index_range: 3, samples: 4, order: 0, estimate: EstimateOptions { restarts: 4, ..Default::default() } }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RangeValue {
    pub index_range: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HNormReport {
    /// Sampled supremum at the full index range; a lower estimate of the true
    /// supremum.
    pub value: f64,
    /// Values for index ranges `1..=J`.
    pub by_range: Vec<RangeValue>,
    pub points: usize,
    pub order: usize,
    /// A tabulated symbol was evaluated off the grid by interpolation.
    pub interpolated: bool,
    /// Derivatives came from central differences.
    pub finite_differences: bool,
    /// `(ξ, η)` where the sampled supremum was attained.
    pub argmax: (f64, f64),
}

fn drop_zero_lines(a: &Matrix) -> Option<Matrix> {
    let rows: Vec<usize> = (0..a.rows()).filter(|&i| a.row(i).iter().any(|z| z.norm() != 0.0)).collect();
    let cols: Vec<usize> = (0..a.cols()).filter(|&c| (0..a.rows()).any(|i| a.get(i, c).norm() != 0.0)).collect();
    if rows.is_empty() {
        return None;
    }
    let data = rows.iter().flat_map(|&i| cols.iter().map(move |&c| a.get(i, c))).collect();
    Some(Matrix::new(rows.len(), cols.len(), data).expect("sizes agree"))
}

/// `h(A_L) + h(A_U^t) + ‖A‖_∞` with zero rows and columns removed from each
/// triangle first, which leaves `h` unchanged.
pub fn h_functional(a: &Matrix, opts: &EstimateOptions) -> Result<f64> {
    let mut total = a.sup_norm();
    for part in [a.lower_triangle(), a.upper_triangle_transposed()] {
        if let Some(t) = drop_zero_lines(&part) {
            total += estimate_h(&t, Mode::strong(2.0), opts)?.lower_bound;
        }
    }
    Ok(total)
}

/// `(σ(2^j ξ, 2^k η))_{|j|,|k| ≤ J}`.
pub fn sampled_matrix(f: &dyn Fn(f64, f64) -> C64, xi: f64, eta: f64, range: usize) -> Matrix {
    let r = range as i32;
    let data = (-r..=r)
        .flat_map(|j| (-r..=r).map(move |k| (j, k)))
        .map(|(j, k)| f(2f64.powi(j) * xi, 2f64.powi(k) * eta))
        .collect();
    let off = -(range as i64) - 1;
    Matrix::with_offsets(2 * range + 1, 2 * range + 1, off, off, data).expect("finite symbol values")
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `|x|^a ∂^a σ` along one axis by central differences with step `1e−4 |x|`.
fn finite_difference(s: &Symbol, axis: usize, order: usize, xi: f64, eta: f64) -> C64 {
    if order == 0 {
        return s.eval(xi, eta);
    }
    let x = if axis == 0 { xi } else { eta };
    let h = 1e-4 * x.abs();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..=order {
        let off = (order as f64 / 2.0 - i as f64) * h;
        let v = if axis == 0 { s.eval(xi + off, eta) } else { s.eval(xi, eta + off) };
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += v * (sign * binomial(order, i));
    }
    // h^a cancels against |x|^a up to the 1e−4 factor.
    acc * 1e4f64.powi(order as i32)
}

/// Sampled `‖σ‖_H`, or `‖σ‖_H^{(N)}` when `opts.order ≥ 1`.
///
/// `(ξ, η)` runs over `±2^{i/S}`, `i < S`, on each axis. For each point the
/// matrix `(σ(2^j ξ, 2^k η))_{j,k}` is formed for `|j|, |k| ≤ J` and its `H`
/// functional estimated; the maximum over points is reported for every
/// `J' ≤ J`.
pub fn h_norm_estimate(sigma: &Symbol, opts: &HNormOptions, derivatives: Option<DerivativeFn>) -> Result<HNormReport> {
    if opts.index_range == 0 || opts.samples == 0 {
        bail!(Argument, "index range and sample count must be at least 1");
    }
    opts.estimate.validate()?;
    let s = opts.samples;
    let axis: Vec<f64> =
        (0..s).map(|i| 2f64.powf(i as f64 / s as f64)).flat_map(|x| [x, -x]).collect();
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&x| axis.iter().map(move |&y| (x, y))).collect();
    // Every (axis, order) term of the derivative-weighted sum, order 0 included
    // once per axis.
    let terms: Vec<(usize, usize)> = (0..2).flat_map(|ax| (0..=opts.order).map(move |a| (ax, a))).collect();
    let plain = opts.order == 0;
    let eval_term = |ax: usize, a: usize, x: f64, y: f64| -> C64 {
        if a == 0 {
            return sigma.eval(x, y);
        }
        match &derivatives {
            Some(d) => {
                let scale = if ax == 0 { x.abs() } else { y.abs() }.powi(a as i32);
                d(ax, a, x, y) * scale
            }
            None => finite_difference(sigma, ax, a, x, y),
        }
    };
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(x, y)| {
            (1..=opts.index_range)
                .map(|range| {
                    let list: &[(usize, usize)] = if plain { &terms[..1] } else { &terms };
                    list.iter().try_fold(0.0, |acc, &(ax, a)| {
                        let m = sampled_matrix(&|u, v| eval_term(ax, a, u, v), x, y, range);
                        Ok::<f64, crate::Error>(acc + h_functional(&m, &opts.estimate)?)
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let by_range: Vec<RangeValue> = (0..opts.index_range)
        .map(|r| RangeValue { index_range: r + 1, value: values.iter().map(|v| v[r]).fold(0.0, f64::max) })
        .collect();
    let last = opts.index_range - 1;
    let best = (0..points.len()).fold(0, |b, i| if values[i][last] > values[b][last] { i } else { b });
    Ok(HNormReport {
        value: by_range[last].value,
        by_range,
        points: points.len(),
        order: opts.order,
        interpolated: sigma.is_table(),
        finite_differences: opts.order > 0 && derivatives.is_none(),
        argmax: points[best],
    })
}
