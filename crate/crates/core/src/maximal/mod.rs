//! Maximal-operator constants `h_p(A)`, their weak and mixed variants, the
//! bilinear constant `H(A)` and the discrete bilinear model `V_A`.
//!
//! For an `M × N` matrix `A` and a function `f` on a dyadic space,
//! `T_A f = (Σ_k a_{jk} Δ_k f)_j` and `h_p(A)` is the best constant in
//! `‖max_j |(T_A f)_j|‖_p ≤ h_p(A) ‖f‖_p`. Estimates are certified lower
//! bounds: each carries the witness that attains it.

mod bilinear;
mod engine;
mod operator;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSpace, SampleVector};
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;

pub use bilinear::{adversarial_pair, apply_va, AdversarialPair};
pub use engine::{estimate_h, evaluate_ratio};
pub use oracle::{exact_h2_oracle, ORACLE_LIMIT};

pub(crate) use operator::MaximalOperator;

/// Which maximal inequality is being measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// `‖max_j|T_j f|‖_p / ‖f‖_p`
    Strong { p: f64 },
    /// `‖max_j|T_j f|‖_{p,∞} / ‖f‖_p`
    Weak { p: f64 },
    /// `‖max_j|T_j f|‖_q / ‖f‖_p`
    Mixed { p: f64, q: f64 },
}

impl Mode {
    pub fn strong(p: f64) -> Self {
        Mode::Strong { p }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        let fine = match *self {
            Mode::Strong { p } | Mode::Weak { p } => ok(p),
            Mode::Mixed { p, q } => ok(p) && ok(q),
        };
        if !fine {
            bail!(Argument, "exponents must lie in (0, ∞): {self:?}");
        }
        Ok(())
    }

    /// Input exponent.
    pub fn p(&self) -> f64 {
        match *self {
            Mode::Strong { p } | Mode::Weak { p } | Mode::Mixed { p, .. } => p,
        }
    }

    /// Output exponent.
    pub fn q(&self) -> f64 {
        match *self {
            Mode::Strong { p } | Mode::Weak { p } => p,
            Mode::Mixed { q, .. } => q,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Bv,
    Lorentz,
    Trivial,
}

/// Which certified upper bounds to attach.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperRequest {
    #[default]
    None,
    Bv,
    Trivial,
    /// The smaller of all bounds valid for the mode.
    Best,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIterations,
    /// The operator vanishes; the estimate is exactly zero.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    /// `h_p`, `h_p^w` or `h_{p,q}` of a single matrix.
    Maximal { mode: Mode },
    /// `H(A) = h(A_L) + h(A_U^t) + ‖A‖_∞`.
    Bilinear { mode: Mode },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Depth of the dyadic space; defaults to the column count.
    pub levels: Option<usize>,
    pub upper: UpperRequest,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 200, tol: 1e-12, seed: 0, levels: None, upper: UpperRequest::None }
    }
}

impl EstimateOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            bail!(Argument, "restarts must be at least 1");
        }
        if self.max_iters == 0 {
            bail!(Argument, "max_iters must be at least 1");
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            bail!(Argument, "tol must be a nonnegative finite number");
        }
        Ok(())
    }
}

/// A certified lower bound together with the input that attains it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormEstimate {
    pub quantity: Quantity,
    pub lower_bound: f64,
    pub witness: Vec<SampleVector>,
    pub upper_bound: Option<f64>,
    pub upper_provenance: Option<Provenance>,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub status: Status,
}

impl NormEstimate {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Recompute the ratio attained by the stored witness.
    pub fn reevaluate(&self, a: &Matrix) -> Result<f64> {
        match self.quantity {
            Quantity::Maximal { mode } => {
                let f = self.witness.first().ok_or_else(|| crate::Error::Shape("missing witness".into()))?;
                evaluate_ratio(a, mode, f)
            }
            Quantity::Bilinear { mode } => {
                if self.witness.len() != 2 {
                    bail!(Shape, "bilinear estimate needs two witnesses, found {}", self.witness.len());
                }
                let lo = evaluate_ratio(&a.lower_triangle(), mode, &self.witness[0])?;
                let up = evaluate_ratio(&a.upper_triangle_transposed(), mode, &self.witness[1])?;
                Ok(lo + up + a.sup_norm())
            }
        }
    }
}

/// Variation bound `max_j Σ_{k=0}^{N} |a_{jk} − a_{j,k+1}|` with zero padding.
pub fn row_variation(a: &Matrix) -> f64 {
    let zero = C64::new(0.0, 0.0);
    (0..a.rows())
        .map(|j| {
            let row = a.row(j);
            let padded = std::iter::once(zero).chain(row.iter().copied()).chain(std::iter::once(zero));
            let shifted = row.iter().copied().chain(std::iter::once(zero));
            padded.zip(shifted).map(|(x, y)| (x - y).norm()).sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `2 · row_variation(A)`, a certified bound for `h_2(A)` (Doob constant 2).
pub fn bv_upper_bound(a: &Matrix) -> f64 {
    2.0 * row_variation(a)
}

/// Doob-certified variation bound for `h_p`, `p > 1`: `p/(p−1) · row_variation`.
pub fn bv_upper_bound_p(a: &Matrix, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        bail!(Argument, "variation bound needs 1 < p < ∞, got {p}");
    }
    Ok(p / (p - 1.0) * row_variation(a))
}

/// Orthogonality bound for `h_2`:
/// `min( sqrt(max_k Σ_j |a_jk|²), sqrt(Σ_k max_j |a_jk|²) )`.
pub fn trivial_upper_bound(a: &Matrix) -> f64 {
    let by_columns = (0..a.cols())
        .map(|c| (0..a.rows()).map(|j| a.get(j, c).norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
        .sqrt();
    let by_rows = (0..a.cols())
        .map(|c| (0..a.rows()).map(|j| a.get(j, c).norm_sqr()).fold(0.0, f64::max))
        .sum::<f64>()
        .sqrt();
    by_columns.min(by_rows)
}

/// Best certified upper bound valid for `mode`, if any.
pub(crate) fn upper_bound_for(a: &Matrix, mode: Mode, request: UpperRequest) -> Option<(f64, Provenance)> {
    let p = mode.p();
    // ‖F‖_{p,∞} ≤ ‖F‖_p and ‖F‖_q ≤ ‖F‖_p for q ≤ p on a probability space.
    let reducible = match mode {
        Mode::Strong { .. } | Mode::Weak { .. } => true,
        Mode::Mixed { p, q } => q <= p,
    };
    if !reducible {
        return None;
    }
    let bv = || bv_upper_bound_p(a, p).ok().map(|b| (b, Provenance::Bv));
    let triv = || (p == 2.0).then(|| (trivial_upper_bound(a), Provenance::Trivial));
    match request {
        UpperRequest::None => None,
        UpperRequest::Bv => bv(),
        UpperRequest::Trivial => triv(),
        UpperRequest::Best => match (bv(), triv()) {
            (Some(b), Some(t)) => Some(if t.0 <= b.0 { t } else { b }),
            (b, t) => b.or(t),
        },
    }
}

/// `H(A) = h(A_L) + h(A_U^t) + ‖A‖_∞`, assembled component-wise.
#[allow(non_snake_case)]
pub fn H_estimate(a: &Matrix, mode: Mode, opts: &EstimateOptions) -> Result<NormEstimate> {
    let lower = a.lower_triangle();
    let upper_t = a.upper_triangle_transposed();
    let el = estimate_h(&lower, mode, opts)?;
    let eu = estimate_h(&upper_t, mode, opts)?;
    let sup = a.sup_norm();
    let (upper_bound, upper_provenance) = match (el.upper_bound, eu.upper_bound) {
        (Some(x), Some(y)) => (Some(x + y + sup), el.upper_provenance.or(eu.upper_provenance)),
        _ => (None, None),
    };
    let status = match (el.status, eu.status) {
        (Status::MaxIterations, _) | (_, Status::MaxIterations) => Status::MaxIterations,
        (Status::Degenerate, Status::Degenerate) if sup == 0.0 => Status::Degenerate,
        _ => Status::Converged,
    };
    Ok(NormEstimate {
        quantity: Quantity::Bilinear { mode },
        lower_bound: el.lower_bound + eu.lower_bound + sup,
        witness: vec![el.witness[0].clone(), eu.witness[0].clone()],
        upper_bound,
        upper_provenance,
        iterations: el.iterations + eu.iterations,
        restarts: opts.restarts,
        seed: opts.seed,
        status,
    })
}

/// One point of a truncation sequence for a finitely supported matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncationPoint {
    pub size: usize,
    pub estimate: NormEstimate,
    /// Running supremum of the lower bounds up to this size.
    pub running_sup: f64,
}

/// Estimates of the leading `n × n` truncations for each `n` in `sizes`;
/// the running supremum is monotone by construction.
pub fn truncation_sequence(
    a: &Matrix,
    sizes: &[usize],
    mode: Mode,
    opts: &EstimateOptions,
) -> Result<Vec<TruncationPoint>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut sup = 0.0_f64;
    for &n in sizes {
        if n == 0 || n > a.rows() || n > a.cols() {
            bail!(Argument, "truncation size {n} outside 1..={}", a.rows().min(a.cols()));
        }
        let mut data = Vec::with_capacity(n * n);
        for j in 0..n {
            data.extend_from_slice(&a.row(j)[..n]);
        }
        let t = Matrix::with_offsets(n, n, a.row_offset(), a.col_offset(), data)?;
        let mut o = opts.clone();
        o.levels = opts.levels.map(|l| l.max(n));
        let estimate = estimate_h(&t, mode, &o)?;
        sup = sup.max(estimate.lower_bound);
        out.push(TruncationPoint { size: n, estimate, running_sup: sup });
    }
    Ok(out)
}

/// `T_A f`, one sample vector per row. Columns are placed at levels
/// `col_offset + c + 1`, which must lie in `1..=N`.
pub fn apply_ta(a: &Matrix, f: &SampleVector) -> Result<Vec<SampleVector>> {
    let op = MaximalOperator::with_offsets(a, f.space())?;
    op.apply(f.values()).into_iter().map(SampleVector::new).collect()
}

/// Pointwise `max_j |(T_A f)_j|`.
pub fn maximal_function(a: &Matrix, f: &SampleVector) -> Result<SampleVector> {
    let op = MaximalOperator::with_offsets(a, f.space())?;
    let (values, _) = op.maximal(f.values());
    if a.rows() == 0 {
        return Ok(SampleVector::zeros(f.space()));
    }
    SampleVector::from_real(&values)
}

pub(crate) fn default_space(a: &Matrix, levels: Option<usize>) -> Result<DyadicSpace> {
    let need = a.cols().max(1);
    let levels = levels.unwrap_or(need);
    if levels < a.cols() {
        bail!(Argument, "{} columns need at least {} levels, got {levels}", a.cols(), a.cols());
    }
    DyadicSpace::new(levels)
}
