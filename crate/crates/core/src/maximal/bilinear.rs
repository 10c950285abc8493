//! The discrete bilinear model `V_A(f,g) = Σ_{j,k} a_{jk} Δ_j f Δ_k g` and the
//! stopping-time construction of an adversarial second argument.

use serde::{Deserialize, Serialize};

use crate::dyadic::{all_differences, SampleVector};
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;

fn level(index: i64, levels: usize, what: &str) -> Result<usize> {
    if index < 1 || index > levels as i64 {
        bail!(Shape, "{what} index {index} outside filtration levels 1..={levels}");
    }
    Ok(index as usize)
}

/// Pointwise `Σ_{j,k} a_{jk} (Δ_j f)(ω) (Δ_k g)(ω)`; row indices act on `f`,
/// column indices on `g`.
pub fn apply_va(a: &Matrix, f: &SampleVector, g: &SampleVector) -> Result<SampleVector> {
    let space = f.space();
    if g.space() != space {
        bail!(Shape, "V_A arguments live on different spaces");
    }
    let n = space.levels();
    let rl = (0..a.rows()).map(|i| level(a.row_index(i), n, "row")).collect::<Result<Vec<_>>>()?;
    let cl = (0..a.cols()).map(|c| level(a.col_index(c), n, "column")).collect::<Result<Vec<_>>>()?;
    let df = all_differences(f.values(), space);
    let dg = all_differences(g.values(), space);
    let mut out = vec![C64::new(0.0, 0.0); space.atoms()];
    for (i, &j) in rl.iter().enumerate() {
        // Σ_k a_jk Δ_k g, then multiply by Δ_j f.
        let mut inner = vec![C64::new(0.0, 0.0); space.atoms()];
        for (c, &k) in cl.iter().enumerate() {
            let aij = a.get(i, c);
            if aij != C64::new(0.0, 0.0) {
                for (s, d) in inner.iter_mut().zip(&dg[k - 1]) {
                    *s += aij * d;
                }
            }
        }
        for ((o, s), d) in out.iter_mut().zip(&inner).zip(&df[j - 1]) {
            *o += s * d;
        }
    }
    SampleVector::new(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdversarialPair {
    pub g: SampleVector,
    /// `λ · P(max_j |f_j| > λ)^{1/2} / ‖f‖_2`.
    pub certified: f64,
    /// `‖V_A(g, f)‖_1 / (‖f‖_2 ‖g‖_2)`, with `g` in the row slot.
    pub evaluated: f64,
    /// `P(max_j |f_j| > λ)`, which equals `‖g‖_2²`.
    pub level_set_mass: f64,
}

/// Stopping-time adversary for a strictly lower-triangular `a`.
///
/// With `f_j = Σ_{k<j} a_{jk} Δ_k f` (which is `Σ_{j−1}`-measurable), `τ(ω)`
/// is the first row index with `|f_j(ω)| > λ`. On each stopped
/// `Σ_{τ−1}`-block `g` is the Haar sign at level `τ` (`+1` on the first half,
/// `−1` on the second), and `g = 0` where no row passes `λ`.
pub fn adversarial_pair(a: &Matrix, f: &SampleVector, lambda: f64) -> Result<AdversarialPair> {
    if !(lambda.is_finite() && lambda > 0.0) {
        bail!(Argument, "λ must be positive and finite, got {lambda}");
    }
    for i in 0..a.rows() {
        for c in 0..a.cols() {
            if a.get(i, c) != C64::new(0.0, 0.0) && a.col_index(c) >= a.row_index(i) {
                bail!(
                    Argument,
                    "matrix is not strictly lower-triangular: a[{},{}] ≠ 0",
                    a.row_index(i),
                    a.col_index(c)
                );
            }
        }
    }
    let norm_f = f.norm(2.0);
    if norm_f == 0.0 {
        bail!(Argument, "f must be nonzero");
    }
    let space = f.space();
    let n = space.levels();
    let rl = (0..a.rows()).map(|i| level(a.row_index(i), n, "row")).collect::<Result<Vec<_>>>()?;
    (0..a.cols()).try_for_each(|c| level(a.col_index(c), n, "column").map(|_| ()))?;
    let rows = super::apply_ta(a, f)?;
    let mut order: Vec<usize> = (0..a.rows()).collect();
    order.sort_by_key(|&i| rl[i]);
    let mut g = vec![C64::new(0.0, 0.0); space.atoms()];
    let mut stopped = 0usize;
    for w in 0..space.atoms() {
        if let Some(&i) = order.iter().find(|&&i| rows[i].values()[w].norm() > lambda) {
            let j = rl[i];
            // Position of ω inside its Σ_{j−1} block.
            let half = space.block_len(j);
            let first = (w / half).is_multiple_of(2);
            g[w] = C64::new(if first { 1.0 } else { -1.0 }, 0.0);
            stopped += 1;
        }
    }
    let g = SampleVector::new(g)?;
    let mass = stopped as f64 * space.atom_mass();
    if stopped == 0 {
        return Ok(AdversarialPair { g, certified: 0.0, evaluated: 0.0, level_set_mass: 0.0 });
    }
    let v = apply_va(a, &g, f)?;
    let evaluated = v.norm(1.0) / (norm_f * g.norm(2.0));
    Ok(AdversarialPair { g, certified: lambda * mass.sqrt() / norm_f, evaluated, level_set_mass: mass })
}
