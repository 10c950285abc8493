//! Brute-force `h_2` on tiny instances: every selector map is enumerated and
//! the top singular value of the dense operator `T_s` is taken directly.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dyadic::DyadicSpace;
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;

/// Largest number of selector maps the oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 1_000_000;

/// Dense `Δ_k` on `2^N` atoms, built straight from the block structure.
fn difference_matrix(space: DyadicSpace, k: usize) -> Vec<Vec<f64>> {
    let atoms = space.atoms();
    let fine = space.block_len(k);
    let coarse = space.block_len(k - 1);
    (0..atoms)
        .map(|w| {
            (0..atoms)
                .map(|v| {
                    let a = if w / fine == v / fine { 1.0 / fine as f64 } else { 0.0 };
                    let b = if w / coarse == v / coarse { 1.0 / coarse as f64 } else { 0.0 };
                    a - b
                })
                .collect()
        })
        .collect()
}

/// Exact `h_2(A)` on `space`, columns on levels `1..=cols`.
///
/// Complex matrices are handled by complex singular values, so no phase
/// discretisation is involved.
pub fn exact_h2_oracle(a: &Matrix, space: DyadicSpace) -> Result<f64> {
    let atoms = space.atoms();
    if a.cols() > space.levels() {
        bail!(Shape, "{} columns exceed {} levels", a.cols(), space.levels());
    }
    if a.rows() == 0 {
        return Ok(0.0);
    }
    let count = (a.rows() as f64).powi(atoms as i32);
    if count > ORACLE_LIMIT as f64 {
        bail!(Size, "{} selector maps exceed the oracle limit of {ORACLE_LIMIT}", count);
    }
    let count = count as u64;
    let deltas: Vec<Vec<Vec<f64>>> = (1..=a.cols()).map(|k| difference_matrix(space, k)).collect();
    // rows[j][w] = row w of the operator f ↦ (T_A f)_j.
    let rows: Vec<Vec<Vec<C64>>> = (0..a.rows())
        .map(|j| {
            (0..atoms)
                .map(|w| {
                    (0..atoms)
                        .map(|v| (0..a.cols()).map(|c| a.get(j, c) * deltas[c][w][v]).sum())
                        .collect()
                })
                .collect()
        })
        .collect();
    let m = a.rows() as u64;
    let real = a.is_real();
    let best = (0..count)
        .into_par_iter()
        .map(|code| {
            let mut sel = vec![0usize; atoms];
            let mut c = code;
            for s in sel.iter_mut() {
                *s = (c % m) as usize;
                c /= m;
            }
            if real {
                let t = DMatrix::from_fn(atoms, atoms, |w, v| rows[sel[w]][w][v].re);
                t.singular_values().max()
            } else {
                let t = DMatrix::from_fn(atoms, atoms, |w, v| rows[sel[w]][w][v]);
                t.singular_values().max()
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
