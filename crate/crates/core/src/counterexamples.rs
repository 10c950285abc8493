//! Sign-pattern matrices, the Rademacher extremal function and banded
//! weight matrices.

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicSpace, SampleVector};
use crate::error::{bail, Result};
use crate::lorentz::WeightSequence;
use crate::matrix::Matrix;
use crate::maximal::MaximalOperator;
use crate::numeric::C64;

pub const SIGN_MATRIX_MAX: usize = 20;
pub const VERIFY_MAX: usize = 14;

/// `2^n × n` matrix whose rows run through all sign patterns, scaled by
/// `n^{−θ}`. Rows count in binary with the first column as the most
/// significant bit; a `0` bit is `+1`.
pub fn sign_matrix(n: usize, theta: f64) -> Result<Matrix> {
    if n == 0 {
        bail!(Argument, "sign matrix needs n ≥ 1");
    }
    if n > SIGN_MATRIX_MAX {
        bail!(Size, "sign matrix with n = {n} exceeds limit {SIGN_MATRIX_MAX}");
    }
    if !theta.is_finite() {
        bail!(Argument, "theta must be finite");
    }
    let scale = (n as f64).powf(-theta);
    let rows = 1usize << n;
    let data = (0..rows)
        .flat_map(|r| (0..n).map(move |c| if (r >> (n - 1 - c)) & 1 == 0 { scale } else { -scale }))
        .map(|v| C64::new(v, 0.0))
        .collect();
    Matrix::new(rows, n, data)
}

/// `Σ_k r_k` with `r_k(ω) = +1` when bit `N−k` of `ω` is 0 and `−1`
/// otherwise, so `Δ_k f = r_k` and `‖f‖_2 = √N`.
pub fn rademacher_witness(space: DyadicSpace) -> SampleVector {
    let n = space.levels();
    let values = (0..space.atoms())
        .map(|w| {
            let ones = (w as u64).count_ones() as f64;
            C64::new(n as f64 - 2.0 * ones, 0.0)
        })
        .collect();
    SampleVector::new(values).expect("power-of-two length")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub theta: f64,
    pub rows: usize,
    pub cols: usize,
    /// `‖max_j |T_j f|‖_2 / ‖f‖_2` at the Rademacher witness.
    pub ratio: f64,
    /// `N^{1/2 − θ}`.
    pub target: f64,
    pub exact_match: bool,
}

impl CounterexampleReport {
    pub const CSV_HEADER: [&'static str; 5] = ["N", "theta", "ratio", "target", "match"];

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.n.to_string(),
            self.theta.to_string(),
            self.ratio.to_string(),
            self.target.to_string(),
            self.exact_match.to_string(),
        ]
    }
}

/// Evaluate the sign matrix at the Rademacher witness on `2^n` atoms.
pub fn verify_counterexample(n: usize, theta: f64) -> Result<CounterexampleReport> {
    if n > VERIFY_MAX {
        bail!(Size, "verification with n = {n} exceeds the budget n ≤ {VERIFY_MAX}");
    }
    let a = sign_matrix(n, theta)?;
    let space = DyadicSpace::new(n)?;
    let f = rademacher_witness(space);
    let op = MaximalOperator::with_offsets(&a, space)?;
    let (mf, _) = op.maximal(f.values());
    let mf = SampleVector::from_real(&mf)?;
    let ratio = mf.norm(2.0) / f.norm(2.0);
    let target = (n as f64).powf(0.5 - theta);
    Ok(CounterexampleReport {
        n,
        theta,
        rows: a.rows(),
        cols: a.cols(),
        ratio,
        target,
        exact_match: (ratio - target).abs() <= 1e-9 * target.max(1.0),
    })
}

/// Symmetric Toeplitz matrix `a_{jk} = w_{|j−k|+1}`.
pub fn band_matrix(w: &WeightSequence, size: usize) -> Result<Matrix> {
    if size == 0 {
        bail!(Argument, "band size must be at least 1");
    }
    if size > w.len() {
        bail!(Argument, "band of size {size} needs {size} weights, {} materialised", w.len());
    }
    let v = w.values();
    let data = (0..size)
        .flat_map(|j| (0..size).map(move |k| C64::new(v[j.abs_diff(k)], 0.0)))
        .collect();
    Matrix::new(size, size, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn real(m: &Matrix) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|j| m.row(j).iter().map(|z| z.re).collect()).collect()
    }

    #[test]
    fn sign_matrix_examples() {
        let a = sign_matrix(2, 0.0).unwrap();
        assert_eq!(real(&a), vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]);
        assert_eq!(real(&sign_matrix(1, 0.0).unwrap()), vec![vec![1.0], vec![-1.0]]);
        let a = sign_matrix(5, 0.3).unwrap();
        for j in 0..a.rows() {
            for c in 0..a.cols() {
                let v = a.get(j, c).norm();
                let d = (a.row_index(j) - a.col_index(c)).abs() as f64;
                assert!((v - 5f64.powf(-0.3)).abs() < 1e-15);
                assert!(v <= 2.0 * (2.0 + d).log2().powf(-0.3) + 1e-15);
            }
        }
        assert!(matches!(sign_matrix(21, 0.0), Err(Error::Size(_))));
    }

    #[test]
    fn witness_examples() {
        let f = rademacher_witness(DyadicSpace::new(1).unwrap());
        assert_eq!(f, SampleVector::from_real(&[1.0, -1.0]).unwrap());
        let f = rademacher_witness(DyadicSpace::new(2).unwrap());
        assert_eq!(f, SampleVector::from_real(&[2.0, 0.0, 0.0, -2.0]).unwrap());
        assert!((f.norm(2.0) - 2f64.sqrt()).abs() < 1e-15);
        for n in 1..8 {
            let f = rademacher_witness(DyadicSpace::new(n).unwrap());
            assert!((f.norm(2.0) - (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_examples() {
        let r = verify_counterexample(4, 0.25).unwrap();
        assert!((r.ratio - 2f64.sqrt()).abs() < 1e-9 && r.exact_match);
        assert!((verify_counterexample(1, 0.7).unwrap().ratio - 1.0).abs() < 1e-12);
        assert!((verify_counterexample(9, 0.0).unwrap().ratio - 3.0).abs() < 1e-9);
        assert!(matches!(verify_counterexample(15, 0.0), Err(Error::Size(_))));
    }

    #[test]
    fn band_examples() {
        let w = WeightSequence::explicit(vec![1.0, 0.5, 0.25]).unwrap();
        assert_eq!(real(&band_matrix(&w, 1).unwrap()), vec![vec![1.0]]);
        assert_eq!(
            real(&band_matrix(&w, 3).unwrap()),
            vec![vec![1.0, 0.5, 0.25], vec![0.5, 1.0, 0.5], vec![0.25, 0.5, 1.0]]
        );
        assert!(band_matrix(&w, 4).is_err());
    }
}
