//! Weight sequences and the Lorentz sequence norms `d(w,1)` and its dual.
//!
//! Logarithms are base 2. For a non-increasing positive weight `w`,
//! `‖u‖_d = Σ_k w_k u*_k` and `‖v‖_{d*} = sup_k (v*_1+…+v*_k)/(w_1+…+w_k)`,
//! where `*` is the decreasing rearrangement of the moduli.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;

/// Compact description of a weight family, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    /// `w_k = (log(k+1))^{−θ}`
    Log { theta: f64 },
    /// `w_k = (log(k+1))^{−1} · max(log log(k+2), 1)^{−θ}`
    Loglog { theta: f64 },
    Explicit { values: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Log,
    Loglog,
    Explicit,
}

/// A materialised positive, non-increasing weight `w_1 ≥ w_2 ≥ …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    kind: WeightKind,
    theta: f64,
    values: Vec<f64>,
}

fn log_weight(k: usize, theta: f64) -> f64 {
    ((k + 1) as f64).log2().powf(-theta)
}

fn loglog_weight(k: usize, theta: f64) -> f64 {
    let inner = ((k + 2) as f64).log2().log2().max(1.0);
    ((k + 1) as f64).log2().recip() * inner.powf(-theta)
}

/// Materialise `length` terms of a `Log` or `Loglog` family.
pub fn make_weight(kind: WeightKind, theta: f64, length: usize) -> Result<WeightSequence> {
    if !(theta.is_finite() && theta > 0.0) {
        bail!(Argument, "theta must be positive, got {theta}");
    }
    if length == 0 {
        bail!(Argument, "weight length must be at least 1");
    }
    let values: Vec<f64> = match kind {
        WeightKind::Log => (1..=length).map(|k| log_weight(k, theta)).collect(),
        WeightKind::Loglog => (1..=length).map(|k| loglog_weight(k, theta)).collect(),
        WeightKind::Explicit => bail!(Argument, "explicit weights need values, use WeightSequence::explicit"),
    };
    WeightSequence::checked(kind, theta, values)
}

impl WeightSequence {
    fn checked(kind: WeightKind, theta: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            bail!(Argument, "weight sequence is empty");
        }
        if let Some(i) = values.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            bail!(Argument, "weight w_{} = {} is not positive", i + 1, values[i]);
        }
        if let Some(i) = values.windows(2).position(|p| p[1] > p[0]) {
            bail!(Argument, "weights increase at k = {}: {} < {}", i + 2, values[i], values[i + 1]);
        }
        Ok(Self { kind, theta, values })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::checked(WeightKind::Explicit, 0.0, values)
    }

    pub fn from_spec(spec: &WeightSpec, length: usize) -> Result<Self> {
        match spec {
            WeightSpec::Log { theta } => make_weight(WeightKind::Log, *theta, length),
            WeightSpec::Loglog { theta } => make_weight(WeightKind::Loglog, *theta, length),
            WeightSpec::Explicit { values } => {
                if length > values.len() {
                    bail!(Argument, "explicit weights have {} terms, {length} requested", values.len());
                }
                Self::explicit(values[..length.max(1).min(values.len())].to_vec())
            }
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `w_k`, 1-based.
    pub fn get(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Exponent of logarithmic decay tested by the first condition: `θ` for
    /// `Log`, `1` for `Loglog`, none for explicit weights.
    pub fn log_exponent(&self) -> f64 {
        match self.kind {
            WeightKind::Log => self.theta,
            WeightKind::Loglog => 1.0,
            WeightKind::Explicit => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub horizon: usize,
    /// Smallest `C` with `w_k ≤ C (log(j+1)/log(k+1))^θ w_j` for `j ≤ k ≤ horizon`.
    pub cdn1_ratio_bound: f64,
    /// `Σ_{k ≤ horizon} w_k / k`.
    pub cdn2_partial_sum: f64,
    /// `Σ_{2^m ≤ k < 2^{m+1}} w_k / k` for every complete dyadic block.
    pub cdn2_block_sums: Vec<f64>,
    /// Decay exponent `α` of a power-law fit `B_m ≈ c m^{−α}` over the last half of the blocks.
    pub cdn2_block_decay: Option<f64>,
    pub cdn1_flag: bool,
    pub cdn2_flag: bool,
}

/// Finite-horizon diagnostics for the logarithmic-decay and summability
/// conditions. The flags are heuristics, not proofs.
pub fn check_conditions(w: &WeightSequence, horizon: usize) -> Result<ConditionReport> {
    if horizon == 0 || horizon > w.len() {
        bail!(Argument, "horizon {horizon} outside 1..={}", w.len());
    }
    let theta = w.log_exponent();
    // With q_k = w_k log(k+1)^θ the ratio is q_k / q_j, maximised by the running minimum.
    let mut run_min = f64::INFINITY;
    let mut c1 = 0.0_f64;
    for k in 1..=horizon {
        let q = w.values[k - 1] * ((k + 1) as f64).log2().powf(theta);
        run_min = run_min.min(q);
        c1 = c1.max(q / run_min);
    }
    let partial: f64 = (1..=horizon).map(|k| w.values[k - 1] / k as f64).sum();
    let mut blocks = Vec::new();
    let mut m = 0;
    while (1usize << (m + 1)) - 1 <= horizon {
        let lo = 1usize << m;
        blocks.push((lo..2 * lo).map(|k| w.values[k - 1] / k as f64).sum::<f64>());
        m += 1;
    }
    let decay = block_decay(&blocks);
    let tail_decreasing = blocks.len() >= 2 && {
        let start = blocks.len() / 2;
        blocks[start.max(1) - 1..].windows(2).all(|p| p[1] < p[0])
    };
    Ok(ConditionReport {
        horizon,
        cdn1_ratio_bound: c1,
        cdn2_partial_sum: partial,
        cdn2_flag: tail_decreasing && decay.is_some_and(|a| a > 1.0),
        cdn2_block_sums: blocks,
        cdn2_block_decay: decay,
        cdn1_flag: theta > 0.0 && c1.is_finite(),
    })
}

/// Least-squares slope of `ln B_m` against `ln m` over the last half of the
/// blocks with `m ≥ 1`, negated.
fn block_decay(blocks: &[f64]) -> Option<f64> {
    let start = (blocks.len() / 2).max(1);
    let pts: Vec<(f64, f64)> = (start..blocks.len()).map(|m| ((m as f64).ln(), blocks[m].ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

fn rearranged(u: &[C64]) -> Vec<f64> {
    let mut m: Vec<f64> = u.iter().map(|z| z.norm()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    m
}

fn check_len(n: usize, w: &WeightSequence) -> Result<()> {
    if n > w.len() {
        bail!(Argument, "sequence of length {n} exceeds {} materialised weights", w.len());
    }
    Ok(())
}

/// `Σ_k w_k u*_k`.
pub fn d_norm(u: &[C64], w: &WeightSequence) -> Result<f64> {
    check_len(u.len(), w)?;
    Ok(rearranged(u).iter().zip(&w.values).map(|(a, b)| a * b).sum())
}

/// `max_k (v*_1+…+v*_k)/(w_1+…+w_k)`.
pub fn d_star_norm(v: &[C64], w: &WeightSequence) -> Result<f64> {
    check_len(v.len(), w)?;
    let mut sv = 0.0;
    let mut sw = 0.0;
    let mut best = 0.0_f64;
    for (a, b) in rearranged(v).iter().zip(&w.values) {
        sv += a;
        sw += b;
        best = best.max(sv / sw);
    }
    Ok(best)
}

/// Column and entrywise Lorentz functionals of a matrix, without the
/// unspecified absolute constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzBound {
    /// `max_k ‖a_k‖_{d*}` over the columns.
    pub column: f64,
    /// `max_{j,k} |a_{jk}| / w_{|j−k|+1}`.
    pub crude: f64,
}

pub fn lorentz_column_bound(a: &Matrix, w: &WeightSequence) -> Result<LorentzBound> {
    check_len(a.rows(), w)?;
    let mut column = 0.0_f64;
    for c in 0..a.cols() {
        let col: Vec<C64> = (0..a.rows()).map(|j| a.get(j, c)).collect();
        column = column.max(d_star_norm(&col, w)?);
    }
    let mut crude = 0.0_f64;
    for j in 0..a.rows() {
        for c in 0..a.cols() {
            let v = a.get(j, c).norm();
            if v == 0.0 {
                continue;
            }
            let d = (a.row_index(j) - a.col_index(c)).unsigned_abs() as usize + 1;
            let wd = w.get(d).ok_or_else(|| {
                crate::Error::Argument(format!("weight w_{d} needed but only {} materialised", w.len()))
            })?;
            crude = crude.max(v / wd);
        }
    }
    Ok(LorentzBound { column, crude })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn c(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    fn w3() -> WeightSequence {
        WeightSequence::explicit(vec![1.0, 0.5, 0.25]).unwrap()
    }

    #[test]
    fn log_weight_values() {
        let w = make_weight(WeightKind::Log, 1.0, 3).unwrap();
        assert_eq!(w.get(1), Some(1.0));
        assert_eq!(w.get(3), Some(0.5));
        assert_eq!(w.get(4), None);
    }

    #[test]
    fn loglog_is_finite_and_decreasing() {
        let w = make_weight(WeightKind::Loglog, 1.5, 5000).unwrap();
        assert_eq!(w.get(1), Some(1.0));
        assert!(w.values().windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(matches!(WeightSequence::explicit(vec![1.0, 2.0]), Err(Error::Argument(_))));
        assert!(matches!(WeightSequence::explicit(vec![1.0, 0.0]), Err(Error::Argument(_))));
        assert!(matches!(make_weight(WeightKind::Log, 0.0, 3), Err(Error::Argument(_))));
        assert!(matches!(make_weight(WeightKind::Log, 1.0, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn spec_json() {
        let s: WeightSpec = serde_json::from_str(r#"{"kind":"log","theta":2.0}"#).unwrap();
        assert_eq!(s, WeightSpec::Log { theta: 2.0 });
        let s: WeightSpec = serde_json::from_str(r#"{"kind":"loglog","theta":1.5}"#).unwrap();
        assert_eq!(s, WeightSpec::Loglog { theta: 1.5 });
        let s: WeightSpec = serde_json::from_str(r#"{"kind":"explicit","values":[1,0.5]}"#).unwrap();
        let w = WeightSequence::from_spec(&s, 2).unwrap();
        assert_eq!(w.values(), &[1.0, 0.5]);
        assert!(WeightSequence::from_spec(&s, 3).is_err());
    }

    #[test]
    fn d_norm_examples() {
        assert_eq!(d_norm(&c(&[3.0, 1.0, 2.0]), &w3()).unwrap(), 4.25);
        assert_eq!(d_norm(&[C64::new(0.0, -2.0)], &w3()).unwrap(), 2.0);
        assert_eq!(d_norm(&c(&[0.0, 0.0]), &w3()).unwrap(), 0.0);
        assert!(d_norm(&c(&[1.0; 4]), &w3()).is_err());
    }

    #[test]
    fn d_star_examples() {
        assert_eq!(d_star_norm(&c(&[2.0, 0.0, 1.0]), &w3()).unwrap(), 2.0);
        assert_eq!(d_star_norm(&c(&[0.0; 3]), &w3()).unwrap(), 0.0);
        assert_eq!(d_star_norm(&c(&[1.0, 0.5, 0.25]), &w3()).unwrap(), 1.0);
    }

    #[test]
    fn condition_examples() {
        let w = make_weight(WeightKind::Log, 2.0, 1 << 20).unwrap();
        let r = check_conditions(&w, 1 << 20).unwrap();
        assert!((r.cdn1_ratio_bound - 1.0).abs() < 1e-12);
        assert!(r.cdn2_block_sums.windows(2).all(|p| p[1] < p[0]));
        assert!(r.cdn1_flag && r.cdn2_flag);
        let w = make_weight(WeightKind::Log, 0.5, 1 << 20).unwrap();
        let r = check_conditions(&w, 1 << 20).unwrap();
        assert!(!r.cdn2_flag);
        let w = WeightSequence::explicit(vec![1.0; 1024]).unwrap();
        let r = check_conditions(&w, 1024).unwrap();
        assert_eq!(r.cdn1_ratio_bound, 1.0);
        assert!(!r.cdn1_flag && !r.cdn2_flag);
        assert!(check_conditions(&w, 2048).is_err());
    }

    #[test]
    fn column_bound_examples() {
        let w = w3();
        let z = lorentz_column_bound(&Matrix::zeros(3, 3), &w).unwrap();
        assert_eq!((z.column, z.crude), (0.0, 0.0));
        let col = Matrix::from_real_rows(&[vec![1.0], vec![0.5], vec![0.25]]).unwrap();
        assert_eq!(lorentz_column_bound(&col, &w).unwrap().column, 1.0);
        let band = Matrix::from_real_rows(&[vec![1.0, 0.5, 0.25], vec![0.5, 1.0, 0.5], vec![0.25, 0.5, 1.0]])
            .unwrap();
        assert_eq!(lorentz_column_bound(&band, &w).unwrap().crude, 1.0);
        let short = WeightSequence::explicit(vec![1.0, 0.5]).unwrap();
        assert!(lorentz_column_bound(&band, &short).is_err());
    }
}
