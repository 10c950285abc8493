//! The finite dyadic probability space.
//!
//! `DyadicSpace { levels: N }` has `2^N` atoms of mass `2^{-N}`, indexed
//! `0..2^N`. The level-`k` σ-algebra `Σ_k` is generated by the `2^k`
//! contiguous blocks of `2^{N-k}` atoms, so `E_k` is a strided block mean.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::numeric::{is_power_of_two, pairs, weighted_p_norm, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicSpace {
    levels: usize,
}

impl DyadicSpace {
    /// Largest supported depth (2^26 atoms).
    pub const MAX_LEVELS: usize = 26;

    pub fn new(levels: usize) -> Result<Self> {
        if levels > Self::MAX_LEVELS {
            bail!(Size, "dyadic space with {levels} levels exceeds limit {}", Self::MAX_LEVELS);
        }
        Ok(Self { levels })
    }

    /// Space implied by a vector length, which must be a power of two.
    pub fn from_len(len: usize) -> Result<Self> {
        if !is_power_of_two(len) {
            bail!(Shape, "length {len} is not a power of two");
        }
        Self::new(len.trailing_zeros() as usize)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn atoms(&self) -> usize {
        1 << self.levels
    }

    pub fn atom_mass(&self) -> f64 {
        1.0 / self.atoms() as f64
    }

    /// Number of atoms in one `Σ_k` block.
    pub fn block_len(&self, k: usize) -> usize {
        1 << (self.levels - k)
    }

    /// Index of the `Σ_k` block containing `atom`.
    pub fn block_of(&self, atom: usize, k: usize) -> usize {
        atom >> (self.levels - k)
    }

    fn check_level(&self, k: usize, lo: usize) -> Result<()> {
        if k < lo || k > self.levels {
            bail!(Index, "level {k} outside {lo}..={}", self.levels);
        }
        Ok(())
    }
}

/// A complex function on the atoms of a [`DyadicSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVector {
    space: DyadicSpace,
    values: Vec<C64>,
}

impl SampleVector {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        let space = DyadicSpace::from_len(values.len())?;
        Ok(Self { space, values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn zeros(space: DyadicSpace) -> Self {
        Self { space, values: vec![C64::new(0.0, 0.0); space.atoms()] }
    }

    pub fn constant(space: DyadicSpace, c: C64) -> Self {
        Self { space, values: vec![c; space.atoms()] }
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// `(2^{-N} Σ |f|^p)^{1/p}`, or the max for `p = ∞`.
    pub fn norm(&self, p: f64) -> f64 {
        weighted_p_norm(self.values.iter().map(|z| z.norm()), p, self.space.atom_mass())
    }

    /// `E f` under the probability measure.
    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.space.atom_mass()
    }

    /// `⟨f, g⟩ = E[f ḡ]`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_same(other)?;
        Ok(crate::numeric::inner(&self.values, &other.values) * self.space.atom_mass())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { space: self.space, values: self.values.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { space: self.space, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { space: self.space, values })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            bail!(Shape, "spaces differ: {} vs {} levels", self.space.levels, other.space.levels);
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Wire { values: self.values.clone() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(s)?;
        Self::new(w.values)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct Wire {
    #[serde(with = "pairs")]
    values: Vec<C64>,
}

impl Serialize for SampleVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        pairs::serialize(&self.values, s)
    }
}

impl<'de> Deserialize<'de> for SampleVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = pairs::deserialize(d)?;
        SampleVector::new(values).map_err(serde::de::Error::custom)
    }
}

/// Block means of `f` at level `k` (one value per `Σ_k` block).
pub fn block_means(f: &[C64], space: DyadicSpace, k: usize) -> Vec<C64> {
    let len = space.block_len(k);
    let inv = 1.0 / len as f64;
    f.chunks_exact(len).map(|c| c.iter().sum::<C64>() * inv).collect()
}

/// Block means at every level `0..=N`, computed finest to coarsest.
pub(crate) fn all_block_means(f: &[C64], space: DyadicSpace) -> Vec<Vec<C64>> {
    let n = space.levels();
    let mut out = vec![Vec::new(); n + 1];
    out[n] = f.to_vec();
    for k in (0..n).rev() {
        out[k] = out[k + 1].chunks_exact(2).map(|p| (p[0] + p[1]) * 0.5).collect();
    }
    out
}

/// All martingale differences `Δ_1 f … Δ_N f` as dense vectors (index `k-1`).
pub(crate) fn all_differences(f: &[C64], space: DyadicSpace) -> Vec<Vec<C64>> {
    let n = space.levels();
    let means = all_block_means(f, space);
    (1..=n)
        .map(|k| {
            (0..space.atoms())
                .map(|w| means[k][space.block_of(w, k)] - means[k - 1][space.block_of(w, k - 1)])
                .collect()
        })
        .collect()
}

/// `E_k f = E(f | Σ_k)`.
pub fn conditional_expectation(f: &SampleVector, k: usize) -> Result<SampleVector> {
    let space = f.space;
    space.check_level(k, 0)?;
    let means = block_means(&f.values, space, k);
    let len = space.block_len(k);
    let values = means.iter().flat_map(|&m| std::iter::repeat_n(m, len)).collect();
    Ok(SampleVector { space, values })
}

/// `Δ_k f = E_k f − E_{k−1} f` for `1 ≤ k ≤ N`.
pub fn martingale_diff(f: &SampleVector, k: usize) -> Result<SampleVector> {
    let space = f.space;
    space.check_level(k, 1)?;
    let fine = block_means(&f.values, space, k);
    let coarse: Vec<C64> = fine.chunks_exact(2).map(|p| (p[0] + p[1]) * 0.5).collect();
    let values = (0..space.atoms())
        .map(|w| fine[space.block_of(w, k)] - coarse[space.block_of(w, k - 1)])
        .collect();
    Ok(SampleVector { space, values })
}

/// The telescoping decomposition `f = E_0 f + Σ_k Δ_k f`.
#[derive(Clone, Debug)]
pub struct MartingaleParts {
    pub mean: SampleVector,
    /// `differences[k-1] = Δ_k f`.
    pub differences: Vec<SampleVector>,
}

pub fn martingale_analysis(f: &SampleVector) -> MartingaleParts {
    let space = f.space;
    let mean = SampleVector::constant(space, f.mean());
    let differences = all_differences(&f.values, space)
        .into_iter()
        .map(|values| SampleVector { space, values })
        .collect();
    MartingaleParts { mean, differences }
}

/// Inverse of [`martingale_analysis`]: `E_0 f + Σ_k Δ_k f`.
pub fn martingale_synthesis(parts: &MartingaleParts) -> Result<SampleVector> {
    let space = parts.mean.space;
    if parts.differences.len() > space.levels() {
        bail!(Shape, "{} difference parts for a {}-level space", parts.differences.len(), space.levels());
    }
    let mut acc = parts.mean.values.clone();
    for d in &parts.differences {
        if d.space != space {
            return Err(Error::Shape("difference part lives on another space".into()));
        }
        // Summation in increasing level order, pairwise per atom.
        for (a, v) in acc.iter_mut().zip(&d.values) {
            *a += v;
        }
    }
    Ok(SampleVector { space, values: acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &SampleVector) -> Vec<f64> {
        v.values().iter().map(|z| z.re).collect()
    }

    fn spike() -> SampleVector {
        SampleVector::from_real(&[4.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn expectation_block_means() {
        assert_eq!(re(&conditional_expectation(&spike(), 1).unwrap()), vec![2.0, 2.0, 0.0, 0.0]);
        assert_eq!(re(&conditional_expectation(&spike(), 0).unwrap()), vec![1.0; 4]);
        assert_eq!(re(&conditional_expectation(&spike(), 2).unwrap()), vec![4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn expectation_fixes_constants() {
        let space = DyadicSpace::new(3).unwrap();
        let c = SampleVector::constant(space, C64::new(1.5, -2.0));
        for k in 0..=3 {
            assert_eq!(conditional_expectation(&c, k).unwrap(), c);
        }
    }

    #[test]
    fn differences_by_hand() {
        assert_eq!(re(&martingale_diff(&spike(), 1).unwrap()), vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(re(&martingale_diff(&spike(), 2).unwrap()), vec![2.0, -2.0, 0.0, 0.0]);
        let c = SampleVector::constant(DyadicSpace::new(2).unwrap(), C64::new(3.0, 0.0));
        assert_eq!(re(&martingale_diff(&c, 2).unwrap()), vec![0.0; 4]);
    }

    #[test]
    fn level_errors() {
        assert!(matches!(conditional_expectation(&spike(), 3), Err(Error::Index(_))));
        assert!(matches!(martingale_diff(&spike(), 0), Err(Error::Index(_))));
        assert!(matches!(SampleVector::from_real(&[1.0, 2.0, 3.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn synthesis_of_spike() {
        let parts = martingale_analysis(&spike());
        assert_eq!(re(&martingale_synthesis(&parts).unwrap()), vec![4.0, 0.0, 0.0, 0.0]);
        let zero = SampleVector::zeros(DyadicSpace::new(2).unwrap());
        let zparts = MartingaleParts { mean: zero.clone(), differences: vec![zero.clone(), zero.clone()] };
        assert_eq!(martingale_synthesis(&zparts).unwrap(), zero);
    }

    #[test]
    fn synthesis_rejects_mismatched_spaces() {
        let parts = MartingaleParts {
            mean: SampleVector::zeros(DyadicSpace::new(2).unwrap()),
            differences: vec![SampleVector::zeros(DyadicSpace::new(1).unwrap())],
        };
        assert!(matches!(martingale_synthesis(&parts), Err(Error::Shape(_))));
    }

    #[test]
    fn json_pairs() {
        let f = SampleVector::new(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.0)]).unwrap();
        let s = f.to_json().unwrap();
        assert_eq!(s, "[[1.0,2.0],[-0.5,0.0]]");
        assert_eq!(SampleVector::from_json(&s).unwrap(), f);
        assert!(SampleVector::from_json("[[1,0],[2,0],[3,0]]").is_err());
    }

    #[test]
    fn norms_use_probability_measure() {
        let f = spike();
        assert!((f.norm(2.0) - 2.0).abs() < 1e-15);
        assert!((f.norm(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(f.norm(f64::INFINITY), 4.0);
    }
}
