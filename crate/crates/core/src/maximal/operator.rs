use rayon::prelude::*;

use crate::dyadic::{all_block_means, DyadicSpace};
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::C64;

/// `T_A` bound to a dyadic space: column `c` acts on level `levels[c]`.
pub(crate) struct MaximalOperator<'a> {
    a: &'a Matrix,
    space: DyadicSpace,
    levels: Vec<usize>,
}

/// Atoms per rayon task; small spaces stay on one thread.
const CHUNK: usize = 256;

impl<'a> MaximalOperator<'a> {
    /// Columns mapped through the matrix offsets (`k = col_offset + c + 1`).
    pub fn with_offsets(a: &'a Matrix, space: DyadicSpace) -> Result<Self> {
        let levels = (0..a.cols())
            .map(|c| {
                let k = a.col_index(c);
                if k < 1 || k > space.levels() as i64 {
                    bail!(Shape, "column index {k} outside filtration levels 1..={}", space.levels());
                }
                Ok(k as usize)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { a, space, levels })
    }

    /// Columns placed on levels `1..=cols` regardless of offsets.
    pub fn normalized(a: &'a Matrix, space: DyadicSpace) -> Result<Self> {
        if a.cols() > space.levels() {
            bail!(Shape, "{} columns exceed {} filtration levels", a.cols(), space.levels());
        }
        Ok(Self { a, space, levels: (1..=a.cols()).collect() })
    }

    pub fn space(&self) -> DyadicSpace {
        self.space
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// `Δ_{levels[c]} f` for every column, as `diffs[c][ω]`.
    pub fn column_differences(&self, f: &[C64]) -> Vec<Vec<C64>> {
        let means = all_block_means(f, self.space);
        let sp = self.space;
        self.levels
            .iter()
            .map(|&k| {
                (0..sp.atoms())
                    .map(|w| means[k][sp.block_of(w, k)] - means[k - 1][sp.block_of(w, k - 1)])
                    .collect()
            })
            .collect()
    }

    fn row_value(&self, j: usize, diffs: &[Vec<C64>], w: usize) -> C64 {
        self.a.row(j).iter().zip(diffs).map(|(a, d)| a * d[w]).sum()
    }

    /// Rows of `T_A f`.
    pub fn apply(&self, f: &[C64]) -> Vec<Vec<C64>> {
        let diffs = self.column_differences(f);
        (0..self.rows())
            .map(|j| (0..self.space.atoms()).map(|w| self.row_value(j, &diffs, w)).collect())
            .collect()
    }

    /// Pointwise `max_j |(T_A f)_j|` with the argmax selector (lowest row on ties).
    pub fn maximal(&self, f: &[C64]) -> (Vec<f64>, Vec<usize>) {
        let diffs = self.column_differences(f);
        let atoms = self.space.atoms();
        let mut values = vec![0.0; atoms];
        let mut selector = vec![0usize; atoms];
        values
            .par_chunks_mut(CHUNK)
            .zip(selector.par_chunks_mut(CHUNK))
            .enumerate()
            .for_each(|(ci, (vs, ss))| {
                for (o, (v, s)) in vs.iter_mut().zip(ss.iter_mut()).enumerate() {
                    let w = ci * CHUNK + o;
                    let mut best = -1.0;
                    let mut arg = 0;
                    for j in 0..self.rows() {
                        let m = self.row_value(j, &diffs, w).norm();
                        if m > best {
                            best = m;
                            arg = j;
                        }
                    }
                    *v = best.max(0.0);
                    *s = arg;
                }
            });
        (values, selector)
    }

    /// `(T_s f)(ω) = (T_A f)_{s(ω)}(ω)`.
    pub fn apply_selected(&self, selector: &[usize], f: &[C64]) -> Vec<C64> {
        let diffs = self.column_differences(f);
        selector.iter().enumerate().map(|(w, &j)| self.row_value(j, &diffs, w)).collect()
    }

    /// Adjoint of `T_s` for the counting inner product:
    /// `T_s^* g = Σ_c Δ_{k_c}( conj(a_{s(·),c}) g )`.
    pub fn adjoint_selected(&self, selector: &[usize], g: &[C64]) -> Vec<C64> {
        let sp = self.space;
        let mut out = vec![C64::new(0.0, 0.0); sp.atoms()];
        for (c, &k) in self.levels.iter().enumerate() {
            let h: Vec<C64> =
                selector.iter().zip(g).map(|(&j, &v)| self.a.get(j, c).conj() * v).collect();
            let fine = crate::dyadic::block_means(&h, sp, k);
            let coarse: Vec<C64> = fine.chunks_exact(2).map(|p| (p[0] + p[1]) * 0.5).collect();
            for (w, o) in out.iter_mut().enumerate() {
                *o += fine[sp.block_of(w, k)] - coarse[sp.block_of(w, k - 1)];
            }
        }
        out
    }
}
