use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bumps::phi_hat_j;
use super::grid::{GridFunction, PeriodicGrid};
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::{fft_inverse, pairs, C64};

/// Where a symbol came from and what is known about its support.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolMeta {
    pub provenance: String,
    #[serde(default)]
    pub support: String,
    /// Some generating terms reach outside the grid band.
    #[serde(default)]
    pub truncated: bool,
}

pub type SymbolFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum SymbolData {
    /// `M × M` values, row `q` (index of `ξ`) and column `r` (index of `η`)
    /// in DFT order.
    Table(Vec<C64>),
    Callable(SymbolFn),
}

/// A bilinear Fourier symbol `σ(ξ, η)` on a grid.
#[derive(Clone)]
pub struct Symbol {
    grid: PeriodicGrid,
    data: SymbolData,
    pub meta: SymbolMeta,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.data {
            SymbolData::Table(_) => "table",
            SymbolData::Callable(_) => "callable",
        };
        f.debug_struct("Symbol").field("grid", &self.grid).field("kind", &kind).field("meta", &self.meta).finish()
    }
}

#[derive(Serialize, Deserialize)]
struct SymbolFile {
    #[serde(flatten)]
    grid: PeriodicGrid,
    #[serde(default)]
    meta: SymbolMeta,
    #[serde(with = "pairs")]
    data: Vec<C64>,
}

impl Symbol {
    pub fn table(grid: PeriodicGrid, values: Vec<C64>, meta: SymbolMeta) -> Result<Self> {
        let m = grid.points();
        if values.len() != m * m {
            bail!(Shape, "symbol table needs {}×{} entries, got {}", m, m, values.len());
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            bail!(Argument, "symbol table entries must be finite");
        }
        Ok(Self { grid, data: SymbolData::Table(values), meta })
    }

    pub fn callable(grid: PeriodicGrid, f: SymbolFn, meta: SymbolMeta) -> Self {
        Self { grid, data: SymbolData::Callable(f), meta }
    }

    /// The constant symbol 1.
    pub fn one(grid: PeriodicGrid) -> Self {
        Self::callable(
            grid,
            Arc::new(|_, _| C64::new(1.0, 0.0)),
            SymbolMeta { provenance: "constant".into(), support: "everywhere".into(), truncated: false },
        )
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn is_table(&self) -> bool {
        matches!(self.data, SymbolData::Table(_))
    }

    pub fn table_values(&self) -> Option<&[C64]> {
        match &self.data {
            SymbolData::Table(t) => Some(t),
            SymbolData::Callable(_) => None,
        }
    }

    /// Value at DFT indices `(q, r)`.
    pub fn at(&self, q: usize, r: usize) -> C64 {
        match &self.data {
            SymbolData::Table(t) => t[q * self.grid.points() + r],
            SymbolData::Callable(f) => f(self.grid.frequency(q), self.grid.frequency(r)),
        }
    }

    /// Value at an arbitrary frequency pair; tables are interpolated
    /// bilinearly between grid frequencies (cyclically at the edges).
    pub fn eval(&self, xi: f64, eta: f64) -> C64 {
        match &self.data {
            SymbolData::Callable(f) => f(xi, eta),
            SymbolData::Table(_) => {
                let m = self.grid.points() as i64;
                let l = self.grid.period();
                let (x, y) = (xi * l, eta * l);
                let (x0, y0) = (x.floor(), y.floor());
                let (tx, ty) = (x - x0, y - y0);
                let idx = |s: f64| (s as i64).rem_euclid(m) as usize;
                let v = |a: f64, b: f64| self.at(idx(a), idx(b));
                v(x0, y0) * ((1.0 - tx) * (1.0 - ty))
                    + v(x0 + 1.0, y0) * (tx * (1.0 - ty))
                    + v(x0, y0 + 1.0) * ((1.0 - tx) * ty)
                    + v(x0 + 1.0, y0 + 1.0) * (tx * ty)
            }
        }
    }

    pub fn materialize(&self) -> Vec<C64> {
        match &self.data {
            SymbolData::Table(t) => t.clone(),
            SymbolData::Callable(_) => {
                let m = self.grid.points();
                (0..m * m).into_par_iter().map(|i| self.at(i / m, i % m)).collect()
            }
        }
    }

    pub fn into_table(self) -> Result<Self> {
        let values = self.materialize();
        Self::table(self.grid, values, self.meta)
    }

    pub fn sup_norm(&self) -> f64 {
        self.materialize().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SymbolFile { grid: self.grid, meta: self.meta.clone(), data: self.materialize() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SymbolFile = serde_json::from_str(s)?;
        Self::table(f.grid, f.data, f.meta)
    }
}

/// Rows of `σ` processed per parallel task; fixed so the summation order is
/// independent of the thread count.
const SWEEP_CHUNK: usize = 16;

/// `W_σ(f,g)(x) = Σ_{ξ,η} σ(ξ,η) f̂(ξ) ĝ(η) e^{2πi x(ξ+η)}` by a sweep over `ξ`:
/// each row `σ(ξ,·) ĝ` is inverse transformed and modulated by `f̂(ξ) e^{2πi xξ}`.
pub fn apply_bilinear(sigma: &Symbol, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let grid = check_shapes(sigma, f, g)?;
    let m = grid.points();
    let fs = f.spectrum();
    let gs = g.spectrum();
    let table = match &sigma.data {
        SymbolData::Table(t) => Some(t.as_slice()),
        SymbolData::Callable(_) => None,
    };
    let tw = twiddles(m);
    let partials: Vec<Vec<C64>> = (0..m)
        .collect::<Vec<_>>()
        .par_chunks(SWEEP_CHUNK)
        .map(|qs| {
            let mut acc = vec![C64::new(0.0, 0.0); m];
            let mut row = vec![C64::new(0.0, 0.0); m];
            for &q in qs {
                if fs[q] == C64::new(0.0, 0.0) {
                    continue;
                }
                for (r, slot) in row.iter_mut().enumerate() {
                    let s = match table {
                        Some(t) => t[q * m + r],
                        None => sigma.at(q, r),
                    };
                    *slot = s * gs[r];
                }
                fft_inverse(&mut row);
                for (x, (a, h)) in acc.iter_mut().zip(&row).enumerate() {
                    *a += fs[q] * tw[(q * x) % m] * h;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![C64::new(0.0, 0.0); m];
    for p in &partials {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    GridFunction::new(grid, out)
}

/// Largest grid on which [`apply_bilinear_direct`] runs.
pub const DIRECT_LIMIT: usize = 256;

/// Reference evaluator summing all `(ξ, η, x)` triples, `O(M³)`.
pub fn apply_bilinear_direct(sigma: &Symbol, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    let grid = check_shapes(sigma, f, g)?;
    let m = grid.points();
    if m > DIRECT_LIMIT {
        bail!(Size, "direct evaluation is limited to {DIRECT_LIMIT} points, grid has {m}");
    }
    let fs = f.spectrum();
    let gs = g.spectrum();
    let tw = twiddles(m);
    let out = (0..m)
        .map(|x| {
            let mut s = C64::new(0.0, 0.0);
            for q in 0..m {
                for r in 0..m {
                    s += sigma.at(q, r) * fs[q] * gs[r] * tw[((q + r) * x) % m];
                }
            }
            s
        })
        .collect();
    GridFunction::new(grid, out)
}

/// `e^{2πi t/m}` for `t < m`.
fn twiddles(m: usize) -> Vec<C64> {
    (0..m).map(|t| C64::from_polar(1.0, std::f64::consts::TAU * t as f64 / m as f64)).collect()
}

fn check_shapes(sigma: &Symbol, f: &GridFunction, g: &GridFunction) -> Result<PeriodicGrid> {
    if f.grid() != g.grid() {
        bail!(Shape, "bilinear inputs live on different grids");
    }
    if sigma.grid != f.grid() {
        bail!(Shape, "symbol is tabulated for {} points, inputs have {}", sigma.grid.points(), f.grid().points());
    }
    Ok(f.grid())
}

/// `P[q][i] = φ̂(2^{−j_i} ξ_q)` for the given indices.
fn bump_table(grid: PeriodicGrid, indices: &[i64]) -> Vec<Vec<f64>> {
    (0..grid.points())
        .map(|q| {
            let xi = grid.frequency(q);
            indices.iter().map(|&j| phi_hat_j(j.clamp(-1000, 1000) as i32, xi)).collect()
        })
        .collect()
}

/// `σ_A(ξ,η) = Σ_{j,k} a_{jk} φ̂(2^{−j}ξ) φ̂(2^{−k}η)` with `j`, `k` the
/// matrix's absolute indices. Nonzero entries whose index leaves the grid
/// band flag the symbol as truncated; they contribute only where their bump
/// still meets a grid frequency.
pub fn sigma_from_matrix(a: &Matrix, grid: PeriodicGrid) -> Result<Symbol> {
    let band = grid.lp_band();
    let inside = |j: i64| j >= *band.start() as i64 && j <= *band.end() as i64;
    let rows: Vec<i64> = (0..a.rows()).map(|i| a.row_index(i)).collect();
    let cols: Vec<i64> = (0..a.cols()).map(|c| a.col_index(c)).collect();
    let mut truncated = false;
    for i in 0..a.rows() {
        for c in 0..a.cols() {
            if a.get(i, c) != C64::new(0.0, 0.0) && !(inside(rows[i]) && inside(cols[c])) {
                truncated = true;
            }
        }
    }
    let pr = bump_table(grid, &rows);
    let pc = bump_table(grid, &cols);
    let m = grid.points();
    // B = P_rows · A, then σ = B · P_colsᵀ.
    let b: Vec<Vec<C64>> = pr
        .iter()
        .map(|prow| {
            (0..a.cols())
                .map(|c| prow.iter().enumerate().map(|(i, &p)| a.get(i, c) * p).sum::<C64>())
                .collect()
        })
        .collect();
    let values: Vec<C64> = (0..m * m)
        .into_par_iter()
        .map(|idx| {
            let (q, r) = (idx / m, idx % m);
            b[q].iter().zip(&pc[r]).map(|(&x, &p)| x * p).sum()
        })
        .collect();
    let support = format!(
        "union of D_jk over rows {}..={} and columns {}..={}",
        rows.first().copied().unwrap_or(0),
        rows.last().copied().unwrap_or(0),
        cols.first().copied().unwrap_or(0),
        cols.last().copied().unwrap_or(0)
    );
    Symbol::table(grid, values, SymbolMeta { provenance: "matrix".into(), support, truncated })
}

/// `σ_A` as an exact callable, for evaluation off the grid frequencies.
pub fn sigma_callable(a: &Matrix, grid: PeriodicGrid) -> Symbol {
    let rows: Vec<i32> = (0..a.rows()).map(|i| a.row_index(i).clamp(-1000, 1000) as i32).collect();
    let cols: Vec<i32> = (0..a.cols()).map(|c| a.col_index(c).clamp(-1000, 1000) as i32).collect();
    let a = a.clone();
    let band = grid.lp_band();
    let inside = |j: i32| band.contains(&j);
    let truncated = (0..a.rows()).any(|i| {
        (0..a.cols()).any(|c| a.get(i, c) != C64::new(0.0, 0.0) && !(inside(rows[i]) && inside(cols[c])))
    });
    let f = move |xi: f64, eta: f64| {
        let pc: Vec<f64> = cols.iter().map(|&k| phi_hat_j(k, eta)).collect();
        let mut s = C64::new(0.0, 0.0);
        for (i, &j) in rows.iter().enumerate() {
            let p = phi_hat_j(j, xi);
            if p == 0.0 {
                continue;
            }
            for (c, &q) in pc.iter().enumerate() {
                if q != 0.0 {
                    s += a.get(i, c) * (p * q);
                }
            }
        }
        s
    };
    Symbol::callable(grid, Arc::new(f), SymbolMeta { provenance: "matrix".into(), support: String::new(), truncated })
}
