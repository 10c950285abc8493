//! Finite complex matrices `A = (a_{jk})` carrying index offsets.
//!
//! Storage row `i` holds the entries with row index `j = row_offset + i + 1`
//! and storage column `c` those with column index `k = col_offset + c + 1`,
//! so an unshifted matrix is indexed `1..=M × 1..=N`. Offsets let a finite
//! block stand for a window of a doubly infinite `c_00` matrix; translations
//! `A^{[r,s]}` only move the offsets.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::numeric::{pairs, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    row_offset: i64,
    col_offset: i64,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    rows: usize,
    cols: usize,
    #[serde(default)]
    row_offset: i64,
    #[serde(default)]
    col_offset: i64,
    #[serde(with = "pairs")]
    data: Vec<C64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        Self::with_offsets(rows, cols, 0, 0, data)
    }

    pub fn with_offsets(
        rows: usize,
        cols: usize,
        row_offset: i64,
        col_offset: i64,
        data: Vec<C64>,
    ) -> Result<Self> {
        if data.len() != rows * cols {
            bail!(Shape, "{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len());
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            bail!(Argument, "matrix entries must be finite");
        }
        Ok(Self { rows, cols, row_offset, col_offset, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, row_offset: 0, col_offset: 0, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Build from real rows; all rows must have equal length.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            bail!(Shape, "ragged rows");
        }
        let data = rows.iter().flatten().map(|&v| C64::new(v, 0.0)).collect();
        Self::new(m, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_offset(&self) -> i64 {
        self.row_offset
    }

    pub fn col_offset(&self) -> i64 {
        self.col_offset
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Entry at storage position `(i, c)`.
    pub fn get(&self, i: usize, c: usize) -> C64 {
        self.data[i * self.cols + c]
    }

    pub fn set(&mut self, i: usize, c: usize, v: C64) {
        self.data[i * self.cols + c] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Absolute row index `j` of storage row `i`.
    pub fn row_index(&self, i: usize) -> i64 {
        self.row_offset + i as i64 + 1
    }

    /// Absolute column index `k` of storage column `c`.
    pub fn col_index(&self, c: usize) -> i64 {
        self.col_offset + c as i64 + 1
    }

    /// `‖A‖_∞ = max_{j,k} |a_{jk}|`.
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z *= c);
        out
    }

    /// Same entries with both offsets reset to zero.
    pub fn without_offsets(&self) -> Self {
        Self { row_offset: 0, col_offset: 0, ..self.clone() }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            row_offset: self.col_offset,
            col_offset: self.row_offset,
            data,
        }
    }

    /// Rows selected by storage index, offsets kept.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            if i >= self.rows {
                bail!(Index, "row {i} of a {}-row matrix", self.rows);
            }
            data.extend_from_slice(self.row(i));
        }
        Self::with_offsets(rows.len(), self.cols, self.row_offset, self.col_offset, data)
    }

    fn filtered(&self, keep: impl Fn(i64, i64) -> bool) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows {
            for c in 0..self.cols {
                if !keep(self.row_index(i), self.col_index(c)) {
                    out.set(i, c, C64::new(0.0, 0.0));
                }
            }
        }
        out
    }

    pub fn transform(&self, op: &Transform) -> Result<Self> {
        match op {
            Transform::InsertZeros { rows_map, cols_map } => self.insert_zeros(rows_map, cols_map),
            Transform::RepeatColumns(n) => self.repeat_columns(*n),
            Transform::Translate { r, s } => Ok(self.translate(*r, *s)),
            Transform::LowerTriangle => Ok(self.lower_triangle()),
            Transform::UpperTriangleTransposed => Ok(self.upper_triangle_transposed()),
            Transform::DiagonalBand(w) => Ok(self.diagonal_band(*w)),
        }
    }

    /// `B` with `b_{m_r, n_s} = a_{rs}` and zeros elsewhere; the maps are
    /// 1-based strictly increasing positions and the new size is given by
    /// their last entries.
    pub fn insert_zeros(&self, rows_map: &[usize], cols_map: &[usize]) -> Result<Self> {
        check_map(rows_map, self.rows, "rows")?;
        check_map(cols_map, self.cols, "cols")?;
        let m1 = rows_map.last().copied().unwrap_or(0);
        let n1 = cols_map.last().copied().unwrap_or(0);
        let mut out = Self::zeros(m1, n1);
        out.row_offset = self.row_offset;
        out.col_offset = self.col_offset;
        for (i, &mi) in rows_map.iter().enumerate() {
            for (c, &nc) in cols_map.iter().enumerate() {
                out.set(mi - 1, nc - 1, self.get(i, c));
            }
        }
        Ok(out)
    }

    /// Each column repeated `n` times in place.
    pub fn repeat_columns(&self, n: usize) -> Result<Self> {
        if n == 0 {
            bail!(Argument, "repeat count must be at least 1");
        }
        let cols = self.cols * n;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            for &v in self.row(i) {
                data.extend(std::iter::repeat_n(v, n));
            }
        }
        Self::with_offsets(self.rows, cols, self.row_offset, self.col_offset, data)
    }

    /// `A^{[r,s]} = (a_{j+r, k+s})_{j,k}`.
    pub fn translate(&self, r: i64, s: i64) -> Self {
        Self { row_offset: self.row_offset - r, col_offset: self.col_offset - s, ..self.clone() }
    }

    /// `A_L`: entries with `k < j`.
    pub fn lower_triangle(&self) -> Self {
        self.filtered(|j, k| k < j)
    }

    /// `A_U^t`, the transpose of the strict upper triangle `k > j`.
    pub fn upper_triangle_transposed(&self) -> Self {
        self.filtered(|j, k| k > j).transpose()
    }

    /// Entries with `|j − k| ≤ width`.
    pub fn diagonal_band(&self, width: usize) -> Self {
        self.filtered(|j, k| (j - k).unsigned_abs() as usize <= width)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_wire())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: Wire = serde_json::from_str(s)?;
        Self::from_wire(w)
    }

    fn to_wire(&self) -> Wire {
        Wire {
            rows: self.rows,
            cols: self.cols,
            row_offset: self.row_offset,
            col_offset: self.col_offset,
            data: self.data.clone(),
        }
    }

    fn from_wire(w: Wire) -> Result<Self> {
        Self::with_offsets(w.rows, w.cols, w.row_offset, w.col_offset, w.data)
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Matrix::from_wire(Wire::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

fn check_map(map: &[usize], expected: usize, what: &str) -> Result<()> {
    if map.len() != expected {
        bail!(Argument, "{what} map has {} entries, matrix has {expected}", map.len());
    }
    if map.first().is_some_and(|&m| m == 0) {
        bail!(Argument, "{what} map positions are 1-based");
    }
    if map.windows(2).any(|w| w[0] >= w[1]) {
        bail!(Argument, "{what} map must be strictly increasing");
    }
    Ok(())
}

/// Structural matrix transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    InsertZeros { rows_map: Vec<usize>, cols_map: Vec<usize> },
    RepeatColumns(usize),
    Translate { r: i64, s: i64 },
    LowerTriangle,
    UpperTriangleTransposed,
    DiagonalBand(usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    fn ones(n: usize) -> Matrix {
        Matrix::from_real_rows(&vec![vec![1.0; n]; n]).unwrap()
    }

    fn real(m: &Matrix) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect()
    }

    #[test]
    fn lower_triangle_of_ones() {
        let l = ones(3).lower_triangle();
        assert_eq!(real(&l), vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]);
    }

    #[test]
    fn upper_transposed_is_lower_for_ones() {
        let u = ones(3).upper_triangle_transposed();
        assert_eq!(real(&u), real(&ones(3).lower_triangle()));
    }

    #[test]
    fn translate_zero_is_identity() {
        let a = Matrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(a.translate(0, 0), a);
        let t = a.translate(1, -2);
        assert_eq!(t.row_index(0), 0);
        assert_eq!(t.col_index(0), 3);
        assert_eq!(t.sup_norm(), a.sup_norm());
    }

    #[test]
    fn insert_zeros_places_entries() {
        let a = Matrix::from_real_rows(&[vec![1.0]]).unwrap();
        let b = a.insert_zeros(&[1], &[1]).unwrap();
        assert_eq!(b, a);
        let b = a.insert_zeros(&[2], &[1, ]).unwrap();
        assert_eq!(real(&b), vec![vec![0.0], vec![1.0]]);
        let a2 = Matrix::from_real_rows(&[vec![1.0, 2.0]]).unwrap();
        let b2 = a2.insert_zeros(&[1], &[1, 3]).unwrap();
        assert_eq!(real(&b2), vec![vec![1.0, 0.0, 2.0]]);
        assert_eq!(b2.sup_norm(), a2.sup_norm());
        assert!(matches!(a2.insert_zeros(&[1], &[3, 2]), Err(Error::Argument(_))));
    }

    #[test]
    fn repeat_columns_duplicates() {
        let a = Matrix::from_real_rows(&[vec![1.0, -1.0]]).unwrap();
        assert_eq!(real(&a.repeat_columns(2).unwrap()), vec![vec![1.0, 1.0, -1.0, -1.0]]);
        assert!(a.repeat_columns(0).is_err());
    }

    #[test]
    fn band_keeps_near_diagonal() {
        let b = ones(3).diagonal_band(0);
        assert_eq!(b, Matrix::identity(3));
    }

    #[test]
    fn json_format() {
        let a = Matrix::with_offsets(1, 2, -1, 3, vec![C64::new(1.0, 0.5), C64::new(0.0, -2.0)]).unwrap();
        let s = a.to_json().unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"row_offset":-1,"col_offset":3,"data":[[1.0,0.5],[0.0,-2.0]]}"#);
        assert_eq!(Matrix::from_json(&s).unwrap(), a);
        assert!(Matrix::from_json(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }
}
