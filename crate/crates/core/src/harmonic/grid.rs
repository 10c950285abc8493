use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::numeric::{fft_forward, fft_inverse, is_power_of_two, pairs, signed_index, C64};

/// Uniform grid on the torus `[0, L)` with `M` points, `M` and `L` powers of two.
///
/// With `L = 2^a` and spacing `2^{−b}` (`a + b = log₂ M`), dyadic level `k`
/// has cells of side `2^{−k}` anchored at 0, so conditional expectations
/// exist for `−a ≤ k ≤ b`. Frequencies are `q / L` for `q ∈ [−M/2, M/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    log_points: u32,
    log_period: i32,
}

#[derive(Serialize, Deserialize)]
struct GridHeader {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "L")]
    l: f64,
}

impl PeriodicGrid {
    pub const MAX_POINTS: usize = 1 << 16;

    /// `dimension` must be 1; `points` and `period` powers of two.
    pub fn new(dimension: usize, points: usize, period: f64) -> Result<Self> {
        if dimension == 2 {
            bail!(Argument, "two-dimensional grids are not supported; use n = 1");
        }
        if dimension != 1 {
            bail!(Argument, "grid dimension must be 1, got {dimension}");
        }
        if points < 4 || !is_power_of_two(points) {
            bail!(Argument, "points per axis must be a power of two ≥ 4, got {points}");
        }
        if points > Self::MAX_POINTS {
            bail!(Size, "{points} points exceed the limit {}", Self::MAX_POINTS);
        }
        let log_period = period.log2();
        if !(period > 0.0 && log_period.fract() == 0.0 && log_period.abs() <= 30.0) {
            bail!(Argument, "period must be a power of two, got {period}");
        }
        Ok(Self { log_points: points.trailing_zeros(), log_period: log_period as i32 })
    }

    pub fn points(&self) -> usize {
        1 << self.log_points
    }

    pub fn period(&self) -> f64 {
        2f64.powi(self.log_period)
    }

    /// `a` with `L = 2^a`.
    pub fn log_period(&self) -> i32 {
        self.log_period
    }

    /// `b` with spacing `2^{−b}`.
    pub fn log_resolution(&self) -> i32 {
        self.log_points as i32 - self.log_period
    }

    pub fn spacing(&self) -> f64 {
        2f64.powi(-self.log_resolution())
    }

    pub fn position(&self, m: usize) -> f64 {
        m as f64 * self.spacing()
    }

    /// Largest representable frequency magnitude `M / (2L)`.
    pub fn nyquist(&self) -> f64 {
        self.points() as f64 / (2.0 * self.period())
    }

    /// Frequency of DFT index `q`.
    pub fn frequency(&self, q: usize) -> f64 {
        signed_index(q, self.points()) as f64 / self.period()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points()).map(|q| self.frequency(q)).collect()
    }

    /// Levels with a conditional expectation, `−a..=b`.
    pub fn martingale_levels(&self) -> std::ops::RangeInclusive<i32> {
        -self.log_period..=self.log_resolution()
    }

    /// Littlewood-Paley indices whose bump meets a nonzero grid frequency, `−a..=b−1`.
    pub fn lp_band(&self) -> std::ops::RangeInclusive<i32> {
        -self.log_period..=self.log_resolution() - 1
    }

    /// Indices whose whole annulus `2^{j−1} ≤ |ξ| ≤ 2^{j+1}` is resolved.
    pub fn is_faithful(&self, j: i32) -> bool {
        j > -self.log_period && j <= self.log_resolution() - 2
    }
}

impl Default for PeriodicGrid {
    /// 1024 points on a torus of period 2.
    fn default() -> Self {
        Self { log_points: 10, log_period: 1 }
    }
}

impl Serialize for PeriodicGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridHeader { n: 1, m: self.points(), l: self.period() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodicGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = GridHeader::deserialize(d)?;
        PeriodicGrid::new(h.n, h.m, h.l).map_err(serde::de::Error::custom)
    }
}

/// Complex samples on a [`PeriodicGrid`] with a lazily cached spectrum.
///
/// The spectrum holds Fourier-series coefficients
/// `F_q = (1/M) Σ_m f(x_m) e^{−2πi q m / M}`, so `f(x) = Σ_q F_q e^{2πi ξ_q x}`.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: PeriodicGrid,
    values: Vec<C64>,
    spectrum: OnceLock<Vec<C64>>,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    #[serde(flatten)]
    grid: PeriodicGrid,
    #[serde(with = "pairs")]
    data: Vec<C64>,
}

impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridFile { grid: self.grid, data: self.values.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = GridFile::deserialize(d)?;
        GridFunction::new(f.grid, f.data).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl GridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.points() {
            bail!(Shape, "grid has {} points, got {} values", grid.points(), values.len());
        }
        Ok(Self { grid, values, spectrum: OnceLock::new() })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self { grid, values: vec![C64::new(0.0, 0.0); grid.points()], spectrum: OnceLock::new() }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = (0..grid.points()).map(|m| f(grid.position(m))).collect();
        Self { grid, values, spectrum: OnceLock::new() }
    }

    /// `e^{2πi ξ_q x}` for DFT index `q`.
    pub fn wave(grid: PeriodicGrid, q: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); grid.points()];
        c[q % grid.points()] = C64::new(1.0, 0.0);
        Self::from_spectrum(grid, c).expect("length matches")
    }

    pub fn from_spectrum(grid: PeriodicGrid, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != grid.points() {
            bail!(Shape, "grid has {} points, got {} coefficients", grid.points(), coefficients.len());
        }
        let mut values = coefficients.clone();
        fft_inverse(&mut values);
        let spectrum = OnceLock::new();
        let _ = spectrum.set(coefficients);
        Ok(Self { grid, values, spectrum })
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn spectrum(&self) -> &[C64] {
        self.spectrum.get_or_init(|| {
            let mut c = self.values.clone();
            fft_forward(&mut c);
            let inv = 1.0 / c.len() as f64;
            c.iter_mut().for_each(|z| *z *= inv);
            c
        })
    }

    /// Multiply each coefficient by `m(ξ_q)`.
    pub fn multiply_spectrum(&self, m: impl Fn(f64) -> f64) -> Self {
        let c = self.spectrum().iter().enumerate().map(|(q, &z)| z * m(self.grid.frequency(q))).collect();
        Self::from_spectrum(self.grid, c).expect("length matches")
    }

    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.values.len() as f64
    }

    /// `(1/M) Σ f ḡ`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        self.check_grid(other)?;
        Ok(crate::numeric::inner(&self.values, &other.values) / self.values.len() as f64)
    }

    /// `(mean |f|^p)^{1/p}` over the torus with normalised measure; `p = ∞` is the max.
    pub fn norm(&self, p: f64) -> f64 {
        crate::numeric::weighted_p_norm(self.values.iter().map(|z| z.norm()), p, 1.0 / self.values.len() as f64)
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::new(self.grid, self.values.iter().map(|&z| f(z)).collect()).expect("length matches")
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.check_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Cyclic shift by `s` grid points: `(τ_s f)(x_m) = f(x_{m−s})`.
    pub fn shift(&self, s: i64) -> Self {
        let m = self.values.len() as i64;
        let values = (0..m).map(|i| self.values[(i - s).rem_euclid(m) as usize]).collect();
        Self::new(self.grid, values).expect("length matches")
    }

    /// Move the coefficient at frequency `ξ` to `2^s ξ`. Every coefficient
    /// above roundoff (relative to the largest) must land exactly on a
    /// representable frequency; the rest are dropped.
    pub fn dilate_spectrum(&self, s: i32) -> Result<Self> {
        let m = self.grid.points() as i64;
        let floor = 1e-13 * self.spectrum().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut out = vec![C64::new(0.0, 0.0); m as usize];
        for (q, &z) in self.spectrum().iter().enumerate() {
            if z.norm() <= floor {
                continue;
            }
            let sq = signed_index(q, m as usize);
            let target = if s >= 0 {
                sq.checked_mul(1 << s).filter(|t| *t >= -m / 2 && *t < m / 2)
            } else {
                let d = 1i64 << (-s);
                (sq % d == 0).then_some(sq / d)
            };
            let Some(t) = target else {
                bail!(Argument, "frequency index {sq} cannot be dilated by 2^{s} on {m} points");
            };
            out[t.rem_euclid(m) as usize] += z;
        }
        Self::from_spectrum(self.grid, out)
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            bail!(Shape, "grid functions live on different grids");
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GridFile { grid: self.grid, data: self.values.clone() })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GridFile = serde_json::from_str(s)?;
        Self::new(f.grid, f.data)
    }

    /// CSV with header `x,re,im`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "re", "im"])?;
        for (m, z) in self.values.iter().enumerate() {
            out.write_record([self.grid.position(m).to_string(), z.re.to_string(), z.im.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}
