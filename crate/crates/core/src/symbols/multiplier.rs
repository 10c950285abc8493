//! Lower certificates for bilinear multiplier norms
//! `‖W_σ(f,g)‖_{p₀} / (‖f‖_{p₁} ‖g‖_{p₂})`, `1/p₀ = 1/p₁ + 1/p₂`, with the
//! normalised measure of the torus.
//!
//! With one input frozen, `W_σ` is linear in the other. In coefficient space
//! `Ŵ(ζ) = Σ_ξ σ(ξ, ζ−ξ) f̂(ξ) ĝ(ζ−ξ)` (indices cyclic), which gives both the
//! linear map and its adjoint in `O(M²)`. Each half-step is a nonlinear power
//! step `f ← ψ_{p₁'}(L^* ψ_{p₀}(L f))` on the `ε`-smoothed duality maps.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::harmonic::{apply_bilinear, GridFunction, PeriodicGrid, Symbol};
use crate::matrix::Matrix;
use crate::numeric::{fft_forward, fft_inverse, stream_rng, weak_quasinorm, C64};

use super::hnorm::h_functional;

const SMOOTHING: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierMode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p1: f64,
    pub p2: f64,
    pub p0: f64,
}

impl Exponents {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p2 > 0.0 && p1.is_finite() && p2.is_finite()) {
            bail!(Argument, "exponents must lie in (0, ∞), got p1 = {p1}, p2 = {p2}");
        }
        Ok(Self { p1, p2, p0: 1.0 / (1.0 / p1 + 1.0 / p2) })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierOptions {
    pub restarts: usize,
    /// Alternation rounds per restart.
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for MultiplierOptions {
    fn default() -> Self {
        Self { restarts: 4, max_iters: 60, tol: 1e-9, seed: 0 }
    }
}

impl MultiplierOptions {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || !(self.tol >= 0.0) {
            bail!(Argument, "need restarts ≥ 1, max_iters ≥ 1 and tol ≥ 0");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub exponents: Exponents,
    pub mode: MultiplierMode,
    /// Ratio attained by the stored witnesses, re-evaluated with
    /// [`apply_bilinear`].
    pub certificate: f64,
    pub witness_f: GridFunction,
    pub witness_g: GridFunction,
    /// `H(A)` estimate when the symbol came from a matrix.
    pub h_estimate: Option<f64>,
    /// `certificate / h_estimate`.
    pub ratio: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub flags: Vec<String>,
}

impl BoundednessReport {
    pub const CSV_HEADER: [&'static str; 7] = ["p1", "p2", "mode", "certificate", "H_estimate", "ratio", "flags"];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.exponents.p1.to_string(),
            self.exponents.p2.to_string(),
            match self.mode {
                MultiplierMode::Strong => "strong".into(),
                MultiplierMode::Weak => "weak".into(),
            },
            self.certificate.to_string(),
            opt(self.h_estimate),
            opt(self.ratio),
            self.flags.join(";"),
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Attach an `H(A)` estimate and the resulting ratio.
    pub fn with_h(mut self, h: f64) -> Self {
        self.h_estimate = Some(h);
        self.ratio = (h > 0.0).then(|| self.certificate / h);
        self
    }
}

fn numerator(values: &[C64], e: Exponents, mode: MultiplierMode) -> f64 {
    let w = 1.0 / values.len() as f64;
    match mode {
        MultiplierMode::Strong => crate::numeric::weighted_p_norm(values.iter().map(|z| z.norm()), e.p0, w),
        MultiplierMode::Weak => {
            let mags: Vec<f64> = values.iter().map(|z| z.norm()).collect();
            weak_quasinorm(&mags, e.p0, w)
        }
    }
}

/// The ratio attained by `(f, g)`; zero when either input vanishes.
pub fn multiplier_ratio(sigma: &Symbol, f: &GridFunction, g: &GridFunction, e: Exponents, mode: MultiplierMode) -> Result<f64> {
    let w = apply_bilinear(sigma, f, g)?;
    let den = f.norm(e.p1) * g.norm(e.p2);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(numerator(w.values(), e, mode) / den)
}

/// `σ` tabulated in DFT order with the coefficient-space products.
struct Form {
    m: usize,
    table: Vec<C64>,
}

impl Form {
    fn at(&self, q: usize, r: usize) -> C64 {
        self.table[q * self.m + r]
    }

    /// `Ŵ` for fixed `other`; `first` says whether the free input sits in the
    /// first slot.
    fn apply(&self, free: &[C64], other: &[C64], first: bool) -> Vec<C64> {
        let m = self.m;
        (0..m)
            .into_par_iter()
            .map(|z| {
                let mut s = C64::new(0.0, 0.0);
                for (q, &a) in free.iter().enumerate() {
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let r = (z + m - q) % m;
                    let sig = if first { self.at(q, r) } else { self.at(r, q) };
                    s += sig * a * other[r];
                }
                s
            })
            .collect()
    }

    fn adjoint(&self, h: &[C64], other: &[C64], first: bool) -> Vec<C64> {
        let m = self.m;
        (0..m)
            .into_par_iter()
            .map(|q| {
                let mut s = C64::new(0.0, 0.0);
                for (z, &b) in h.iter().enumerate() {
                    let r = (z + m - q) % m;
                    let sig = if first { self.at(q, r) } else { self.at(r, q) };
                    s += (sig * other[r]).conj() * b;
                }
                s
            })
            .collect()
    }
}

fn spectrum(values: &[C64]) -> Vec<C64> {
    let mut c = values.to_vec();
    fft_forward(&mut c);
    let inv = 1.0 / c.len() as f64;
    c.iter_mut().for_each(|z| *z *= inv);
    c
}

fn synth(coeffs: &[C64]) -> Vec<C64> {
    let mut v = coeffs.to_vec();
    fft_inverse(&mut v);
    v
}

fn smooth_dual(z: C64, r: f64) -> C64 {
    z * (z.norm_sqr() + SMOOTHING).powf((r - 2.0) / 2.0)
}

fn mean_norm(v: &[C64], p: f64) -> f64 {
    crate::numeric::weighted_p_norm(v.iter().map(|z| z.norm()), p, 1.0 / v.len() as f64)
}

struct State {
    f: Vec<C64>,
    g: Vec<C64>,
}

impl State {
    fn value(&self, form: &Form, e: Exponents, mode: MultiplierMode) -> f64 {
        let (fs, gs) = (spectrum(&self.f), spectrum(&self.g));
        let w = synth(&form.apply(&fs, &gs, true));
        let den = mean_norm(&self.f, e.p1) * mean_norm(&self.g, e.p2);
        if den == 0.0 {
            0.0
        } else {
            numerator(&w, e, mode) / den
        }
    }
}

/// One power step in the free slot; returns the new free input normalised
/// in its own exponent.
fn half_step(form: &Form, free: &[C64], other: &[C64], first: bool, p_free: f64, p0: f64) -> Option<Vec<C64>> {
    let (fs, os) = (spectrum(free), spectrum(other));
    let w = synth(&form.apply(&fs, &os, first));
    let dw: Vec<C64> = w.iter().map(|&z| smooth_dual(z, p0)).collect();
    let grad = synth(&form.adjoint(&spectrum(&dw), &os, first));
    let next: Vec<C64> = if p_free > 1.0 {
        let dual = p_free / (p_free - 1.0);
        grad.iter().map(|&z| smooth_dual(z, dual)).collect()
    } else {
        grad
    };
    let n = mean_norm(&next, p_free);
    (n > 0.0 && n.is_finite()).then(|| next.into_iter().map(|z| z / n).collect())
}

fn packet(grid: PeriodicGrid, q: usize, width: f64, power: f64) -> Vec<C64> {
    let l = grid.period();
    let xi = grid.frequency(q);
    (0..grid.points())
        .map(|m| {
            let x = grid.position(m);
            let env = (-0.5 * ((x - l / 2.0) / width).powi(2)).exp().powf(power);
            C64::from_polar(env, std::f64::consts::TAU * xi * x)
        })
        .collect()
}

/// Grid pair maximising `|σ|` among pairs whose sum frequency stays below
/// half the Nyquist limit; ties go to the largest `|ξ| + |η|`, then the
/// lowest index.
fn peak(form: &Form, grid: PeriodicGrid) -> (usize, usize) {
    let m = form.m;
    let limit = grid.nyquist() / 2.0;
    let mut best = (0, 0);
    let mut best_v = -1.0;
    let mut best_s = -1.0;
    for q in 0..m {
        let x = grid.frequency(q).abs();
        for r in 0..m {
            let y = grid.frequency(r).abs();
            if x + y > limit {
                continue;
            }
            let v = form.at(q, r).norm();
            let tie = (v - best_v).abs() <= 1e-9 * v.max(best_v);
            if (!tie && v > best_v) || (tie && x + y > best_s) {
                best = (q, r);
                best_v = v;
                best_s = x + y;
            }
        }
    }
    best
}

fn initial(form: &Form, grid: PeriodicGrid, e: Exponents, seed: u64, restart: usize) -> State {
    let l = grid.period();
    let mut rng = stream_rng(seed, restart as u64);
    let (pf, pg) = (e.p0 / e.p1, e.p0 / e.p2);
    match restart % 4 {
        0 | 1 => {
            let (q, r) = peak(form, grid);
            let width = if restart.is_multiple_of(4) { l / 4.0 } else { l / 8.0 };
            State { f: packet(grid, q, width, pf), g: packet(grid, r, width, pg) }
        }
        3 => {
            let m = form.m;
            let top = form.table.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let strong: Vec<usize> = (0..m * m).filter(|&i| form.table[i].norm() >= 0.5 * top).collect();
            let pick = if strong.is_empty() { 0 } else { strong[rng.gen_range(0..strong.len())] };
            let width = l / rng.gen_range(3.0..12.0);
            State { f: packet(grid, pick / m, width, pf), g: packet(grid, pick % m, width, pg) }
        }
        _ => {
            let mut gauss = || C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let f = (0..grid.points()).map(|_| gauss()).collect();
            let g = (0..grid.points()).map(|_| gauss()).collect();
            State { f, g }
        }
    }
}

struct Outcome {
    value: f64,
    state: State,
    iterations: usize,
    converged: bool,
}

fn run(form: &Form, e: Exponents, mode: MultiplierMode, opts: &MultiplierOptions, mut st: State) -> Outcome {
    let mut value = st.value(form, e, mode);
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..opts.max_iters {
        let start = value;
        for first in [true, false] {
            iterations += 1;
            let (free, other, p) = if first { (&st.f, &st.g, e.p1) } else { (&st.g, &st.f, e.p2) };
            let Some(next) = half_step(form, free, other, first, p, e.p0) else { continue };
            let trial = if first { State { f: next, g: st.g.clone() } } else { State { f: st.f.clone(), g: next } };
            let v = trial.value(form, e, mode);
            if v > value {
                value = v;
                st = trial;
            }
        }
        if value - start <= opts.tol * value {
            converged = true;
            break;
        }
    }
    Outcome { value, state: st, iterations, converged }
}

/// Best lower certificate for the multiplier norm of `σ` over restarts.
pub fn estimate_multiplier_norm(
    sigma: &Symbol,
    p1: f64,
    p2: f64,
    mode: MultiplierMode,
    opts: &MultiplierOptions,
) -> Result<BoundednessReport> {
    let e = Exponents::new(p1, p2)?;
    opts.validate()?;
    let grid = sigma.grid();
    // The ascent sees σ / ‖σ‖_∞, which makes the witnesses, and hence the
    // certificate, exactly homogeneous under power-of-two scalings of σ.
    let mut table = sigma.materialize();
    let sup = table.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup > 0.0 {
        table.iter_mut().for_each(|z| *z /= sup);
    }
    let form = Form { m: grid.points(), table };
    let outcomes: Vec<Outcome> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run(&form, e, mode, opts, initial(&form, grid, e, opts.seed, r)))
        .collect();
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = i;
        }
    }
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let converged = outcomes[best].converged;
    let State { f, g } = outcomes.into_iter().nth(best).expect("at least one restart").state;
    let witness_f = GridFunction::new(grid, f)?;
    let witness_g = GridFunction::new(grid, g)?;
    let certificate = multiplier_ratio(sigma, &witness_f, &witness_g, e, mode)?;
    let mut flags = Vec::new();
    if !converged {
        flags.push("max_iterations".to_string());
    }
    if sigma.meta.truncated {
        flags.push("truncated_symbol".to_string());
    }
    if mode == MultiplierMode::Weak {
        flags.push("periodized_weak_norm".to_string());
    }
    Ok(BoundednessReport {
        exponents: e,
        mode,
        certificate,
        witness_f,
        witness_g,
        h_estimate: None,
        ratio: None,
        iterations,
        converged,
        flags,
    })
}

/// One matrix of an equivalence family together with its size label.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub size: f64,
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub size: f64,
    #[serde(rename = "H_est")]
    pub h_estimate: f64,
    pub mult_cert: f64,
    pub ratio: f64,
    pub truncated: bool,
}

impl EquivalenceRow {
    pub const CSV_HEADER: [&'static str; 4] = ["size", "H_est", "mult_cert", "ratio"];

    pub fn csv_record(&self) -> [String; 4] {
        [self.size.to_string(), self.h_estimate.to_string(), self.mult_cert.to_string(), self.ratio.to_string()]
    }
}

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct EquivalenceOptions {
    pub grid: PeriodicGrid,
    pub multiplier: MultiplierOptions,
    pub h: crate::maximal::EstimateOptions,
}


/// `H(A)` against the multiplier certificate of `σ_A` for each member.
pub fn equivalence_experiment(
    family: &[FamilyMember],
    p1: f64,
    p2: f64,
    opts: &EquivalenceOptions,
) -> Result<Vec<EquivalenceRow>> {
    family
        .iter()
        .map(|member| {
            let h = h_functional(&member.matrix, &opts.h)?;
            let sigma = crate::harmonic::sigma_from_matrix(&member.matrix, opts.grid)?;
            let cert = estimate_multiplier_norm(&sigma, p1, p2, MultiplierMode::Strong, &opts.multiplier)?.certificate;
            Ok(EquivalenceRow {
                size: member.size,
                h_estimate: h,
                mult_cert: cert,
                ratio: if h > 0.0 { cert / h } else { 0.0 },
                truncated: sigma.meta.truncated,
            })
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
