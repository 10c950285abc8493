//! Small shared numerical helpers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

pub(crate) type C64 = Complex64;

/// Deterministic per-task RNG derived from a base seed and a stream index.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(weight · Σ |x|^p)^{1/p}`; `p = ∞` gives the max.
pub(crate) fn weighted_p_norm<I>(values: I, p: f64, weight: f64) -> f64
where
    I: IntoIterator<Item = f64>,
{
    if p.is_infinite() {
        return values.into_iter().fold(0.0, f64::max);
    }
    let s: f64 = values.into_iter().map(|v| v.abs().powf(p)).sum();
    (weight * s).powf(1.0 / p)
}

/// `sup_λ λ · μ{|F| > λ}^{1/p}` for a function sampled on atoms of equal
/// measure `weight`. The supremum of the step function is approached just
/// below each attained value, so it is scanned over the sorted magnitudes.
pub(crate) fn weak_quasinorm(values: &[f64], p: f64, weight: f64) -> f64 {
    let mut sorted: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut best = 0.0_f64;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        // μ{|F| ≥ v} = j atoms.
        let cand = v * (weight * j as f64).powf(1.0 / p);
        if cand > best {
            best = cand;
        }
        i = j;
    }
    best
}

/// `z |z|^{q-2}` with `0^{…} = 0`; the duality map of `ℓ_q`.
pub(crate) fn duality_map(z: C64, q: f64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        z * r.powf(q - 2.0)
    }
}

pub(crate) fn l2_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn normalize(x: &mut [C64]) -> f64 {
    let n = l2_norm(x);
    if n > 0.0 {
        for z in x.iter_mut() {
            *z /= n;
        }
    }
    n
}

pub(crate) fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((len, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Unnormalised forward DFT, `X_q = Σ_m x_m e^{-2πi qm/M}`.
pub(crate) fn fft_forward(buf: &mut [C64]) {
    plan(buf.len(), false).process(buf);
}

/// Unnormalised inverse DFT, `x_m = Σ_q X_q e^{2πi qm/M}`.
pub(crate) fn fft_inverse(buf: &mut [C64]) {
    plan(buf.len(), true).process(buf);
}

/// Signed integer frequency of DFT index `q` on `m` points.
pub(crate) fn signed_index(q: usize, m: usize) -> i64 {
    if q < m / 2 {
        q as i64
    } else {
        q as i64 - m as i64
    }
}

/// Complex numbers serialised as `[re, im]` pairs.
pub(crate) mod pairs {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_quasinorm_scans_levels() {
        // values 3,1,1,0 on four atoms of mass 1/4, p = 1:
        // λ→3: 3·1/4, λ→1: 1·3/4.
        let w = weak_quasinorm(&[1.0, 3.0, 0.0, 1.0], 1.0, 0.25);
        assert!((w - 0.75).abs() < 1e-15);
        assert_eq!(weak_quasinorm(&[0.0; 4], 2.0, 0.25), 0.0);
    }

    #[test]
    fn fft_round_trip() {
        let mut x: Vec<C64> = (0..16).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect();
        let orig = x.clone();
        fft_forward(&mut x);
        fft_inverse(&mut x);
        for (a, b) in x.iter().zip(&orig) {
            assert!((a / 16.0 - b).norm() < 1e-12);
        }
    }
}
