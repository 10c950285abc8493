//! Multi-restart alternating ascent shared by the strong, weak and mixed
//! objectives.
//!
//! Each restart alternates two steps. With the pointwise selector `s` fixed,
//! `T_s f(ω) = (T_A f)_{s(ω)}(ω)` is linear and its `L_p → L_q` norm is
//! attacked with Boyd's nonlinear power step
//! `f ← ψ_{p'}(T_s^* ψ_q(T_s f))`, `ψ_r(z) = z|z|^{r−2}`, which is plain power
//! iteration on `T_s^* T_s` when `p = q = 2`. The selector is then re-derived
//! as the pointwise argmax. Since `|T_s f| ≤ max_j |T_j f|` pointwise, neither
//! step can lower the `p = q = 2` objective.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{
    default_space, upper_bound_for, EstimateOptions, MaximalOperator, Mode, NormEstimate, Quantity,
    Status,
};
use crate::dyadic::{DyadicSpace, SampleVector};
use crate::error::{bail, Result};
use crate::matrix::Matrix;
use crate::numeric::{duality_map, normalize, stream_rng, weak_quasinorm, weighted_p_norm, C64};

/// Linear steps per selector before re-deriving it.
const INNER_STEPS: usize = 64;

struct Candidate {
    value: f64,
    f: Vec<C64>,
    iterations: usize,
    converged: bool,
}

fn objective(op: &MaximalOperator<'_>, mode: Mode, values: &[f64], f: &[C64]) -> f64 {
    let w = op.space().atom_mass();
    let den = weighted_p_norm(f.iter().map(|z| z.norm()), mode.p(), w);
    if den == 0.0 {
        return 0.0;
    }
    let num = match mode {
        Mode::Strong { p } => weighted_p_norm(values.iter().copied(), p, w),
        Mode::Weak { p } => weak_quasinorm(values, p, w),
        Mode::Mixed { q, .. } => weighted_p_norm(values.iter().copied(), q, w),
    };
    num / den
}

/// Ratio attained by `f` for the given mode; columns of `a` sit on levels
/// `1..=cols` of `f`'s space.
pub fn evaluate_ratio(a: &Matrix, mode: Mode, f: &SampleVector) -> Result<f64> {
    mode.validate()?;
    let op = MaximalOperator::normalized(a, f.space())?;
    let (values, _) = op.maximal(f.values());
    Ok(objective(&op, mode, &values, f.values()))
}

fn linear_ratio(op: &MaximalOperator<'_>, mode: Mode, sel: &[usize], f: &[C64]) -> f64 {
    let w = op.space().atom_mass();
    let tf = op.apply_selected(sel, f);
    let den = weighted_p_norm(f.iter().map(|z| z.norm()), mode.p(), w);
    if den == 0.0 {
        return 0.0;
    }
    weighted_p_norm(tf.iter().map(|z| z.norm()), mode.q(), w) / den
}

fn step(op: &MaximalOperator<'_>, mode: Mode, sel: &[usize], f: &[C64]) -> Vec<C64> {
    let (p, q) = (mode.p(), mode.q());
    let tf = op.apply_selected(sel, f);
    if p <= 1.0 {
        // No dual exponent; fall back to the Hilbert-space step.
        return op.adjoint_selected(sel, &tf);
    }
    let z: Vec<C64> = tf.iter().map(|&v| duality_map(v, q)).collect();
    let x = op.adjoint_selected(sel, &z);
    let dual = p / (p - 1.0);
    x.into_iter().map(|v| duality_map(v, dual)).collect()
}

fn initial(space: DyadicSpace, cols: usize, complex: bool, seed: u64, restart: usize) -> Vec<C64> {
    let mut rng = stream_rng(seed, restart as u64);
    let atoms = space.atoms();
    let n = space.levels();
    let gauss = |rng: &mut rand_chacha::ChaCha8Rng| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex { rng.sample(StandardNormal) } else { 0.0 };
        C64::new(re, im)
    };
    match restart % 4 {
        // Random-sign sum of Rademacher functions on the active levels.
        1 if cols > 0 => {
            let signs: Vec<f64> = (0..cols).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            (0..atoms)
                .map(|w| {
                    let s: f64 = (1..=cols)
                        .map(|k| if (w >> (n - k)) & 1 == 0 { signs[k - 1] } else { -signs[k - 1] })
                        .sum();
                    C64::new(s, 0.0)
                })
                .collect()
        }
        // A single Haar function on a random block.
        3 if cols > 0 => {
            let k = rng.gen_range(1..=cols);
            let block = rng.gen_range(0..1usize << (k - 1));
            let len = space.block_len(k - 1);
            let mut f = vec![C64::new(0.0, 0.0); atoms];
            for (o, v) in f[block * len..(block + 1) * len].iter_mut().enumerate() {
                *v = C64::new(if o < len / 2 { 1.0 } else { -1.0 }, 0.0);
            }
            f
        }
        _ => (0..atoms).map(|_| gauss(&mut rng)).collect(),
    }
}

/// Boyd steps with the selector frozen; returns the linear ratio reached.
fn ascend(op: &MaximalOperator<'_>, mode: Mode, opts: &EstimateOptions, sel: &[usize], f: &mut Vec<C64>) -> (f64, usize) {
    let mut lin = linear_ratio(op, mode, sel, f);
    let mut steps = 0;
    for _ in 0..INNER_STEPS {
        let mut g = step(op, mode, sel, f);
        steps += 1;
        if normalize(&mut g) == 0.0 {
            break;
        }
        let next = linear_ratio(op, mode, sel, &g);
        // The nonlinear step is not monotone for p ≠ 2; keep the better point.
        if next < lin {
            break;
        }
        *f = g;
        let done = next - lin <= opts.tol * next;
        lin = next;
        if done {
            break;
        }
    }
    (lin, steps)
}

/// Alternate frozen-selector ascent with argmax reselection until both settle.
fn alternate(op: &MaximalOperator<'_>, mode: Mode, opts: &EstimateOptions, best: &mut Candidate, mut f: Vec<C64>) {
    let (values, mut sel) = op.maximal(&f);
    let mut last = objective(op, mode, &values, &f);
    if last > best.value {
        best.value = last;
        best.f.clone_from(&f);
    }
    best.converged = false;
    for _ in 0..opts.max_iters {
        best.iterations += ascend(op, mode, opts, &sel, &mut f).1;
        let (values, next_sel) = op.maximal(&f);
        let value = objective(op, mode, &values, &f);
        if value > best.value {
            best.value = value;
            best.f.clone_from(&f);
        }
        let stable = (value - last).abs() <= opts.tol * value.max(f64::MIN_POSITIVE);
        if next_sel == sel && stable {
            best.converged = true;
            break;
        }
        sel = next_sel;
        last = value;
    }
}

/// Largest `atoms × rows` for which single-atom selector moves are searched.
const POLISH_LIMIT: usize = 1024;
/// Largest `atoms × rows` for which two-atom moves are searched as well.
const PAIR_LIMIT: usize = 64;

/// Selector moves from `sel`: every single-atom change, then every change of
/// two atoms when `pairs` is set.
fn moves(sel: &[usize], rows: usize, pairs: bool) -> impl Iterator<Item = Vec<usize>> + '_ {
    let atoms = sel.len();
    let single = (0..atoms).flat_map(move |w| {
        (0..rows).filter(move |&r| r != sel[w]).map(move |r| {
            let mut m = sel.to_vec();
            m[w] = r;
            m
        })
    });
    let double = (0..atoms).filter(move |_| pairs).flat_map(move |w| {
        (w + 1..atoms).flat_map(move |v| {
            (0..rows).filter(move |&r| r != sel[w]).flat_map(move |r| {
                (0..rows).filter(move |&t| t != sel[v]).map(move |t| {
                    let mut m = sel.to_vec();
                    m[w] = r;
                    m[v] = t;
                    m
                })
            })
        })
    });
    single.chain(double)
}

fn run_restart(op: &MaximalOperator<'_>, mode: Mode, opts: &EstimateOptions, mut f: Vec<C64>) -> Candidate {
    if normalize(&mut f) == 0.0 {
        f[0] = C64::new(1.0, 0.0);
    }
    let mut best = Candidate { value: 0.0, f: f.clone(), iterations: 0, converged: false };
    alternate(op, mode, opts, &mut best, f);
    let size = op.space().atoms() * op.rows();
    if size > POLISH_LIMIT || op.rows() < 2 {
        return best;
    }
    // The argmax selector can be a strict local maximum; try moving one or
    // two atoms to other rows and resume from any move that raises the ratio.
    let mut rounds = 0;
    'outer: while rounds < opts.max_iters {
        rounds += 1;
        let (_, sel) = op.maximal(&best.f);
        for moved in moves(&sel, op.rows(), size <= PAIR_LIMIT) {
            let mut g = best.f.clone();
            let (lin, steps) = ascend(op, mode, opts, &moved, &mut g);
            best.iterations += steps;
            if lin > best.value * (1.0 + 1e-9) {
                alternate(op, mode, opts, &mut best, g);
                continue 'outer;
            }
        }
        break;
    }
    best
}

/// Certified lower bound for `h_p`, `h_p^w` or `h_{p,q}` of `a`.
///
/// Columns are placed on levels `1..=cols` of a dyadic space with
/// `opts.levels` levels (default: the column count). Restarts run in
/// parallel and are merged by value with ties going to the lowest restart,
/// so the result depends only on the seed and the restart count.
pub fn estimate_h(a: &Matrix, mode: Mode, opts: &EstimateOptions) -> Result<NormEstimate> {
    mode.validate()?;
    opts.validate()?;
    let space = default_space(a, opts.levels)?;
    let upper = upper_bound_for(a, mode, opts.upper);
    let quantity = Quantity::Maximal { mode };
    let make = |lower_bound, witness, iterations, status| NormEstimate {
        quantity,
        lower_bound,
        witness: vec![witness],
        upper_bound: upper.map(|u| u.0),
        upper_provenance: upper.map(|u| u.1),
        iterations,
        restarts: opts.restarts,
        seed: opts.seed,
        status,
    };
    if a.rows() == 0 || a.is_zero() {
        let f = SampleVector::new(initial(space, a.cols(), false, opts.seed, 3))?;
        return Ok(make(0.0, f, 0, Status::Degenerate));
    }
    let op = MaximalOperator::normalized(a, space)?;
    let complex = !a.is_real();
    let candidates: Vec<Candidate> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_restart(&op, mode, opts, initial(space, a.cols(), complex, opts.seed, r)))
        .collect();
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.value > candidates[best].value {
            best = i;
        }
    }
    let iterations = candidates.iter().map(|c| c.iterations).sum();
    let winner = &candidates[best];
    if !winner.value.is_finite() {
        bail!(Numerical, "ascent produced a non-finite ratio");
    }
    let witness = SampleVector::new(winner.f.clone())?;
    // Report exactly what the witness re-evaluates to.
    let lower = evaluate_ratio(a, mode, &witness)?;
    let status = if winner.converged { Status::Converged } else { Status::MaxIterations };
    Ok(make(lower, witness, iterations, status))
}
