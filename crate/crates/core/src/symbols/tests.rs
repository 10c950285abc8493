use std::sync::Arc;

use super::*;
use crate::counterexamples::sign_matrix;
use crate::harmonic::{phi_hat, phi_hat_j, sigma_from_matrix, GridFunction, PeriodicGrid, Symbol, SymbolMeta};
use crate::matrix::Matrix;
use crate::numeric::C64;
use crate::Error;

fn constant(grid: PeriodicGrid, c: C64) -> Symbol {
    Symbol::callable(grid, Arc::new(move |_, _| c), SymbolMeta::default())
}

fn grid(m: usize, l: f64) -> PeriodicGrid {
    PeriodicGrid::new(1, m, l).unwrap()
}

#[test]
fn breakup_examples() {
    let g = grid(128, 2.0);
    let one = Symbol::one(g);
    let b = symbol_breakup(&one, 2, -1);
    for (x, y) in [(4.0, 0.5), (3.1, 0.7), (-5.5, -0.3), (1.0, 1.0)] {
        let want = phi_hat_j(2, x) * phi_hat_j(-1, y);
        assert!((b.eval(x, y) - C64::new(want, 0.0)).norm() < 1e-15);
    }
    let far = symbol_breakup(&symbol_breakup(&one, 5, 0), 2, 0);
    assert_eq!(far.sup_norm(), 0.0);
    let table = sigma_from_matrix(
        &Matrix::with_offsets(3, 2, -1, 0, (0..6).map(|i| C64::new(i as f64, 1.0)).collect()).unwrap(),
        g,
    )
    .unwrap();
    let dense: Vec<C64> = table.materialize().iter().enumerate().map(|(i, z)| z + C64::new(i as f64 * 1e-3, 0.0)).collect();
    let sigma = Symbol::table(g, dense, SymbolMeta::default()).unwrap();
    let band = g.lp_band();
    let mut sum = vec![C64::new(0.0, 0.0); 128 * 128];
    for j in band.clone() {
        for k in band.clone() {
            for (s, v) in sum.iter_mut().zip(symbol_breakup(&sigma, j, k).materialize()) {
                *s += v;
            }
        }
    }
    let full = sigma.materialize();
    for q in 1..128 {
        for r in 1..128 {
            assert!((sum[q * 128 + r] - full[q * 128 + r]).norm() <= 1e-10);
        }
    }
}

/// `∫ φ̂(8t) e^{−2πitν} dt` by a midpoint rule independent of the FFT path.
fn bump_coefficient(nu: i64) -> C64 {
    let n = 1 << 16;
    (0..n)
        .map(|i| {
            let t = -0.5 + (i as f64 + 0.5) / n as f64;
            C64::from_polar(phi_hat(8.0 * t) / n as f64, -std::f64::consts::TAU * t * nu as f64)
        })
        .sum()
}

#[test]
fn coefficient_examples() {
    let g = PeriodicGrid::default();
    let zero = fourier_coefficients(&constant(g, C64::new(0.0, 0.0)), 0, 0, 4, 64).unwrap();
    assert!(zero.data.iter().all(|z| z.norm() == 0.0));
    let c: Vec<C64> = (-6..=6).map(bump_coefficient).collect();
    for (j, k) in [(0, 0), (-2, 3)] {
        let b = fourier_coefficients(&Symbol::one(g), j, k, 6, 1024).unwrap();
        for nu in -6..=6i64 {
            for rho in -6..=6i64 {
                let want = c[(nu + 6) as usize] * c[(rho + 6) as usize];
                assert!((b.get(nu, rho).unwrap() - want).norm() < 1e-12, "{nu} {rho}");
            }
        }
    }
    let s = marcinkiewicz_symbol(SymbolFamily::LogTheta { theta: 2.0 }, g).unwrap();
    let b = fourier_coefficients(&s, 1, -1, 8, 128).unwrap();
    for nu in -8..=8i64 {
        for rho in -8..=8i64 {
            assert!((b.get(-nu, -rho).unwrap() - b.get(nu, rho).unwrap().conj()).norm() < 1e-12);
        }
    }
    assert!(matches!(fourier_coefficients(&s, 0, 0, 17, 64), Err(Error::Aliasing(_))));
    assert!(matches!(fourier_coefficients(&s, 0, 0, 1, 48), Err(Error::Argument(_))));
    let t = coefficient_table(&s, 0..=1, 0..=0, 2, 64).unwrap();
    assert_eq!(CoefficientTable::from_json(&t.to_json().unwrap()).unwrap(), t);
}

#[test]
fn coefficient_decay() {
    let g = PeriodicGrid::default();
    let s = marcinkiewicz_symbol(SymbolFamily::LogTheta { theta: 2.0 }, g).unwrap();
    let t = coefficient_table(&s, -1..=1, -1..=1, 128, 512).unwrap();
    // The innermost shell sits below the next one: the annular window's own
    // coefficients peak near |ν| ≈ 2.
    let shells: Vec<(f64, f64)> = [2usize, 4, 8, 16, 32, 64, 128]
        .windows(2)
        .map(|w| {
            let top = t
                .blocks
                .iter()
                .flat_map(|b| {
                    let c = 128i64;
                    (-c..=c).flat_map(move |nu| (-c..=c).map(move |rho| (nu, rho, b)))
                })
                .filter(|(nu, rho, _)| {
                    let d = (nu.abs() + rho.abs()) as usize;
                    d >= w[0] && d < w[1]
                })
                .map(|(nu, rho, b)| b.get(nu, rho).unwrap().norm())
                .fold(0.0, f64::max);
            (w[0] as f64, top)
        })
        .collect();
    for p in shells.windows(2) {
        assert!(p[1].1 <= p[0].1, "{shells:?}");
    }
    let slope = log_log_slope(&shells.iter().map(|p| p.0).collect::<Vec<_>>(), &shells.iter().map(|p| p.1).collect::<Vec<_>>());
    assert!(slope.unwrap() <= -1.5, "{slope:?} {shells:?}");
}

#[test]
fn resynthesis_examples() {
    let g = PeriodicGrid::default();
    let s = marcinkiewicz_symbol(SymbolFamily::LogTheta { theta: 2.0 }, g).unwrap();
    let t = coefficient_table(&s, -1..=1, -1..=1, 4, 64).unwrap();
    let r = resynthesize(&s, &t, 4).unwrap();
    assert_eq!(r.report.errors.len(), 5);
    // K = 0 keeps the (0,0) terms only.
    let r0 = resynthesize(&s, &t, 0).unwrap();
    for (x, y) in [(1.3, 0.7), (-2.5, 1.9), (0.6, -3.0)] {
        let mut want = C64::new(0.0, 0.0);
        for b in &t.blocks {
            let w = crate::harmonic::zeta_hat(x * 2f64.powi(-b.j - 3)) * crate::harmonic::zeta_hat(y * 2f64.powi(-b.k - 3));
            want += b.get(0, 0).unwrap() * w;
        }
        assert!((r0.symbol.eval(x, y) - want).norm() < 1e-14);
    }
    assert!(resynthesize(&s, &t, 5).is_err());
    let mut holes = t.clone();
    holes.blocks.remove(4);
    assert!(resynthesize(&s, &holes, 1).is_err());
}

#[test]
fn family_examples() {
    let g = PeriodicGrid::default();
    let s = marcinkiewicz_symbol(SymbolFamily::LogTheta { theta: 2.0 }, g).unwrap();
    assert_eq!(s.eval(3.0, -3.0), C64::new(1.0, 0.0));
    assert!((s.eval(2f64.powi(15), 1.0).re - 1.0 / 16.0).abs() < 1e-15);
    assert_eq!(s.eval(0.0, 1.0), C64::new(0.0, 0.0));
    let strong = marcinkiewicz_symbol(SymbolFamily::StrongLog { theta: 1.0 }, g).unwrap();
    assert!((strong.eval(8.0, 1.0).re - 0.25).abs() < 1e-15);
    let ll = marcinkiewicz_symbol(SymbolFamily::Loglog { theta: 1.0 }, g).unwrap();
    assert_eq!(ll.eval(1.0, 1.0).re, 1.0);
    assert!(ll.eval(2f64.powi(30), 1.0).re < ll.eval(2f64.powi(10), 1.0).re);
    let plain = marcinkiewicz_symbol(SymbolFamily::PlainCounterexample { n: 3, theta: 0.25 }, g).unwrap();
    let direct = sigma_from_matrix(&sign_matrix(3, 0.25).unwrap(), g).unwrap();
    assert_eq!(plain.materialize(), direct.materialize());
    assert!(marcinkiewicz_symbol(SymbolFamily::LogTheta { theta: 0.0 }, g).is_err());
    let f: SymbolFamily = serde_json::from_str(r#"{"kind":"plain_counterexample","N":4,"theta":0.25}"#).unwrap();
    assert_eq!(f, SymbolFamily::PlainCounterexample { n: 4, theta: 0.25 });
}

#[test]
fn h_norm_examples() {
    let g = PeriodicGrid::default();
    let opts = HNormOptions { index_range: 2, samples: 2, ..Default::default() };
    let c = C64::new(0.5, 0.0);
    let r = h_norm_estimate(&constant(g, c), &opts, None).unwrap();
    let all_c = Matrix::new(5, 5, vec![c; 25]).unwrap();
    let want = h_functional(&all_c, &opts.estimate).unwrap();
    assert!((r.value - want).abs() < 1e-12 && r.value.is_finite());
    assert_eq!(r.by_range.len(), 2);
    assert!(r.by_range[0].value <= r.by_range[1].value + 1e-12);
    assert_eq!(r.points, 16);
    // Order 1 with exact zero derivatives adds σ's own norm once more.
    let d: DerivativeFn = Arc::new(|_, _, _, _| C64::new(0.0, 0.0));
    let r1 = h_norm_estimate(&constant(g, c), &HNormOptions { order: 1, ..opts.clone() }, Some(d)).unwrap();
    assert!((r1.value - 2.0 * want).abs() < 1e-9);
    let fd = h_norm_estimate(&constant(g, c), &HNormOptions { order: 1, ..opts.clone() }, None).unwrap();
    assert!(fd.finite_differences && (fd.value - 2.0 * want).abs() < 1e-6);
}

#[test]
fn h_norm_grows_on_sign_family() {
    let g = PeriodicGrid::default();
    let opts = HNormOptions { index_range: 4, samples: 1, ..Default::default() };
    let values: Vec<f64> = [1usize, 2]
        .iter()
        .map(|&n| {
            let s = crate::harmonic::sigma_callable(&sign_matrix(n, 0.25).unwrap(), g);
            h_norm_estimate(&s, &opts, None).unwrap().value
        })
        .collect();
    assert!(values[1] > values[0], "{values:?}");
}

#[test]
fn multiplier_examples() {
    let g = grid(256, 2.0);
    let opts = MultiplierOptions::default();
    let one = estimate_multiplier_norm(&Symbol::one(g), 2.0, 2.0, MultiplierMode::Strong, &opts).unwrap();
    assert!(one.certificate >= 0.9 && one.certificate <= 1.0 + 1e-9, "{}", one.certificate);
    let again = estimate_multiplier_norm(&Symbol::one(g), 2.0, 2.0, MultiplierMode::Strong, &opts).unwrap();
    assert_eq!(one.certificate, again.certificate);
    let e = Exponents::new(2.0, 2.0).unwrap();
    let c = C64::new(-2.5, 1.0);
    let scaled = multiplier_ratio(&constant(g, c), &one.witness_f, &one.witness_g, e, MultiplierMode::Strong).unwrap();
    assert!((scaled - c.norm() * one.certificate).abs() <= 1e-12 * scaled);
    let reeval = multiplier_ratio(&Symbol::one(g), &one.witness_f, &one.witness_g, e, MultiplierMode::Strong).unwrap();
    assert!((reeval - one.certificate).abs() <= 1e-9);
    let a = 1.7;
    let diag = Matrix::with_offsets(6, 6, -1, -1, {
        let mut d = vec![C64::new(0.0, 0.0); 36];
        (0..6).for_each(|i| d[i * 7] = C64::new(a, 0.0));
        d
    })
    .unwrap();
    let sd = sigma_from_matrix(&diag, g).unwrap();
    let r = estimate_multiplier_norm(&sd, 2.0, 2.0, MultiplierMode::Strong, &opts).unwrap();
    assert!(r.certificate >= 0.9 * a, "{}", r.certificate);
    let w = estimate_multiplier_norm(&sd, 3.0, 1.5, MultiplierMode::Weak, &MultiplierOptions { restarts: 2, max_iters: 10, ..opts }).unwrap();
    assert!(w.certificate > 0.0 && w.flags.iter().any(|f| f == "periodized_weak_norm"));
    assert_eq!(BoundednessReport::CSV_HEADER.len(), r.csv_record().len());
    assert!(matches!(estimate_multiplier_norm(&sd, 0.0, 1.0, MultiplierMode::Strong, &opts), Err(Error::Argument(_))));
}

#[test]
fn multiplier_dilation_invariance() {
    // x ↦ x/2 carries the grid (M, L) onto (M, 2L) sample for sample, and
    // σ(2·, 2·) on the second grid is σ_{A^{[1,1]}}.
    let (g, g2) = (grid(128, 2.0), grid(128, 4.0));
    let a = Matrix::with_offsets(3, 3, 0, 0, (0..9).map(|i| C64::new(1.0 + i as f64, 0.5)).collect()).unwrap();
    let s = sigma_from_matrix(&a, g).unwrap();
    let s2 = sigma_from_matrix(&a.translate(1, 1), g2).unwrap();
    assert_eq!(s.materialize(), s2.materialize());
    let f = GridFunction::from_fn(g, |x| C64::new((3.0 * x).sin() + 0.2, x.cos()));
    let h = GridFunction::from_fn(g, |x| C64::new((x * x).cos(), 0.1 * x));
    let dil = |u: &GridFunction| GridFunction::new(g2, u.values().to_vec()).unwrap();
    for (p1, p2) in [(2.0, 2.0), (3.0, 1.5)] {
        let e = Exponents::new(p1, p2).unwrap();
        for mode in [MultiplierMode::Strong, MultiplierMode::Weak] {
            let base = multiplier_ratio(&s, &f, &h, e, mode).unwrap();
            let moved = multiplier_ratio(&s2, &dil(&f), &dil(&h), e, mode).unwrap();
            assert!((base - moved).abs() <= 1e-9 * base.max(1.0), "{base} {moved}");
        }
    }
    let opts = MultiplierOptions { restarts: 2, max_iters: 15, ..Default::default() };
    let c1 = estimate_multiplier_norm(&s, 2.0, 2.0, MultiplierMode::Strong, &opts).unwrap();
    let c2 = estimate_multiplier_norm(&s2, 2.0, 2.0, MultiplierMode::Strong, &opts).unwrap();
    assert!((c1.certificate - c2.certificate).abs() <= 1e-9 * c1.certificate);
}

#[test]
fn equivalence_homogeneity() {
    let g = grid(128, 2.0);
    let family: Vec<FamilyMember> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&c| FamilyMember { size: c, matrix: Matrix::with_offsets(1, 1, 1, 1, vec![C64::new(c, 0.0)]).unwrap() })
        .collect();
    let opts = EquivalenceOptions { grid: g, multiplier: MultiplierOptions { restarts: 2, max_iters: 20, ..Default::default() }, h: Default::default() };
    let rows = equivalence_experiment(&family, 2.0, 2.0, &opts).unwrap();
    for r in &rows {
        assert!((r.ratio - rows[0].ratio).abs() <= 1e-9 * rows[0].ratio, "{rows:?}");
        assert!((r.h_estimate - r.size).abs() < 1e-12);
    }
    assert!((log_log_slope(&[1.0, 2.0, 4.0], &[3.0, 6.0, 12.0]).unwrap() - 1.0).abs() < 1e-12);
}
