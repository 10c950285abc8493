use marcin_lab::dyadic::{conditional_expectation, martingale_analysis, martingale_synthesis, DyadicSpace, SampleVector};
use marcin_lab::lorentz::{d_norm, d_star_norm, WeightSequence};
use marcin_lab::matrix::Matrix;
use marcin_lab::maximal::{bv_upper_bound, estimate_h, evaluate_ratio, exact_h2_oracle, EstimateOptions, Mode};
use marcin_lab::Complex64 as C64;
use proptest::prelude::*;

fn real_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Matrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1.0f64..1.0, r * c).prop_map(move |v| {
            Matrix::new(r, c, v.into_iter().map(|x| C64::new(x, 0.0)).collect()).unwrap()
        })
    })
}

fn vector(levels: usize) -> impl Strategy<Value = SampleVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << levels)
        .prop_map(|v| SampleVector::new(v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap())
}

fn opts(seed: u64) -> EstimateOptions {
    EstimateOptions { seed, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn martingale_reconstruction_orthogonality_parseval((f, g) in (0usize..=10).prop_flat_map(|n| (vector(n), vector(n)))) {
        let parts = martingale_analysis(&f);
        let back = martingale_synthesis(&parts).unwrap();
        let scale = f.norm(2.0);
        prop_assert!(back.sub(&f).unwrap().norm(2.0) <= 1e-12 * scale);
        let energy: f64 = parts.mean.norm(2.0).powi(2) + parts.differences.iter().map(|d| d.norm(2.0).powi(2)).sum::<f64>();
        prop_assert!((energy - scale * scale).abs() <= 1e-12 * scale * scale);
        let other = martingale_analysis(&g);
        for (j, a) in parts.differences.iter().enumerate() {
            for (k, b) in other.differences.iter().enumerate() {
                if j != k {
                    prop_assert!(a.inner(b).unwrap().norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn conditional_expectations_nest(f in vector(5), j in 0usize..=5, k in 0usize..=5) {
        let ek = conditional_expectation(&f, k).unwrap();
        let ejk = conditional_expectation(&ek, j).unwrap();
        let emin = conditional_expectation(&f, j.min(k)).unwrap();
        prop_assert!(ejk.sub(&emin).unwrap().norm(f64::INFINITY) <= 1e-12);
    }

    #[test]
    fn lorentz_duality_and_symmetry(
        u in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..=12),
        v in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 12),
        raw in prop::collection::vec(0.01f64..1.0, 12),
        c in -3.0f64..3.0,
    ) {
        let mut wv = raw.clone();
        wv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let w = WeightSequence::explicit(wv).unwrap();
        let u: Vec<C64> = u.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let v: Vec<C64> = v[..u.len()].iter().map(|&(a, b)| C64::new(a, b)).collect();
        let pairing: C64 = u.iter().zip(&v).map(|(a, b)| a * b.conj()).sum();
        let (du, dv) = (d_norm(&u, &w).unwrap(), d_star_norm(&v, &w).unwrap());
        prop_assert!(pairing.norm() <= du * dv * (1.0 + 1e-9) + 1e-12);
        let scaled: Vec<C64> = u.iter().map(|z| z * c).collect();
        prop_assert!((d_norm(&scaled, &w).unwrap() - c.abs() * du).abs() <= 1e-12 * (1.0 + du));
        prop_assert!((d_star_norm(&scaled[..], &w).unwrap() - c.abs() * d_star_norm(&u, &w).unwrap()).abs() <= 1e-12 * (1.0 + du));
        let mut perm = u.clone();
        perm.reverse();
        perm.rotate_left(u.len() / 2);
        prop_assert!((d_norm(&perm, &w).unwrap() - du).abs() <= 1e-12 * (1.0 + du));
        prop_assert!((d_star_norm(&perm, &w).unwrap() - d_star_norm(&u, &w).unwrap()).abs() <= 1e-12 * (1.0 + du));
    }

    #[test]
    fn d_norm_is_the_best_pairing(u in prop::collection::vec(-2.0f64..2.0, 1..=6), raw in prop::collection::vec(0.01f64..1.0, 6)) {
        let mut wv = raw;
        wv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let n = u.len();
        let w = WeightSequence::explicit(wv.clone()).unwrap();
        let z: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
        // Injections of the n positions into the 6 weights, exhaustively.
        fn best(k: usize, used: &mut [bool], u: &[f64], w: &[f64]) -> f64 {
            if k == u.len() {
                return 0.0;
            }
            let mut out = f64::NEG_INFINITY;
            for i in 0..w.len() {
                if !used[i] {
                    used[i] = true;
                    out = out.max(u[k].abs() * w[i] + best(k + 1, used, u, w));
                    used[i] = false;
                }
            }
            out
        }
        let brute = best(0, &mut [false; 6], &u, &wv);
        prop_assert!((d_norm(&z, &w).unwrap() - brute).abs() <= 1e-12 * (1.0 + brute), "n = {}", n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimate_matches_oracle(a in real_matrix(3, 3), seed in 0u64..1000) {
        let o = EstimateOptions { levels: Some(3), ..opts(seed) };
        let est = estimate_h(&a, Mode::strong(2.0), &o).unwrap();
        let exact = exact_h2_oracle(&a, DyadicSpace::new(3).unwrap()).unwrap();
        prop_assert!((est.lower_bound - exact).abs() <= 1e-6, "{} vs {}", est.lower_bound, exact);
    }

    #[test]
    fn certificates_reevaluate(a in real_matrix(4, 4), p in 1.2f64..5.0, seed in 0u64..1000) {
        for mode in [Mode::strong(2.0), Mode::Strong { p }, Mode::Weak { p }, Mode::Mixed { p, q: p * 0.8 }] {
            let est = estimate_h(&a, mode, &opts(seed)).unwrap();
            let again = est.reevaluate(&a).unwrap();
            prop_assert!((again - est.lower_bound).abs() <= 1e-9 * (1.0 + est.lower_bound));
        }
    }

    #[test]
    fn row_submatrices_do_not_exceed(a in real_matrix(4, 3), seed in 0u64..1000, pick in prop::collection::vec(any::<bool>(), 4)) {
        let rows: Vec<usize> = (0..a.rows()).filter(|&i| pick[i]).collect();
        prop_assume!(!rows.is_empty());
        let sub = a.select_rows(&rows).unwrap();
        let full = estimate_h(&a, Mode::strong(2.0), &opts(seed)).unwrap().lower_bound;
        let part = estimate_h(&sub, Mode::strong(2.0), &opts(seed)).unwrap().lower_bound;
        prop_assert!(part <= full + 1e-9, "{part} > {full}");
    }

    #[test]
    fn zero_padding_keeps_h(a in real_matrix(2, 2), lead_r in 0usize..=1, lead_c in 0usize..=1, seed in 0u64..1000) {
        // Optional leading zero row and column, and a zero column between
        // any two original ones.
        let rows: Vec<usize> = (0..a.rows()).map(|i| i + 1 + lead_r).collect();
        let cols: Vec<usize> = (0..a.cols()).map(|c| 2 * c + 1 + lead_c).collect();
        let b = a.insert_zeros(&rows, &cols).unwrap();
        let ha = estimate_h(&a, Mode::strong(2.0), &opts(seed)).unwrap().lower_bound;
        let hb = estimate_h(&b, Mode::strong(2.0), &opts(seed)).unwrap().lower_bound;
        prop_assert!((ha - hb).abs() <= 1e-6, "{ha} vs {hb}");
    }

    #[test]
    fn scaling_is_exact_for_the_witness(a in real_matrix(3, 3), c in -4.0f64..4.0, seed in 0u64..1000) {
        let est = estimate_h(&a, Mode::strong(2.0), &opts(seed)).unwrap();
        let w = &est.witness[0];
        let base = evaluate_ratio(&a, Mode::strong(2.0), w).unwrap();
        let scaled = evaluate_ratio(&a.scale(C64::new(c, 0.0)), Mode::strong(2.0), w).unwrap();
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-13 * (1.0 + base));
        // Power-of-two scalings reproduce the whole estimate bit for bit.
        let twice = estimate_h(&a.scale(C64::new(-2.0, 0.0)), Mode::strong(2.0), &opts(seed)).unwrap();
        prop_assert_eq!(twice.lower_bound, 2.0 * est.lower_bound);
    }

    #[test]
    fn lower_bounds_respect_bv(a in real_matrix(5, 5), seed in 0u64..1000) {
        let est = estimate_h(&a, Mode::strong(2.0), &opts(seed)).unwrap();
        prop_assert!(est.lower_bound <= bv_upper_bound(&a) + 1e-9);
    }
}
