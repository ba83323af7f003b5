use proptest::prelude::*;

use soliton_lab::modulation::{fit_solitons, Family};
use soliton_lab::perturbation::band_limited_noise;
use soliton_lab::profiles::{
    delta_shift, hirota_n_soliton, max_gardner_speed, profile, soliton_l2_squared, weinstein_derivative,
};
use soliton_lab::spectral::{
    derivative, forward_transform, integrate, inverse_transform, norm_l2, norm_l2_halfline, product, Grid1D,
    WaveField,
};
use soliton_lab::stats::spearman;
use soliton_lab::transform::gardner_transform;

fn grid() -> Grid1D {
    Grid1D::new(256, 60.0).unwrap()
}

fn noise(seed: u64, alpha: f64) -> WaveField {
    band_limited_noise(&grid(), alpha, seed, 24).unwrap()
}

/// Admissible Gardner pair: c below the maximal speed for beta.
fn gardner_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..0.2, 0.05f64..0.95).prop_map(|(beta, frac)| (frac * max_gardner_speed(beta), beta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval(seed in 0u64..1000, alpha in 0.1f64..10.0) {
        let f = noise(seed, alpha);
        let e = forward_transform(&f).unwrap().weighted_energy();
        prop_assert!((e - norm_l2(&f).powi(2)).abs() <= 1e-12 * e);
    }

    #[test]
    fn transform_round_trip(seed in 0u64..1000) {
        let f = noise(seed, 1.0);
        let back = inverse_transform(&forward_transform(&f).unwrap()).unwrap();
        prop_assert!(back.sup_distance(&f).unwrap() < 1e-13);
    }

    #[test]
    fn derivative_has_zero_mean(seed in 0u64..1000, order in 1u32..4) {
        let f = noise(seed, 1.0);
        let d = derivative(&f, order).unwrap();
        prop_assert!(integrate(&d).abs() < 1e-11);
    }

    #[test]
    fn dealiased_product_is_symmetric_and_bilinear(s1 in 0u64..500, s2 in 500u64..1000, a in -3.0f64..3.0) {
        let (f, g, h) = (noise(s1, 1.0), noise(s2, 1.0), noise(s1 + s2, 1.0));
        let fg = product(&f, &g, true).unwrap();
        prop_assert!(fg.sup_distance(&product(&g, &f, true).unwrap()).unwrap() < 1e-14);
        let lhs = product(&f.axpy(a, &h).unwrap(), &g, true).unwrap();
        let rhs = fg.axpy(a, &product(&h, &g, true).unwrap()).unwrap();
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn halfline_norm_is_monotone(seed in 0u64..1000, a in -29.0f64..29.0, b in -29.0f64..29.0) {
        let f = noise(seed, 1.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let n_lo = norm_l2_halfline(&f, lo).unwrap();
        let n_hi = norm_l2_halfline(&f, hi).unwrap();
        prop_assert!(n_hi <= n_lo);
        prop_assert!(n_lo <= norm_l2(&f) * (1.0 + 1e-15));
    }

    #[test]
    fn kdv_scaling_law(c in 0.1f64..5.0, s in -20.0f64..20.0) {
        let lhs = profile(c, 0.0, s);
        let rhs = c * profile(1.0, 0.0, c.sqrt() * s);
        prop_assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs().max(1e-300) + 1e-300);
    }

    #[test]
    fn profiles_are_even((c, beta) in gardner_pair(), s in 0.0f64..30.0) {
        prop_assert_eq!(profile(c, beta, s), profile(c, beta, -s));
    }

    #[test]
    fn delta_is_positive((c, beta) in gardner_pair()) {
        prop_assert!(delta_shift(c, beta).unwrap() > 0.0);
    }

    #[test]
    fn gardner_transform_is_affine_plus_quadratic(s1 in 0u64..500, s2 in 500u64..1000, beta in 0.01f64..0.2) {
        let (v, w) = (noise(s1, 1.0), noise(s2, 1.0));
        let m = |f: &WaveField| gardner_transform(f, beta).unwrap();
        let zero = WaveField::zeros(grid());
        // M[v + w] - M[v] - M[w] + M[0] = -3 beta v w
        let lhs = m(&v.plus(&w).unwrap())
            .minus(&m(&v)).unwrap()
            .minus(&m(&w)).unwrap()
            .plus(&m(&zero)).unwrap();
        let rhs = product(&v, &w, true).unwrap().scaled(-3.0 * beta);
        prop_assert!(lhs.sup_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn weinstein_derivative_positive((c, beta) in (0.3f64..2.0, 0.0f64..0.1)) {
        prop_assume!(beta == 0.0 || c < 0.9 * max_gardner_speed(beta));
        prop_assert!(weinstein_derivative(c, beta, 1e-4 * c).unwrap() > 0.0);
        prop_assert!(soliton_l2_squared(c, beta).unwrap() > 0.0);
    }

    #[test]
    fn fit_is_translation_equivariant(m in -40isize..40, x0 in -2.0f64..2.0) {
        let g = Grid1D::new(1024, 100.0).unwrap();
        let q = WaveField::from_fn(g, |x| profile(1.0, 0.0, x - x0)).unwrap();
        let base = fit_solitons(&q, &[(1.0, x0)], &Family::Kdv).unwrap()[0];
        let shifted = fit_solitons(&q.shifted_cells(m), &[(1.0, x0 + m as f64 * g.dx())], &Family::Kdv).unwrap()[0];
        prop_assert!((shifted.x - base.x - m as f64 * g.dx()).abs() < 1e-9);
        prop_assert!((shifted.c - base.c).abs() < 1e-9);
    }

    #[test]
    fn single_hirota_soliton_is_the_closed_form(c in 0.3f64..3.0, y in -10.0f64..10.0, t in -3.0f64..3.0) {
        let g = Grid1D::new(512, 100.0).unwrap();
        let u = hirota_n_soliton(&[c], &[y], &g, t).unwrap();
        let q = WaveField::from_fn(g, |x| profile(c, 0.0, x - y - c * t)).unwrap();
        prop_assert!(u.sup_distance(&q).unwrap() < 1e-12 * c);
    }

    #[test]
    fn noise_is_seeded_and_normalized(seed in 0u64..1000, alpha in 1e-6f64..1.0) {
        let a = noise(seed, alpha);
        let b = noise(seed, alpha);
        prop_assert_eq!(a.samples(), b.samples());
        prop_assert!((norm_l2(&a) - alpha).abs() <= 1e-13 * alpha);
    }

    #[test]
    fn spearman_is_rank_invariant(xs in prop::collection::vec(-1e3f64..1e3, 3..20)) {
        let ts: Vec<f64> = (0..xs.len()).map(|i| i as f64).collect();
        let r = spearman(&ts, &xs).unwrap();
        let cubed: Vec<f64> = xs.iter().map(|x| x.powi(3) + 7.0).collect();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
        prop_assert!((r - spearman(&ts, &cubed).unwrap()).abs() < 1e-12);
    }
}
