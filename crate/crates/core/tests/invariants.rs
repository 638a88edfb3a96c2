//! Properties that hold for every admissible input.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use supsob::bubbles::fit_log_linear;
use supsob::functionals::{luxemburg_norm, modular, ExponentField};
use supsob::inequalities::{hardy_ratio, random_profile, rellich_ratio, SUITE_TOLERANCE};
use supsob::profile::fmt_sig17;
use supsob::radial_core::{grad_m_inner, nabla_m_norm_sq};
use supsob::{make_grid, ProblemParams, RadialGrid};

fn grid() -> &'static Arc<RadialGrid> {
    static G: OnceLock<Arc<RadialGrid>> = OnceLock::new();
    G.get_or_init(|| make_grid(256, 2.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hardy_and_rellich_hold(seed in any::<u64>(), n in 5usize..=9, a in prop::sample::select(vec![0.0, 1.0])) {
        let u = random_profile(grid(), n, 2, seed).unwrap();
        prop_assert!(hardy_ratio(&u, a, n).unwrap().ratio >= 1.0 - SUITE_TOLERANCE);
        prop_assert!(rellich_ratio(&u, a, n).unwrap().ratio >= 1.0 - SUITE_TOLERANCE);
    }

    #[test]
    fn ratios_are_scale_invariant(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let u = random_profile(grid(), 6, 2, seed).unwrap();
        let r0 = hardy_ratio(&u, 0.0, 6).unwrap().ratio;
        let r1 = hardy_ratio(&u.scaled(-c), 0.0, 6).unwrap().ratio;
        prop_assert!((r0 / r1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_form_is_symmetric_and_positive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let p = ProblemParams::new(5, 2, 1.0).unwrap();
        let u = random_profile(grid(), 5, 2, s1).unwrap();
        let v = random_profile(grid(), 5, 2, s2).unwrap();
        let uv = grad_m_inner(&u, &v, &p).unwrap();
        let vu = grad_m_inner(&v, &u, &p).unwrap();
        let (a, b) = (nabla_m_norm_sq(&u, &p), nabla_m_norm_sq(&v, &p));
        prop_assert!((uv - vu).abs() <= 1e-12 * (a * b).sqrt());
        prop_assert!(a > 0.0 && uv * uv <= a * b * (1.0 + 1e-12));
    }

    #[test]
    fn luxemburg_norm_is_homogeneous(seed in any::<u64>(), c in 0.05f64..20.0) {
        let p = ProblemParams::new(5, 2, 1.0).unwrap();
        let field = ExponentField::new(&p, grid());
        let u = random_profile(grid(), 5, 2, seed).unwrap();
        let a = luxemburg_norm(&u, &field).unwrap();
        let b = luxemburg_norm(&u.scaled(c), &field).unwrap();
        prop_assert!((b / (c * a) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn modular_is_increasing_along_rays(seed in any::<u64>(), t in 0.1f64..0.99) {
        let p = ProblemParams::new(5, 2, 1.0).unwrap();
        let field = ExponentField::new(&p, grid());
        let u = random_profile(grid(), 5, 2, seed).unwrap();
        let small = modular(&u.scaled(t), &field).unwrap().modular;
        let full = modular(&u, &field).unwrap().modular;
        prop_assert!(small < full);
        prop_assert!(small <= t.powi(10) * full * (1.0 + 1e-12));
    }

    #[test]
    fn power_laws_are_recovered(slope in -3.0f64..6.0, pref in 1e-3f64..1e3) {
        let x = [0.1, 0.05, 0.02, 0.01];
        let y: Vec<f64> = x.iter().map(|e: &f64| pref * e.powf(slope)).collect();
        let (s, c, res) = fit_log_linear(&x, &y);
        prop_assert!((s - slope).abs() < 1e-9 && (c / pref - 1.0).abs() < 1e-9 && res < 1e-9);
    }

    #[test]
    fn seventeen_digits_round_trip(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_sig17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn grids_are_ordered_with_positive_weights(k in 1usize..12, g in 1.0f64..4.0) {
        let grid = make_grid(16 * k, g).unwrap();
        prop_assert!(grid.nodes().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(grid.nodes()[0] > 0.0 && *grid.nodes().last().unwrap() < 1.0);
        prop_assert!(grid.weights().iter().all(|w| *w > 0.0));
        let total: f64 = grid.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
