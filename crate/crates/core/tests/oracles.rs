//! Closed-form values the discretization must reproduce.

use std::f64::consts::PI;
use std::sync::Arc;

use supsob::bubbles::{
    bubble_pde_residual, c_na, constants_table, crossover_radius, truncated_bubble,
    whole_space_integral, BubbleSpec, CutoffSpec,
};
use supsob::functionals::{energy, luxemburg_norm, modular, weak_derivative, ExponentField};
use supsob::inequalities::{
    fractional_energy, hardy_ratio, pointwise_bound_check, random_profile, rellich_ratio,
    sharpness_trend, InequalityKind,
};
use supsob::radial_core::{
    ball_integral, nabla_m_norm_sq, radial_derivative, radial_laplacian, radial_moment,
    solve_polyharmonic, to_fractional_profile,
};
use supsob::{make_grid, ProblemParams, RadialGrid, RadialProfile};

fn grid(n: usize, g: f64) -> Arc<RadialGrid> {
    make_grid(n, g).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn ball_integral_of_r_in_five_dimensions() {
    let g = grid(256, 2.0);
    let f = RadialProfile::from_fn(&g, 5, 0, |r| r).unwrap();
    let omega4 = 8.0 * PI * PI / 3.0;
    assert!(close(ball_integral(&f, 5), omega4 / 6.0, 1e-12));
}

#[test]
fn laplacian_of_quadratics() {
    let g = grid(256, 2.0);
    for n in [3usize, 5, 8] {
        let u = RadialProfile::from_fn(&g, n, 1, |r| 1.0 - r * r).unwrap();
        let v = RadialProfile::from_fn(&g, n, 0, |r| r * r).unwrap();
        let lu = radial_laplacian(&u, n);
        let lv = radial_laplacian(&v, n);
        for (a, b) in lu.values().iter().zip(lv.values()) {
            assert!((a + 2.0 * n as f64).abs() < 1e-9, "{a}");
            assert!((b - 2.0 * n as f64).abs() < 1e-9, "{b}");
        }
    }
}

#[test]
fn derivative_of_sine() {
    let g = grid(256, 2.0);
    let u = RadialProfile::from_fn(&g, 3, 0, |r| (PI * r).sin()).unwrap();
    let du = radial_derivative(&u);
    for (r, d) in g.nodes().iter().zip(du.values()) {
        assert!((d - PI * (PI * r).cos()).abs() < 1e-8);
    }
}

#[test]
fn dirichlet_energy_of_paraboloid() {
    let g = grid(256, 2.0);
    let p = ProblemParams::new(3, 1, 1.0).unwrap();
    let u = RadialProfile::from_fn(&g, 3, 1, |r| 1.0 - r * r).unwrap();
    assert!(close(nabla_m_norm_sq(&u, &p), 16.0 * PI / 5.0, 1e-10));
}

#[test]
fn poisson_solution_with_unit_load() {
    let g = grid(256, 2.0);
    let p = ProblemParams::new(3, 1, 1.0).unwrap();
    let rhs = RadialProfile::from_fn(&g, 3, 0, |_| 1.0).unwrap();
    let u = solve_polyharmonic(&rhs, &p).unwrap();
    for (r, v) in g.nodes().iter().zip(u.values()) {
        assert!((v - (1.0 - r * r) / 6.0).abs() < 1e-10);
    }
}

#[test]
fn change_of_variable_identity_for_third_order() {
    let g = grid(512, 3.0);
    let (n, m) = (7usize, 3usize);
    let u = RadialProfile::from_fn(&g, n, m, |r| (1.0 - r * r).powi(3)).unwrap();
    let du = radial_derivative(&u);
    let sq: Vec<f64> = du.values().iter().map(|v| v * v).collect();
    let lhs = radial_moment(&g, &sq, (n - 2 * m + 1) as f64);
    let w = to_fractional_profile(&u, m).unwrap();
    let rhs = m as f64 * fractional_energy(&w, n as f64 / m as f64);
    assert!(close(lhs, rhs, 1e-8), "{lhs} vs {rhs}");
}

#[test]
fn hardy_rellich_constants() {
    let t = constants_table(&ProblemParams::new(5, 2, 1.0).unwrap());
    assert!(close(t.c_hr, 6.25, 1e-14));
    assert!(close(t.c_hr_product_form, t.c_hr_explicit_form, 1e-14));
    let t = constants_table(&ProblemParams::new(7, 3, 1.0).unwrap());
    assert!(close(t.c_hr_product_form, 126.5625, 1e-14));
    assert!(close(t.c_hr_explicit_form, 126.5625, 1e-14));
    assert!(close(c_na(6, 0.0), 9.0, 1e-14));
    assert!(close(c_na(8, 0.0), 64.0, 1e-14));
}

#[test]
fn first_order_constant() {
    let t = constants_table(&ProblemParams::new(5, 2, 1.0).unwrap());
    let c1 = t.script_c1.unwrap();
    assert!(close(c1, 16.0 * PI * PI / 9.0, 1e-8), "{c1}");
    assert!(constants_table(&ProblemParams::new(5, 2, 6.0).unwrap())
        .script_c1
        .is_none());
}

#[test]
fn bubble_energy_equals_critical_modular() {
    for (n, m) in [(3usize, 1usize), (5, 2), (6, 2), (8, 3)] {
        let p = ProblemParams::new(n, m, 1.0).unwrap();
        let b = BubbleSpec::extremal(1.0, p).unwrap();
        let d = whole_space_integral(b.rational().grad_m_sq(m, n), n, 1.0);
        let q = whole_space_integral(|r| b.value(r).powf(p.two_m_star()), n, 1.0);
        assert!(close(d, q, 1e-6), "({n},{m}): {d} vs {q}");
        assert!(close(d, constants_table(&p).s_pow, 1e-6));
    }
}

#[test]
fn crossover_of_unit_bubble() {
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    let c = crossover_radius(&BubbleSpec::unit(0.01, p).unwrap()).unwrap();
    assert!((c.a_eps - 0.1410674).abs() < 1e-7);
    assert!((c.b_eps.unwrap() - c.a_eps).abs() < 1e-14);
}

#[test]
fn bubble_solves_the_critical_equation() {
    let g = grid(512, 2.0);
    let p = ProblemParams::new(3, 1, 1.0).unwrap();
    assert!(bubble_pde_residual(&BubbleSpec::extremal(0.5, p).unwrap(), &g) < 1e-8);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    assert!(bubble_pde_residual(&BubbleSpec::extremal(1.0, p).unwrap(), &g) < 1e-6);
}

#[test]
fn truncated_bubble_energy_excess_is_linear_in_eps() {
    // n - 2m = 1: halving eps halves the excess over the whole-space energy
    let g = grid(512, 2.0);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    let s = constants_table(&p).s_pow;
    let excess = |e: f64| {
        let b = BubbleSpec::extremal(e, p).unwrap();
        nabla_m_norm_sq(&truncated_bubble(&b, &CutoffSpec::default(), &g), &p) - s
    };
    let (a, b) = (excess(0.02), excess(0.01));
    assert!(a > 0.0 && b > 0.0);
    assert!((a / b - 2.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn rellich_ratio_of_singular_family() {
    // independent high-precision quadrature of the same family
    let g = grid(1024, 3.0);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    let t = sharpness_trend(
        InequalityKind::Rellich,
        &p,
        0.0,
        &[0.1],
        &CutoffSpec::default(),
        &g,
    )
    .unwrap();
    assert!(
        close(t.final_ratio, 17.652122908, 1e-4),
        "{}",
        t.final_ratio
    );
}

#[test]
fn hardy_and_rellich_ratios_of_paraboloid() {
    let g = grid(512, 2.0);
    let u = RadialProfile::from_fn(&g, 5, 1, |r| 1.0 - r * r).unwrap();
    let h = hardy_ratio(&u, 0.0, 5).unwrap();
    assert!(close(h.ratio, 10.0 / 3.0, 1e-8), "{}", h.ratio);
    let omega4 = 8.0 * PI * PI / 3.0;
    let r = rellich_ratio(&u, 0.0, 5).unwrap();
    assert!(close(r.lhs, 20.0 * omega4, 1e-8) && close(r.rhs, 5.0 * omega4, 1e-8));
    assert!(close(r.ratio, 4.0, 1e-8));
}

#[test]
fn luxemburg_norm_is_one_on_the_unit_modular_sphere() {
    let g = grid(256, 2.0);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    let field = ExponentField::new(&p, &g);
    let u = random_profile(&g, 5, 2, 3).unwrap();
    let (mut lo, mut hi) = (1e-3f64, 1e3f64);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if modular(&u.scaled(mid), &field).unwrap().modular > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let norm = luxemburg_norm(&u.scaled(lo), &field).unwrap();
    assert!((norm - 1.0).abs() < 1e-8, "{norm}");
}

#[test]
fn energy_is_quadratic_near_zero() {
    let g = grid(256, 2.0);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    let u = random_profile(&g, 5, 2, 11).unwrap();
    let t = 1e-3;
    let e = energy(&u.scaled(t), &p).unwrap();
    let q = 0.5 * t * t * nabla_m_norm_sq(&u, &p);
    assert!(e > 0.0, "{e} {q}");
    let bound = (t.powf(p.two_m_star() - 2.0) * 1e3).max(1e-13) * q;
    assert!((e - q).abs() < bound, "{e} {q}");
}

#[test]
fn weak_derivative_matches_central_difference() {
    let g = grid(256, 2.0);
    let p = ProblemParams::new(5, 2, 1.0).unwrap();
    for seed in [1u64, 2, 3] {
        let u = random_profile(&g, 5, 2, seed).unwrap().scaled(3.0);
        let phi = random_profile(&g, 5, 2, seed + 100).unwrap();
        let h = 1e-5;
        let fd = (energy(&u.axpy(h, &phi).unwrap(), &p).unwrap()
            - energy(&u.axpy(-h, &phi).unwrap(), &p).unwrap())
            / (2.0 * h);
        let exact = weak_derivative(&u, &phi, &p).unwrap();
        assert!(close(fd, exact, 1e-5), "{fd} vs {exact}");
    }
}

#[test]
fn pointwise_bound_for_linear_profile() {
    let g = grid(256, 2.0);
    let w = RadialProfile::from_fn(&g, 3, 1, |s| 1.0 - s).unwrap();
    assert!(close(fractional_energy(&w, 3.0), 1.0 / 3.0, 1e-12));
    assert!(pointwise_bound_check(&w, 3.0, 1.0 / 3.0).unwrap().holds);
}

#[test]
fn compactly_supported_bump_satisfies_hardy_and_rellich() {
    let g = grid(512, 2.0);
    let bump = |r: f64| {
        if r > 0.1 && r < 0.9 {
            (-1.0 / ((r - 0.1) * (0.9 - r))).exp()
        } else {
            0.0
        }
    };
    for n in [6usize, 7] {
        let u = RadialProfile::from_fn(&g, n, 3, bump).unwrap();
        for a in [0.0, 1.0] {
            assert!(hardy_ratio(&u, a, n).unwrap().ratio >= 1.0 - 1e-6);
            assert!(rellich_ratio(&u, a, n).unwrap().ratio >= 1.0 - 1e-6);
        }
    }
}
