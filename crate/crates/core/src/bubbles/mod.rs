//! The bubble family `C (2 eps / (eps^2 + r^2))^{(n-2m)/2}`, smooth cutoffs,
//! closed-form and quadrature constants, and regression checks of the
//! small-`eps` expansions of the truncated bubbles.
//!
//! The shape with `C = 1` solves `(-Delta)^m u = P u^{2*-1}` where
//! `P = prod_{h=-m}^{m-1} (n/2 + h)`, so the extremal of the Sobolev
//! inequality normalized to `(-Delta)^m u = u^{2*-1}` carries the amplitude
//! `P^{1/(2*-2)}`. Both normalizations are exposed: the unit-amplitude
//! integrals drive the expansions, the extremal one fixes `S`.

mod expansion;
mod whole_space;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::params::{sphere_area, ProblemParams};
use crate::profile::{RadialProfile, VANISH_SMOOTH};
use crate::radial_core::apply_polyharmonic;

pub use expansion::{
    expansion_check_gradient, expansion_check_modular, expansion_check_weighted, fit_log_linear,
    fit_two_term, ExpansionConfig, ExpansionReport, ExpansionRow, GradientExpansion,
};
pub use whole_space::{whole_space_integral, RationalRadial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BubbleSpec {
    pub epsilon: f64,
    pub amplitude: f64,
    pub params: ProblemParams,
}

impl BubbleSpec {
    pub fn new(epsilon: f64, amplitude: f64, params: ProblemParams) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Domain(format!(
                "epsilon > 0 required (got {epsilon})"
            )));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::Domain(format!(
                "amplitude > 0 required (got {amplitude})"
            )));
        }
        Ok(Self {
            epsilon,
            amplitude,
            params,
        })
    }

    /// Unit-amplitude shape.
    pub fn unit(epsilon: f64, params: ProblemParams) -> Result<Self> {
        Self::new(epsilon, 1.0, params)
    }

    /// Amplitude for which the bubble solves `(-Delta)^m u = u^{2*-1}`.
    pub fn extremal(epsilon: f64, params: ProblemParams) -> Result<Self> {
        Self::new(epsilon, extremal_amplitude(&params), params)
    }

    /// `A = 2^{(n-2m)/2} C`, the value of `C u*_1` at the origin.
    pub fn a_nm(&self) -> f64 {
        2f64.powf(self.params.half_gap()) * self.amplitude
    }

    pub fn value(&self, r: f64) -> f64 {
        let e = self.epsilon;
        self.amplitude * (2.0 * e / (e * e + r * r)).powf(self.params.half_gap())
    }

    /// The bubble as an exact rational function of `r^2`.
    pub fn rational(&self) -> RationalRadial {
        let h = self.params.half_gap();
        let e = self.epsilon;
        RationalRadial::power(self.amplitude * (2.0 * e).powf(h), e * e, h)
    }
}

pub fn bubble_value(spec: &BubbleSpec, r: f64) -> f64 {
    spec.value(r)
}

/// `prod_{h=-m}^{m-1} (n/2 + h)`, the eigenvalue of the unit-amplitude bubble.
pub fn bubble_eigenvalue(params: &ProblemParams) -> f64 {
    let half = params.n as f64 / 2.0;
    let m = params.m as i64;
    (-m..m).map(|h| half + h as f64).product()
}

pub fn extremal_amplitude(params: &ProblemParams) -> f64 {
    bubble_eigenvalue(params).powf(1.0 / (params.two_m_star() - 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffProfile {
    /// `psi(1-t) / (psi(1-t) + psi(t))` with `psi(t) = exp(-1/t)`.
    #[default]
    ExpBlend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub profile: CutoffProfile,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self {
            inner_radius: 0.5,
            outer_radius: 0.75,
            profile: CutoffProfile::ExpBlend,
        }
    }
}

impl CutoffSpec {
    pub fn new(inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !(0.0 < inner_radius && inner_radius < outer_radius && outer_radius <= 1.0) {
            return Err(Error::Config(format!(
                "cutoff radii must satisfy 0 < inner < outer <= 1 (got {inner_radius}, {outer_radius})"
            )));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
            profile: CutoffProfile::ExpBlend,
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= self.inner_radius {
            return 1.0;
        }
        if r >= self.outer_radius {
            return 0.0;
        }
        let t = (r - self.inner_radius) / (self.outer_radius - self.inner_radius);
        let psi = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
        let (a, b) = (psi(1.0 - t), psi(t));
        a / (a + b)
    }
}

pub fn cutoff_value(spec: &CutoffSpec, r: f64) -> f64 {
    spec.value(r)
}

/// `C eta u*_eps` at the grid nodes; smooth, so it carries full vanish order.
pub fn truncated_bubble(
    spec: &BubbleSpec,
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> RadialProfile {
    let vals = grid
        .nodes()
        .iter()
        .map(|&r| cutoff.value(r) * spec.value(r))
        .collect();
    RadialProfile::new(grid.clone(), vals, spec.params.n, VANISH_SMOOTH)
        .expect("bubble values are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossover {
    /// Radius where `C u*_eps = 1`.
    pub a_eps: f64,
    /// `(2 eps - eps^2)^{1/2}`, the same radius for `C = 1`.
    pub b_eps: Option<f64>,
}

pub fn crossover_radius(spec: &BubbleSpec) -> Result<Crossover> {
    let e = spec.epsilon;
    let k = 1.0 / spec.params.half_gap();
    let rad = spec.a_nm().powf(k) * e - e * e;
    if !(rad > 0.0) {
        return Err(Error::Domain(format!(
            "crossover radius undefined: eps = {e} >= A^(2/(n-2m)) = {}",
            spec.a_nm().powf(k)
        )));
    }
    let b_eps = if spec.amplitude == 1.0 {
        Some((2.0 * e - e * e).sqrt())
    } else {
        None
    };
    Ok(Crossover {
        a_eps: rad.sqrt(),
        b_eps,
    })
}

/// `((n + a)(n - a - 4) / 4)^2`.
pub fn c_na(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    ((nf + a) * (nf - a - 4.0) / 4.0).powi(2)
}

/// Hardy-Rellich constant from the product of the Rellich-type constants.
pub fn c_hr_product_form(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let tail = ((nf + 2.0 * m as f64 - 4.0) / 2.0).powi(2);
    let count = (m / 2) as i64 - 1;
    if m % 2 == 0 {
        tail * (0..count.max(0))
            .map(|i| c_na(n, 4.0 * i as f64))
            .product::<f64>()
    } else {
        ((nf - 2.0) / 2.0).powi(2)
            * tail
            * (0..count.max(0))
                .map(|i| c_na(n, 2.0 + 4.0 * i as f64))
                .product::<f64>()
    }
}

/// Hardy-Rellich constant from the expanded closed form.
pub fn c_hr_explicit_form(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let k = m / 2;
    if m % 2 == 0 {
        4.0 / (nf - 4.0 * k as f64).powi(2)
            * (0..k)
                .map(|i| {
                    let i = i as f64;
                    (nf + 4.0 * i).powi(2) * (nf - 4.0 * i - 4.0).powi(2) / 16.0
                })
                .product::<f64>()
    } else {
        (nf + 4.0 * k as f64 - 2.0).powi(2) / (nf - 2.0).powi(2)
            * (0..k)
                .map(|i| {
                    let i = i as f64;
                    (nf - 2.0 + 4.0 * i).powi(2) * (nf - 2.0 - 4.0 * i).powi(2) / 16.0
                })
                .product::<f64>()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsTable {
    pub params: ProblemParams,
    pub two_m_star: f64,
    pub omega: f64,
    pub c_hr: f64,
    pub c_hr_product_form: f64,
    pub c_hr_explicit_form: f64,
    /// `int_{R^n} |nabla^m u*_1|^2` for the unit-amplitude bubble.
    pub gradient_energy: f64,
    /// `int_{R^n} (u*_1)^{2*}` for the unit-amplitude bubble.
    pub critical_modular: f64,
    pub bubble_eigenvalue: f64,
    pub extremal_amplitude: f64,
    /// `S^{-n/m}`: energy of the extremal bubble.
    pub s_pow: f64,
    pub s: f64,
    pub sigma: f64,
    /// First-order constant of the modular expansion; `None` when `alpha >= n`.
    pub script_c1: Option<f64>,
}

/// Every constant, with `S^{-n/m}` from whole-space quadrature.
pub fn constants_table(params: &ProblemParams) -> ConstantsTable {
    let n = params.n;
    let m = params.m;
    let unit = BubbleSpec::unit(1.0, *params).expect("unit bubble");
    let rat = unit.rational();
    let d = whole_space_integral(rat.grad_m_sq(m, n), n, 1.0);
    let q = params.two_m_star();
    let j = whole_space_integral(|r| unit.value(r).powf(q), n, 1.0);
    let eig = bubble_eigenvalue(params);
    let c = extremal_amplitude(params);
    let s_pow = c * c * d;
    let s = s_pow.powf(-(m as f64) / n as f64);
    let script_c1 = if params.alpha < n as f64 {
        let a = params.alpha;
        Some(
            params.half_gap()
                * 2f64.powi(n as i32)
                * whole_space_integral(|r| r.powf(a) * (1.0 + r * r).powi(-(n as i32)), n, 1.0),
        )
    } else {
        None
    };
    let c_hr_p = c_hr_product_form(n, m);
    ConstantsTable {
        params: *params,
        two_m_star: q,
        omega: sphere_area(n),
        c_hr: c_hr_p,
        c_hr_product_form: c_hr_p,
        c_hr_explicit_form: c_hr_explicit_form(n, m),
        gradient_energy: d,
        critical_modular: j,
        bubble_eigenvalue: eig,
        extremal_amplitude: c,
        s_pow,
        s,
        sigma: s.powf(q),
        script_c1,
    }
}

/// `max |(-Delta)^m u - u^{2*-1}| / max u^{2*-1}` over the nodes.
pub fn bubble_pde_residual(spec: &BubbleSpec, grid: &Arc<RadialGrid>) -> f64 {
    let params = spec.params;
    let u = RadialProfile::from_fn(grid, params.n, 0, |r| spec.value(r))
        .expect("bubble values are finite");
    let lhs = apply_polyharmonic(&u, &params);
    let q = params.two_m_star() - 1.0;
    let rhs: Vec<f64> = u.values().iter().map(|v| v.powf(q)).collect();
    let scale = rhs.iter().fold(0.0f64, |a, b| a.max(*b));
    lhs.values()
        .iter()
        .zip(&rhs)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn p(n: usize, m: usize) -> ProblemParams {
        ProblemParams::new(n, m, 1.0).unwrap()
    }

    #[test]
    fn bubble_examples() {
        let s = BubbleSpec::unit(1.0, p(5, 2)).unwrap();
        assert!((s.value(0.0) - 2f64.sqrt()).abs() < 1e-15);
        for (n, m) in [(3, 1), (5, 2), (8, 3)] {
            assert_eq!(BubbleSpec::unit(1.0, p(n, m)).unwrap().value(1.0), 1.0);
        }
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffSpec::default();
        assert_eq!(c.value(0.3), 1.0);
        assert_eq!(c.value(0.8), 0.0);
        assert!((c.value(0.625) - 0.5).abs() < 1e-15);
        let d = CutoffSpec::new(0.5, 0.9).unwrap();
        assert_eq!(d.value(0.95), 0.0);
        assert!(CutoffSpec::new(0.6, 0.5).is_err());
    }

    #[test]
    fn crossover_example() {
        let s = BubbleSpec::unit(0.01, p(5, 2)).unwrap();
        let c = crossover_radius(&s).unwrap();
        assert!((c.a_eps - 0.0199f64.sqrt()).abs() < 1e-15);
        assert!((c.a_eps - c.b_eps.unwrap()).abs() < 1e-15);
        assert!(crossover_radius(&BubbleSpec::unit(2.5, p(5, 2)).unwrap()).is_err());
    }

    #[test]
    fn c_na_examples() {
        assert_eq!(c_na(6, 0.0), 9.0);
        assert_eq!(c_na(8, 0.0), 64.0);
        assert_eq!(c_na(7, 3.0), 0.0);
    }

    #[test]
    fn c_hr_forms_agree() {
        assert_eq!(c_hr_product_form(5, 2), 6.25);
        assert!((c_hr_explicit_form(7, 3) - 126.5625).abs() < 1e-12);
        for m in 2..=4 {
            for n in 2 * m + 1..=12 {
                let a = c_hr_product_form(n, m);
                let b = c_hr_explicit_form(n, m);
                assert!((a - b).abs() <= 1e-12 * a, "n={n} m={m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvalue_products() {
        assert_eq!(bubble_eigenvalue(&p(3, 1)), 0.75);
        assert_eq!(bubble_eigenvalue(&p(5, 2)), 1.5 * 2.5 * 3.5 * 0.5);
    }

    #[test]
    fn script_c1_example() {
        let t = constants_table(&p(5, 2));
        assert!((t.script_c1.unwrap() - 16.0 * PI * PI / 9.0).abs() < 1e-10);
        let big = ProblemParams::new(5, 2, 5.0).unwrap();
        assert!(constants_table(&big).script_c1.is_none());
    }

    #[test]
    fn extremal_bubble_identity() {
        for (n, m) in [(3, 1), (5, 2), (6, 2), (7, 3)] {
            let t = constants_table(&p(n, m));
            let c = t.extremal_amplitude;
            let grad = c * c * t.gradient_energy;
            let modular = c.powf(t.two_m_star) * t.critical_modular;
            assert!((grad / modular - 1.0).abs() < 1e-10, "{n} {m}");
            assert!((t.sigma - t.s.powf(t.two_m_star)).abs() < 1e-10 * t.sigma);
        }
    }

    #[test]
    fn first_order_constant_matches_aubin_talenti() {
        use statrs::function::gamma::gamma;
        for n in [3usize, 4, 5, 7] {
            let t = constants_table(&p(n, 1));
            let nf = n as f64;
            let classical =
                (PI * nf * (nf - 2.0)).powf(-0.5) * (gamma(nf) / gamma(nf / 2.0)).powf(1.0 / nf);
            assert!(
                (t.s / classical - 1.0).abs() < 1e-10,
                "n={n}: {} {}",
                t.s,
                classical
            );
        }
    }

    #[test]
    fn pde_residual_small() {
        let g = make_grid(512, 2.0).unwrap();
        let s = BubbleSpec::extremal(1.0, p(5, 2)).unwrap();
        let r = bubble_pde_residual(&s, &g);
        assert!(r < 1e-6, "{r:e}");
        let s = BubbleSpec::extremal(0.5, p(3, 1)).unwrap();
        let r = bubble_pde_residual(&s, &g);
        assert!(r < 1e-8, "{r:e}");
    }
}
