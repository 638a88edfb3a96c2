//! Variable-exponent modulars, Luxemburg norms and the supercritical energy
//! `I(u) = 1/2 int |nabla^m u|^2 - int u_+^{p(x)} / p(x)` with its Sobolev gradient.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::params::{sphere_area, ProblemParams};
use crate::profile::RadialProfile;
use crate::radial_core::{grad_m_inner, nabla_m_norm_sq, solve_polyharmonic};

/// Default radius separating the inner and outer parts of a modular.
pub const DEFAULT_SPLIT: f64 = 0.5;

/// `p(r) = 2n/(n-2m) + r^alpha` at the grid nodes.
#[derive(Debug, Clone)]
pub struct ExponentField {
    grid: Arc<RadialGrid>,
    p_values: Vec<f64>,
    params: ProblemParams,
}

impl ExponentField {
    pub fn new(params: &ProblemParams, grid: &Arc<RadialGrid>) -> Self {
        let base = params.two_m_star();
        let p_values = grid
            .nodes()
            .iter()
            .map(|r| base + r.powf(params.alpha))
            .collect();
        Self {
            grid: grid.clone(),
            p_values,
            params: *params,
        }
    }

    /// Constant field `p = 2n/(n-2m)`, the critical case.
    pub fn critical(params: &ProblemParams, grid: &Arc<RadialGrid>) -> Self {
        Self {
            grid: grid.clone(),
            p_values: vec![params.two_m_star(); grid.len()],
            params: *params,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.p_values
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    fn check(&self, u: &RadialProfile) -> Result<()> {
        if Arc::ptr_eq(&self.grid, u.grid()) || *self.grid == **u.grid() {
            Ok(())
        } else {
            Err(Error::Usage(
                "exponent field and profile live on different grids".into(),
            ))
        }
    }
}

/// `exponent_field(params, grid)`.
pub fn exponent_field(params: &ProblemParams, grid: &Arc<RadialGrid>) -> ExponentField {
    ExponentField::new(params, grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModularReport {
    pub modular: f64,
    pub split_inner: f64,
    pub split_outer: f64,
    pub r_split: f64,
}

/// `|x|^p` through `exp(p ln|x|)`; zero below 1e-300.
fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a <= 1e-300 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// Integrand weights `omega w_i r_i^{n-1}`.
fn ball_weights(grid: &RadialGrid, n: usize) -> impl Iterator<Item = f64> + '_ {
    let omega = sphere_area(n);
    let pw = n as i32 - 1;
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .map(move |(r, w)| omega * w * r.powi(pw))
}

/// `int_B |u|^{p(x)} dx`, split at `r_split`.
pub fn modular_split(u: &RadialProfile, p: &ExponentField, r_split: f64) -> Result<ModularReport> {
    p.check(u)?;
    let grid = u.grid();
    let (mut inner, mut outer) = (0.0, 0.0);
    for (i, (w, (&v, &pi))) in ball_weights(grid, p.params.n)
        .zip(u.values().iter().zip(&p.p_values))
        .enumerate()
    {
        let t = abs_pow(v, pi);
        if !t.is_finite() {
            return Err(Error::Overflow {
                node: i,
                r: grid.nodes()[i],
                value: v,
                exponent: pi,
            });
        }
        if grid.nodes()[i] < r_split {
            inner += w * t;
        } else {
            outer += w * t;
        }
    }
    let modular = inner + outer;
    if !modular.is_finite() {
        let i = u
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        return Err(Error::Overflow {
            node: i,
            r: grid.nodes()[i],
            value: u.values()[i],
            exponent: p.p_values[i],
        });
    }
    Ok(ModularReport {
        modular,
        split_inner: inner,
        split_outer: outer,
        r_split,
    })
}

/// Modular with the default split at `r = 1/2`.
pub fn modular(u: &RadialProfile, p: &ExponentField) -> Result<ModularReport> {
    modular_split(u, p, DEFAULT_SPLIT)
}

/// Modular value of `u / lambda`, `+inf` on overflow.
fn scaled_modular(u: &RadialProfile, p: &ExponentField, lambda: f64) -> f64 {
    ball_weights(u.grid(), p.params.n)
        .zip(u.values().iter().zip(&p.p_values))
        .map(|(w, (&v, &pi))| w * abs_pow(v / lambda, pi))
        .sum()
}

/// `inf { lambda > 0 : modular(u / lambda) <= 1 }` by bisection in `ln lambda`.
pub fn luxemburg_norm(u: &RadialProfile, p: &ExponentField) -> Result<f64> {
    p.check(u)?;
    let umax = u.max_abs();
    if umax == 0.0 {
        return Ok(0.0);
    }
    let volume = sphere_area(p.params.n) / p.params.n as f64;
    let mut lo = 1e-14f64;
    let mut hi = umax * (volume + 1.0);
    if scaled_modular(u, p, hi) > 1.0 || scaled_modular(u, p, lo) < 1.0 {
        return Err(Error::Numerical(format!(
            "Luxemburg bracket [{lo:e}, {hi:e}] does not contain the root"
        )));
    }
    for _ in 0..200 {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if mid <= lo || mid >= hi {
            break;
        }
        if scaled_modular(u, p, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `int_B u_+^{p(x)} / p(x) dx`.
pub fn potential(u: &RadialProfile, p: &ExponentField) -> Result<f64> {
    p.check(u)?;
    let mut s = 0.0;
    for (i, (w, (&v, &pi))) in ball_weights(u.grid(), p.params.n)
        .zip(u.values().iter().zip(&p.p_values))
        .enumerate()
    {
        if v > 0.0 {
            let t = abs_pow(v, pi) / pi;
            if !t.is_finite() {
                return Err(Error::Overflow {
                    node: i,
                    r: u.r()[i],
                    value: v,
                    exponent: pi,
                });
            }
            s += w * t;
        }
    }
    Ok(s)
}

/// `u_+^{p(x)-1}` at the nodes.
pub fn reaction(u: &RadialProfile, p: &ExponentField) -> Result<RadialProfile> {
    p.check(u)?;
    let vals = u
        .values()
        .iter()
        .zip(&p.p_values)
        .map(|(&v, &pi)| if v > 0.0 { abs_pow(v, pi - 1.0) } else { 0.0 })
        .collect();
    RadialProfile::new(u.grid().clone(), vals, u.n(), u.vanish_order())
}

/// `I(u)` for the exponent field built from `params`.
pub fn energy(u: &RadialProfile, params: &ProblemParams) -> Result<f64> {
    let p = ExponentField::new(params, u.grid());
    energy_with(u, &p)
}

pub fn energy_with(u: &RadialProfile, p: &ExponentField) -> Result<f64> {
    Ok(0.5 * nabla_m_norm_sq(u, &p.params) - potential(u, p)?)
}

/// Sobolev gradient `u - (-Delta)^{-m} u_+^{p-1}` of `I`.
pub fn energy_gradient(u: &RadialProfile, params: &ProblemParams) -> Result<RadialProfile> {
    let p = ExponentField::new(params, u.grid());
    energy_gradient_with(u, &p)
}

pub fn energy_gradient_with(u: &RadialProfile, p: &ExponentField) -> Result<RadialProfile> {
    let params = p.params;
    let f = reaction(u, p)?;
    let w = solve_polyharmonic(&f, &params)?;
    u.clone().with_vanish_order(params.m).sub(&w)
}

/// `<I'(u), phi> = int nabla^m u . nabla^m phi - int u_+^{p-1} phi`, evaluated directly.
pub fn weak_derivative(
    u: &RadialProfile,
    phi: &RadialProfile,
    params: &ProblemParams,
) -> Result<f64> {
    let p = ExponentField::new(params, u.grid());
    let f = reaction(u, &p)?;
    let load: f64 = ball_weights(u.grid(), params.n)
        .zip(f.values().iter().zip(phi.values()))
        .map(|(w, (a, b))| w * a * b)
        .sum();
    Ok(grad_m_inner(u, phi, params)? - load)
}

/// `modular(u_j) - modular(u_j - u) - modular(u)`.
pub fn brezis_lieb_defect(
    u_j: &RadialProfile,
    u: &RadialProfile,
    p: &ExponentField,
) -> Result<f64> {
    let diff = u_j.sub(u)?;
    Ok(modular(u_j, p)?.modular - modular(&diff, p)?.modular - modular(u, p)?.modular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn setup() -> (Arc<RadialGrid>, ProblemParams) {
        (
            make_grid(128, 2.0).unwrap(),
            ProblemParams::new(5, 2, 1.0).unwrap(),
        )
    }

    #[test]
    fn exponent_field_values() {
        let (g, p) = setup();
        let f = exponent_field(&p, &g);
        for (r, v) in g.nodes().iter().zip(f.values()) {
            assert!((v - (10.0 + r)).abs() < 1e-14);
        }
        let q = ProblemParams::new(3, 1, 0.5).unwrap();
        let f = exponent_field(&q, &g);
        assert!((f.values()[40] - (6.0 + g.nodes()[40].sqrt())).abs() < 1e-14);
    }

    #[test]
    fn zero_profile() {
        let (g, p) = setup();
        let z = RadialProfile::zeros(&g, 5);
        let f = exponent_field(&p, &g);
        let m = modular(&z, &f).unwrap();
        assert_eq!(m.modular, 0.0);
        assert_eq!(luxemburg_norm(&z, &f).unwrap(), 0.0);
        assert_eq!(energy(&z, &p).unwrap(), 0.0);
        assert!(energy_gradient(&z, &p).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn split_adds_up() {
        let (g, p) = setup();
        let u = RadialProfile::from_fn(&g, 5, 2, |r| 1.3 * (1.0 - r * r).powi(2)).unwrap();
        let m = modular(&u, &exponent_field(&p, &g)).unwrap();
        assert!((m.split_inner + m.split_outer - m.modular).abs() <= 1e-12 * m.modular);
        assert!(m.split_inner > 0.0 && m.split_outer > 0.0);
    }

    #[test]
    fn overflow_names_the_node() {
        let (g, p) = setup();
        let u = RadialProfile::from_fn(&g, 5, 2, |r| if r < 0.1 { 1e40 } else { 0.0 }).unwrap();
        match modular(&u, &exponent_field(&p, &g)) {
            Err(Error::Overflow { node, .. }) => assert_eq!(node, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn luxemburg_unit_modular() {
        let (g, p) = setup();
        let f = exponent_field(&p, &g);
        let u = RadialProfile::from_fn(&g, 5, 2, |r| (1.0 - r * r).powi(2) * (2.0 - r)).unwrap();
        let lam = luxemburg_norm(&u, &f).unwrap();
        let v = u.scaled(1.0 / lam);
        assert!((modular(&v, &f).unwrap().modular - 1.0).abs() < 1e-10);
        assert!((luxemburg_norm(&v, &f).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn energy_of_nonpositive_profile_is_quadratic() {
        let (g, p) = setup();
        let u = RadialProfile::from_fn(&g, 5, 2, |r| -(1.0 - r * r).powi(2)).unwrap();
        let e = energy(&u, &p).unwrap();
        assert_eq!(e, 0.5 * nabla_m_norm_sq(&u, &p));
    }
}
