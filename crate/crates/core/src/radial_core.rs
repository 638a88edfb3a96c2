//! Radial calculus on the unit ball: integrals, derivatives, the m-th order
//! energy and polyharmonic solves.
//!
//! Profiles are identified with the degree-5 spline in `rho = r^2` that
//! interpolates their nodal values (see [`crate::spline`]). In that variable
//! the radial Laplacian is `4 rho d^2/drho^2 + 2n d/drho`, which has no
//! singular coefficient at the origin. Energies are integrated exactly for
//! the spline with Gauss rules on every knot interval; the polyharmonic
//! operator is discretized by Galerkin on the constrained spline space, so
//! the stiffness matrix is symmetric positive definite.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::linalg::{Banded, BandedCholesky};
use crate::params::{sphere_area, ProblemParams};
use crate::profile::RadialProfile;
use crate::spline::{combine, SplineSpace, DEGREE, MAX_FINE_DERIV};
use crate::stencil::rho_derivatives;

const W: usize = DEGREE + 1;

/// Normwise backward error accepted from the banded solve.
const BACKWARD_TOL: f64 = 1e-12;

/// Linear radial operator `sum_j a_j(rho) d^j/drho^j`, optionally multiplied by `d rho / dr = 2r`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    terms: Vec<Vec<f64>>,
    times_two_r: bool,
}

fn poly_deriv(p: &[f64]) -> Vec<f64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn poly_add_into(dst: &mut Vec<f64>, src: &[f64], scale: f64, shift: usize) {
    if dst.len() < src.len() + shift {
        dst.resize(src.len() + shift, 0.0);
    }
    for (k, c) in src.iter().enumerate() {
        dst[k + shift] += scale * c;
    }
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl RadialOperator {
    pub fn identity() -> Self {
        Self {
            terms: vec![vec![1.0]],
            times_two_r: false,
        }
    }

    /// `d/dr`.
    pub fn d_dr() -> Self {
        Self {
            terms: vec![vec![], vec![1.0]],
            times_two_r: true,
        }
    }

    /// `Delta^k` in dimension `n`.
    pub fn laplacian_power(k: usize, n: usize) -> Self {
        let mut op = Self::identity();
        for _ in 0..k {
            op = op.then_laplacian(n);
        }
        op
    }

    /// `nabla^m`: `Delta^{m/2}` for even `m`, `d/dr Delta^{(m-1)/2}` for odd `m`.
    pub fn grad_m(m: usize, n: usize) -> Self {
        let base = Self::laplacian_power(m / 2, n);
        if m % 2 == 0 {
            base
        } else {
            let mut op = base.then_d_rho();
            op.times_two_r = true;
            op
        }
    }

    /// `(-Delta)^m`.
    pub fn polyharmonic(m: usize, n: usize) -> Self {
        let mut op = Self::laplacian_power(m, n);
        if m % 2 == 1 {
            for t in op.terms.iter_mut() {
                for c in t.iter_mut() {
                    *c = -*c;
                }
            }
        }
        op
    }

    /// Highest `rho`-derivative involved.
    pub fn order(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    fn then_laplacian(&self, n: usize) -> Self {
        assert!(
            !self.times_two_r,
            "Laplacian of an odd operator is not needed"
        );
        let nf = n as f64;
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); self.terms.len() + 2];
        for (j, a) in self.terms.iter().enumerate() {
            let a1 = poly_deriv(a);
            let a2 = poly_deriv(&a1);
            poly_add_into(&mut out[j], &a2, 4.0, 1);
            poly_add_into(&mut out[j], &a1, 2.0 * nf, 0);
            poly_add_into(&mut out[j + 1], &a1, 8.0, 1);
            poly_add_into(&mut out[j + 1], a, 2.0 * nf, 0);
            poly_add_into(&mut out[j + 2], a, 4.0, 1);
        }
        Self {
            terms: out,
            times_two_r: false,
        }
    }

    fn then_d_rho(&self) -> Self {
        let mut out: Vec<Vec<f64>> = vec![Vec::new(); self.terms.len() + 1];
        for (j, a) in self.terms.iter().enumerate() {
            poly_add_into(&mut out[j], &poly_deriv(a), 1.0, 0);
            poly_add_into(&mut out[j + 1], a, 1.0, 0);
        }
        Self {
            terms: out,
            times_two_r: self.times_two_r,
        }
    }

    /// Operator value at radius `r` given `rho`-derivatives `der(j)`.
    pub fn apply_at(&self, r: f64, der: impl Fn(usize) -> f64) -> f64 {
        let rho = r * r;
        let mut s = 0.0;
        for (j, a) in self.terms.iter().enumerate() {
            if !a.is_empty() {
                s += poly_eval(a, rho) * der(j);
            }
        }
        if self.times_two_r {
            s * 2.0 * r
        } else {
            s
        }
    }

    /// Combine basis derivatives `ders[j]` at radius `r` into operator values.
    pub fn row(&self, r: f64, ders: &[[f64; W]]) -> [f64; W] {
        let rho = r * r;
        let mut row = [0.0; W];
        for (j, a) in self.terms.iter().enumerate() {
            if a.is_empty() || j > DEGREE {
                continue;
            }
            let c = poly_eval(a, rho);
            if c == 0.0 {
                continue;
            }
            for l in 0..W {
                row[l] += c * ders[j][l];
            }
        }
        if self.times_two_r {
            for v in row.iter_mut() {
                *v *= 2.0 * r;
            }
        }
        row
    }
}

/// `omega_{n-1} int_0^R f(r) r^{n-1} dr` by the grid rule.
pub fn ball_integral(f: &RadialProfile, n: usize) -> f64 {
    sphere_area(n) * radial_moment(f.grid(), f.values(), n as f64 - 1.0)
}

/// `int_0^R f(r) r^power dr` by the grid rule.
pub fn radial_moment(grid: &RadialGrid, values: &[f64], power: f64) -> f64 {
    grid.nodes()
        .iter()
        .zip(grid.weights())
        .zip(values)
        .map(|((r, w), f)| w * f * r.powf(power))
        .sum()
}

/// Spectral derivative on each Gauss panel.
pub fn radial_derivative(u: &RadialProfile) -> RadialProfile {
    let grid = u.grid();
    let q = grid.rule().order;
    let d = grid.reference_diff();
    let edges = grid.panel_edges();
    let vals = u.values();
    let mut out = vec![0.0; vals.len()];
    for k in 0..grid.rule().panels {
        let scale = 2.0 / (edges[k + 1] - edges[k]);
        let base = k * q;
        for i in 0..q {
            let s: f64 = (0..q).map(|j| d[i * q + j] * vals[base + j]).sum();
            out[base + i] = s * scale;
        }
    }
    RadialProfile::new(grid.clone(), out, u.n(), u.vanish_order().saturating_sub(1))
        .expect("derivative of finite values is finite")
}

/// Spline coefficients of `u` in its own constrained space.
pub(crate) fn coefficients(u: &RadialProfile) -> (Arc<SplineSpace>, Vec<f64>) {
    let space = u.grid().space(u.vanish_order());
    let c = space.interpolate(u.values());
    (space, c)
}

/// Strong application of `op` at the grid nodes.
///
/// Pointwise derivatives come from [`crate::stencil`], not from the
/// interpolating spline, whose high derivatives are dominated by rounding
/// noise where nodes crowd the origin.
pub fn apply_operator(u: &RadialProfile, op: &RadialOperator) -> Vec<f64> {
    let grid = u.grid();
    let rho: Vec<f64> = u.r().iter().map(|r| r * r).collect();
    let end = grid.radius() * grid.radius();
    let d = rho_derivatives(&rho, end, u.values(), op.order());
    (0..rho.len())
        .map(|i| op.apply_at(u.r()[i], |j| d[j][i]))
        .collect()
}

/// `Delta u` at the nodes; smooth through the origin.
pub fn radial_laplacian(u: &RadialProfile, n: usize) -> RadialProfile {
    let vals = apply_operator(u, &RadialOperator::laplacian_power(1, n));
    RadialProfile::new(
        u.grid().clone(),
        vals,
        u.n(),
        u.vanish_order().saturating_sub(2),
    )
    .expect("Laplacian values are finite")
}

/// `(-Delta)^m u` at the nodes.
pub fn apply_polyharmonic(u: &RadialProfile, params: &ProblemParams) -> RadialProfile {
    let vals = apply_operator(u, &RadialOperator::polyharmonic(params.m, params.n));
    RadialProfile::new(u.grid().clone(), vals, u.n(), 0).expect("operator values are finite")
}

/// Operator values of the spline `coef` (in `space`) at the fine points of `pts_space`.
fn op_at_points(
    pts_space: &SplineSpace,
    space: &SplineSpace,
    coef: &[f64],
    op: &RadialOperator,
) -> Vec<f64> {
    let same = std::ptr::eq(pts_space, space);
    pts_space
        .fine_points()
        .iter()
        .map(|p| {
            if same && op.order() <= MAX_FINE_DERIV {
                combine(&op.row(p.r, &p.ders), p.first, coef)
            } else {
                let (first, d) = space.basis_ders(p.r * p.r, op.order());
                combine(&op.row(p.r, &d), first, coef)
            }
        })
        .collect()
}

/// `omega int (L u)(L v) r^{n-1-weight} dr` with exact spline quadrature.
pub fn weighted_inner(
    u: &RadialProfile,
    v: &RadialProfile,
    op: &RadialOperator,
    n: usize,
    weight: f64,
) -> Result<f64> {
    u.check_same_grid(v)?;
    let (su, cu) = coefficients(u);
    let (sv, cv) = coefficients(v);
    let pts = if sv.vanish() < su.vanish() { &sv } else { &su };
    let lu = op_at_points(pts, &su, &cu, op);
    let lv = op_at_points(pts, &sv, &cv, op);
    let pw = n as f64 - 1.0 - weight;
    let s: f64 = pts
        .fine_points()
        .iter()
        .zip(lu.iter().zip(&lv))
        .map(|(p, (a, b))| p.weight * p.r.powf(pw) * a * b)
        .sum();
    Ok(sphere_area(n) * s)
}

/// `omega int (L u)^2 r^{n-1-weight} dr` with exact spline quadrature.
pub fn weighted_energy(u: &RadialProfile, op: &RadialOperator, n: usize, weight: f64) -> f64 {
    let (s, c) = coefficients(u);
    let lu = op_at_points(&s, &s, &c, op);
    let pw = n as f64 - 1.0 - weight;
    let sum: f64 = s
        .fine_points()
        .iter()
        .zip(&lu)
        .map(|(p, a)| p.weight * p.r.powf(pw) * a * a)
        .sum();
    sphere_area(n) * sum
}

/// `int_B |nabla^m u|^2 dx`.
pub fn nabla_m_norm_sq(u: &RadialProfile, params: &ProblemParams) -> f64 {
    weighted_energy(
        u,
        &RadialOperator::grad_m(params.m, params.n),
        params.n,
        0.0,
    )
}

/// `int_B nabla^m u . nabla^m v dx`.
pub fn grad_m_inner(u: &RadialProfile, v: &RadialProfile, params: &ProblemParams) -> Result<f64> {
    weighted_inner(
        u,
        v,
        &RadialOperator::grad_m(params.m, params.n),
        params.n,
        0.0,
    )
}

/// Whether `u` carries enough boundary vanishing to lie in `H_0^m`.
pub fn is_conforming(u: &RadialProfile, m: usize) -> bool {
    u.vanish_order() >= m
}

/// `w(s) = u(s^{1/m})` sampled at the grid nodes.
pub fn to_fractional_profile(u: &RadialProfile, m: usize) -> Result<RadialProfile> {
    if m == 0 {
        return Err(Error::Domain("m >= 1 required".into()));
    }
    if m == 1 {
        return Ok(u.clone());
    }
    let (space, c) = coefficients(u);
    let r_max = u.grid().radius();
    let vals = u
        .r()
        .iter()
        .map(|&s| {
            let t = (s / r_max).powf(1.0 / m as f64) * r_max;
            space.eval(&c, t * t, 0)
        })
        .collect();
    RadialProfile::new(u.grid().clone(), vals, u.n(), u.vanish_order())
}

/// Galerkin stiffness of `int nabla^m u . nabla^m v` on the space with `vanish` boundary conditions.
pub(crate) fn stiffness(
    grid: &RadialGrid,
    params: &ProblemParams,
    vanish: usize,
) -> Result<Arc<BandedCholesky>> {
    let space = grid.space(vanish);
    let key = (params.n, params.m, space.vanish());
    grid.stiffness_cached(key, || {
        let op = RadialOperator::grad_m(params.m, params.n);
        let dim = space.dim();
        let mut k = Banded::zeros(dim, DEGREE, DEGREE);
        let omega = sphere_area(params.n);
        let pw = params.n as i32 - 1;
        for p in space.fine_points() {
            let row = op.row(p.r, &p.ders);
            let w = omega * p.weight * p.r.powi(pw);
            for a in 0..W {
                let i = p.first + a;
                if i >= dim || row[a] == 0.0 {
                    continue;
                }
                for b in 0..=a {
                    let j = p.first + b;
                    k.add(i, j, w * row[a] * row[b]);
                }
            }
        }
        for i in 0..dim {
            for j in i.saturating_sub(DEGREE)..i {
                let v = k.get(i, j);
                k.set(j, i, v);
            }
        }
        BandedCholesky::new(k)
    })
}

/// Load vector `int f phi_j dx` over the basis of the `vanish`-constrained space,
/// with `f` replaced by its unconstrained spline interpolant.
pub(crate) fn load_vector(f: &RadialProfile, n: usize, vanish: usize) -> Vec<f64> {
    let grid = f.grid();
    let target = grid.space(vanish);
    let free = grid.space(0);
    let cf = free.interpolate(f.values());
    let omega = sphere_area(n);
    let pw = n as i32 - 1;
    let mut b = vec![0.0; target.dim()];
    let same = target.vanish() == 0;
    for p in target.fine_points() {
        let fv = if same {
            combine(&p.ders[0], p.first, &cf)
        } else {
            free.eval(&cf, p.r * p.r, 0)
        };
        let w = omega * p.weight * p.r.powi(pw) * fv;
        for (l, phi) in p.ders[0].iter().enumerate() {
            if let Some(bj) = b.get_mut(p.first + l) {
                *bj += w * phi;
            }
        }
    }
    b
}

/// Solve `(-Delta)^m g = rhs` in `H_0^m(B)` by Galerkin on the constrained spline space.
pub fn solve_polyharmonic(rhs: &RadialProfile, params: &ProblemParams) -> Result<RadialProfile> {
    solve_polyharmonic_checked(rhs, params).map(|(g, _)| g)
}

/// As [`solve_polyharmonic`], also returning the normwise backward error
/// `|K c - b| / (|K| |c| + |b|)` of the Galerkin system.
pub fn solve_polyharmonic_checked(
    rhs: &RadialProfile,
    params: &ProblemParams,
) -> Result<(RadialProfile, f64)> {
    let grid = rhs.grid();
    let chol = stiffness(grid, params, params.m)?;
    let load = load_vector(rhs, params.n, params.m);
    let mut coef = chol.solve(&load);
    // one step of refinement, then a normwise backward-error check
    let k = chol.matrix();
    let resid =
        |c: &[f64]| -> Vec<f64> { k.matvec(c).iter().zip(&load).map(|(a, b)| b - a).collect() };
    let corr = chol.solve(&resid(&coef));
    coef.iter_mut().zip(&corr).for_each(|(c, d)| *c += d);
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let r = inf(&resid(&coef));
    let scale = k.norm_inf() * inf(&coef) + inf(&load);
    let backward = if scale > 0.0 { r / scale } else { 0.0 };
    if backward > BACKWARD_TOL {
        return Err(Error::Numerical(format!(
            "polyharmonic solve backward error {backward:e} exceeds {BACKWARD_TOL:e}"
        )));
    }
    let space = grid.space(params.m);
    let g = RadialProfile::new(grid.clone(), space.nodal(&coef), rhs.n(), params.m)?;
    Ok((g, backward))
}

/// Relative residual `|K g - b| / |b|` of the last solve, recomputed.
pub fn polyharmonic_residual(
    g: &RadialProfile,
    rhs: &RadialProfile,
    params: &ProblemParams,
) -> Result<f64> {
    let grid = rhs.grid();
    let chol = stiffness(grid, params, params.m)?;
    let space = grid.space(params.m);
    let coef = space.interpolate(g.values());
    let load = load_vector(rhs, params.n, params.m);
    let res = chol.matrix().matvec(&coef);
    let num: f64 = res
        .iter()
        .zip(&load)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = load.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-300);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn operator_coefficients_of_bilaplacian() {
        // Delta^2 = 16 rho^2 D^4 + (32 + 16n) rho D^3 + 4n(n + 2) D^2 at n = 5
        let op = RadialOperator::laplacian_power(2, 5);
        assert_eq!(op.order(), 4);
        assert_eq!(op.terms[4], vec![0.0, 0.0, 16.0]);
        assert_eq!(op.terms[3], vec![0.0, 32.0 + 16.0 * 5.0]);
        assert_eq!(op.terms[2][0], 4.0 * 5.0 * 7.0);
        assert!(op.terms[2][1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn laplacian_of_polynomials_is_exact() {
        let g = make_grid(64, 2.0).unwrap();
        let u = RadialProfile::from_fn(&g, 5, 1, |r| 1.0 - r * r).unwrap();
        for v in radial_laplacian(&u, 5).values() {
            assert!((v + 10.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn dirichlet_energy_of_parabola() {
        let g = make_grid(64, 2.0).unwrap();
        let p = ProblemParams::new(3, 1, 1.0).unwrap();
        let u = RadialProfile::from_fn(&g, 3, 1, |r| 1.0 - r * r).unwrap();
        let e = nabla_m_norm_sq(&u, &p);
        assert!((e - 16.0 * std::f64::consts::PI / 5.0).abs() < 1e-12, "{e}");
    }
}
