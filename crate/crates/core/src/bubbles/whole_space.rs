//! Exact calculus on sums of inverse powers of `a + r^2` and quadrature
//! over all of `R^n` through `r = s tan(theta)`.

use crate::grid::composite_gauss;
use crate::params::sphere_area;

const THETA_PANELS: usize = 96;
const THETA_ORDER: usize = 16;

/// `sum_j coef[j] (a + rho)^{-(s0 + j)}` with `rho = r^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalRadial {
    pub a: f64,
    pub s0: f64,
    pub coef: Vec<f64>,
}

impl RationalRadial {
    /// `c (a + rho)^{-s}`.
    pub fn power(c: f64, a: f64, s: f64) -> Self {
        Self {
            a,
            s0: s,
            coef: vec![c],
        }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let base = self.a + rho;
        self.coef
            .iter()
            .enumerate()
            .map(|(j, c)| c * base.powf(-(self.s0 + j as f64)))
            .sum()
    }

    /// `d/drho`.
    pub fn d_rho(&self) -> Self {
        let coef = self
            .coef
            .iter()
            .enumerate()
            .map(|(j, c)| -c * (self.s0 + j as f64))
            .collect();
        Self {
            a: self.a,
            s0: self.s0 + 1.0,
            coef,
        }
    }

    /// Radial Laplacian `4 rho d^2 + 2n d` in dimension `n`.
    pub fn laplacian(&self, n: usize) -> Self {
        let nf = n as f64;
        let mut coef = vec![0.0; self.coef.len() + 1];
        for (j, c) in self.coef.iter().enumerate() {
            let s = self.s0 + j as f64;
            // 4 rho s(s+1)(a+rho)^{-s-2} = 4s(s+1)(a+rho)^{-s-1} - 4a s(s+1)(a+rho)^{-s-2}
            coef[j] += c * (4.0 * s * (s + 1.0) - 2.0 * nf * s);
            coef[j + 1] -= c * 4.0 * self.a * s * (s + 1.0);
        }
        Self {
            a: self.a,
            s0: self.s0 + 1.0,
            coef,
        }
    }

    pub fn laplacian_power(&self, k: usize, n: usize) -> Self {
        (0..k).fold(self.clone(), |u, _| u.laplacian(n))
    }

    /// `|nabla^m u|^2` as a function of `r`.
    pub fn grad_m_sq(&self, m: usize, n: usize) -> impl Fn(f64) -> f64 {
        let base = self.laplacian_power(m / 2, n);
        let odd = m % 2 == 1;
        let f = if odd { base.d_rho() } else { base };
        move |r: f64| {
            let v = f.eval(r * r);
            if odd {
                4.0 * r * r * v * v
            } else {
                v * v
            }
        }
    }

    /// `(-Delta)^m u` as a rational function.
    pub fn polyharmonic(&self, m: usize, n: usize) -> Self {
        let mut out = self.laplacian_power(m, n);
        if m % 2 == 1 {
            out.coef.iter_mut().for_each(|c| *c = -*c);
        }
        out
    }
}

/// `omega_{n-1} int_0^inf f(r) r^{n-1} dr` with `r = scale * tan(theta)`.
pub fn whole_space_integral(f: impl Fn(f64) -> f64, n: usize, scale: f64) -> f64 {
    let (th, w) = composite_gauss(0.0, std::f64::consts::FRAC_PI_2, THETA_PANELS, THETA_ORDER);
    let pw = n as i32 - 1;
    let s: f64 = th
        .iter()
        .zip(&w)
        .map(|(&t, &wt)| {
            let c = t.cos();
            let r = scale * t.tan();
            let jac = scale / (c * c);
            let v = f(r) * r.powi(pw) * jac;
            if v.is_finite() {
                wt * v
            } else {
                0.0
            }
        })
        .sum();
    sphere_area(n) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta;

    // int_0^inf rho^p (1 + rho)^{-q} r^{n-1} dr = B(p + n/2, q - p - n/2) / 2
    fn beta_moment(p: f64, q: f64, n: usize) -> f64 {
        let h = n as f64 / 2.0;
        0.5 * beta(p + h, q - p - h)
    }

    #[test]
    fn moments_match_beta_function() {
        for &(n, q) in &[(3usize, 3.0), (5, 4.5), (7, 6.25), (8, 6.0)] {
            for p in [0.0, 0.5, 1.0] {
                let num =
                    whole_space_integral(|r| (r * r).powf(p) * (1.0 + r * r).powf(-q), n, 1.0);
                let exact = sphere_area(n) * beta_moment(p, q, n);
                assert!(
                    (num / exact - 1.0).abs() < 1e-12,
                    "n={n} q={q} p={p}: {num} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn laplacian_matches_direct_formula() {
        // Delta (1 + r^2)^{-s} = -2ns(1+r^2)^{-s-1} + 4s(s+1) r^2 (1+r^2)^{-s-2}
        let n = 5;
        let s = 0.5;
        let u = RationalRadial::power(1.0, 1.0, s);
        let lu = u.laplacian(n);
        for r in [0.0, 0.3, 1.0, 4.0] {
            let rho: f64 = r * r;
            let direct = -2.0 * n as f64 * s * (1.0 + rho).powf(-s - 1.0)
                + 4.0 * s * (s + 1.0) * rho * (1.0 + rho).powf(-s - 2.0);
            assert!((lu.eval(rho) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn talenti_profile_is_harmonic_critical() {
        // (1 + r^2)^{-1/2} in R^3: -Delta u = 3 u^5
        let u = RationalRadial::power(1.0, 1.0, 0.5);
        let lu = u.polyharmonic(1, 3);
        for r in [0.0, 0.5, 2.0, 10.0] {
            let v = u.eval(r * r);
            assert!((lu.eval(r * r) - 3.0 * v.powi(5)).abs() < 1e-13 * v.powi(5));
        }
    }
}
