//! Clamped B-splines in the variable `rho = r^2`.
//!
//! A radial profile is identified with the spline interpolating its nodal
//! values. Writing profiles as functions of `r^2` builds the even extension
//! across the origin into the basis, so `u'(0) = 0` and every odd
//! r-derivative vanishes there automatically. Vanishing of the first `v`
//! derivatives at the outer radius is imposed by dropping the last `v`
//! basis functions, which keeps the energy form positive definite on the
//! constrained space.

use crate::grid::gauss_legendre;
use crate::linalg::{Banded, BandedLu};

/// Polynomial degree in `rho`. Higher degrees make interpolation at the
/// panel-clustered Gauss nodes badly conditioned.
pub const DEGREE: usize = 5;
/// Largest number of boundary derivatives imposed at the outer radius.
pub const MAX_VANISH: usize = 5;
/// Highest derivative tabulated at the fine quadrature points.
pub const MAX_FINE_DERIV: usize = 4;
/// Gauss points per knot interval (in `r`) for exact spline integrals.
pub const FINE_ORDER: usize = 16;

const W: usize = DEGREE + 1;

/// Basis data at one fine quadrature point.
#[derive(Debug, Clone)]
pub struct FinePoint {
    pub r: f64,
    /// Quadrature weight for `dr`.
    pub weight: f64,
    pub first: usize,
    pub ders: [[f64; W]; MAX_FINE_DERIV + 1],
}

#[derive(Debug)]
pub struct SplineSpace {
    knots: Vec<f64>,
    dim: usize,
    vanish: usize,
    sites: Vec<f64>,
    colloc: Banded,
    lu: BandedLu,
    fine: Vec<FinePoint>,
}

impl SplineSpace {
    /// Interpolation space for strictly increasing `sites` in `(0, end)` with
    /// `vanish` derivatives forced to zero at `end`.
    pub fn new(sites: &[f64], end: f64, vanish: usize) -> Self {
        let n = sites.len();
        let p = DEGREE;
        let mut z: Vec<f64> = sites.to_vec();
        z.extend(std::iter::repeat_n(end, vanish));
        let nfull = z.len();
        let interior = nfull - p - 1;
        let mut knots = vec![0.0; p + 1];
        for j in 1..=interior {
            let s: f64 = z[j..j + p].iter().sum();
            knots.push(s / p as f64);
        }
        knots.extend(std::iter::repeat_n(end, p + 1));

        let mut colloc = Banded::zeros(n, p, p);
        for (i, &x) in sites.iter().enumerate() {
            let (first, d) = basis_ders_on(&knots, x, 0);
            for (l, v) in d[0].iter().enumerate() {
                let j = first + l;
                if j < n && *v != 0.0 {
                    colloc.set(i, j, *v);
                }
            }
        }
        let lu = colloc
            .clone()
            .lu()
            .expect("spline collocation matrix is nonsingular for averaged knots");
        let mut space = Self {
            knots,
            dim: n,
            vanish,
            sites: sites.to_vec(),
            colloc,
            lu,
            fine: Vec::new(),
        };
        space.fine = space.build_fine();
        space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vanish(&self) -> usize {
        self.vanish
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn fine_points(&self) -> &[FinePoint] {
        &self.fine
    }

    pub fn collocation(&self) -> &Banded {
        &self.colloc
    }

    fn full_dim(&self) -> usize {
        self.knots.len() - DEGREE - 1
    }

    /// Values and derivatives (orders `0..=nd`) of the nonzero basis functions at `x`.
    /// Returns the index of the first nonzero function; indices past `dim` belong
    /// to the dropped boundary functions and must be ignored by callers.
    pub fn basis_ders(&self, x: f64, nd: usize) -> (usize, Vec<[f64; W]>) {
        basis_ders_on(&self.knots, x, nd)
    }

    /// Spline coefficients interpolating `values` at the sites.
    pub fn interpolate(&self, values: &[f64]) -> Vec<f64> {
        self.lu.solve(values)
    }

    /// Apply the transpose of the inverse collocation matrix.
    pub fn interpolate_transpose(&self, values: &[f64]) -> Vec<f64> {
        self.lu.solve_transpose(values)
    }

    /// Nodal values of a spline with coefficients `coef`.
    pub fn nodal(&self, coef: &[f64]) -> Vec<f64> {
        self.colloc.matvec(coef)
    }

    /// `k`-th `rho`-derivative of the spline at `x`.
    pub fn eval(&self, coef: &[f64], x: f64, k: usize) -> f64 {
        if k > DEGREE {
            return 0.0;
        }
        let (first, d) = self.basis_ders(x, k);
        combine(&d[k], first, coef)
    }

    /// Derivatives `0..=nd` at every site.
    pub fn site_ders(&self, coef: &[f64], nd: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; nd + 1];
        for (i, &x) in self.sites.iter().enumerate() {
            let (first, d) = self.basis_ders(x, nd);
            for k in 0..=nd.min(DEGREE) {
                out[k][i] = combine(&d[k], first, coef);
            }
        }
        out
    }

    fn build_fine(&self) -> Vec<FinePoint> {
        let (gx, gw) = gauss_legendre(FINE_ORDER);
        let mut out = Vec::new();
        let k = &self.knots;
        for j in DEGREE..self.full_dim() {
            let (a, b) = (k[j], k[j + 1]);
            if b <= a {
                continue;
            }
            let (ra, rb) = (a.sqrt(), b.sqrt());
            for (x, w) in gx.iter().zip(&gw) {
                let r = ra + 0.5 * (rb - ra) * (x + 1.0);
                let (first, d) = self.basis_ders(r * r, MAX_FINE_DERIV);
                let mut ders = [[0.0; W]; MAX_FINE_DERIV + 1];
                ders.copy_from_slice(&d);
                out.push(FinePoint {
                    r,
                    weight: 0.5 * (rb - ra) * w,
                    first,
                    ders,
                });
            }
        }
        out
    }
}

fn span(knots: &[f64], x: f64) -> usize {
    let p = DEGREE;
    let nf = knots.len() - DEGREE - 1;
    if x >= knots[nf] {
        return nf - 1;
    }
    if x <= knots[p] {
        return p;
    }
    let (mut lo, mut hi) = (p, nf);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if x < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

pub fn basis_ders_on(knots: &[f64], x: f64, nd: usize) -> (usize, Vec<[f64; W]>) {
    let p = DEGREE;
    let u = knots;
    let i = span(knots, x);
    let mut ndu = [[0.0f64; W]; W];
    let mut left = [0.0f64; W];
    let mut right = [0.0f64; W];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - u[i + 1 - j];
        right[j] = u[i + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![[0.0f64; W]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let nd_eff = nd.min(p);
    let mut a = [[0.0f64; W]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nd_eff {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1: usize = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2: usize = if r as isize - 1 <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for (k, row) in ders.iter_mut().enumerate().take(nd_eff + 1).skip(1) {
        for v in row.iter_mut() {
            *v *= fac;
        }
        fac *= (p - k) as f64;
    }
    (i - p, ders)
}

/// `sum_l row[l] * coef[first + l]`, skipping dropped basis functions.
pub fn combine(row: &[f64; W], first: usize, coef: &[f64]) -> f64 {
    let mut s = 0.0;
    for (l, v) in row.iter().enumerate() {
        if let Some(c) = coef.get(first + l) {
            s += v * c;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) / n as f64;
                t * t
            })
            .collect()
    }

    #[test]
    fn partition_of_unity_and_zero_derivative_sum() {
        let s = SplineSpace::new(&sites(40), 1.0, 0);
        for x in [0.0, 0.013, 0.4, 0.77, 1.0] {
            let (_, d) = s.basis_ders(x, 3);
            assert!((d[0].iter().sum::<f64>() - 1.0).abs() < 1e-13);
            for row in d.iter().skip(1) {
                let scale: f64 = row.iter().map(|v| v.abs()).sum();
                assert!(row.iter().sum::<f64>().abs() < 1e-12 * scale, "{x} {row:?}");
            }
        }
    }

    #[test]
    fn reproduces_polynomials_with_boundary_constraints() {
        let st = sites(48);
        let s = SplineSpace::new(&st, 1.0, 2);
        let f = |x: f64| (1.0 - x).powi(2) * (0.3 + x * x);
        let vals: Vec<f64> = st.iter().map(|&x| f(x)).collect();
        let c = s.interpolate(&vals);
        for x in [0.0, 0.21, 0.5, 0.93, 1.0] {
            assert!((s.eval(&c, x, 0) - f(x)).abs() < 1e-12);
        }
        let df = |x: f64| -2.0 * (1.0 - x) * (0.3 + x * x) + (1.0 - x).powi(2) * 2.0 * x;
        assert!((s.eval(&c, 0.37, 1) - df(0.37)).abs() < 1e-10);
        assert!(s.eval(&c, 1.0, 0).abs() < 1e-14);
        assert!(s.eval(&c, 1.0, 1).abs() < 1e-12);
    }

    #[test]
    fn transpose_solve_matches_definition() {
        let st = sites(32);
        let s = SplineSpace::new(&st, 1.0, 1);
        let y: Vec<f64> = (0..32).map(|i| (i as f64 * 0.7).cos()).collect();
        let x = s.interpolate_transpose(&y);
        let back = s.collocation().transpose_matvec(&x);
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
