//! Banded factorizations for the spline collocation and stiffness matrices.

use crate::error::{Error, Result};

/// Square banded matrix with `lower` sub- and `upper` super-diagonals.
#[derive(Debug, Clone)]
pub struct Banded {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Self {
            n,
            lower,
            upper,
            data: vec![0.0; n * (lower + upper + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.lower >= i && j <= i + self.upper);
        i * (self.lower + self.upper + 1) + (j + self.lower - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi)
                    .map(|j| self.data[self.idx(i, j)].abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, xi) in x.iter().enumerate() {
            let lo = i.saturating_sub(self.lower);
            let hi = (i + self.upper).min(self.n - 1);
            for (j, yj) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yj += self.data[self.idx(i, j)] * xi;
            }
        }
        y
    }

    /// LU factorization without pivoting. Stable for totally positive
    /// matrices such as B-spline collocation matrices.
    pub fn lu(mut self) -> Result<BandedLu> {
        let n = self.n;
        for k in 0..n {
            let pivot = self.data[self.idx(k, k)];
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(Error::Numerical(format!(
                    "zero pivot at row {k} in banded LU"
                )));
            }
            let imax = (k + self.lower).min(n - 1);
            let jmax = (k + self.upper).min(n - 1);
            for i in k + 1..=imax {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandedLu { f: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    f: Banded,
}

impl BandedLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.f;
        let n = a.n;
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(a.lower);
            let mut s = x[i];
            for j in lo..i {
                s -= a.data[a.idx(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + a.upper).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= a.data[a.idx(i, j)] * x[j];
            }
            x[i] = s / a.data[a.idx(i, i)];
        }
        x
    }

    /// Solve `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.f;
        let n = a.n;
        let mut x = b.to_vec();
        // U^T y = b
        for i in 0..n {
            let lo = i.saturating_sub(a.upper);
            let mut s = x[i];
            for j in lo..i {
                s -= a.data[a.idx(j, i)] * x[j];
            }
            x[i] = s / a.data[a.idx(i, i)];
        }
        // L^T x = y
        for i in (0..n).rev() {
            let hi = (i + a.lower).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= a.data[a.idx(j, i)] * x[j];
            }
            x[i] = s;
        }
        x
    }
}

/// Cholesky factor of a symmetric positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    kd: usize,
    // row i holds L[i][i-kd..=i]
    l: Vec<f64>,
    matrix: Banded,
}

impl BandedCholesky {
    /// Factor the symmetric matrix whose lower band (including diagonal) is read from `a`.
    pub fn new(a: Banded) -> Result<Self> {
        let n = a.n;
        let kd = a.lower;
        let w = kd + 1;
        let mut l = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + (j + kd - i);
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            for j in lo..=i {
                let mut s = a.get(i, j);
                let klo = lo.max(j.saturating_sub(kd));
                for k in klo..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Numerical(format!(
                            "stiffness matrix not positive definite at row {i} (pivot {s:e})"
                        )));
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        Ok(Self {
            n,
            kd,
            l,
            matrix: a,
        })
    }

    pub fn matrix(&self) -> &Banded {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kd = self.kd;
        let w = kd + 1;
        let at = |i: usize, j: usize| i * w + (j + kd - i);
        let mut x = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            let mut s = x[i];
            for j in lo..i {
                s -= self.l[at(i, j)] * x[j];
            }
            x[i] = s / self.l[at(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + kd).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=hi {
                s -= self.l[at(j, i)] * x[j];
            }
            x[i] = s / self.l[at(i, i)];
        }
        x
    }

    /// `x^T A y` using the stored symmetric matrix.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.sym_matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn sym_matvec(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kd = self.kd;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let lo = i.saturating_sub(kd);
            for j in lo..=i {
                let a = self.matrix.get(i, j);
                out[i] += a * y[j];
                if j != i {
                    out[j] += a * y[i];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> Banded {
        let mut a = Banded::zeros(n, 1, 1);
        for i in 0..n {
            a.set(i, i, 4.0);
            if i > 0 {
                a.set(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.set(i, i + 1, -1.5);
            }
        }
        a
    }

    #[test]
    fn lu_solves_and_transposes() {
        let a = tridiag(9);
        let x: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&x);
        let bt = a.transpose_matvec(&x);
        let lu = a.lu().unwrap();
        for (u, v) in lu.solve(&b).iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
        for (u, v) in lu.solve_transpose(&bt).iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let n = 12;
        let mut a = Banded::zeros(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 6.0);
            for d in 1..=2 {
                if i >= d {
                    a.set(i, i - d, -1.0);
                    a.set(i - d, i, -1.0);
                }
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let b = a.matvec(&x);
        let c = BandedCholesky::new(a).unwrap();
        for (u, v) in c.solve(&b).iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
        assert!(
            (c.inner(&x, &x) - b.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>()).abs() < 1e-10
        );
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = Banded::zeros(2, 1, 1);
        a.set(0, 0, 1.0);
        a.set(1, 0, 2.0);
        a.set(0, 1, 2.0);
        a.set(1, 1, 1.0);
        assert!(BandedCholesky::new(a).is_err());
    }
}
