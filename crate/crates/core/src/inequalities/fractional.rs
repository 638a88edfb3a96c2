//! One-dimensional profiles on `[0, 1]` with the weight `s^{beta-1}`:
//! the Sobolev inequality in fractional dimension `beta`, the Holder
//! pointwise bound and the supercritical budget built from them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::RatioReport;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::profile::{RadialProfile, VANISH_SMOOTH};
use crate::radial_core::{radial_derivative, radial_moment};

/// Probe radii for the growth condition near the origin.
const PROBE_COUNT: usize = 64;
const PROBE_MIN: f64 = 1e-8;
const PROBE_MAX: f64 = 1e-2;
/// Log-spaced samples of `(0, r0]` when maximizing `g`.
const SUP_SAMPLES: usize = 4096;
const SUP_FLOOR: f64 = 1e-14;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 2.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta > 2 required (got {beta})")));
    }
    Ok(())
}

fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// `int_0^1 w'(s)^2 s^{beta-1} ds`, with `w'` the panelwise spectral derivative.
pub fn fractional_energy(w: &RadialProfile, beta: f64) -> f64 {
    let d = radial_derivative(w);
    let sq: Vec<f64> = d.values().iter().map(|v| v * v).collect();
    radial_moment(w.grid(), &sq, beta - 1.0)
}

/// `int_0^1 |w(s)|^{q(s)} s^{beta-1} ds`.
pub fn fractional_modular(w: &RadialProfile, beta: f64, q: impl Fn(f64) -> f64) -> f64 {
    let vals: Vec<f64> = w
        .r()
        .iter()
        .zip(w.values())
        .map(|(&s, &v)| abs_pow(v, q(s)))
        .collect();
    radial_moment(w.grid(), &vals, beta - 1.0)
}

fn critical_exponent(beta: f64) -> f64 {
    2.0 * beta / (beta - 2.0)
}

/// `(int |w|^{2beta/(beta-2)} s^{beta-1})^{(beta-2)/beta} / int w'^2 s^{beta-1}`.
fn quotient(w: &RadialProfile, beta: f64) -> f64 {
    let e = fractional_energy(w, beta);
    let q = critical_exponent(beta);
    let top = fractional_modular(w, beta, |_| q).powf(1.0 / q * 2.0);
    if e > 0.0 {
        top / e
    } else {
        0.0
    }
}

/// `S_beta * int w'^2 s^{beta-1}` against `(int |w|^{2beta/(beta-2)} s^{beta-1})^{(beta-2)/beta}`.
pub fn frac_sobolev_ratio(w: &RadialProfile, beta: f64, s_beta: f64) -> Result<RatioReport> {
    check_beta(beta)?;
    let q = critical_exponent(beta);
    let lhs = s_beta * fractional_energy(w, beta);
    let rhs = fractional_modular(w, beta, |_| q).powf(2.0 / q);
    Ok(RatioReport::new(lhs, rhs, s_beta, "frac-sobolev"))
}

/// Best quotient over the family
/// `[(1 + ((s-c)_+ / delta)^2)^{-kappa} - (1 + ((1-c)/delta)^2)^{-kappa}]`,
/// a lower estimate of the sharp constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SBetaEstimate {
    pub beta: f64,
    pub value: f64,
    pub center: f64,
    pub width: f64,
    pub power: f64,
    pub evaluations: usize,
}

fn family_member(grid: &Arc<RadialGrid>, c: f64, delta: f64, kappa: f64) -> Result<RadialProfile> {
    let tail = (1.0 + ((1.0 - c) / delta).powi(2)).powf(-kappa);
    RadialProfile::from_fn(grid, 1, VANISH_SMOOTH, |s| {
        let x = (s - c).max(0.0) / delta;
        ((1.0 + x * x).powf(-kappa) - tail).max(0.0)
    })
}

/// Coordinate search over center, log-width and power.
pub fn calibrate_s_beta(beta: f64, grid: &Arc<RadialGrid>) -> Result<SBetaEstimate> {
    check_beta(beta)?;
    let lo = [0.0, (2e-3f64).ln(), 0.05];
    let hi = [0.5, 0.0, 4.0];
    let mut x = [0.0, (0.05f64).ln(), (beta - 2.0) / 2.0];
    let mut step = [0.1, 1.0, 0.25];
    let mut evals = 0usize;
    let mut eval = |x: &[f64; 3]| -> Result<f64> {
        evals += 1;
        let w = family_member(grid, x[0], x[1].exp(), x[2])?;
        Ok(quotient(&w, beta))
    };
    let mut best = eval(&x)?;
    for _ in 0..60 {
        let mut improved = false;
        for k in 0..3 {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] = (y[k] + dir * step[k]).clamp(lo[k], hi[k]);
                if y[k] == x[k] {
                    continue;
                }
                let v = eval(&y)?;
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
            if step[2] < 1e-4 {
                break;
            }
        }
    }
    Ok(SBetaEstimate {
        beta,
        value: best,
        center: x[0],
        width: x[1].exp(),
        power: x[2],
        evaluations: evals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseReport {
    /// Smallest `bound / |w|` over the nodes; infinite for `w = 0`.
    pub ratio: f64,
    /// Smallest `bound - |w|`.
    pub worst_margin: f64,
    pub worst_radius: f64,
    pub energy: f64,
    pub energy_cap: f64,
    pub holds: bool,
}

/// `|w(r)| <= (a (r^{2-beta} - 1) / (beta - 2))^{1/2}` at every node.
pub fn pointwise_bound_check(w: &RadialProfile, beta: f64, a: f64) -> Result<PointwiseReport> {
    check_beta(beta)?;
    let energy = fractional_energy(w, beta);
    if energy > a * (1.0 + 1e-10) {
        return Err(Error::Domain(format!(
            "energy {energy:e} exceeds the cap a = {a:e}"
        )));
    }
    let mut ratio = f64::INFINITY;
    let mut margin = f64::INFINITY;
    let mut worst_radius = f64::NAN;
    let mut holds = true;
    for (&r, &v) in w.r().iter().zip(w.values()) {
        let bound = (a * (r.powf(2.0 - beta) - 1.0) / (beta - 2.0))
            .max(0.0)
            .sqrt();
        let m = bound - v.abs();
        if m < margin {
            margin = m;
            worst_radius = r;
        }
        if v != 0.0 {
            ratio = ratio.min(bound / v.abs());
        }
        if v.abs() > bound * (1.0 + 1e-9) + 1e-14 {
            holds = false;
        }
    }
    Ok(PointwiseReport {
        ratio,
        worst_margin: margin,
        worst_radius,
        energy,
        energy_cap: a,
        holds,
    })
}

/// Perturbation `f` of the critical exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FExponentSpec {
    /// `r^alpha`.
    Power { alpha: f64 },
    /// `min(c / (-ln r), c)`, the slowest admissible growth at the origin.
    LogCap { c: f64 },
}

impl FExponentSpec {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match *self {
            Self::Power { alpha } => r.powf(alpha),
            Self::LogCap { c } => {
                let l = -r.ln();
                if l <= 1.0 {
                    c
                } else {
                    c / l
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let p = match *self {
            Self::Power { alpha } => alpha,
            Self::LogCap { c } => c,
        };
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!(
                "{self:?}: parameter must be positive"
            )));
        }
        Ok(())
    }

    /// Measured `max f(r) (-ln r)` over the probe radii; a domain error names
    /// the innermost radius where that product still grows toward the origin.
    pub fn growth_constant(&self) -> Result<f64> {
        self.validate()?;
        let radii = probe_radii();
        let prod: Vec<f64> = radii.iter().map(|&r| self.eval(r) * -r.ln()).collect();
        for (i, (&r, &p)) in radii.iter().zip(&prod).enumerate() {
            if !(self.eval(r) > 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!(
                    "f must be positive and finite at r = {r:e}"
                )));
            }
            if i + 1 < prod.len() && p > prod[i + 1] * (1.0 + 1e-9) {
                return Err(Error::Domain(format!(
                    "f(r) (-ln r) grows toward the origin at r = {r:e}"
                )));
            }
        }
        Ok(prod.iter().fold(0.0, |m: f64, &p| m.max(p)))
    }
}

fn probe_radii() -> Vec<f64> {
    let (a, b) = (PROBE_MIN.ln(), PROBE_MAX.ln());
    (0..PROBE_COUNT)
        .map(|i| (a + (b - a) * i as f64 / (PROBE_COUNT - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetReport {
    pub r0: f64,
    /// `sup_{(0, r0]} g`, `g(r) = (a r^{2-beta} / (beta-2))^{f(r)/2}`.
    pub c0: f64,
    pub argmax_radius: f64,
    /// `1 + C0 (S_beta a)^{beta/(beta-2)}`.
    pub bound: f64,
    pub growth_constant: f64,
    /// Largest `ln g` over the probe radii and the bound
    /// `c (beta-2)/2 + max(0, f ln(a/(beta-2)) / 2)` it must respect.
    pub probe_log_g: f64,
    pub probe_log_g_bound: f64,
}

/// The additive bound on `int |w|^{q} s^{beta-1}` over the energy ball of radius `a`.
pub fn supercritical_budget(
    f: &FExponentSpec,
    a: f64,
    beta: f64,
    s_beta: f64,
) -> Result<BudgetReport> {
    check_beta(beta)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a > 0 required (got {a})")));
    }
    let c = f.growth_constant()?;
    let r0 = (a / (a + beta - 2.0)).powf(1.0 / (beta - 2.0));
    let k = (a / (beta - 2.0)).ln();
    let log_g = |r: f64| 0.5 * f.eval(r) * (k - (beta - 2.0) * r.ln());
    let (lo, hi) = (SUP_FLOOR.ln(), r0.ln());
    let (mut best, mut arg) = (log_g(r0), r0);
    for i in 0..SUP_SAMPLES {
        let r = (lo + (hi - lo) * i as f64 / (SUP_SAMPLES - 1) as f64).exp();
        let v = log_g(r);
        if v > best {
            best = v;
            arg = r;
        }
    }
    let c0 = best.exp();
    let probe = probe_radii();
    let probe_log_g = probe
        .iter()
        .map(|&r| log_g(r))
        .fold(f64::NEG_INFINITY, f64::max);
    let extra = probe
        .iter()
        .map(|&r| 0.5 * f.eval(r) * k.max(0.0))
        .fold(0.0, f64::max);
    Ok(BudgetReport {
        r0,
        c0,
        argmax_radius: arg,
        bound: 1.0 + c0 * (s_beta * a).powf(beta / (beta - 2.0)),
        growth_constant: c,
        probe_log_g,
        probe_log_g_bound: c * (beta - 2.0) / 2.0 + extra,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModularBoundRow {
    pub profile_id: String,
    pub energy: f64,
    pub integral: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `int |w|^{2beta/(beta-2) + f} s^{beta-1} <= bound` for every profile of energy at most `a`.
pub fn supercritical_modular_bound_check(
    family: &[(String, RadialProfile)],
    f: &FExponentSpec,
    beta: f64,
    a: f64,
    s_beta: f64,
) -> Result<Vec<ModularBoundRow>> {
    let budget = supercritical_budget(f, a, beta, s_beta)?;
    let q0 = critical_exponent(beta);
    family
        .iter()
        .map(|(id, w)| {
            let energy = fractional_energy(w, beta);
            if energy > a * (1.0 + 1e-10) {
                return Err(Error::Domain(format!(
                    "profile {id}: energy {energy:e} exceeds the cap a = {a:e}"
                )));
            }
            let integral = fractional_modular(w, beta, |s| q0 + f.eval(s));
            Ok(ModularBoundRow {
                profile_id: id.clone(),
                energy,
                integral,
                bound: budget.bound,
                holds: integral <= budget.bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn energy_of_linear_profile() {
        let g = make_grid(128, 2.0).unwrap();
        let w = RadialProfile::from_fn(&g, 3, 1, |s| 1.0 - s).unwrap();
        assert!((fractional_energy(&w, 3.0) - 1.0 / 3.0).abs() < 1e-12);
        let r = pointwise_bound_check(&w, 3.0, 1.0 / 3.0).unwrap();
        assert!(r.holds && r.ratio >= 1.0);
        assert!(pointwise_bound_check(&w, 3.0, 0.3).is_err());
        let z = RadialProfile::zeros(&g, 3);
        let r = pointwise_bound_check(&z, 3.0, 1.0).unwrap();
        assert!(r.holds && r.ratio.is_infinite());
    }

    #[test]
    fn budget_closed_forms() {
        let b = supercritical_budget(&FExponentSpec::Power { alpha: 1.0 }, 1.0, 4.0, 1.0).unwrap();
        assert!((b.r0 - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let b = supercritical_budget(&FExponentSpec::Power { alpha: 1.0 }, 2.0, 2.5, 1.0).unwrap();
        assert!(b.c0 >= 1.0 && b.probe_log_g <= b.probe_log_g_bound);
        let b = supercritical_budget(&FExponentSpec::LogCap { c: 0.5 }, 1.0, 3.0, 1.0).unwrap();
        assert!((b.growth_constant - 0.5).abs() < 1e-12);
        assert!(b.probe_log_g <= b.probe_log_g_bound);
        assert!(
            supercritical_budget(&FExponentSpec::Power { alpha: -1.0 }, 1.0, 3.0, 1.0).is_err()
        );
        assert!(supercritical_budget(&FExponentSpec::Power { alpha: 1.0 }, 1.0, 2.0, 1.0).is_err());
    }
}
