//! Numerical verification of the weighted Hardy, radial Rellich-type,
//! Hardy-Rellich and fractional-dimension Sobolev inequalities, the
//! pointwise decay estimate and the supercritical budget.

mod families;
mod fractional;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::bubbles::{c_hr_product_form, CutoffSpec};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::params::ProblemParams;
use crate::profile::RadialProfile;
use crate::radial_core::{nabla_m_norm_sq, weighted_energy, RadialOperator};

pub use families::{random_profile, singular_family};
pub use fractional::{
    calibrate_s_beta, frac_sobolev_ratio, fractional_energy, fractional_modular,
    pointwise_bound_check, supercritical_budget, supercritical_modular_bound_check, BudgetReport,
    FExponentSpec, PointwiseReport, SBetaEstimate,
};

/// One evaluation of an inequality `lhs >= constant * integral`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; NaN when both sides vanish.
    pub ratio: f64,
    pub constant_used: f64,
    pub profile_id: String,
    pub degenerate: bool,
}

impl RatioReport {
    pub(crate) fn new(lhs: f64, rhs: f64, constant: f64, profile_id: impl Into<String>) -> Self {
        let degenerate = rhs == 0.0;
        Self {
            lhs,
            rhs,
            ratio: if degenerate { f64::NAN } else { lhs / rhs },
            constant_used: constant,
            profile_id: profile_id.into(),
            degenerate,
        }
    }
}

fn check_weight(a: f64, n: usize) -> Result<()> {
    if !(a >= 0.0 && a < n as f64 - 2.0) {
        return Err(Error::Domain(format!(
            "weight exponent a must satisfy 0 <= a < n - 2 (got a = {a}, n = {n})"
        )));
    }
    Ok(())
}

/// `int |nabla u|^2 / |x|^a` against `((n-2-a)/2)^2 int u^2 / |x|^{a+2}`.
pub fn hardy_ratio(u: &RadialProfile, a: f64, n: usize) -> Result<RatioReport> {
    check_weight(a, n)?;
    if u.vanish_order() < 1 {
        return Err(Error::Domain("Hardy ratio needs u = 0 at r = 1".into()));
    }
    let c = ((n as f64 - 2.0 - a) / 2.0).powi(2);
    let lhs = weighted_energy(u, &RadialOperator::d_dr(), n, a);
    let rhs = c * weighted_energy(u, &RadialOperator::identity(), n, a + 2.0);
    Ok(RatioReport::new(lhs, rhs, c, "hardy"))
}

/// `int (Delta u)^2 / |x|^a` against `((n+a)^2/4) int |nabla u|^2 / |x|^{a+2}`.
pub fn rellich_ratio(u: &RadialProfile, a: f64, n: usize) -> Result<RatioReport> {
    check_weight(a, n)?;
    let c = (n as f64 + a).powi(2) / 4.0;
    let lhs = weighted_energy(u, &RadialOperator::laplacian_power(1, n), n, a);
    let rhs = c * weighted_energy(u, &RadialOperator::d_dr(), n, a + 2.0);
    Ok(RatioReport::new(lhs, rhs, c, "rellich"))
}

/// `int |nabla^m u|^2` against `C_HR int |nabla u|^2 / |x|^{2(m-1)}`.
pub fn hardy_rellich_ratio(u: &RadialProfile, params: &ProblemParams) -> Result<RatioReport> {
    if params.m < 2 {
        return Err(Error::Domain(format!(
            "Hardy-Rellich needs m >= 2 (got m = {})",
            params.m
        )));
    }
    if u.vanish_order() < params.m {
        return Err(Error::Domain(format!(
            "profile vanishes to order {} at r = 1, need {}",
            u.vanish_order(),
            params.m
        )));
    }
    let n = params.n;
    let c = c_hr_product_form(n, params.m);
    let lhs = nabla_m_norm_sq(u, params);
    let w = 2.0 * (params.m as f64 - 1.0);
    let rhs = c * weighted_energy(u, &RadialOperator::d_dr(), n, w);
    Ok(RatioReport::new(lhs, rhs, c, "hardy-rellich"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityKind {
    Hardy,
    Rellich,
    HardyRellich,
}

impl InequalityKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hardy => "hardy",
            Self::Rellich => "rellich",
            Self::HardyRellich => "hardy-rellich",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub seed: u64,
    #[serde(flatten)]
    pub report: RatioReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub m: usize,
    pub weight: f64,
    pub rows: Vec<SuiteRow>,
    pub min_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Ratios below `1 - SUITE_TOLERANCE` count as violations.
pub const SUITE_TOLERANCE: f64 = 1e-6;

/// Evaluate one inequality on `trials` seeded random profiles.
/// Profile `i` uses seed `seed + i`; results do not depend on the thread count.
pub fn ratio_suite(
    kind: InequalityKind,
    params: &ProblemParams,
    a: f64,
    trials: usize,
    seed: u64,
    grid: &Arc<RadialGrid>,
) -> Result<SuiteReport> {
    let n = params.n;
    let rows: Vec<SuiteRow> = (0..trials as u64)
        .into_par_iter()
        .map(|i| -> Result<SuiteRow> {
            let s = seed.wrapping_add(i);
            let u = random_profile(grid, n, params.m.max(2), s)?;
            let mut report = match kind {
                InequalityKind::Hardy => hardy_ratio(&u, a, n)?,
                InequalityKind::Rellich => rellich_ratio(&u, a, n)?,
                InequalityKind::HardyRellich => hardy_rellich_ratio(&u, params)?,
            };
            report.profile_id = format!("random-bumps:{s}");
            Ok(SuiteRow { seed: s, report })
        })
        .collect::<Result<_>>()?;
    let min_ratio = rows
        .iter()
        .filter(|r| !r.report.degenerate)
        .map(|r| r.report.ratio)
        .fold(f64::INFINITY, f64::min);
    Ok(SuiteReport {
        suite: kind.name().into(),
        n,
        m: params.m,
        weight: if kind == InequalityKind::HardyRellich {
            2.0 * (params.m as f64 - 1.0)
        } else {
            a
        },
        rows,
        min_ratio,
        tolerance: SUITE_TOLERANCE,
        pass: min_ratio >= 1.0 - SUITE_TOLERANCE,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub suite: String,
    pub n: usize,
    pub m: usize,
    pub weight: f64,
    pub eps_list: Vec<f64>,
    pub ratios: Vec<f64>,
    pub monotone: bool,
    pub final_ratio: f64,
    pub pass: bool,
}

/// Largest final ratio accepted as approaching the sharp constant.
pub const TREND_LIMIT: f64 = 1.15;

/// Ratios along the singular family for `eps` in decreasing order. Rellich
/// uses the exponent `(n-a-4)/2` (needs `n > a + 4`), Hardy-Rellich `(n-2m)/2`.
pub fn sharpness_trend(
    kind: InequalityKind,
    params: &ProblemParams,
    a: f64,
    eps_list: &[f64],
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> Result<TrendReport> {
    let n = params.n;
    let exponent = match kind {
        InequalityKind::Rellich => {
            let e = (n as f64 - a - 4.0) / 2.0;
            if e <= 0.0 {
                return Err(Error::Domain(format!(
                    "Rellich family needs n > a + 4 (n = {n}, a = {a})"
                )));
            }
            e
        }
        InequalityKind::HardyRellich => params.half_gap(),
        InequalityKind::Hardy => {
            return Err(Error::Usage(
                "no singular family for the Hardy inequality".into(),
            ))
        }
    };
    if eps_list.is_empty() {
        return Err(Error::Config("empty epsilon list".into()));
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|x, y| y.total_cmp(x));
    let ratios: Vec<f64> = eps
        .par_iter()
        .map(|&e| -> Result<f64> {
            let u = singular_family(grid, n, exponent, e, cutoff)?;
            let r = match kind {
                InequalityKind::Rellich => rellich_ratio(&u, a, n)?,
                _ => hardy_rellich_ratio(&u, params)?,
            };
            Ok(r.ratio)
        })
        .collect::<Result<_>>()?;
    let monotone = ratios.windows(2).all(|w| w[1] <= w[0]);
    let final_ratio = *ratios.last().expect("nonempty");
    Ok(TrendReport {
        suite: kind.name().into(),
        n,
        m: params.m,
        weight: if kind == InequalityKind::HardyRellich {
            2.0 * (params.m as f64 - 1.0)
        } else {
            a
        },
        eps_list: eps,
        ratios,
        monotone,
        final_ratio,
        pass: monotone && final_ratio <= TREND_LIMIT && final_ratio >= 1.0 - SUITE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn hardy_parabola() {
        // (4/7) / ((9/4)(8/105))
        let g = make_grid(128, 2.0).unwrap();
        let u = RadialProfile::from_fn(&g, 5, 1, |r| 1.0 - r * r).unwrap();
        let r = hardy_ratio(&u, 0.0, 5).unwrap();
        assert!((r.ratio - 10.0 / 3.0).abs() < 1e-8, "{}", r.ratio);
        let z = RadialProfile::zeros(&g, 5);
        assert!(hardy_ratio(&z, 0.0, 5).unwrap().degenerate);
        assert!(hardy_ratio(&u, 3.0, 5).is_err());
    }

    #[test]
    fn rellich_parabola() {
        let g = make_grid(128, 2.0).unwrap();
        let u = RadialProfile::from_fn(&g, 5, 1, |r| 1.0 - r * r).unwrap();
        let r = rellich_ratio(&u, 0.0, 5).unwrap();
        let omega = crate::params::sphere_area(5);
        assert!((r.lhs / omega - 20.0).abs() < 1e-8);
        assert!((r.rhs / omega - 5.0).abs() < 1e-8);
    }

    #[test]
    fn hardy_rellich_polynomial() {
        let g = make_grid(128, 2.0).unwrap();
        let p = ProblemParams::new(6, 2, 1.0).unwrap();
        let u = RadialProfile::from_fn(&g, 6, 2, |r| (1.0 - r * r).powi(2)).unwrap();
        let r = hardy_rellich_ratio(&u, &p).unwrap();
        assert_eq!(r.constant_used, 9.0);
        assert!(r.ratio >= 1.0 - 1e-6);
        let q = ProblemParams::new(5, 1, 1.0).unwrap();
        assert!(hardy_rellich_ratio(&u, &q).is_err());
    }
}
