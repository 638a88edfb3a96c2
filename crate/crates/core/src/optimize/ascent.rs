//! Projected Sobolev-gradient ascent of the modular on the unit sphere of
//! `H_0^m`, the trial-function gap, and the sweep in the weight exponent.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubbles::{constants_table, truncated_bubble, BubbleSpec, CutoffSpec};
use crate::error::{Error, Result};
use crate::functionals::{modular, ExponentField};
use crate::grid::RadialGrid;
use crate::inequalities::random_profile;
use crate::params::ProblemParams;
use crate::profile::RadialProfile;
use crate::radial_core::{grad_m_inner, nabla_m_norm_sq, solve_polyharmonic};

const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Initial step, relative to the norm of the Riesz gradient.
    pub step: f64,
    pub max_iter: usize,
    /// Stop when the tangential gradient falls below this fraction of the full one.
    pub grad_tol: f64,
    /// Number of seeded random starts.
    pub restarts: usize,
    pub seed: u64,
    /// Concentrations of the truncated-bubble starts.
    pub init_eps_list: Vec<f64>,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_iter: 200,
            grad_tol: 1e-6,
            restarts: 4,
            seed: 42,
            init_eps_list: vec![0.2, 0.1, 0.05, 0.02],
        }
    }
}

impl AscentConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!(
                "step > 0 required (got {})",
                self.step
            )));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config(format!(
                "grad_tol > 0 required (got {})",
                self.grad_tol
            )));
        }
        if self.init_eps_list.is_empty() && self.restarts == 0 {
            return Err(Error::Config("no starting profiles configured".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimReport {
    pub u_est: f64,
    #[serde(skip)]
    pub best_profile: RadialProfile,
    pub best_start: String,
    pub iterations: usize,
    pub grad_norm: f64,
    pub sigma_ref: f64,
    pub strict_gap: f64,
    pub relative_gap: f64,
    pub converged: bool,
    pub warning: Option<String>,
    /// Modular values of the accepted iterates of the best run.
    pub history: Vec<f64>,
    /// Tangential gradient ratio at each entry of `history`.
    pub grad_history: Vec<f64>,
}

struct Run {
    id: String,
    u: RadialProfile,
    value: f64,
    iterations: usize,
    grad_ratio: f64,
    converged: bool,
    history: Vec<f64>,
    grad_history: Vec<f64>,
}

fn normalize(u: &RadialProfile, params: &ProblemParams) -> Result<RadialProfile> {
    let nrm = nabla_m_norm_sq(u, params);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::Numerical("cannot normalize a zero profile".into()));
    }
    Ok(u.scaled(1.0 / nrm.sqrt()))
}

/// `p |u|^{p-2} u` at the nodes.
fn modular_derivative(u: &RadialProfile, field: &ExponentField) -> Result<RadialProfile> {
    let vals = u
        .values()
        .iter()
        .zip(field.values())
        .map(|(&v, &p)| {
            let a = v.abs();
            if a <= 1e-300 {
                0.0
            } else {
                p * v.signum() * ((p - 1.0) * a.ln()).exp()
            }
        })
        .collect();
    u.with_values(vals)
}

/// Riesz gradient `h` of the modular at `u`, its tangential part `g`, and `(|g|, |g| / |h|)`.
fn tangent_gradient(u: &RadialProfile, field: &ExponentField) -> Result<(RadialProfile, f64, f64)> {
    let params = field.params();
    let h = solve_polyharmonic(&modular_derivative(u, field)?, params)?;
    let hn = nabla_m_norm_sq(&h, params).sqrt();
    let g = h.axpy(-grad_m_inner(&h, u, params)?, u)?;
    let gn = nabla_m_norm_sq(&g, params).sqrt();
    Ok((g, gn, if hn > 0.0 { gn / hn } else { 0.0 }))
}

fn ascend(
    id: String,
    start: RadialProfile,
    field: &ExponentField,
    cfg: &AscentConfig,
) -> Result<Run> {
    let params = *field.params();
    let order = start.vanish_order().max(params.m);
    let mut u = normalize(&start.with_vanish_order(order), &params)?;
    let mut value = modular(&u, field)?.modular;
    let mut history = vec![value];
    let mut grad_history = Vec::new();
    let mut t_rel = cfg.step;
    let mut grad_ratio = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_iter {
        iterations += 1;
        let (g, gn, ratio) = tangent_gradient(&u, field)?;
        grad_ratio = ratio;
        grad_history.push(ratio);
        if grad_ratio < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut t = t_rel / gn;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial = normalize(&u.axpy(t, &g)?, &params)?;
            let v = match modular(&trial, field) {
                Ok(r) => r.modular,
                Err(_) => f64::NEG_INFINITY,
            };
            if v > value {
                u = trial;
                value = v;
                history.push(v);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // no representable increase left along the gradient
            converged = true;
            break;
        }
        t_rel = (t * gn * 2.0).min(1.0);
    }
    if grad_history.len() < history.len() {
        grad_ratio = tangent_gradient(&u, field)?.2;
        grad_history.push(grad_ratio);
    }
    Ok(Run {
        id,
        u,
        value,
        iterations,
        grad_ratio,
        converged,
        history,
        grad_history,
    })
}

/// Multi-start ascent; the best modular value over all runs estimates the
/// supremum from below.
pub fn maximize_supercritical(
    params: &ProblemParams,
    cfg: &AscentConfig,
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> Result<OptimReport> {
    cfg.validate()?;
    let field = ExponentField::new(params, grid);
    let mut starts: Vec<(String, RadialProfile)> = Vec::new();
    for &e in &cfg.init_eps_list {
        let b = BubbleSpec::unit(e, *params)?;
        starts.push((format!("bubble:{e}"), truncated_bubble(&b, cutoff, grid)));
    }
    for k in 0..cfg.restarts as u64 {
        let s = cfg.seed.wrapping_add(k);
        starts.push((
            format!("random:{s}"),
            random_profile(grid, params.n, params.m, s)?,
        ));
    }
    let runs: Vec<Run> = starts
        .into_par_iter()
        .map(|(id, u)| ascend(id, u, &field, cfg))
        .collect::<Result<_>>()?;
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one start");
    let sigma = constants_table(params).sigma;
    let warning = (!best.converged).then(|| {
        format!(
            "ascent stopped after {} iterations with tangential gradient ratio {:e}",
            best.iterations, best.grad_ratio
        )
    });
    Ok(OptimReport {
        u_est: best.value,
        best_profile: best.u,
        best_start: best.id,
        iterations: best.iterations,
        grad_norm: best.grad_ratio,
        sigma_ref: sigma,
        strict_gap: best.value - sigma,
        relative_gap: (best.value - sigma) / sigma,
        converged: best.converged,
        warning,
        history: best.history,
        grad_history: best.grad_history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictGapReport {
    pub epsilon: f64,
    pub modular: f64,
    pub sigma: f64,
    pub gap: f64,
    pub relative_gap: f64,
    /// `D^{-2*/2} C_1 eps^alpha |ln eps|`, the leading gain of the trial function.
    pub predicted_gain: Option<f64>,
}

/// Modular of the normalized truncated bubble minus the critical constant.
pub fn strict_gap_trial(
    params: &ProblemParams,
    eps: f64,
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> Result<StrictGapReport> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::Domain(format!(
            "eps in (0, 0.1] required (got {eps})"
        )));
    }
    let table = constants_table(params);
    let spec = BubbleSpec::new(
        eps,
        table.s.powf(params.n as f64 / (2.0 * params.m as f64)),
        *params,
    )?;
    let u = normalize(&truncated_bubble(&spec, cutoff, grid), params)?;
    let value = modular(&u, &ExponentField::new(params, grid))?.modular;
    let predicted = table.script_c1.map(|c1| {
        table.gradient_energy.powf(-table.two_m_star / 2.0)
            * c1
            * eps.powf(params.alpha)
            * eps.ln().abs()
    });
    Ok(StrictGapReport {
        epsilon: eps,
        modular: value,
        sigma: table.sigma,
        gap: value - table.sigma,
        relative_gap: (value - table.sigma) / table.sigma,
        predicted_gain: predicted,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub u_est: f64,
    pub gap: f64,
    pub relative_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub sigma: f64,
    pub rows: Vec<SweepRow>,
    /// Last gap below 2% of the critical constant.
    pub tail_small: bool,
    /// Gaps nonincreasing over the last three weights.
    pub tail_monotone: bool,
    /// Every gap at least `-GAP_FLOOR`.
    pub gaps_bounded_below: bool,
}

/// Absolute slack allowed below the critical constant.
pub const GAP_FLOOR: f64 = 1e-4;
pub const TAIL_FRACTION: f64 = 0.02;
/// Resolution of the ascent estimates, relative to `sigma`, when comparing
/// neighbouring gaps. Unconverged runs at large `alpha` agree to about 1e-9.
pub const MONOTONE_SLACK: f64 = 1e-8;

pub fn alpha_sweep(
    base: &ProblemParams,
    alpha_list: &[f64],
    cfg: &AscentConfig,
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> Result<SweepReport> {
    if alpha_list.is_empty() {
        return Err(Error::Config("empty alpha list".into()));
    }
    if alpha_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("alpha list must be increasing".into()));
    }
    let rows: Vec<SweepRow> = alpha_list
        .par_iter()
        .map(|&a| -> Result<SweepRow> {
            let p = base.with_alpha(a)?;
            let r = maximize_supercritical(&p, cfg, cutoff, grid)?;
            Ok(SweepRow {
                alpha: a,
                u_est: r.u_est,
                gap: r.strict_gap,
                relative_gap: r.relative_gap,
                converged: r.converged,
            })
        })
        .collect::<Result<_>>()?;
    let sigma = constants_table(base).sigma;
    let last = rows.last().expect("nonempty");
    let tail: Vec<f64> = rows.iter().rev().take(3).map(|r| r.gap).collect();
    Ok(SweepReport {
        sigma,
        tail_small: last.gap < TAIL_FRACTION * sigma,
        tail_monotone: tail
            .windows(2)
            .all(|w| w[0] <= w[1] + MONOTONE_SLACK * sigma),
        gaps_bounded_below: rows.iter().all(|r| r.gap >= -GAP_FLOOR),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn setup() -> (ProblemParams, Arc<RadialGrid>) {
        (
            ProblemParams::new(5, 2, 1.0).unwrap(),
            make_grid(128, 2.0).unwrap(),
        )
    }

    #[test]
    fn normalize_gives_unit_energy() {
        let (p, grid) = setup();
        let u = random_profile(&grid, 5, 2, 7).unwrap().scaled(13.0);
        let v = normalize(&u, &p).unwrap();
        assert!((nabla_m_norm_sq(&v, &p) - 1.0).abs() < 1e-10);
        assert!(normalize(&RadialProfile::zeros(&grid, 5), &p).is_err());
    }

    #[test]
    fn ascent_history_is_nondecreasing() {
        let (p, grid) = setup();
        let cfg = AscentConfig {
            max_iter: 25,
            restarts: 1,
            init_eps_list: vec![0.2],
            ..AscentConfig::default()
        };
        let r = maximize_supercritical(&p, &cfg, &CutoffSpec::default(), &grid).unwrap();
        assert_eq!(r.history.len(), r.grad_history.len());
        assert!(r.history.windows(2).all(|w| w[1] >= w[0]));
        assert!((nabla_m_norm_sq(&r.best_profile, &p) - 1.0).abs() < 1e-10);
        assert!(r.u_est > 0.0 && r.u_est.is_finite());
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, grid) = setup();
        let c = CutoffSpec::default();
        assert!(strict_gap_trial(&p, 0.5, &c, &grid).is_err());
        let cfg = AscentConfig::default();
        assert!(matches!(
            alpha_sweep(&p, &[1.0, 1.0], &cfg, &c, &grid),
            Err(Error::Config(_))
        ));
        let bad = AscentConfig { step: 0.0, ..cfg };
        assert!(maximize_supercritical(&p, &bad, &c, &grid).is_err());
    }
}
