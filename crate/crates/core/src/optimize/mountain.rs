//! Mountain-pass solver for `(-Delta)^m u = u_+^{p(x)-1}` in `H_0^m(B)`:
//! path deformation from the straight path `t -> t R u_eps`, followed by a
//! Newton polish of the max node.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::krylov::gmres;
use crate::bubbles::{constants_table, truncated_bubble, BubbleSpec, CutoffSpec};
use crate::error::{Error, Result};
use crate::functionals::{energy_gradient_with, energy_with, modular, potential, ExponentField};
use crate::grid::RadialGrid;
use crate::params::ProblemParams;
use crate::profile::RadialProfile;
use crate::radial_core::{grad_m_inner, nabla_m_norm_sq, solve_polyharmonic};

const MAX_DOUBLINGS: u32 = 40;
const MAX_HALVINGS: usize = 30;
const GOLDEN_STEPS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassConfig {
    /// Concentration of the bubble spanning the initial path.
    pub eps: f64,
    pub path_nodes: usize,
    pub max_sweeps: usize,
    /// Hand over to Newton once `|I'(u)| / |u|` at the max node drops below this.
    pub path_tol: f64,
    /// Target for the weak residual.
    pub grad_tol: f64,
    pub step: f64,
    pub respread_every: usize,
    pub newton_max: usize,
    pub cutoff: CutoffSpec,
}

impl Default for MountainPassConfig {
    fn default() -> Self {
        Self {
            eps: 0.1,
            path_nodes: 21,
            max_sweeps: 400,
            path_tol: 1e-2,
            grad_tol: 1e-8,
            step: 0.5,
            respread_every: 1,
            newton_max: 40,
            cutoff: CutoffSpec::default(),
        }
    }
}

impl MountainPassConfig {
    fn validate(&self) -> Result<()> {
        if self.path_nodes < 3 {
            return Err(Error::Config(format!(
                "path needs at least 3 nodes (got {})",
                self.path_nodes
            )));
        }
        if !(self.eps > 0.0 && self.step > 0.0 && self.grad_tol > 0.0 && self.path_tol > 0.0) {
            return Err(Error::Config(
                "eps, step, grad_tol and path_tol must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PathState {
    pub t_nodes: Vec<f64>,
    pub profiles: Vec<RadialProfile>,
    pub endpoint_r: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeSolution {
    #[serde(skip)]
    pub u: RadialProfile,
    #[serde(skip)]
    pub iterates: Vec<RadialProfile>,
    pub level_c: f64,
    /// `(m/n) S^{-n/m}`.
    pub level_threshold: f64,
    pub weak_residual: f64,
    pub min_interior_value: f64,
    pub ps_l_squared: f64,
    pub endpoint_r: f64,
    pub sweeps: usize,
    pub path_levels: Vec<f64>,
    /// `|I'| / |u|` at the max node, one entry per sweep.
    pub path_grad_norms: Vec<f64>,
    pub newton_iterations: usize,
    pub newton_residuals: Vec<f64>,
    pub converged: bool,
    pub warning: Option<String>,
}

/// Smallest power of two `R` with `I(R u_eps) < 0`.
pub fn choose_r(
    params: &ProblemParams,
    eps: f64,
    cutoff: &CutoffSpec,
    grid: &Arc<RadialGrid>,
) -> Result<f64> {
    let u = truncated_bubble(&BubbleSpec::unit(eps, *params)?, cutoff, grid);
    let field = ExponentField::new(params, grid);
    for k in 1..=MAX_DOUBLINGS {
        let r = 2f64.powi(k as i32);
        if energy_with(&u.scaled(r), &field)? < 0.0 {
            return Ok(r);
        }
    }
    Err(Error::Numerical(format!(
        "energy along R u_eps stays nonnegative up to R = 2^{MAX_DOUBLINGS}"
    )))
}

fn h_norm(u: &RadialProfile, params: &ProblemParams) -> f64 {
    nabla_m_norm_sq(u, params).sqrt()
}

/// Lowest interior index of the largest energy.
fn argmax(energies: &[f64]) -> usize {
    let mut k = 1;
    for j in 1..energies.len() - 1 {
        if energies[j] > energies[k] {
            k = j;
        }
    }
    k
}

/// Equal `H^m`-arclength redistribution of the interior nodes.
fn respread(path: &mut PathState, params: &ProblemParams) -> Result<()> {
    let p = &path.profiles;
    let mut s = vec![0.0];
    for w in p.windows(2) {
        let d = h_norm(&w[1].sub(&w[0])?, params);
        s.push(s.last().unwrap() + d);
    }
    let total = *s.last().unwrap();
    if total == 0.0 {
        return Ok(());
    }
    let n = p.len();
    let mut out = Vec::with_capacity(n);
    let mut t_out = Vec::with_capacity(n);
    out.push(p[0].clone());
    t_out.push(path.t_nodes[0]);
    for k in 1..n - 1 {
        let target = total * k as f64 / (n - 1) as f64;
        let j = s.partition_point(|&x| x <= target).clamp(1, n - 1);
        let lam = (target - s[j - 1]) / (s[j] - s[j - 1]).max(f64::MIN_POSITIVE);
        out.push(p[j - 1].scaled(1.0 - lam).axpy(lam, &p[j])?);
        t_out.push((1.0 - lam) * path.t_nodes[j - 1] + lam * path.t_nodes[j]);
    }
    out.push(p[n - 1].clone());
    t_out.push(path.t_nodes[n - 1]);
    path.profiles = out;
    path.t_nodes = t_out;
    Ok(())
}

fn projected_gradient(
    u: &RadialProfile,
    field: &ExponentField,
    tangent: &RadialProfile,
) -> Result<RadialProfile> {
    let params = field.params();
    let g = energy_gradient_with(u, field)?;
    let tt = nabla_m_norm_sq(tangent, params);
    if tt > 0.0 {
        g.axpy(-grad_m_inner(&g, tangent, params)? / tt, tangent)
    } else {
        Ok(g)
    }
}

/// Steepest descent step on one node, with the component along the path
/// tangent removed so the node does not slide along the path; backtracking
/// returns the accepted step.
fn descend(
    u: &RadialProfile,
    e: f64,
    step: f64,
    field: &ExponentField,
    tangent: &RadialProfile,
    max_move: f64,
) -> Result<Option<(RadialProfile, f64, f64)>> {
    let params = field.params();
    let g = projected_gradient(u, field, tangent)?;
    let gn2 = nabla_m_norm_sq(&g, params);
    if gn2 == 0.0 {
        return Ok(None);
    }
    // keep the node within half a spacing of its neighbours
    let mut s = step.min(max_move / gn2.sqrt());
    for _ in 0..MAX_HALVINGS {
        let trial = u.axpy(-s, &g)?;
        if let Ok(v) = energy_with(&trial, field) {
            if v <= e - 1e-4 * s * gn2 {
                return Ok(Some((trial, v, s)));
            }
        }
        s *= 0.5;
    }
    Ok(None)
}

/// Maximize `I(t u)` over `t` in `[lo, hi]` by golden section in `ln t`.
fn ray_max(u: &RadialProfile, field: &ExponentField, lo: f64, hi: f64) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let f = |x: f64| energy_with(&u.scaled(x.exp()), field);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_STEPS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Newton on `u - (-Delta)^{-m} u_+^{p-1} = 0` with GMRES for the corrections.
fn newton(
    mut u: RadialProfile,
    field: &ExponentField,
    cfg: &MountainPassConfig,
    iterates: &mut Vec<RadialProfile>,
) -> Result<(RadialProfile, Vec<f64>)> {
    let params = *field.params();
    let p = field.values().to_vec();
    let mut res = Vec::new();
    let mut g = energy_gradient_with(&u, field)?;
    let mut gn = h_norm(&g, &params);
    res.push(gn);
    for _ in 0..cfg.newton_max {
        if gn < cfg.grad_tol {
            break;
        }
        let slope: Vec<f64> = u
            .values()
            .iter()
            .zip(&p)
            .map(|(&v, &pi)| {
                if v > 0.0 {
                    (pi - 1.0) * v.powf(pi - 2.0)
                } else {
                    0.0
                }
            })
            .collect();
        let template = u.clone();
        let apply = |v: &[f64]| -> Vec<f64> {
            let rhs: Vec<f64> = v.iter().zip(&slope).map(|(a, b)| a * b).collect();
            let s = template
                .with_values(rhs)
                .and_then(|r| solve_polyharmonic(&r, &params))
                .map(|w| w.values().to_vec())
                .unwrap_or_else(|_| vec![f64::NAN; v.len()]);
            v.iter().zip(&s).map(|(a, b)| a - b).collect()
        };
        let rhs: Vec<f64> = g.values().iter().map(|x| -x).collect();
        let (delta, _) = gmres(apply, &rhs, 1e-12, 60, 10);
        if delta.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("Newton correction is not finite".into()));
        }
        let d = u.with_values(delta)?;
        let mut lam = 1.0;
        let mut improved = false;
        for _ in 0..MAX_HALVINGS {
            let trial = u.axpy(lam, &d)?;
            if let Ok(tg) = energy_gradient_with(&trial, field) {
                let tn = h_norm(&tg, &params);
                if tn < gn {
                    u = trial;
                    g = tg;
                    gn = tn;
                    improved = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        res.push(gn);
        iterates.push(u.clone());
        if !improved {
            break;
        }
    }
    Ok((u, res))
}

pub fn mountain_pass_solve(
    params: &ProblemParams,
    cfg: &MountainPassConfig,
    grid: &Arc<RadialGrid>,
) -> Result<PdeSolution> {
    cfg.validate()?;
    let mut warning = None;
    if params.alpha > (params.n - 2 * params.m) as f64 {
        warning = Some(format!(
            "alpha = {} exceeds n - 2m; existence is not guaranteed",
            params.alpha
        ));
    }
    let field = ExponentField::new(params, grid);
    let big_r = choose_r(params, cfg.eps, &cfg.cutoff, grid)?;
    let base = truncated_bubble(&BubbleSpec::unit(cfg.eps, *params)?, &cfg.cutoff, grid)
        .with_vanish_order(params.m);
    let np = cfg.path_nodes;
    let t_nodes: Vec<f64> = (0..np)
        .map(|k| big_r * k as f64 / (np - 1) as f64)
        .collect();
    let profiles = t_nodes.iter().map(|&t| base.scaled(t)).collect();
    let mut path = PathState {
        t_nodes,
        profiles,
        endpoint_r: big_r,
        level: 0.0,
    };
    let mut energies: Vec<f64> = path
        .profiles
        .iter()
        .map(|u| energy_with(u, &field))
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    let mut grad_norms = Vec::new();
    let mut step = cfg.step;
    let mut sweeps = 0;
    for sweep in 0..cfg.max_sweeps {
        sweeps = sweep + 1;
        let k = argmax(&energies);
        path.level = energies[k];
        levels.push(energies[k]);
        if energies[k] <= 0.0 {
            return Err(Error::Numerical(
                "mountain-pass path collapsed toward 0; try a different bubble concentration"
                    .into(),
            ));
        }
        let tangent = |j: usize, p: &PathState| p.profiles[j + 1].sub(&p.profiles[j - 1]);
        let reach = |j: usize, p: &PathState| -> Result<f64> {
            let a = h_norm(&p.profiles[j].sub(&p.profiles[j - 1])?, params);
            let b = h_norm(&p.profiles[j + 1].sub(&p.profiles[j])?, params);
            Ok(0.5 * a.min(b))
        };
        let u = &path.profiles[k];
        let tk = tangent(k, &path)?;
        let g = projected_gradient(u, &field, &tk)?;
        let ratio = h_norm(&g, params) / h_norm(u, params);
        grad_norms.push(ratio);
        if ratio < cfg.path_tol {
            break;
        }
        match descend(u, energies[k], step, &field, &tk, reach(k, &path)?)? {
            Some((v, e, s)) => {
                path.profiles[k] = v;
                energies[k] = e;
                step = (2.0 * s).min(cfg.step);
            }
            None => break,
        }
        for j in [k - 1, k + 1] {
            if j >= 1 && j + 1 < np {
                let tj = tangent(j, &path)?;
                if let Some((v, e, _)) = descend(
                    &path.profiles[j],
                    energies[j],
                    0.5 * step,
                    &field,
                    &tj,
                    reach(j, &path)?,
                )? {
                    path.profiles[j] = v;
                    energies[j] = e;
                }
            }
        }
        if cfg.respread_every > 0 && sweeps % cfg.respread_every == 0 {
            respread(&mut path, params)?;
            for (e, u) in energies.iter_mut().zip(&path.profiles) {
                *e = energy_with(u, &field)?;
            }
        }
    }
    let k = argmax(&energies);
    let candidate = &path.profiles[k];
    let t = ray_max(candidate, &field, 0.5, 2.0)?;
    let mut iterates = vec![candidate.scaled(t)];
    let (u, newton_res) = newton(candidate.scaled(t), &field, cfg, &mut iterates)?;
    let level = energy_with(&u, &field)?;
    if !(level > 0.0) || h_norm(&u, params) < 1e-8 {
        return Err(Error::Numerical(
            "Newton polish collapsed to the trivial solution; try a different bubble concentration"
                .into(),
        ));
    }
    let residual = pde_residual(&u, params)?;
    let table = constants_table(params);
    let converged = residual.weak_residual < cfg.grad_tol;
    if !converged && warning.is_none() {
        warning = Some(format!(
            "weak residual {:e} above target {:e}",
            residual.weak_residual, cfg.grad_tol
        ));
    }
    let l2 = modular(&u.map(|v| v.max(0.0))?, &field)?.modular;
    Ok(PdeSolution {
        level_c: level,
        level_threshold: params.m as f64 / params.n as f64 * table.s_pow,
        weak_residual: residual.weak_residual,
        min_interior_value: u.values().iter().cloned().fold(f64::INFINITY, f64::min),
        ps_l_squared: l2,
        endpoint_r: big_r,
        sweeps,
        path_levels: levels,
        path_grad_norms: grad_norms,
        newton_iterations: newton_res.len() - 1,
        newton_residuals: newton_res,
        converged,
        warning,
        u,
        iterates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeResidual {
    /// `sup_phi |<I'(u), phi>| / |nabla^m phi|` over the discrete space.
    pub weak_residual: f64,
    /// `|d^j u / d rho^j (1)| / max|u|`, `j = 0..m-1`, of the unconstrained interpolant.
    pub boundary_violation: Vec<f64>,
}

pub fn pde_residual(u: &RadialProfile, params: &ProblemParams) -> Result<PdeResidual> {
    let field = ExponentField::new(params, u.grid());
    let g = energy_gradient_with(u, &field)?;
    let scale = u.max_abs();
    let space = u.grid().space(0);
    let coef = space.interpolate(u.values());
    let end = u.grid().radius().powi(2);
    let boundary = (0..params.m)
        .map(|j| {
            if scale == 0.0 {
                0.0
            } else {
                space.eval(&coef, end, j).abs() / scale
            }
        })
        .collect();
    Ok(PdeResidual {
        weak_residual: h_norm(&g, params),
        boundary_violation: boundary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsDiagnostics {
    /// `int u_+^{p}` along the iterates; the last entry estimates `l^2`.
    pub l_squared_history: Vec<f64>,
    pub l_squared: f64,
    pub level: f64,
    /// `|l^2 - (n/m) c| / l^2`.
    pub nm_relation: f64,
    /// `|int u_+^p / p - (l^2/2 - c)| / (l^2/2)`.
    pub energy_relation: f64,
    /// `S^{-n/m}`.
    pub compactness_threshold: f64,
    pub below_threshold: bool,
}

pub fn ps_diagnostics(iterates: &[RadialProfile], params: &ProblemParams) -> Result<PsDiagnostics> {
    let last = iterates
        .last()
        .ok_or_else(|| Error::Usage("empty iterate history".into()))?;
    let field = ExponentField::new(params, last.grid());
    let l2_hist: Vec<f64> = iterates
        .iter()
        .map(|u| Ok(modular(&u.map(|v| v.max(0.0))?, &field)?.modular))
        .collect::<Result<_>>()?;
    let l2 = *l2_hist.last().unwrap();
    let c = energy_with(last, &field)?;
    let pot = potential(last, &field)?;
    let k = constants_table(params).s_pow;
    let nm = params.n as f64 / params.m as f64;
    Ok(PsDiagnostics {
        l_squared_history: l2_hist,
        l_squared: l2,
        level: c,
        nm_relation: (l2 - nm * c).abs() / l2,
        energy_relation: (pot - (0.5 * l2 - c)).abs() / (0.5 * l2),
        compactness_threshold: k,
        below_threshold: l2 < k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn chosen_endpoint_is_the_first_negative_power_of_two() {
        let p = ProblemParams::new(5, 2, 1.0).unwrap();
        let grid = make_grid(128, 2.0).unwrap();
        let cutoff = CutoffSpec::default();
        let r = choose_r(&p, 0.1, &cutoff, &grid).unwrap();
        let u = truncated_bubble(&BubbleSpec::unit(0.1, p).unwrap(), &cutoff, &grid);
        let field = ExponentField::new(&p, &grid);
        assert!(energy_with(&u.scaled(r), &field).unwrap() < 0.0);
        if r > 2.0 {
            assert!(energy_with(&u.scaled(r / 2.0), &field).unwrap() >= 0.0);
        }
    }

    #[test]
    fn zero_is_a_critical_point() {
        let p = ProblemParams::new(3, 1, 1.0).unwrap();
        let grid = make_grid(64, 2.0).unwrap();
        let res = pde_residual(&RadialProfile::zeros(&grid, 3), &p).unwrap();
        assert_eq!(res.weak_residual, 0.0);
        assert!(res.boundary_violation.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn config_validation() {
        let cfg = MountainPassConfig {
            path_nodes: 2,
            ..MountainPassConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(MountainPassConfig::default().validate().is_ok());
        assert!(argmax(&[0.0, 1.0, 3.0, 3.0, -1.0]) == 2);
    }
}
