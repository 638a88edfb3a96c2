//! Graded radial grids with composite Gauss-Legendre quadrature.
//!
//! Nodes are Gauss points on panels whose edges are the image of a uniform
//! partition of `[0, 1]` under `t -> t^g / (t^g + (1 - t)^g)`, so panels
//! cluster at both ends of the radius for `g > 1`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::BandedCholesky;
use crate::spline::{SplineSpace, MAX_VANISH};

/// Gauss points per panel.
pub const PANEL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[q - 1 - i] = z;
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    if q % 2 == 1 {
        x[q / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(q: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=q {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if q == 0 {
        return (1.0, 0.0);
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre on `[a, b]` split into `panels` equal pieces.
pub fn composite_gauss(a: f64, b: f64, panels: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(q);
    let mut nodes = Vec::with_capacity(panels * q);
    let mut weights = Vec::with_capacity(panels * q);
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + h * k as f64;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub kind: String,
    pub panels: usize,
    pub order: usize,
}

impl QuadratureRule {
    /// Highest polynomial degree integrated exactly on each panel.
    pub fn exact_degree(&self) -> usize {
        2 * self.order - 1
    }
}

type StiffnessKey = (usize, usize, usize);

pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    edges: Vec<f64>,
    radius: f64,
    grading: f64,
    rule: QuadratureRule,
    diff: Vec<f64>,
    spaces: [OnceLock<Arc<SplineSpace>>; MAX_VANISH + 1],
    stiffness: Mutex<HashMap<StiffnessKey, Arc<BandedCholesky>>>,
}

impl std::fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialGrid")
            .field("len", &self.nodes.len())
            .field("mapping_id", &self.mapping_id())
            .field("radius", &self.radius)
            .finish()
    }
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.weights == other.weights
    }
}

/// Build a graded grid with `n_nodes` nodes on `(0, 1)`.
pub fn make_grid(n_nodes: usize, grading: f64) -> Result<Arc<RadialGrid>> {
    RadialGrid::build(n_nodes, grading, 1.0)
}

fn grading_map(t: f64, g: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = t.powf(g);
    let b = (1.0 - t).powf(g);
    a / (a + b)
}

impl RadialGrid {
    fn build(n_nodes: usize, grading: f64, radius: f64) -> Result<Arc<Self>> {
        if n_nodes < PANEL_ORDER {
            return Err(Error::Config(format!(
                "grid needs at least {PANEL_ORDER} nodes (got {n_nodes})"
            )));
        }
        if n_nodes % PANEL_ORDER != 0 {
            return Err(Error::Config(format!(
                "node count must be a multiple of the panel order {PANEL_ORDER} (got {n_nodes})"
            )));
        }
        if !(grading > 0.0 && grading.is_finite()) {
            return Err(Error::Config(format!(
                "grading must be positive (got {grading})"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!(
                "radius must be positive (got {radius})"
            )));
        }
        let panels = n_nodes / PANEL_ORDER;
        let edges: Vec<f64> = (0..=panels)
            .map(|k| radius * grading_map(k as f64 / panels as f64, grading))
            .collect();
        let (x, w) = gauss_legendre(PANEL_ORDER);
        let mut nodes = Vec::with_capacity(n_nodes);
        let mut weights = Vec::with_capacity(n_nodes);
        for k in 0..panels {
            let (a, b) = (edges[k], edges[k + 1]);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(a + 0.5 * (b - a) * (xi + 1.0));
                weights.push(0.5 * (b - a) * wi);
            }
        }
        for i in 1..nodes.len() {
            if !(nodes[i] > nodes[i - 1]) {
                return Err(Error::Config(format!(
                    "grading {grading} produces coincident nodes near r = {:e}",
                    nodes[i]
                )));
            }
        }
        let diff = reference_differentiation(&x);
        Ok(Arc::new(Self {
            nodes,
            weights,
            edges,
            radius,
            grading,
            rule: QuadratureRule {
                kind: "composite-gauss-legendre".into(),
                panels,
                order: PANEL_ORDER,
            },
            diff,
            spaces: Default::default(),
            stiffness: Mutex::new(HashMap::new()),
        }))
    }

    /// Same grid with every node multiplied by `factor`; used for scale-covariance checks.
    pub fn rescaled(&self, factor: f64) -> Result<Arc<Self>> {
        Self::build(self.nodes.len(), self.grading, self.radius * factor)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panel_edges(&self) -> &[f64] {
        &self.edges
    }

    /// Outer radius of the grid (1 for grids built by [`make_grid`]).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn mapping_id(&self) -> String {
        format!("power-blend(g={})", self.grading)
    }

    /// Spectral differentiation on each panel. Row-major `q x q` matrix on `[-1, 1]`.
    pub(crate) fn reference_diff(&self) -> &[f64] {
        &self.diff
    }

    pub(crate) fn space(&self, vanish: usize) -> Arc<SplineSpace> {
        let v = vanish.min(MAX_VANISH);
        self.spaces[v]
            .get_or_init(|| {
                let sites: Vec<f64> = self.nodes.iter().map(|r| r * r).collect();
                Arc::new(SplineSpace::new(&sites, self.radius * self.radius, v))
            })
            .clone()
    }

    pub(crate) fn stiffness_cached(
        &self,
        key: StiffnessKey,
        build: impl FnOnce() -> Result<BandedCholesky>,
    ) -> Result<Arc<BandedCholesky>> {
        if let Some(k) = self.stiffness.lock().expect("stiffness cache").get(&key) {
            return Ok(k.clone());
        }
        let chol = Arc::new(build()?);
        self.stiffness
            .lock()
            .expect("stiffness cache")
            .insert(key, chol.clone());
        Ok(chol)
    }
}

/// Differentiation matrix of the Lagrange interpolant through `x` (barycentric form).
fn reference_differentiation(x: &[f64]) -> Vec<f64> {
    let q = x.len();
    let mut bw = vec![1.0; q];
    for j in 0..q {
        for k in 0..q {
            if k != j {
                bw[j] /= x[j] - x[k];
            }
        }
    }
    let mut d = vec![0.0; q * q];
    for i in 0..q {
        let mut diag = 0.0;
        for j in 0..q {
            if i != j {
                let v = bw[j] / bw[i] / (x[i] - x[j]);
                d[i * q + j] = v;
                diag -= v;
            }
        }
        d[i * q + i] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_high_monomials() {
        let (x, w) = gauss_legendre(16);
        for k in 0..32 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            let exact = if k % 2 == 0 {
                2.0 / (k as f64 + 1.0)
            } else {
                0.0
            };
            assert!((s - exact).abs() < 1e-14, "k={k} {s} {exact}");
        }
    }

    #[test]
    fn odd_order_rule_has_centre_node() {
        let (x, w) = gauss_legendre(5);
        assert_eq!(x[2], 0.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(8, 2.0).is_err());
        assert!(make_grid(40, 2.0).is_err());
        assert!(make_grid(64, 0.0).is_err());
    }

    #[test]
    fn uniform_grading_gives_equal_panels() {
        let g = make_grid(64, 1.0).unwrap();
        let e = g.panel_edges();
        for k in 0..e.len() - 1 {
            assert!((e[k + 1] - e[k] - 0.25).abs() < 1e-15);
        }
    }
}
