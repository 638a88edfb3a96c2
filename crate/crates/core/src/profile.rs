//! Radial profiles sampled at grid nodes.

use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::spline::MAX_VANISH;

/// Vanish order used for profiles that are identically zero near the outer radius.
pub const VANISH_SMOOTH: usize = MAX_VANISH;

#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    n: usize,
    vanish_order: usize,
}

impl RadialProfile {
    pub fn new(
        grid: Arc<RadialGrid>,
        values: Vec<f64>,
        n: usize,
        vanish_order: usize,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "profile has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite profile value at node {i} (r = {:e})",
                grid.nodes()[i]
            )));
        }
        Ok(Self {
            grid,
            values,
            n,
            vanish_order: vanish_order.min(VANISH_SMOOTH),
        })
    }

    pub fn from_fn(
        grid: &Arc<RadialGrid>,
        n: usize,
        vanish_order: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values, n, vanish_order)
    }

    pub fn zeros(grid: &Arc<RadialGrid>, n: usize) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            n,
            vanish_order: VANISH_SMOOTH,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vanish_order(&self) -> usize {
        self.vanish_order
    }

    pub fn with_vanish_order(mut self, v: usize) -> Self {
        self.vanish_order = v.min(VANISH_SMOOTH);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same grid, new values. Vanish order and dimension are kept.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), values, self.n, self.vanish_order)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            n: self.n,
            vanish_order: self.vanish_order,
        }
    }

    /// `self + c * other`; the result keeps the smaller vanish order.
    pub fn axpy(&self, c: f64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            values,
            n: self.n,
            vanish_order: self.vanish_order.min(other.vanish_order),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.axpy(1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::Usage("profiles live on different grids".into()))
        }
    }

    /// CSV with header `r,value`, 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "r,value")?;
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(w, "{},{}", fmt_sig17(*r), fmt_sig17(*v))?;
        }
        Ok(())
    }

    /// Read values written by [`write_csv`](Self::write_csv); nodes must match the grid.
    pub fn read_csv(
        grid: &Arc<RadialGrid>,
        n: usize,
        vanish_order: usize,
        r: impl BufRead,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Usage(e.to_string()))?;
            if k == 0 {
                if line.trim() != "r,value" {
                    return Err(Error::Usage(format!("unexpected CSV header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Usage(format!("short CSV row {k}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Usage(format!("CSV row {k}: {e}")))
            };
            let rr = parse(it.next())?;
            let v = parse(it.next())?;
            let i = values.len();
            match grid.nodes().get(i) {
                Some(&node) if (node - rr).abs() <= 1e-15 * node.max(1e-300) * 10.0 => {
                    values.push(v)
                }
                _ => {
                    return Err(Error::Usage(format!(
                        "CSV row {k}: radius {rr:e} does not match grid node {i}"
                    )))
                }
            }
        }
        Self::new(grid.clone(), values, n, vanish_order)
    }
}

/// Fixed 17-significant-digit scientific format.
pub fn fmt_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn csv_round_trip_is_exact() {
        let g = make_grid(32, 2.0).unwrap();
        let p = RadialProfile::from_fn(&g, 5, 2, |r| (1.0 - r * r).powi(2) / 3.0).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let q = RadialProfile::read_csv(&g, 5, 2, buf.as_slice()).unwrap();
        assert_eq!(p.values(), q.values());
        assert!(String::from_utf8(buf).unwrap().starts_with("r,value\n"));
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = make_grid(16, 1.0).unwrap();
        assert!(RadialProfile::from_fn(&g, 3, 0, |r| 1.0 / (r - r)).is_err());
    }

    #[test]
    fn grid_mismatch_is_usage_error() {
        let a = make_grid(16, 1.0).unwrap();
        let b = make_grid(32, 1.0).unwrap();
        let p = RadialProfile::zeros(&a, 3);
        let q = RadialProfile::zeros(&b, 3);
        assert!(matches!(p.add(&q), Err(Error::Usage(_))));
    }
}
