//! Seeded random test profiles and the singular families that saturate the
//! radial Rellich-type and Hardy-Rellich constants.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bubbles::CutoffSpec;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::profile::{RadialProfile, VANISH_SMOOTH};

/// Sum of 1 to 4 Gaussian bumps in `r^2`, times `(1 - r^2)^order`.
/// Smooth at the origin and vanishing to `order` at the boundary.
pub fn random_profile(
    grid: &Arc<RadialGrid>,
    n: usize,
    order: usize,
    seed: u64,
) -> Result<RadialProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=4);
    let bumps: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            let amp = rng.gen_range(0.2..1.0) * if rng.gen_bool(0.75) { 1.0 } else { -1.0 };
            let center = rng.gen_range(0.0..0.8);
            let width = rng.gen_range(0.05..0.5);
            (amp, center, width)
        })
        .collect();
    let order = order.max(1);
    RadialProfile::from_fn(grid, n, order, |r| {
        let rho = r * r;
        let s: f64 = bumps
            .iter()
            .map(|(a, c, w)| a * (-((rho - c) / w).powi(2)).exp())
            .sum();
        s * (1.0 - rho).powi(order as i32)
    })
}

/// `(1 - phi(r/eps)) phi(r) r^{-exponent}`; zero below `eps * inner_radius`.
pub fn singular_family(
    grid: &Arc<RadialGrid>,
    n: usize,
    exponent: f64,
    eps: f64,
    cutoff: &CutoffSpec,
) -> Result<RadialProfile> {
    if !(eps > 0.0 && eps * cutoff.outer_radius < cutoff.inner_radius) {
        return Err(Error::Domain(format!(
            "eps = {eps} leaves no room between the inner and outer cutoffs"
        )));
    }
    RadialProfile::from_fn(grid, n, VANISH_SMOOTH, |r| {
        let inner = 1.0 - cutoff.value(r / eps);
        if inner == 0.0 {
            0.0
        } else {
            inner * cutoff.value(r) * r.powf(-exponent)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn random_profiles_are_reproducible() {
        let g = make_grid(64, 2.0).unwrap();
        let a = random_profile(&g, 5, 2, 11).unwrap();
        let b = random_profile(&g, 5, 2, 11).unwrap();
        let c = random_profile(&g, 5, 2, 12).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert_eq!(a.vanish_order(), 2);
    }

    #[test]
    fn singular_family_support() {
        let g = make_grid(64, 2.0).unwrap();
        let c = CutoffSpec::default();
        let u = singular_family(&g, 6, 1.0, 0.1, &c).unwrap();
        for (r, v) in g.nodes().iter().zip(u.values()) {
            if *r <= 0.05 || *r >= 0.75 {
                assert_eq!(*v, 0.0);
            }
            if *r >= 0.075 && *r <= 0.5 {
                assert!((v - 1.0 / r).abs() < 1e-12 / r);
            }
        }
        assert!(singular_family(&g, 6, 1.0, 1.0, &c).is_err());
    }
}
