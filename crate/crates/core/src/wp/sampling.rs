//! Seeded random test data.

use num_complex::Complex64 as C64;
use rand::Rng;
use std::sync::Arc;

use crate::bers::LaurentSeries;
use crate::error::Result;
use crate::fields::{sup_norm_weighted, BeltramiField, DiskGrid, HolomorphicField};

/// Highest total degree of the polynomial part of random coefficients.
const MU_DEGREE: usize = 3;

fn gaussian_pair(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `(1-|z|²)^s Σ c_ab z^a z̄^b` with `a + b <= 3` and `s` in {1, 2}, scaled to sup `target`.
pub fn random_beltrami(
    grid: &Arc<DiskGrid>,
    rng: &mut impl Rng,
    target: f64,
) -> Result<BeltramiField> {
    let s: i32 = rng.gen_range(1..=2);
    let mut terms = Vec::new();
    for a in 0..=MU_DEGREE {
        for b in 0..=(MU_DEGREE - a) {
            terms.push((a as i32, b as i32, gaussian_pair(rng)));
        }
    }
    let shape = move |z: C64| {
        let poly: C64 = terms
            .iter()
            .map(|(a, b, c)| c * z.powi(*a) * z.conj().powi(*b))
            .sum();
        poly * (1.0 - z.norm_sqr()).powi(s)
    };
    let sup = (0..grid.len())
        .map(|i| shape(grid.node_at(i)).norm())
        .fold(0.0, f64::max);
    let scale = target / sup;
    BeltramiField::from_fn(grid.clone(), move |z| shape(z) * scale)
}

/// `Σ_{n=4}^{8} c_n z^-n` scaled to `‖ψ‖_∞ = target`.
pub fn random_quadratic_differential(
    grid: &Arc<DiskGrid>,
    rng: &mut impl Rng,
    target: f64,
) -> Result<HolomorphicField> {
    let mut coeffs = vec![C64::new(0.0, 0.0); 9];
    for c in coeffs.iter_mut().skip(4) {
        *c = gaussian_pair(rng);
    }
    let raw = HolomorphicField::from_laurent(grid.clone(), LaurentSeries::plain(coeffs));
    let norm = sup_norm_weighted(&raw, -2.0)?.value;
    Ok(raw.scaled(C64::new(target / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_hit_targets_and_repeat() {
        let g = Arc::new(GridSpec::default().with_angles(64).build().unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mu = random_beltrami(&g, &mut rng, 0.3).unwrap();
        assert!((mu.sup() - 0.3).abs() < 1e-12);
        // vanishes on the boundary ring
        let last = g.rings() - 1;
        let edge = (0..g.angles)
            .map(|a| mu.values()[g.index(last, a)].norm())
            .fold(0.0, f64::max);
        assert!(edge < 1e-3);
        let psi = random_quadratic_differential(&g, &mut rng, 0.1).unwrap();
        assert!((sup_norm_weighted(&psi, -2.0).unwrap().value - 0.1).abs() < 1e-12);
        let mut again = ChaCha8Rng::seed_from_u64(7);
        let mu2 = random_beltrami(&g, &mut again, 0.3).unwrap();
        assert_eq!(mu.values(), mu2.values());
    }
}
