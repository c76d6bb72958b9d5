//! Quadratic differentials moved by Möbius maps.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use super::{Domain, MobiusMap};
use crate::error::{Error, Result};
use crate::fields::{ComplexFn, DiskGrid, HolomorphicField};

/// `(γ*φ)(z) = φ(γ(z)) γ'(z)²` for `γ` preserving the exterior disk.
pub fn pullback(phi: &HolomorphicField, gamma: &MobiusMap) -> Result<HolomorphicField> {
    gamma.check_preserves(Domain::Exterior)?;
    let f = phi.evaluator();
    let g = *gamma;
    Ok(HolomorphicField::with_evaluator(
        phi.grid().clone(),
        Arc::new(move |z| {
            let d = g.derivative(z);
            f(g.apply(z)) * d * d
        }),
    ))
}

/// Log-polar nodes `ζ = R e^{iπu}` of the upper half-plane: `ln R` uniform on
/// `[-log_extent, log_extent]`, `u` geometric towards both ends of `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneGrid {
    pub log_extent: f64,
    pub radial: usize,
    /// Smallest angular fraction is `2^-depth`.
    pub depth: u32,
    pub per_octave: usize,
}

impl Default for HalfPlaneGrid {
    fn default() -> Self {
        Self {
            log_extent: 14.0,
            radial: 225,
            depth: 24,
            per_octave: 4,
        }
    }
}

impl HalfPlaneGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.log_extent > 0.0) || self.radial < 3 || self.depth == 0 || self.per_octave == 0 {
            return Err(Error::Validation(format!("bad half-plane grid {self:?}")));
        }
        Ok(())
    }

    fn fractions(&self) -> Vec<f64> {
        let steps = self.depth as usize * self.per_octave;
        let lower: Vec<f64> = (0..=steps)
            .map(|s| 0.5 * 2f64.powf(-(s as f64) / self.per_octave as f64))
            .collect();
        let mut u: Vec<f64> = lower.iter().rev().copied().collect();
        u.extend(lower.iter().skip(1).map(|x| 1.0 - x));
        u
    }

    fn moduli(&self) -> Vec<f64> {
        let n = self.radial;
        (0..n)
            .map(|i| (-self.log_extent + 2.0 * self.log_extent * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    /// Nodes by radial level, then angular level.
    pub fn nodes(&self) -> Vec<C64> {
        let u = self.fractions();
        self.moduli()
            .iter()
            .flat_map(|&r| {
                u.iter()
                    .map(move |&t| C64::from_polar(r, PI * t))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn angular(&self) -> usize {
        2 * self.depth as usize * self.per_octave + 1
    }
}

/// A holomorphic quadratic differential on the upper half-plane.
#[derive(Clone)]
pub struct HalfPlaneField {
    grid: HalfPlaneGrid,
    nodes: Vec<C64>,
    values: Vec<C64>,
    source: ComplexFn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneNorm {
    pub value: f64,
    /// False when the supremum sits on the outer layer of the grid.
    pub bounded: bool,
}

impl HalfPlaneField {
    pub fn from_fn(grid: HalfPlaneGrid, f: ComplexFn) -> Result<Self> {
        grid.validate()?;
        let nodes = grid.nodes();
        let values = nodes.par_iter().map(|z| f(*z)).collect();
        Ok(Self {
            grid,
            nodes,
            values,
            source: f,
        })
    }

    pub fn grid(&self) -> &HalfPlaneGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn eval(&self, zeta: C64) -> C64 {
        (self.source)(zeta)
    }

    pub fn evaluator(&self) -> ComplexFn {
        self.source.clone()
    }

    /// `sup ρ_ℍ^w |ψ|` with `ρ_ℍ = 1/Im ζ`.
    pub fn sup_weighted(&self, w: f64) -> HalfPlaneNorm {
        let na = self.grid.angular();
        let nr = self.grid.radial;
        let (mut inner, mut edge) = (0.0f64, 0.0f64);
        for (i, (z, v)) in self.nodes.iter().zip(&self.values).enumerate() {
            let x = z.im.powf(-w) * v.norm();
            let x = if x.is_finite() { x } else { f64::INFINITY };
            let (ri, ai) = (i / na, i % na);
            if ri == 0 || ri == nr - 1 || ai == 0 || ai == na - 1 {
                edge = edge.max(x);
            } else {
                inner = inner.max(x);
            }
        }
        HalfPlaneNorm {
            value: inner.max(edge),
            bounded: edge <= inner * (1.0 + 1e-9) && inner.is_finite(),
        }
    }
}

/// `h_*ψ(ζ) = ψ(h⁻¹(ζ)) (h⁻¹)'(ζ)²` for `h` mapping the exterior disk onto ℍ.
pub fn halfplane_transfer(
    psi: &HolomorphicField,
    h: &MobiusMap,
    grid: HalfPlaneGrid,
) -> Result<HalfPlaneField> {
    h.check_exterior_to_halfplane()?;
    let f = psi.evaluator();
    let hinv = h.inverse();
    HalfPlaneField::from_fn(
        grid,
        Arc::new(move |zeta| {
            let d = hinv.derivative(zeta);
            f(hinv.apply(zeta)) * d * d
        }),
    )
}

/// Inverse of [`halfplane_transfer`]: `z -> ψ̃(h(z)) h'(z)²` on the exterior disk.
pub fn halfplane_pullback(
    psi: &HalfPlaneField,
    h: &MobiusMap,
    grid: Arc<DiskGrid>,
) -> Result<HolomorphicField> {
    h.check_exterior_to_halfplane()?;
    let f = psi.evaluator();
    let h = *h;
    Ok(HolomorphicField::with_evaluator(
        grid,
        Arc::new(move |z| {
            let d = h.derivative(z);
            f(h.apply(z)) * d * d
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sup_norm_refined, GridSpec};
    use crate::moebius::{classify, density};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    fn quartic(g: &Arc<DiskGrid>) -> HolomorphicField {
        HolomorphicField::monomial(g.clone(), C64::new(1.0, 0.0), 4)
    }

    fn random_exterior(rng: &mut ChaCha8Rng) -> C64 {
        let r = 1.0 + rng.gen_range(0.01..3.0f64);
        C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    }

    #[test]
    fn identity_and_rotation() {
        let g = grid(64);
        let phi = quartic(&g);
        let id = pullback(&phi, &MobiusMap::identity(Domain::Exterior)).unwrap();
        assert!(id
            .values()
            .iter()
            .zip(phi.values())
            .all(|(a, b)| (a - b).norm() < 1e-13));
        let th = 0.7;
        let rot = pullback(&phi, &MobiusMap::rotation(th, Domain::Exterior)).unwrap();
        for i in (0..g.len()).step_by(17) {
            let z = g.exterior_node_at(i);
            let want = C64::from_polar(1.0, -2.0 * th) / z.powi(4);
            assert!((rot.values()[i] - want).norm() < 1e-14);
        }
        let (a, b) = (
            sup_norm_refined(&rot, -2.0).unwrap(),
            sup_norm_refined(&phi, -2.0).unwrap(),
        );
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_pullback_is_isometric() {
        let g = grid(256);
        let phi = quartic(&g);
        let gamma = MobiusMap::exterior_hyperbolic(0.25, 0.4, 2.5).unwrap();
        let pb = pullback(&phi, &gamma).unwrap();
        let a = sup_norm_refined(&pb, -2.0).unwrap();
        let b = sup_norm_refined(&phi, -2.0).unwrap();
        assert!((b - 0.25).abs() < 1e-15);
        assert!((a - b).abs() < 1e-8, "{a} {b}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let z = random_exterior(&mut rng);
            let w = gamma.apply(z);
            let lhs = pb.eval(z).norm() / density(Domain::Exterior, z).unwrap().powi(2);
            let rhs = phi.eval(w).norm() / density(Domain::Exterior, w).unwrap().powi(2);
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn group_action_reverses_order() {
        let g = grid(32);
        let phi = HolomorphicField::monomial(g, C64::new(0.3, 0.1), 5);
        let g1 = MobiusMap::exterior_hyperbolic(0.3, 0.1, 1.9).unwrap();
        let g2 = MobiusMap::disk_automorphism(0.4, C64::new(0.2, -0.5), Domain::Exterior).unwrap();
        let lhs = pullback(&phi, &g1.compose(&g2)).unwrap();
        let rhs = pullback(&pullback(&phi, &g1).unwrap(), &g2).unwrap();
        for (a, b) in lhs.values().iter().zip(rhs.values()) {
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn pullback_needs_exterior_map() {
        let phi = quartic(&grid(16));
        let scale = MobiusMap::from_matrix_unchecked(
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            Domain::Exterior,
        )
        .unwrap();
        assert!(matches!(pullback(&phi, &scale), Err(Error::Domain(_))));
    }

    #[test]
    fn transfer_preserves_weighted_modulus() {
        let g = grid(64);
        let phi = HolomorphicField::monomial(g.clone(), C64::new(0.5, -0.2), 4)
            .combine(
                C64::new(1.0, 0.0),
                &HolomorphicField::monomial(g.clone(), C64::new(0.1, 0.0), 7),
                C64::new(1.0, 0.0),
            )
            .unwrap();
        let gamma = MobiusMap::exterior_hyperbolic(0.25, 1.0, -1.0).unwrap();
        let h = classify(&gamma).normalizer.unwrap();
        let small = HalfPlaneGrid {
            radial: 21,
            depth: 6,
            ..HalfPlaneGrid::default()
        };
        let t = halfplane_transfer(&phi, &h, small).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = random_exterior(&mut rng);
            let zeta = h.apply(z);
            let lhs = t.eval(zeta).norm() * zeta.im * zeta.im;
            let rhs = phi.eval(z).norm() / density(Domain::Exterior, z).unwrap().powi(2);
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs), "{lhs} {rhs}");
        }
        let back = halfplane_pullback(&t, &h, g.clone()).unwrap();
        for (a, b) in back.values().iter().zip(phi.values()).step_by(7) {
            assert!((a - b).norm() < 1e-10 * (1.0 + b.norm()));
        }
        let zero = halfplane_transfer(&HolomorphicField::zero(g), &h, small).unwrap();
        assert!(zero.values().iter().all(|v| v.norm() == 0.0));
        assert!(halfplane_transfer(&phi, &gamma, small).is_err());
    }

    #[test]
    fn halfplane_grid_layout() {
        let hg = HalfPlaneGrid {
            radial: 5,
            depth: 3,
            per_octave: 2,
            ..HalfPlaneGrid::default()
        };
        let nodes = hg.nodes();
        assert_eq!(nodes.len(), 5 * hg.angular());
        assert!(nodes.iter().all(|z| z.im > 0.0));
        let f = HalfPlaneField::from_fn(hg, Arc::new(|_| C64::new(1.0, 0.0))).unwrap();
        // Im^2 |1| grows without bound towards ∞
        assert!(!f.sup_weighted(-2.0).bounded);
    }
}
