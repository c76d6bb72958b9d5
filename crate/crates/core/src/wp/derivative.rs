//! The derivative of `R*_φ = Φ ∘ r_ν ∘ σ` at `φ`, with `ν = σ(φ)`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::Constants;
use crate::bers::projection::quartic_series;
use crate::bers::{aw_samples, aw_section, bers_projection};
use crate::error::{Error, Result};
use crate::fields::{lp_norm_hyperbolic, sup_norm_weighted, BeltramiField, HolomorphicField};
use crate::quadrature::gauss_legendre_on;
use crate::solver::algebra::star_with;
use crate::solver::{solve_selfmap, QCSolution, SolverConfig};

/// Nodes per chunk of the moment sums; fixed so the reduction order never changes.
const MOMENT_CHUNK: usize = 4096;

/// Step of the central difference for the inverse derivative.
pub const INVERSE_STEP: f64 = 1e-3;

/// Solved data at a base point `φ`.
pub struct RStarDerivative {
    phi: HolomorphicField,
    nu: BeltramiField,
    f: QCSolution,
    /// `J A/(1-|ν|²) · ∂f/conj(∂f)` per node.
    factor: Vec<C64>,
}

impl RStarDerivative {
    /// Requires `‖φ‖_∞ <= δ₀`.
    pub fn at(phi: &HolomorphicField, consts: &Constants, cfg: &SolverConfig) -> Result<Self> {
        let norm = sup_norm_weighted(phi, -2.0)?.value;
        if norm > consts.delta0 {
            return Err(Error::Precondition(format!(
                "‖φ‖_∞ = {norm:.4} exceeds δ₀ = {}",
                consts.delta0
            )));
        }
        let nu = aw_section(phi)?;
        let f = solve_selfmap(&nu, cfg)?;
        let g = nu.grid();
        let jac = f.jacobian();
        let factor = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let p = f.df()[i];
                let n = nu.values()[i];
                p / p.conj() * (jac[i] * g.weight(g.ring_of(i)) / (1.0 - n.norm_sqr()))
            })
            .collect();
        Ok(Self {
            phi: phi.clone(),
            nu,
            f,
            factor,
        })
    }

    pub fn base(&self) -> &HolomorphicField {
        &self.phi
    }

    pub fn nu(&self) -> &BeltramiField {
        &self.nu
    }

    pub fn selfmap(&self) -> &QCSolution {
        &self.f
    }

    /// `d₀Φ(d_ν r_ν(dσ(ψ)))`, integrating over the image disk by the change of
    /// variables `w = f^ν(z)`.
    pub fn apply(&self, psi: &HolomorphicField) -> Result<HolomorphicField> {
        let g = self.nu.grid();
        if psi.grid().spec() != g.spec() {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        let lambda = aw_samples(psi);
        let kmax = g.angles / 2;
        let weights: Vec<C64> = lambda
            .iter()
            .zip(&self.factor)
            .map(|(l, c)| l * c)
            .collect();
        let partial: Vec<Vec<C64>> = weights
            .par_chunks(MOMENT_CHUNK)
            .zip(self.f.values().par_chunks(MOMENT_CHUNK))
            .map(|(ws, fs)| {
                let mut b = vec![C64::new(0.0, 0.0); kmax + 1];
                for (c, w) in ws.iter().zip(fs) {
                    let mut pw = *c;
                    for slot in b.iter_mut().skip(1) {
                        *slot += pw;
                        pw *= w;
                    }
                }
                b
            })
            .collect();
        let mut b = vec![C64::new(0.0, 0.0); kmax + 1];
        for part in &partial {
            for (acc, v) in b.iter_mut().zip(part) {
                *acc += v;
            }
        }
        for v in &mut b {
            *v /= PI;
        }
        Ok(HolomorphicField::from_laurent(
            g.clone(),
            quartic_series(&b),
        ))
    }

    /// `d₀(R*_φ)^{-1}(ψ)` by a central difference of `t -> Φ(σ(tψ) ∗ ν)`.
    pub fn inverse_apply(
        &self,
        psi: &HolomorphicField,
        step: f64,
        cfg: &SolverConfig,
    ) -> Result<HolomorphicField> {
        let image = |t: f64| -> Result<HolomorphicField> {
            let lam = aw_section(&psi.scaled(C64::new(t, 0.0)))?;
            bers_projection(&star_with(&lam, &self.nu, &self.f)?, cfg)
        };
        let (plus, minus) = (image(step)?, image(-step)?);
        let s = C64::new(0.5 / step, 0.0);
        plus.combine(s, &minus, -s)
    }
}

/// `(d_φ R*_φ)(ψ)`.
pub fn dr_star(
    phi: &HolomorphicField,
    psi: &HolomorphicField,
    cfg: &SolverConfig,
) -> Result<HolomorphicField> {
    RStarDerivative::at(phi, &Constants::default(), cfg)?.apply(psi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLength {
    pub value: f64,
    pub p: f64,
    pub nodes: Vec<f64>,
    /// `‖(d R*)(φ₁ - φ₀)‖_p` at each node.
    pub integrand: Vec<f64>,
}

/// `∫_0^1 ‖(d_{φ_t} R*_{φ_t})(φ₁ - φ₀)‖_p dt` along `φ_t = (1-t)φ₀ + tφ₁` by
/// `m`-point Gauss-Legendre.
pub fn segment_length(
    phi0: &HolomorphicField,
    phi1: &HolomorphicField,
    consts: &Constants,
    m: usize,
    cfg: &SolverConfig,
) -> Result<SegmentLength> {
    for (name, phi) in [("φ₀", phi0), ("φ₁", phi1)] {
        let n = sup_norm_weighted(phi, -2.0)?.value;
        if n > consts.delta0 {
            return Err(Error::Precondition(format!(
                "segment leaves the δ₀ ball: ‖{name}‖_∞ = {n:.4}"
            )));
        }
    }
    let one = C64::new(1.0, 0.0);
    let dir = phi1.combine(one, phi0, -one)?;
    let (nodes, weights) = gauss_legendre_on(m, 0.0, 1.0);
    if dir.values().iter().all(|v| v.norm() == 0.0) {
        return Ok(SegmentLength {
            value: 0.0,
            p: consts.p,
            integrand: vec![0.0; nodes.len()],
            nodes,
        });
    }
    let mut integrand = Vec::with_capacity(m);
    for &t in &nodes {
        let phi_t = phi0.combine(C64::new(1.0 - t, 0.0), phi1, C64::new(t, 0.0))?;
        let d = RStarDerivative::at(&phi_t, consts, cfg)?;
        integrand.push(lp_norm_hyperbolic(&d.apply(&dir)?, consts.p)?.value);
    }
    let value = integrand.iter().zip(&weights).map(|(v, w)| v * w).sum();
    Ok(SegmentLength {
        value,
        p: consts.p,
        nodes,
        integrand,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{DiskGrid, GridSpec};
    use std::sync::Arc;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    fn mono(g: &Arc<DiskGrid>, c: C64, n: usize) -> HolomorphicField {
        HolomorphicField::monomial(g.clone(), c, n)
    }

    fn rel_sup(a: &HolomorphicField, b: &HolomorphicField) -> f64 {
        let d = a
            .combine(C64::new(1.0, 0.0), b, C64::new(-1.0, 0.0))
            .unwrap();
        sup_norm_weighted(&d, -2.0).unwrap().value / sup_norm_weighted(b, -2.0).unwrap().value
    }

    #[test]
    fn at_origin_the_chain_is_the_identity() {
        let g = grid(128);
        let cfg = SolverConfig::default();
        let zero = HolomorphicField::zero(g.clone());
        let d = RStarDerivative::at(&zero, &Constants::default(), &cfg).unwrap();
        let psi = mono(&g, C64::new(0.3, -0.1), 4)
            .combine(
                C64::new(1.0, 0.0),
                &mono(&g, C64::new(0.0, 0.2), 6),
                C64::new(1.0, 0.0),
            )
            .unwrap();
        let out = d.apply(&psi).unwrap();
        assert!(rel_sup(&out, &psi) < 2e-3, "{}", rel_sup(&out, &psi));
        let back = d.inverse_apply(&psi, INVERSE_STEP, &cfg).unwrap();
        assert!(rel_sup(&back, &psi) < 2e-3, "{}", rel_sup(&back, &psi));
        assert!(d
            .apply(&zero)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn derivative_norm_bounds_and_continuity() {
        let g = grid(64);
        let cfg = SolverConfig::default();
        let consts = Constants::default();
        let psi = mono(&g, C64::new(0.05, 0.05), 5);
        let base = lp_norm_hyperbolic(&psi, 2.0).unwrap().value;
        let mut gaps = Vec::new();
        for j in 0..4 {
            let phi = mono(&g, C64::new(0.4 * 0.1 * 0.5f64.powi(j), 0.0), 4);
            let d = RStarDerivative::at(&phi, &consts, &cfg).unwrap();
            let n = lp_norm_hyperbolic(&d.apply(&psi).unwrap(), 2.0)
                .unwrap()
                .value;
            assert!(n <= 16.0 * base);
            let inv = lp_norm_hyperbolic(&d.inverse_apply(&psi, INVERSE_STEP, &cfg).unwrap(), 2.0)
                .unwrap()
                .value;
            assert!(inv <= 128.0 * base);
            gaps.push((n - base).abs());
        }
        // 2^-j ladder towards the origin; the gaps settle on the grid floor
        let steps: Vec<f64> = gaps.windows(2).map(|w| w[0] - w[1]).collect();
        assert!(steps.iter().all(|s| *s > 0.0), "{gaps:?}");
        assert!(steps.windows(2).all(|w| w[1] < 0.6 * w[0]), "{gaps:?}");
    }

    #[test]
    fn base_point_outside_ball_rejected() {
        let g = grid(32);
        let phi = mono(&g, C64::new(1.2, 0.0), 4);
        assert!(matches!(
            RStarDerivative::at(&phi, &Constants::default(), &SolverConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn segment_length_quadrature() {
        let g = grid(64);
        let cfg = SolverConfig::default();
        let consts = Constants::default();
        let phi0 = mono(&g, C64::new(0.1, 0.0), 4);
        let phi1 = mono(&g, C64::new(0.0, 0.15), 5);
        let a = segment_length(&phi0, &phi1, &consts, 8, &cfg).unwrap();
        let b = segment_length(&phi0, &phi1, &consts, 16, &cfg).unwrap();
        assert!(
            ((a.value - b.value) / b.value).abs() < 1e-3,
            "{} {}",
            a.value,
            b.value
        );
        let diff = phi1
            .combine(C64::new(1.0, 0.0), &phi0, C64::new(-1.0, 0.0))
            .unwrap();
        let dp = lp_norm_hyperbolic(&diff, 2.0).unwrap().value;
        assert!(a.value >= dp / 128.0 && a.value <= 16.0 * dp);
        assert_eq!(
            segment_length(&phi0, &phi0, &consts, 8, &cfg)
                .unwrap()
                .value,
            0.0
        );
        let far = mono(&g, C64::new(1.2, 0.0), 4);
        assert!(segment_length(&phi0, &far, &consts, 8, &cfg).is_err());
    }
}
