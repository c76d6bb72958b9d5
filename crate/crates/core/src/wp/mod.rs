//! p-integrable Teichmüller quantities: norms, the derivative of the base point
//! change, Finsler segment lengths and the subdivision bound.

pub mod derivative;
pub mod sampling;
pub mod subdivision;
pub mod suite;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::{hyperbolic_lp_of, BeltramiField, NormReport};

pub use derivative::{dr_star, segment_length, RStarDerivative, SegmentLength};
pub use subdivision::{wp_upper_bound_subdivision, SubdivisionStep, SubdivisionTrace};
pub use suite::{inequality_suite, SuiteConfig, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub delta0: f64,
    pub p: f64,
    pub c_p: f64,
    pub delta_p: f64,
}

/// `c_p = ((2p - 1)/(4π))^{1/p}`, so that `‖φ‖_∞ <= c_p ‖φ‖_p`.
pub fn c_p(p: f64) -> f64 {
    ((2.0 * p - 1.0) / (4.0 * PI)).powf(1.0 / p)
}

pub const DELTA0: f64 = 0.25;

impl Constants {
    pub fn new(p: f64) -> Result<Self> {
        Self::with_delta0(p, DELTA0)
    }

    pub fn with_delta0(p: f64, delta0: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::Validation(format!("p = {p} must be at least 2")));
        }
        if !(delta0 > 0.0 && delta0 <= 0.25) {
            return Err(Error::Validation(format!("δ₀ = {delta0} not in (0, 1/4]")));
        }
        let c = c_p(p);
        Ok(Self {
            delta0,
            p,
            c_p: c,
            delta_p: delta0 / c,
        })
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::new(2.0).expect("p = 2")
    }
}

fn check_sup(mu: &BeltramiField) -> Result<f64> {
    let k = mu.sup();
    if !(k < 1.0) {
        return Err(Error::Precondition(format!("‖μ‖_∞ = {k} is not below 1")));
    }
    Ok(k)
}

/// `log((1+k)/(1-k))` with `k = ‖(μ₁-μ₂)/(1-μ̄₂μ₁)‖_∞`, at the given representatives.
pub fn teich_distance(mu1: &BeltramiField, mu2: &BeltramiField) -> Result<f64> {
    check_sup(mu1)?;
    check_sup(mu2)?;
    if mu1.grid().spec() != mu2.grid().spec() {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    let k = mu1
        .values()
        .iter()
        .zip(mu2.values())
        .map(|(a, b)| ((a - b) / (1.0 - b.conj() * a)).norm())
        .fold(0.0, f64::max);
    Ok(((1.0 + k) / (1.0 - k)).ln())
}

/// `(∫_𝔻 (|μ|²/(1-|μ|²))^{p/2} ρ² dA)^{1/p}` at the given representative.
pub fn k_p_functional(mu: &BeltramiField, p: f64) -> Result<NormReport> {
    check_sup(mu)?;
    let g: Vec<f64> = mu
        .values()
        .iter()
        .map(|v| v.norm() / (1.0 - v.norm_sqr()).sqrt())
        .collect();
    hyperbolic_lp_of(mu.grid(), &g, p)
}

/// `(∫_𝔻 (|μ-ν|²/((1-|μ|²)(1-|ν|²)))^{p/2} ρ² dA)^{1/p}`.
pub fn k_p_difference(mu: &BeltramiField, nu: &BeltramiField, p: f64) -> Result<NormReport> {
    check_sup(mu)?;
    check_sup(nu)?;
    if mu.grid().spec() != nu.grid().spec() {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    let g: Vec<f64> = mu
        .values()
        .iter()
        .zip(nu.values())
        .map(|(a, b)| (a - b).norm() / ((1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr())).sqrt())
        .collect();
    hyperbolic_lp_of(mu.grid(), &g, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{DiskGrid, GridSpec};
    use num_complex::Complex64 as C64;
    use std::sync::Arc;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    #[test]
    fn constants_for_p2() {
        let c = Constants::default();
        assert!((c.c_p - 0.48860).abs() < 5e-6, "{}", c.c_p);
        assert!((c.delta_p - 0.51167).abs() < 2e-5, "{}", c.delta_p);
        assert!((c_p(3.0).powi(3) - 5.0 / (4.0 * PI)).abs() < 1e-14);
        assert!(Constants::new(1.5).is_err());
    }

    #[test]
    fn distance_values() {
        let g = grid(64);
        let mu = BeltramiField::constant(g.clone(), C64::new(1.0 / 3.0, 0.0)).unwrap();
        let zero = BeltramiField::zero(g.clone());
        assert!((teich_distance(&mu, &zero).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(teich_distance(&mu, &mu).unwrap(), 0.0);
        let nu =
            BeltramiField::from_fn(g, |z| 0.3 * z * z.conj() - C64::new(0.0, 0.2) * z).unwrap();
        let (a, b) = (
            teich_distance(&mu, &nu).unwrap(),
            teich_distance(&nu, &mu).unwrap(),
        );
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn k_p_of_half_disk_indicator() {
        let g = grid(256);
        let k: f64 = 0.3;
        let mu = BeltramiField::disk_indicator(g.clone(), C64::new(k, 0.0), 0.5).unwrap();
        let got = k_p_functional(&mu, 2.0).unwrap().value;
        let want = (k * k / (1.0 - k * k)).sqrt() * (4.0 * PI / 3.0).sqrt();
        assert!(((got - want) / want).abs() < 1e-3, "{got} {want}");
        assert_eq!(
            k_p_functional(&BeltramiField::zero(g.clone()), 2.0)
                .unwrap()
                .value,
            0.0
        );
        let double = mu.scaled(2.0).unwrap();
        assert!(k_p_functional(&double, 2.0).unwrap().value > got);
        assert!(k_p_difference(&mu, &mu, 3.0).unwrap().value == 0.0);
    }
}
