//! Orbit series solving `γ*φ - φ = ψ` for a hyperbolic `γ` of the exterior disk.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{decay_exponent_fit, sup_norm_weighted, HolomorphicField};
use crate::moebius::{
    classify, halfplane_transfer, HalfPlaneGrid, MobiusKind, MobiusMap, SpherePoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `-Σ_{i=0}^N (γ^i)*ψ`
    AttractingSum,
    /// `Σ_{i=1}^N (γ^-i)*ψ`
    RepellingSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitOptions {
    pub alpha: f64,
    /// Target for `tail / ‖ψ̃‖_{∞,α}`.
    pub rel_tol: f64,
    pub direction: Direction,
    /// Radius of the discs around the fixed points left out of residuals.
    pub exclusion: f64,
    pub max_terms: usize,
    pub halfplane: HalfPlaneGrid,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            rel_tol: 1e-10,
            direction: Direction::AttractingSum,
            exclusion: 0.05,
            max_terms: 10_000,
            halfplane: HalfPlaneGrid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCertificate {
    pub lambda: f64,
    pub alpha: f64,
    pub terms: usize,
    /// `‖ψ̃‖_{∞,α} λ^{α(N+1)} / (1 - λ^α)`.
    pub tail: f64,
    pub psi_norm: f64,
    /// False when the weighted sup of `ψ̃` sits on the edge of the half-plane grid.
    pub psi_bounded: bool,
    pub direction: Direction,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OrbitSeriesResult {
    pub phi: HolomorphicField,
    pub certificate: OrbitCertificate,
    fixed_points: Vec<C64>,
}

impl OrbitSeriesResult {
    pub fn terms(&self) -> usize {
        self.certificate.terms
    }

    pub fn tail(&self) -> f64 {
        self.certificate.tail
    }

    pub fn fixed_points(&self) -> &[C64] {
        &self.fixed_points
    }

    /// Fills in the residual against `ψ`.
    pub fn verify(
        &mut self,
        gamma: &MobiusMap,
        psi: &HolomorphicField,
        exclusion: f64,
    ) -> Result<f64> {
        let r = coboundary_residual(&self.phi, gamma, psi, exclusion)?;
        self.certificate.residual = Some(r);
        Ok(r)
    }

    pub fn certificate_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.certificate)?)
    }
}

/// Smallest `N` with `λ^{α(N+1)} / (1 - λ^α) < rel_tol`.
pub fn terms_for(lambda: f64, alpha: f64, rel_tol: f64) -> usize {
    let q = lambda.powf(alpha);
    let n = ((rel_tol * (1.0 - q)).ln() / q.ln()).floor() as i64;
    // floating guard around exact powers
    let mut n = n.max(0) as usize;
    while n > 0 && q.powi(n as i32) / (1.0 - q) < rel_tol {
        n -= 1;
    }
    while q.powi(n as i32 + 1) / (1.0 - q) >= rel_tol {
        n += 1;
    }
    n
}

fn hyperbolic_data(gamma: &MobiusMap) -> Result<(f64, MobiusMap, Vec<C64>)> {
    let class = classify(gamma);
    if class.kind != MobiusKind::Hyperbolic {
        return Err(Error::Precondition(format!(
            "orbit series needs a hyperbolic map, got {:?}",
            class.kind
        )));
    }
    let lambda = class.multiplier.expect("hyperbolic multiplier");
    let h = class.normalizer.ok_or_else(|| {
        Error::Precondition("hyperbolic map without an exterior normalizer".into())
    })?;
    let fixed = class
        .fixed_points
        .iter()
        .filter_map(|p| SpherePoint::finite(*p))
        .collect();
    Ok((lambda, h, fixed))
}

pub fn orbit_series(
    psi: &HolomorphicField,
    gamma: &MobiusMap,
    opts: &OrbitOptions,
) -> Result<OrbitSeriesResult> {
    if !(opts.alpha > 0.0 && opts.alpha <= 1.0) {
        return Err(Error::Validation(format!(
            "α = {} not in (0,1]",
            opts.alpha
        )));
    }
    if !(opts.rel_tol > 0.0) {
        return Err(Error::Validation("tolerance must be positive".into()));
    }
    let (lambda, _, fixed_points) = hyperbolic_data(gamma)?;
    // the repelling sum runs the attracting sum of γ⁻¹
    let step = match opts.direction {
        Direction::AttractingSum => *gamma,
        Direction::RepellingSum => gamma.inverse(),
    };
    let (_, h, _) = hyperbolic_data(&step)?;
    let transfer = halfplane_transfer(psi, &h, opts.halfplane)?;
    let norm = transfer.sup_weighted(opts.alpha - 2.0);
    let q = lambda.powf(opts.alpha);
    let zero = norm.value == 0.0;
    if !norm.bounded {
        log::warn!("weighted sup of the transferred field is not bounded on the grid");
    }
    let terms = if zero {
        0
    } else if norm.bounded {
        terms_for(lambda, opts.alpha, opts.rel_tol).min(opts.max_terms)
    } else {
        opts.max_terms
    };
    let tail = if zero {
        0.0
    } else if norm.bounded {
        norm.value * q.powi(terms as i32 + 1) / (1.0 - q)
    } else {
        f64::INFINITY
    };
    let (range, sign) = match opts.direction {
        Direction::AttractingSum => (0..=terms, -1.0),
        Direction::RepellingSum => (1..=terms, 1.0),
    };
    let grid = psi.grid().clone();
    let phi = if zero {
        HolomorphicField::zero(grid)
    } else {
        let maps: Vec<MobiusMap> = range.map(|i| step.power(i as i64)).collect();
        let f = psi.evaluator();
        HolomorphicField::with_evaluator(
            grid,
            Arc::new(move |z| {
                let mut acc = C64::new(0.0, 0.0);
                for m in &maps {
                    let d = m.derivative(z);
                    acc += f(m.apply(z)) * d * d;
                }
                acc * sign
            }),
        )
    };
    Ok(OrbitSeriesResult {
        phi,
        certificate: OrbitCertificate {
            lambda,
            alpha: opts.alpha,
            terms,
            tail,
            psi_norm: norm.value,
            psi_bounded: norm.bounded,
            direction: opts.direction,
            residual: None,
        },
        fixed_points,
    })
}

/// `sup ρ^-2 |γ*φ - φ - ψ|` over exterior nodes at distance at least `exclusion`
/// from the fixed points of `γ`.
pub fn coboundary_residual(
    phi: &HolomorphicField,
    gamma: &MobiusMap,
    psi: &HolomorphicField,
    exclusion: f64,
) -> Result<f64> {
    if phi.grid().spec() != psi.grid().spec() {
        return Err(Error::Domain("fields live on different grids".into()));
    }
    let fixed: Vec<C64> = gamma
        .fixed_points()
        .iter()
        .filter_map(|p| p.finite())
        .collect();
    let g = phi.grid();
    let (f, s) = (phi.evaluator(), psi.evaluator());
    let gamma = *gamma;
    let vals: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let z = g.exterior_node_at(i);
            if fixed.iter().any(|p| (z - p).norm() < exclusion) {
                return 0.0;
            }
            let d = gamma.derivative(z);
            let r = f(gamma.apply(z)) * d * d - f(z) - s(z);
            let rho = 2.0 / (z.norm_sqr() - 1.0);
            r.norm() / (rho * rho)
        })
        .collect();
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub pass: bool,
    pub fitted_alpha: f64,
    pub bounded: bool,
}

/// Membership in the α-decay class: fitted exponent at least `α - 0.05` and a
/// weighted sup `ρ^{-2+α}|φ|` that does not grow over the last octave.
pub fn decay_class_check(phi: &HolomorphicField, alpha: f64) -> Result<DecayVerdict> {
    let fit = decay_exponent_fit(phi);
    if fit.alpha.is_infinite() {
        return Ok(DecayVerdict {
            pass: true,
            fitted_alpha: fit.alpha,
            bounded: true,
        });
    }
    let rep = sup_norm_weighted(phi, alpha - 2.0)?;
    let bounded = rep.value.is_finite() && rep.tail.is_finite();
    Ok(DecayVerdict {
        pass: fit.alpha >= alpha - 0.05 && bounded,
        fitted_alpha: fit.alpha,
        bounded,
    })
}
