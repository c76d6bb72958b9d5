//! Upper bound for the distance from the origin to `[μ]` through `n` short steps.

use serde::{Deserialize, Serialize};

use super::Constants;
use crate::bers::bers_projection;
use crate::error::{Error, Result};
use crate::fields::{lp_norm_hyperbolic, sup_norm_weighted, BeltramiField, HolomorphicField};
use crate::solver::{r_translate, SolverConfig};

/// Slack on the pointwise step bound, which holds exactly at the nodes.
const STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionStep {
    pub t_prev: f64,
    pub t: f64,
    /// `‖r_{t_{i-1}μ}(t_i μ)‖_∞`
    pub step_sup: f64,
    pub step_limit: f64,
    pub phi_sup: f64,
    pub phi_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubdivisionTrace {
    pub n: usize,
    /// `3‖μ‖/(2δ₀(1-‖μ‖²))`, which `n` exceeds.
    pub threshold: f64,
    pub mu_sup: f64,
    pub p: f64,
    pub t: Vec<f64>,
    pub steps: Vec<SubdivisionStep>,
    /// `Σ 16 ‖φ_i‖_p`
    pub bound: f64,
    #[serde(skip)]
    pub phis: Vec<HolomorphicField>,
}

pub const MAX_SUBDIVISION_SUP: f64 = 0.5;

/// Smallest integer strictly above the threshold.
pub fn steps_for(mu_sup: f64, delta0: f64) -> (usize, f64) {
    let threshold = 3.0 * mu_sup / (2.0 * delta0 * (1.0 - mu_sup * mu_sup));
    ((threshold.floor() as usize + 1).max(1), threshold)
}

pub fn wp_upper_bound_subdivision(
    mu: &BeltramiField,
    consts: &Constants,
    cfg: &SolverConfig,
) -> Result<SubdivisionTrace> {
    let k = mu.sup();
    if !(k <= MAX_SUBDIVISION_SUP) {
        return Err(Error::Precondition(format!(
            "‖μ‖_∞ = {k:.4} exceeds {MAX_SUBDIVISION_SUP}"
        )));
    }
    let (n, threshold) = steps_for(k, consts.delta0);
    let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut trace = SubdivisionTrace {
        n,
        threshold,
        mu_sup: k,
        p: consts.p,
        t: t.clone(),
        steps: vec![],
        bound: 0.0,
        phis: vec![],
    };
    if k == 0.0 {
        trace.t = vec![0.0, 1.0];
        return Ok(trace);
    }
    let step_limit = k / (n as f64 * (1.0 - k * k));
    for i in 1..=n {
        let target = mu.scaled(t[i])?;
        let step = if i == 1 {
            target
        } else {
            r_translate(&mu.scaled(t[i - 1])?, &target, cfg)?
        };
        let step_sup = step.sup();
        if step_sup > step_limit * (1.0 + STEP_SLACK) {
            return Err(Error::Subdivision {
                step: i,
                norm: step_sup,
                limit: step_limit,
            });
        }
        let phi = bers_projection(&step, cfg)?;
        let phi_sup = sup_norm_weighted(&phi, -2.0)?.value;
        if !(phi_sup < consts.delta0) {
            return Err(Error::Subdivision {
                step: i,
                norm: phi_sup,
                limit: consts.delta0,
            });
        }
        let phi_p = lp_norm_hyperbolic(&phi, consts.p)?.value;
        trace.bound += 16.0 * phi_p;
        trace.steps.push(SubdivisionStep {
            t_prev: t[i - 1],
            t: t[i],
            step_sup,
            step_limit,
            phi_sup,
            phi_p,
        });
        trace.phis.push(phi);
    }
    Ok(trace)
}

/// `‖Φ(μ)‖_p / 128`, below every upper bound when `Φ(μ)` is in the small ball.
pub fn sandwich_lower(phi: &HolomorphicField, p: f64) -> Result<f64> {
    Ok(lp_norm_hyperbolic(phi, p)?.value / 128.0)
}
