use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::polar::PolarTransforms;
use super::selfmap::SelfMapChain;
use crate::bers::laurent::LaurentSeries;
use crate::error::{Error, Result};
use crate::fields::{interp, BeltramiField, DiskGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop when the L² change of `∂f - 1` between sweeps drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Fixed relaxation factor; `None` picks 1 up to `‖μ‖ = 0.5` and 0.7 above.
    pub relaxation: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            relaxation: None,
        }
    }
}

pub const MAX_DILATATION: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub residual_trace: Vec<f64>,
    pub relaxation: f64,
    pub converged: bool,
    /// `max ||F(e^{iθ})| - 1|` for self-maps of the disk.
    pub symmetry_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `f(z) = z + O(1/z)` at infinity.
    Principal,
    /// `f: 𝔻 → 𝔻` with `f(0) = 0`, `f(1) = 1`.
    Selfmap01,
    /// Principal, holomorphic on the exterior disk.
    ConformalExterior,
}

/// Output of one Neumann solve on the unit disk.
#[derive(Debug, Clone)]
pub(crate) struct RawSolution {
    pub f: Vec<C64>,
    /// `∂f - 1`
    pub g: Vec<C64>,
    /// `∂̄f`
    pub omega: Vec<C64>,
    /// `f(z) - z` on `|z| >= 1`
    pub exterior: LaurentSeries,
    pub origin: C64,
    pub diagnostics: SolveDiagnostics,
}

fn l2_change(grid: &DiskGrid, a: &[C64], b: &[C64]) -> f64 {
    let m = grid.angles;
    (0..grid.rings())
        .map(|j| {
            let s: f64 = (0..m)
                .map(|q| (a[j * m + q] - b[j * m + q]).norm_sqr())
                .sum();
            s * grid.weight(j)
        })
        .sum::<f64>()
        .sqrt()
}

/// Principal solution for a coefficient supported in the closed unit disk,
/// given by its node samples.
pub(crate) fn solve_unit(
    ops: &PolarTransforms,
    mu: &[C64],
    cfg: &SolverConfig,
) -> Result<RawSolution> {
    let grid = ops.grid().clone();
    let sup = mu.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if sup > MAX_DILATATION + 1e-12 {
        return Err(Error::Precondition(format!(
            "sup|mu| = {sup:.4} exceeds the solver limit {MAX_DILATATION}"
        )));
    }
    let tau = cfg.relaxation.unwrap_or(if sup <= 0.5 { 1.0 } else { 0.7 });
    let n = grid.len();
    let mut g = vec![C64::new(0.0, 0.0); n];
    let mut trace = Vec::new();
    let mut converged = sup == 0.0;
    let mut iterations = 0;
    let mut omega: Vec<C64> = mu.to_vec();
    while !converged && iterations < cfg.max_iter {
        iterations += 1;
        let s = ops.beurling(&omega);
        let change = l2_change(&grid, &s, &g) * tau;
        g.par_iter_mut()
            .zip(&s)
            .for_each(|(gi, si)| *gi += (si - *gi) * tau);
        omega
            .par_iter_mut()
            .zip(mu.par_iter().zip(&g))
            .for_each(|(w, (m, gi))| *w = m * (1.0 + gi));
        trace.push(change);
        if !change.is_finite() {
            break;
        }
        converged = change < cfg.tol;
    }
    if !converged {
        return Err(Error::Convergence {
            iterations,
            last_change: trace.last().copied().unwrap_or(f64::NAN),
            trace,
        });
    }
    let modes = ops.forward(&omega);
    let c = ops.inverse(ops.cauchy_modes(&modes));
    let f: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|i| grid.node_at(i) + c[i])
        .collect();
    let origin = ops.cauchy_at_origin(&modes);
    let mut coeffs = ops.exterior_coefficients(&modes);
    coeffs[0] = C64::new(0.0, 0.0);
    Ok(RawSolution {
        f,
        g,
        omega,
        exterior: LaurentSeries::map(coeffs),
        origin,
        diagnostics: SolveDiagnostics {
            iterations,
            residual_trace: trace,
            relaxation: tau,
            converged,
            symmetry_residual: None,
        },
    })
}

/// Grid-sampled quasiconformal map with its partial derivatives.
#[derive(Clone)]
pub struct QCSolution {
    grid: Arc<DiskGrid>,
    /// Nodes are `scale · grid nodes`.
    scale: f64,
    normalization: Normalization,
    f: Vec<C64>,
    df: Vec<C64>,
    dbar: Vec<C64>,
    exterior: Option<LaurentSeries>,
    chain: Option<Arc<SelfMapChain>>,
    pub diagnostics: SolveDiagnostics,
}

impl std::fmt::Debug for QCSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QCSolution")
            .field("normalization", &self.normalization)
            .field("scale", &self.scale)
            .field("nodes", &self.f.len())
            .field("iterations", &self.diagnostics.iterations)
            .finish()
    }
}

impl QCSolution {
    pub(crate) fn from_raw(
        grid: Arc<DiskGrid>,
        raw: RawSolution,
        scale: f64,
        normalization: Normalization,
    ) -> Self {
        let df = raw.g.iter().map(|g| 1.0 + g).collect();
        let (f, exterior) = if scale == 1.0 {
            (raw.f, raw.exterior)
        } else {
            // f(z) = R F(z/R)
            let coeffs = raw
                .exterior
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, b)| b * scale.powi(k as i32 + 1))
                .collect();
            (
                raw.f.iter().map(|v| v * scale).collect(),
                LaurentSeries::map(coeffs),
            )
        };
        Self {
            grid,
            scale,
            normalization,
            f,
            df,
            dbar: raw.omega,
            exterior: Some(exterior),
            chain: None,
            diagnostics: raw.diagnostics,
        }
    }

    pub(crate) fn from_chain(
        grid: Arc<DiskGrid>,
        chain: Arc<SelfMapChain>,
        f: Vec<C64>,
        df: Vec<C64>,
        dbar: Vec<C64>,
        diagnostics: SolveDiagnostics,
    ) -> Self {
        Self {
            grid,
            scale: 1.0,
            normalization: Normalization::Selfmap01,
            f,
            df,
            dbar,
            exterior: None,
            chain: Some(chain),
            diagnostics,
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn node(&self, i: usize) -> C64 {
        self.grid.node_at(i) * self.scale
    }

    pub fn values(&self) -> &[C64] {
        &self.f
    }

    pub fn df(&self) -> &[C64] {
        &self.df
    }

    pub fn dbar(&self) -> &[C64] {
        &self.dbar
    }

    pub fn jacobian(&self) -> Vec<f64> {
        self.df
            .iter()
            .zip(&self.dbar)
            .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
            .collect()
    }

    /// `f - z` on the exterior of the support disk, for principal maps.
    pub fn exterior_laurent(&self) -> Option<&LaurentSeries> {
        self.exterior.as_ref()
    }

    pub fn eval(&self, z: C64) -> C64 {
        if let Some(ch) = &self.chain {
            return ch.eval(z);
        }
        let zeta = z / self.scale;
        if zeta.norm_sqr() >= 1.0 {
            if let Some(s) = &self.exterior {
                return s.eval(z);
            }
        }
        interp::polar(&self.grid, &self.f, zeta)
    }

    /// `(∂f, ∂̄f)` at `z`.
    pub fn derivatives(&self, z: C64) -> (C64, C64) {
        if let Some(ch) = &self.chain {
            return ch.derivatives(z);
        }
        let zeta = z / self.scale;
        if zeta.norm_sqr() >= 1.0 {
            if let Some(s) = &self.exterior {
                return (s.derivatives(z)[1], C64::new(0.0, 0.0));
            }
        }
        (
            interp::polar(&self.grid, &self.df, zeta),
            interp::polar(&self.grid, &self.dbar, zeta),
        )
    }

    /// Solves `f(z) = w` by Newton's method on the real-linear differential.
    pub fn invert(&self, w: C64, guess: C64) -> Result<C64> {
        let mut z = guess;
        let mut best = (f64::INFINITY, z);
        for _ in 0..80 {
            let r = self.eval(z) - w;
            let rn = r.norm();
            if rn < best.0 {
                best = (rn, z);
            }
            if rn < 1e-12 * (1.0 + w.norm()) {
                return Ok(z);
            }
            let (a, b) = self.derivatives(z);
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det > 1e-14) {
                return Err(Error::singular(z, "Jacobian vanishes during inversion"));
            }
            let mut step = -(a.conj() * r - b * r.conj()) / det;
            if self.normalization == Normalization::Selfmap01 {
                while (z + step).norm() >= 1.0 && step.norm() > 1e-16 {
                    step *= 0.5;
                }
            }
            z += step;
            if step.norm() < 1e-15 {
                break;
            }
        }
        if best.0 < 1e-8 * (1.0 + w.norm()) {
            Ok(best.1)
        } else {
            Err(Error::singular(
                w,
                format!("inversion stalled with residual {:.2e}", best.0),
            ))
        }
    }

    /// Complex dilatation `∂̄f/∂f` at the nodes.
    pub fn dilatation(&self) -> Result<BeltramiField> {
        if self.scale != 1.0 {
            return Err(Error::Unsupported(
                "dilatation of a rescaled solution".into(),
            ));
        }
        let mut vals = Vec::with_capacity(self.f.len());
        for (i, (a, b)) in self.df.iter().zip(&self.dbar).enumerate() {
            if a.norm() < 1e-12 {
                return Err(Error::singular(self.node(i), "∂f vanishes"));
            }
            vals.push(b / a);
        }
        BeltramiField::from_samples(self.grid.clone(), vals)
    }
}

fn check_orientation(sol: &QCSolution) -> Result<()> {
    if let Some((i, _)) = sol
        .jacobian()
        .iter()
        .enumerate()
        .find(|(_, j)| !(**j > 0.0))
    {
        return Err(Error::singular(sol.node(i), "Jacobian is not positive"));
    }
    Ok(())
}

/// Principal solution for `μ̂` supported in `|z| <= radius` (at most 2),
/// sampled as `μ̂(radius · node)`.
pub fn solve_principal_fn(
    grid: Arc<DiskGrid>,
    radius: f64,
    mu: impl Fn(C64) -> C64 + Sync,
    cfg: &SolverConfig,
) -> Result<QCSolution> {
    if !(radius > 0.0 && radius <= 2.0) {
        return Err(Error::Domain(format!(
            "support radius {radius} must lie in (0, 2]"
        )));
    }
    let samples: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|i| mu(grid.node_at(i) * radius))
        .collect();
    let ops = PolarTransforms::new(grid.clone());
    let raw = solve_unit(&ops, &samples, cfg)?;
    let sol = QCSolution::from_raw(grid, raw, radius, Normalization::Principal);
    check_orientation(&sol)?;
    Ok(sol)
}

/// Principal solution for a coefficient on the unit disk, extended by zero.
pub fn solve_principal(mu: &BeltramiField, cfg: &SolverConfig) -> Result<QCSolution> {
    let ops = PolarTransforms::new(mu.grid().clone());
    let raw = solve_unit(&ops, mu.values(), cfg)?;
    let sol = QCSolution::from_raw(mu.grid().clone(), raw, 1.0, Normalization::Principal);
    check_orientation(&sol)?;
    Ok(sol)
}

/// The map `f_μ`: dilatation μ on the disk, conformal outside, `f(z) = z + O(1/z)`.
pub fn conformal_exterior(mu: &BeltramiField, cfg: &SolverConfig) -> Result<QCSolution> {
    let mut sol = solve_principal(mu, cfg)?;
    sol.normalization = Normalization::ConformalExterior;
    Ok(sol)
}

/// Winding number of `f` around `f(0)` along `|z| = radius` (exterior maps).
pub fn exterior_winding(sol: &QCSolution, radius: f64, samples: usize) -> i64 {
    let center = sol.eval(C64::new(0.0, 0.0));
    let mut total = 0.0;
    let mut prev = sol.eval(C64::new(radius, 0.0)) - center;
    for j in 1..=samples {
        let z = C64::from_polar(radius, std::f64::consts::TAU * j as f64 / samples as f64);
        let cur = sol.eval(z) - center;
        total += (cur / prev).arg();
        prev = cur;
    }
    (total / std::f64::consts::TAU).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    #[test]
    fn zero_coefficient_gives_identity() {
        let g = grid(64);
        let sol =
            solve_principal(&BeltramiField::zero(g.clone()), &SolverConfig::default()).unwrap();
        assert_eq!(sol.diagnostics.iterations, 0);
        for i in (0..g.len()).step_by(97) {
            assert!((sol.values()[i] - g.node_at(i)).norm() < 1e-15);
            assert!((sol.df()[i] - 1.0).norm() < 1e-15);
            assert!(sol.dbar()[i].norm() < 1e-15);
        }
    }

    #[test]
    fn constant_coefficient_exact() {
        let g = grid(128);
        let k = 0.3;
        let mu = BeltramiField::constant(g.clone(), C64::new(k, 0.0)).unwrap();
        let sol = solve_principal(&mu, &SolverConfig::default()).unwrap();
        let err = (0..g.len())
            .map(|i| {
                let z = g.node_at(i);
                (sol.values()[i] - (z + k * z.conj())).norm()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let z = C64::new(1.4, -0.6);
        assert!((sol.eval(z) - (z + k / z)).norm() < 1e-12);
        assert_eq!(exterior_winding(&sol, 1.2, 512), 1);
    }

    #[test]
    fn radial_bump_round_trip() {
        let g = grid(128);
        let k = 0.3;
        let mu =
            BeltramiField::from_fn(g.clone(), move |z| C64::new(k * (1.0 - z.norm_sqr()), 0.0))
                .unwrap();
        let sol = solve_principal(&mu, &SolverConfig::default()).unwrap();
        let dil = sol.dilatation().unwrap();
        let inner = g.rings_within(0.9);
        let err = (0..inner * g.angles)
            .map(|i| (dil.values()[i] - mu.values()[i]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn rescaled_support() {
        let g = grid(128);
        let k = 0.25;
        let sol = solve_principal_fn(
            g,
            1.5,
            move |z| {
                if z.norm() <= 1.5 {
                    C64::new(k, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            },
            &SolverConfig::default(),
        )
        .unwrap();
        // z + k R^2 / z outside, z + k z̄ inside.
        let z = C64::new(2.0, 1.0);
        assert!((sol.eval(z) - (z + k * 2.25 / z)).norm() < 1e-11);
        let z = C64::new(0.3, -0.9);
        assert!((sol.eval(z) - (z + k * z.conj())).norm() < 1e-6);
        assert!(solve_principal_fn(
            grid(64),
            2.5,
            |_| C64::new(0.0, 0.0),
            &SolverConfig::default()
        )
        .is_err());
    }

    #[test]
    fn too_large_dilatation_rejected() {
        let g = grid(64);
        let mu = BeltramiField::constant(g, C64::new(0.97, 0.0)).unwrap();
        assert!(matches!(
            solve_principal(&mu, &SolverConfig::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_trace() {
        let g = grid(64);
        let mu = BeltramiField::from_fn(g, |z| C64::new(0.6 * (1.0 - z.norm_sqr()), 0.3 * z.im))
            .unwrap();
        let cfg = SolverConfig {
            max_iter: 3,
            ..Default::default()
        };
        match solve_principal(&mu, &cfg) {
            Err(Error::Convergence {
                iterations, trace, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inversion_recovers_points() {
        let g = grid(128);
        let mu = BeltramiField::from_fn(g, |z| 0.2 * z * (1.0 - z.norm_sqr())).unwrap();
        let sol = solve_principal(&mu, &SolverConfig::default()).unwrap();
        for z in [C64::new(0.2, 0.1), C64::new(-0.5, 0.6), C64::new(1.3, 0.2)] {
            let w = sol.eval(z);
            let back = sol.invert(w, w).unwrap();
            assert!((back - z).norm() < 1e-9, "{z} -> {back}");
        }
    }
}
