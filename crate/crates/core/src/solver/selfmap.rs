//! Normalized quasiconformal self-maps of the unit disk.
//!
//! The coefficient is extended to the sphere by reflection in the unit
//! circle and the resulting map is built in two planar solves:
//!
//! 1. `f1`, the principal solution for `μ` on the disk, conformal outside.
//! 2. With `w0 = f1(0)` and `χ(w) = s/(w - w0)` sending `f1(𝔻*)` into the
//!    unit disk, `f2` is the principal solution for the push-forward `ν` of
//!    the reflected coefficient under `χ ∘ f1`.
//!
//! Then `F = M ∘ f2 ∘ χ ∘ f1` with `M(v) = c/(v - f2(0))` fixes 0, 1, ∞ and
//! commutes with the reflection, so it preserves the disk.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::sync::Arc;

use super::polar::PolarTransforms;
use super::principal::{solve_unit, Normalization, QCSolution, SolveDiagnostics, SolverConfig};
use crate::bers::laurent::LaurentSeries;
use crate::error::{Error, Result};
use crate::fields::{BeltramiField, DiskGrid};

/// Largest tolerated `||F| - 1|` on the unit circle.
pub const SYMMETRY_LIMIT: f64 = 1e-3;

pub(crate) struct SelfMapChain {
    f1: QCSolution,
    f2: QCSolution,
    /// Exterior coefficients of `f2`, `f2(u) = u + Σ b_k u^-k` on `|u| >= 1`.
    b2: Vec<C64>,
    w0: C64,
    s: f64,
    c: C64,
    f2_0: C64,
    /// `f2` is the identity, so the series form holds on the whole plane.
    flat: bool,
}

impl SelfMapChain {
    /// `(H(w), H'(w))` for `H = M ∘ f2 ∘ χ`, holomorphic on `f1(𝔻)`.
    fn outer(&self, w: C64) -> (C64, C64) {
        let t = (w - self.w0) / self.s;
        if self.flat || t.norm_sqr() <= 1.0 {
            let mut p = C64::new(0.0, 0.0);
            let mut dp = C64::new(0.0, 0.0);
            for (k, b) in self.b2.iter().enumerate().rev() {
                p = p * t + b;
                dp = dp * t + b * k as f64;
            }
            // f2(u) - f2(0) = u D,  f2'(u) = 1 - t dp
            let d = 1.0 + t * (p - self.f2_0);
            let fp = 1.0 - t * dp;
            (self.c * t / d, self.c * fp / (self.s * d * d))
        } else {
            let u = t.inv();
            let v = self.f2.eval(u) - self.f2_0;
            let (fp, _) = self.f2.derivatives(u);
            (self.c / v, self.c * fp * u * u / (self.s * v * v))
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        let r2 = z.norm_sqr();
        if r2 > 1.0 {
            // reflection symmetry
            let inner = self.outer(self.f1.eval(z.conj().inv())).0;
            return inner.conj().inv();
        }
        self.outer(self.f1.eval(z)).0
    }

    pub fn derivatives(&self, z: C64) -> (C64, C64) {
        let (_, h) = self.outer(self.f1.eval(z));
        let (a, b) = self.f1.derivatives(z);
        (h * a, h * b)
    }
}

fn point_in_polygon(poly: &[C64], p: C64) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.im > p.im) != (b.im > p.im)
            && p.re < (b.re - a.re) * (p.im - a.im) / (b.im - a.im) + a.re
        {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Newton solve of `f1(z) = w` on `|z| >= 1`.
fn exterior_preimage(series: &LaurentSeries, w: C64, guess: C64) -> Option<C64> {
    let mut z = guess;
    for _ in 0..60 {
        let d = series.derivatives(z);
        let step = (d[0] - w) / d[1];
        let mut next = z - step;
        if next.norm() < 1.0 {
            next = next / next.norm();
        }
        let moved = (next - z).norm();
        z = next;
        if moved < 1e-14 * z.norm() {
            return Some(z);
        }
    }
    ((series.eval(z) - w).norm() < 1e-9).then_some(z)
}

/// The reflected coefficient carried to the `u`-chart by `χ ∘ f1`.
struct Pushforward<'a> {
    mu: &'a BeltramiField,
    ext1: &'a LaurentSeries,
    boundary: &'a [C64],
    w0: C64,
    s: f64,
    rmin: f64,
    rmax: f64,
}

impl Pushforward<'_> {
    /// `None` when `u` falls in `χ(f1(𝔻))`, where the coefficient vanishes.
    fn preimage(&self, u: C64, guess: Option<C64>) -> Result<Option<C64>> {
        let w = self.w0 + self.s / u;
        let d = self.s / u.norm();
        let outside = d > self.rmax || (d >= self.rmin && !point_in_polygon(self.boundary, w));
        if !outside {
            return Ok(None);
        }
        let nb = self.boundary.len();
        let guess = guess.unwrap_or_else(|| {
            if d > 2.0 * self.rmax {
                w - self.w0
            } else {
                let (k, _) = self
                    .boundary
                    .iter()
                    .enumerate()
                    .map(|(k, b)| (k, (b - w).norm_sqr()))
                    .fold(
                        (0, f64::INFINITY),
                        |acc, x| if x.1 < acc.1 { x } else { acc },
                    );
                C64::from_polar(
                    1.0 + (self.boundary[k] - w).norm(),
                    TAU * k as f64 / nb as f64,
                )
            }
        });
        exterior_preimage(self.ext1, w, guess)
            .map(Some)
            .ok_or_else(|| Error::singular(w, "no exterior preimage under f1"))
    }

    fn value(&self, u: C64, z: C64) -> C64 {
        let rot = (z / z.conj()).powi(2);
        let mu_hat = self.mu.eval(z.conj().inv()).conj() * rot;
        let fp = self.ext1.derivatives(z)[1];
        mu_hat * (fp / fp.conj()) * (u / u.conj()).powi(2)
    }

    /// Node samples; cells cut by the jump curve get sub-cell averages.
    fn sample(&self, grid: &DiskGrid) -> Result<Vec<C64>> {
        let m = grid.angles;
        let nr = grid.rings();
        // One angular column at a time so each Newton solve starts from the
        // previous ring's root.
        let columns: Vec<Result<Vec<Option<C64>>>> = (0..m)
            .into_par_iter()
            .map(|a| {
                let mut out = vec![None; nr];
                let mut prev = None;
                for (j, slot) in out.iter_mut().enumerate() {
                    let z = self.preimage(grid.node(j, a), prev)?;
                    *slot = z;
                    prev = z;
                }
                Ok(out)
            })
            .collect();
        let mut roots = vec![None; grid.len()];
        for (a, col) in columns.into_iter().enumerate() {
            for (j, z) in col?.into_iter().enumerate() {
                roots[j * m + a] = z;
            }
        }
        let edges = grid.edges();
        let dtheta = TAU / m as f64;
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let (j, a) = (i / m, i % m);
                let here = roots[i].is_some();
                let mut cut = false;
                for (dj, da) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let jj = j as i64 + dj;
                    if jj < 0 || jj >= nr as i64 {
                        continue;
                    }
                    let aa = (a as i64 + da).rem_euclid(m as i64) as usize;
                    if roots[jj as usize * m + aa].is_some() != here {
                        cut = true;
                    }
                }
                let u = grid.node_at(i);
                if !cut {
                    return Ok(roots[i].map_or(C64::new(0.0, 0.0), |z| self.value(u, z)));
                }
                const SUB: usize = 4;
                let (r0, r1) = (edges[j], edges[j + 1]);
                let mut acc = C64::new(0.0, 0.0);
                let mut wsum = 0.0;
                for p in 0..SUB {
                    let r = r0 + (r1 - r0) * (p as f64 + 0.5) / SUB as f64;
                    for q in 0..SUB {
                        let th = grid.theta(a) + dtheta * ((q as f64 + 0.5) / SUB as f64 - 0.5);
                        let v = C64::from_polar(r, th);
                        if let Some(z) = self.preimage(v, roots[i])? {
                            acc += self.value(v, z) * r;
                        }
                        wsum += r;
                    }
                }
                Ok(acc / wsum)
            })
            .collect()
    }
}

/// The self-map of the disk with dilatation `μ`, fixing 0 and 1.
pub fn solve_selfmap(mu: &BeltramiField, cfg: &SolverConfig) -> Result<QCSolution> {
    let grid = mu.grid().clone();
    let ops = PolarTransforms::new(grid.clone());
    let raw1 = solve_unit(&ops, mu.values(), cfg)?;
    let d1 = raw1.diagnostics.clone();
    let w0 = raw1.origin;
    let f1 = QCSolution::from_raw(grid.clone(), raw1, 1.0, Normalization::Principal);
    let ext1 = f1
        .exterior_laurent()
        .expect("principal solutions carry a series")
        .clone();

    let m = grid.angles;
    let nb = 4 * m;
    let boundary: Vec<C64> = (0..nb)
        .into_par_iter()
        .map(|j| ext1.eval(C64::from_polar(1.0, TAU * j as f64 / nb as f64)))
        .collect();
    let dist: Vec<f64> = boundary.iter().map(|w| (w - w0).norm()).collect();
    let rmin = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let rmax = dist.iter().copied().fold(0.0, f64::max);
    if !(rmin > 0.0) {
        return Err(Error::singular(
            w0,
            "f(0) lies on the image of the unit circle",
        ));
    }
    let s = rmin * (1.0 - 1e-3);

    let push = Pushforward {
        mu,
        ext1: &ext1,
        boundary: &boundary,
        w0,
        s,
        rmin,
        rmax,
    };
    let nu = push.sample(&grid)?;
    let raw2 = solve_unit(&ops, &nu, cfg)?;
    let d2 = raw2.diagnostics.clone();
    let f2_0 = raw2.origin;
    let f2 = QCSolution::from_raw(grid.clone(), raw2, 1.0, Normalization::Principal);
    let b2 = f2
        .exterior_laurent()
        .expect("principal solutions carry a series")
        .coeffs
        .clone();

    let mut chain = SelfMapChain {
        f1,
        f2,
        b2,
        w0,
        s,
        c: C64::new(1.0, 0.0),
        f2_0,
        flat: nu.iter().all(|v| *v == C64::new(0.0, 0.0)),
    };
    let w1 = ext1.eval(C64::new(1.0, 0.0));
    chain.c = chain.outer(w1).0.inv();

    let step = (nb / 512).max(1);
    let residual = (0..nb)
        .step_by(step)
        .map(|j| (chain.outer(boundary[j]).0.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    if !(residual < SYMMETRY_LIMIT) {
        return Err(Error::Symmetry {
            residual,
            limit: SYMMETRY_LIMIT,
        });
    }

    let n = grid.len();
    let parts: Vec<(C64, C64, C64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (fv, h) = chain.outer(chain.f1.values()[i]);
            (fv, h * chain.f1.df()[i], h * chain.f1.dbar()[i])
        })
        .collect();
    let mut f = Vec::with_capacity(n);
    let mut df = Vec::with_capacity(n);
    let mut dbar = Vec::with_capacity(n);
    for (a, b, c) in parts {
        f.push(a);
        df.push(b);
        dbar.push(c);
    }
    let mut trace = d1.residual_trace;
    trace.extend(d2.residual_trace);
    let diagnostics = SolveDiagnostics {
        iterations: d1.iterations + d2.iterations,
        residual_trace: trace,
        relaxation: d1.relaxation.min(d2.relaxation),
        converged: true,
        symmetry_residual: Some(residual),
    };
    let sol = QCSolution::from_chain(grid, Arc::new(chain), f, df, dbar, diagnostics);
    if let Some((i, _)) = sol
        .jacobian()
        .iter()
        .enumerate()
        .find(|(_, j)| !(**j > 0.0))
    {
        return Err(Error::singular(sol.node(i), "Jacobian is not positive"));
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    #[test]
    fn zero_gives_identity() {
        let g = grid(64);
        let sol = solve_selfmap(&BeltramiField::zero(g.clone()), &SolverConfig::default()).unwrap();
        for i in (0..g.len()).step_by(31) {
            let e = (sol.values()[i] - g.node_at(i)).norm();
            assert!(e < 1e-15, "{i} {e}");
        }
    }

    #[test]
    fn radial_coefficient_fixes_points() {
        let g = grid(256);
        let mu = BeltramiField::from_fn(g.clone(), |z| C64::new(0.3 * (1.0 - z.norm_sqr()), 0.0))
            .unwrap();
        let sol = solve_selfmap(&mu, &SolverConfig::default()).unwrap();
        assert!(sol.eval(C64::new(0.0, 0.0)).norm() < 1e-8);
        assert!((sol.eval(C64::new(1.0, 0.0)) - 1.0).norm() < 1e-3);
        assert!(sol.diagnostics.symmetry_residual.unwrap() < 1e-4);
        for i in 0..g.len() {
            assert!(sol.values()[i].norm() < 1.0 + 1e-6);
        }
        let dil = sol.dilatation().unwrap();
        let err = dil
            .values()
            .iter()
            .zip(mu.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn non_symmetric_coefficient() {
        let g = grid(256);
        let mu =
            BeltramiField::from_fn(g.clone(), |z| (0.35 * z + 0.1) * (1.0 - z.norm_sqr())).unwrap();
        let sol = solve_selfmap(&mu, &SolverConfig::default()).unwrap();
        assert!(sol.diagnostics.symmetry_residual.unwrap() < 2e-4);
        let z = C64::new(0.3, -0.4);
        let w = sol.eval(z);
        assert!((sol.invert(w, w).unwrap() - z).norm() < 1e-8);
    }

    #[test]
    fn boundary_jump_needs_finer_rings() {
        // A coefficient that does not vanish on the circle puts a jump inside
        // the second solve; the residual falls with the radial spacing.
        let f = |z: C64| 0.35 * z * (1.0 - z.norm_sqr()) + 0.1;
        let coarse = grid(128);
        let mu = BeltramiField::from_fn(coarse, f).unwrap();
        assert!(matches!(
            solve_selfmap(&mu, &SolverConfig::default()),
            Err(Error::Symmetry { .. })
        ));
        let mut spec = GridSpec::default().with_angles(128);
        spec.per_octave = 32;
        spec.inner_rings = 64;
        let fine = Arc::new(spec.build().unwrap());
        let mu = BeltramiField::from_fn(fine, f).unwrap();
        let sol = solve_selfmap(&mu, &SolverConfig::default()).unwrap();
        assert!(sol.diagnostics.symmetry_residual.unwrap() < 1e-3);
    }

    #[test]
    fn polygon_membership() {
        let sq = [
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
        ];
        assert!(point_in_polygon(&sq, C64::new(0.5, 0.5)));
        assert!(!point_in_polygon(&sq, C64::new(1.5, 0.5)));
    }
}
