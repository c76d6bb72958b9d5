use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::field::{BeltramiField, HolomorphicField};
use super::grid::DiskGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    SupHyp,
    SupHypAlpha { alpha: f64 },
    LpHyp { p: f64 },
    Linf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub kind: NormKind,
    /// `1 - r_max` of the grid used.
    pub cutoff: f64,
    /// Estimated contribution of the region beyond the cutoff; infinite if the
    /// ring contributions do not decay.
    pub tail: f64,
    /// Ring (counted from the centre) where a supremum is attained.
    pub argmax_ring: Option<usize>,
    /// Per-ring maxima (sup norms) or per-ring integrals (Lp norms).
    pub ring_profile: Vec<f64>,
}

#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Beltrami(&'a BeltramiField),
    Holomorphic(&'a HolomorphicField),
}

impl<'a> From<&'a BeltramiField> for FieldRef<'a> {
    fn from(f: &'a BeltramiField) -> Self {
        FieldRef::Beltrami(f)
    }
}

impl<'a> From<&'a HolomorphicField> for FieldRef<'a> {
    fn from(f: &'a HolomorphicField) -> Self {
        FieldRef::Holomorphic(f)
    }
}

/// Disk density at a node of radius `r`.
#[inline]
pub fn rho_disk(r: f64) -> f64 {
    2.0 / (1.0 - r * r)
}

/// Exterior density at the reflected node `1/r`, i.e. `2r²/(1-r²)`.
#[inline]
pub fn rho_exterior_reflected(r: f64) -> f64 {
    2.0 * r * r / (1.0 - r * r)
}

/// Radius of the extra probe ring used for fields with an evaluator.
const FAR_PROBE: f64 = 1.0e3;

/// Weighted supremum `sup ρ^w |field|`.
///
/// Beltrami fields take `w >= 0` (`w = 0` is the plain sup); holomorphic
/// fields take `w` in `[-2, -1]`, i.e. `-2 + α`.
pub fn sup_norm_weighted<'a>(field: impl Into<FieldRef<'a>>, w: f64) -> Result<NormReport> {
    match field.into() {
        FieldRef::Beltrami(mu) => {
            if w < 0.0 {
                return Err(Error::Domain(format!(
                    "weight {w} does not apply to a Beltrami field"
                )));
            }
            let g = mu.grid();
            let profile = ring_reduce(g, |j, a| {
                rho_disk(g.radii()[j]).powf(w) * mu.values()[g.index(j, a)].norm()
            });
            let kind = if w == 0.0 {
                NormKind::Linf
            } else {
                NormKind::SupHypAlpha { alpha: w }
            };
            Ok(sup_report(g, profile, kind))
        }
        FieldRef::Holomorphic(phi) => {
            if !(-2.0..=-1.0).contains(&w) {
                return Err(Error::Domain(format!(
                    "weight {w} does not apply to a holomorphic field"
                )));
            }
            let g = phi.grid();
            let profile = ring_reduce(g, |j, a| {
                rho_exterior_reflected(g.radii()[j]).powf(w) * phi.values()[g.index(j, a)].norm()
            });
            let kind = if w == -2.0 {
                NormKind::SupHyp
            } else {
                NormKind::SupHypAlpha { alpha: w + 2.0 }
            };
            let mut rep = sup_report(g, profile, kind);
            if let Some(lim) = limit_at_infinity(phi, w) {
                if lim > rep.value {
                    rep.value = lim;
                    rep.argmax_ring = None;
                }
            }
            if phi.has_evaluator() {
                let m = g.angles;
                let far = (0..m)
                    .map(|a| {
                        let z = C64::from_polar(FAR_PROBE, g.theta(a));
                        (2.0 / (FAR_PROBE * FAR_PROBE - 1.0)).powf(w) * phi.eval(z).norm()
                    })
                    .fold(0.0, f64::max);
                if far > rep.value {
                    rep.value = far;
                    rep.argmax_ring = None;
                }
            }
            Ok(rep)
        }
    }
}

/// `lim ρ^w |φ|` at infinity for a series field, where it is attained for `w = -2`.
fn limit_at_infinity(phi: &HolomorphicField, w: f64) -> Option<f64> {
    let s = phi.laurent()?;
    let scale = s.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if (0..4).any(|k| s.coeff(k).norm() > 1e-14 * scale) {
        return Some(f64::INFINITY);
    }
    Some(if w == -2.0 {
        0.25 * s.coeff(4).norm()
    } else {
        0.0
    })
}

/// Weighted supremum of a holomorphic field refined off the grid: the best
/// nodes seed a compass search on the evaluator.
pub fn sup_norm_refined(phi: &HolomorphicField, w: f64) -> Result<f64> {
    let base = sup_norm_weighted(phi, w)?;
    if !phi.has_evaluator() {
        return Ok(base.value);
    }
    let f = phi.evaluator();
    let weighted = move |z: C64| -> f64 {
        let r2 = z.norm_sqr();
        if !(r2 > 1.0) || !r2.is_finite() {
            return f64::NEG_INFINITY;
        }
        (2.0 / (r2 - 1.0)).powf(w) * f(z).norm()
    };
    let g = phi.grid();
    let mut seeds: Vec<(f64, C64)> = (0..g.len())
        .map(|i| {
            let z = g.exterior_node_at(i);
            (weighted(z), z)
        })
        .chain(
            [FAR_PROBE, 1e8]
                .iter()
                .flat_map(|&r| (0..g.angles).map(move |a| C64::from_polar(r, g.theta(a))))
                .map(|z| (weighted(z), z)),
        )
        .filter(|(v, _)| v.is_finite())
        .collect();
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = base.value;
    for &(_, z0) in seeds.iter().take(4) {
        best = best.max(compass_max(
            &weighted,
            z0,
            0.5 * (z0.norm() - 1.0).min(0.1 * z0.norm()),
        ));
    }
    Ok(best)
}

/// Derivative-free local maximization in the plane.
pub fn compass_max(f: &dyn Fn(C64) -> f64, start: C64, step: f64) -> f64 {
    let dirs: Vec<C64> = (0..8)
        .map(|k| C64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * k as f64))
        .collect();
    let (mut z, mut v, mut h) = (start, f(start), step);
    while h > 1e-13 * (1.0 + z.norm()) {
        let mut moved = false;
        for d in &dirs {
            let c = z + d * h;
            let fc = f(c);
            if fc > v {
                z = c;
                v = fc;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    v
}

fn ring_reduce(g: &DiskGrid, f: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    (0..g.rings())
        .into_par_iter()
        .map(|j| (0..g.angles).map(|a| f(j, a)).fold(0.0, f64::max))
        .collect()
}

fn ring_sum(g: &DiskGrid, f: impl Fn(usize, usize) -> f64 + Sync) -> Vec<f64> {
    (0..g.rings())
        .into_par_iter()
        .map(|j| (0..g.angles).map(|a| f(j, a)).sum())
        .collect()
}

fn sup_report(g: &DiskGrid, profile: Vec<f64>, kind: NormKind) -> NormReport {
    let (mut best, mut arg) = (0.0, None);
    for (j, &v) in profile.iter().enumerate() {
        if v > best || arg.is_none() {
            best = v;
            arg = Some(j);
        }
    }
    // A sup that keeps growing over the last octave is flagged as unbounded.
    let n = profile.len();
    let last = g.octave_start(g.k - 1).min(n - 1);
    let prev = g.octave_start(g.k.saturating_sub(2)).min(last);
    let max_last = profile[last..].iter().cloned().fold(0.0, f64::max);
    let max_prev = profile[prev..last].iter().cloned().fold(0.0, f64::max);
    let tail = if max_last > max_prev * (1.0 + 1e-9) && max_last > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    NormReport {
        value: best,
        kind,
        cutoff: 1.0 - g.r_max(),
        tail,
        argmax_ring: arg,
        ring_profile: profile,
    }
}

/// Hyperbolic `L^p` norm: `∫_𝔻 |μ|^p ρ² dA` or `∫_{𝔻*} ρ^{2-2p} |φ|^p dA`, to the power `1/p`.
pub fn lp_norm_hyperbolic<'a>(field: impl Into<FieldRef<'a>>, p: f64) -> Result<NormReport> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p = {p} must be at least 1")));
    }
    match field.into() {
        FieldRef::Beltrami(mu) => {
            let g = mu.grid();
            let rings = ring_sum(g, |j, a| {
                let r = g.radii()[j];
                let rho = rho_disk(r);
                mu.values()[g.index(j, a)].norm().powf(p) * rho * rho * g.weight(j)
            });
            Ok(integral_report(g, rings, p))
        }
        FieldRef::Holomorphic(phi) => {
            let g = phi.grid();
            let rings = ring_sum(g, |j, a| {
                let r = g.radii()[j];
                rho_exterior_reflected(r).powf(2.0 - 2.0 * p)
                    * phi.values()[g.index(j, a)].norm().powf(p)
                    * g.exterior_chart_weight(j)
            });
            Ok(integral_report(g, rings, p))
        }
    }
}

/// `(∫_𝔻 g^p ρ² dA)^{1/p}` for nonnegative node samples `g`.
pub fn hyperbolic_lp_of(grid: &DiskGrid, g: &[f64], p: f64) -> Result<NormReport> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p = {p} must be at least 1")));
    }
    if g.len() != grid.len() {
        return Err(Error::Validation(format!(
            "expected {} samples, got {}",
            grid.len(),
            g.len()
        )));
    }
    let rings = ring_sum(grid, |j, a| {
        let rho = rho_disk(grid.radii()[j]);
        g[grid.index(j, a)].powf(p) * rho * rho * grid.weight(j)
    });
    Ok(integral_report(grid, rings, p))
}

/// Integral of `F(z) ρ_𝔻(z)² ` over the grid for node values of `F`.
pub fn hyperbolic_integral(grid: &DiskGrid, values: &[f64]) -> f64 {
    (0..grid.rings())
        .map(|j| {
            let rho = rho_disk(grid.radii()[j]);
            let s: f64 = values[j * grid.angles..(j + 1) * grid.angles].iter().sum();
            s * rho * rho * grid.weight(j)
        })
        .sum()
}

fn octave_sums(g: &DiskGrid, rings: &[f64]) -> Vec<f64> {
    (1..g.k)
        .map(|o| {
            let s = g.octave_start(o);
            let e = if o + 1 < g.k {
                g.octave_start(o + 1)
            } else {
                rings.len()
            };
            rings[s..e].iter().sum()
        })
        .collect()
}

fn integral_report(g: &DiskGrid, rings: Vec<f64>, p: f64) -> NormReport {
    let total: f64 = rings.iter().sum();
    let oct = octave_sums(g, &rings);
    let tail_pow = match oct.len() {
        0 | 1 => 0.0,
        n => {
            let (prev, last) = (oct[n - 2], oct[n - 1]);
            if last == 0.0 {
                0.0
            } else if prev > 0.0 && last < prev {
                let q = last / prev;
                last * q / (1.0 - q)
            } else {
                f64::INFINITY
            }
        }
    };
    let value = total.powf(1.0 / p);
    let tail = if tail_pow.is_finite() {
        (total + tail_pow).powf(1.0 / p) - value
    } else {
        f64::INFINITY
    };
    NormReport {
        value,
        kind: NormKind::LpHyp { p },
        cutoff: 1.0 - g.r_max(),
        tail,
        argmax_ring: None,
        ring_profile: rings,
    }
}

/// `∫_𝔻 |z - ζ|^-4 dA(z)` for `|ζ| > 1`; the strip between the last ring and
/// the unit circle is included as one extra midpoint ring.
pub fn quartic_kernel_integral(grid: &DiskGrid, zeta: C64) -> Result<f64> {
    if !(zeta.norm() > 1.0) {
        return Err(Error::Domain(format!(
            "target {zeta} must lie outside the closed disk"
        )));
    }
    let m = grid.angles;
    let ring = |r: f64, w: f64| -> f64 {
        (0..m)
            .map(|a| {
                let z = C64::from_polar(r, grid.theta(a));
                (z - zeta).norm_sqr().powi(-2)
            })
            .sum::<f64>()
            * w
    };
    let inner: f64 = (0..grid.rings())
        .into_par_iter()
        .map(|j| ring(grid.radii()[j], grid.weight(j)))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let (a, b) = (grid.r_max(), 1.0);
    let strip = ring(
        0.5 * (a + b),
        0.5 * (b * b - a * a) * std::f64::consts::TAU / m as f64,
    );
    Ok(inner + strip)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted exponent; `+∞` when the field vanishes near the boundary.
    pub alpha: f64,
    pub residual: f64,
    pub rings_used: usize,
}

/// Ceiling for reported decay exponents.
pub const DECAY_CEILING: f64 = 2.0;

/// Slope of `log sup_ring ρ^-2|φ|` against `log(|z| - 1)` over the boundary octaves.
pub fn decay_exponent_fit(phi: &HolomorphicField) -> DecayFit {
    let g = phi.grid();
    let first = g.octave_start(4.min(g.k - 1));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in first..g.rings() {
        let r = g.radii()[j];
        let rho = rho_exterior_reflected(r);
        let m = (0..g.angles)
            .map(|a| phi.values()[g.index(j, a)].norm())
            .fold(0.0, f64::max)
            / (rho * rho);
        if m > 1e-280 {
            xs.push((1.0 / r - 1.0).ln());
            ys.push(m.ln());
        }
    }
    if xs.len() < 3 {
        return DecayFit {
            alpha: f64::INFINITY,
            residual: 0.0,
            rings_used: xs.len(),
        };
    }
    let (slope, icpt) = least_squares(&xs, &ys);
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - icpt).powi(2))
        .sum::<f64>()
        / xs.len() as f64)
        .sqrt();
    DecayFit {
        alpha: slope.min(DECAY_CEILING),
        residual,
        rings_used: xs.len(),
    }
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
