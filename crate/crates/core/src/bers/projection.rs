use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use super::laurent::{LaurentSeries, SeriesForm};
use super::schwarzian::{circle_coefficients, schwarzian};
use crate::error::{Error, Result};
use crate::fields::{
    cauchy_riemann_residual, sup_norm_weighted, BeltramiField, DiskGrid, HolomorphicField,
};
use crate::solver::{conformal_exterior, Normalization, PolarTransforms, QCSolution, SolverConfig};

/// Radii used by [`laurent_fit`].
pub const FIT_RADII: [f64; 3] = [1.5, 2.0, 3.0];
/// Coefficients with `|b_k| R^-k` below this are dropped.
pub const FIT_CUTOFF: f64 = 1e-12;
/// Largest accepted cross-radius disagreement, in sample units.
pub const FIT_AGREEMENT: f64 = 1e-7;
/// Relative slack on the Nehari bound `‖Φ(μ)‖ <= 3/2 ‖μ‖`.
pub const NEHARI_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaurentFit {
    pub series: LaurentSeries,
    /// Largest `|b_k(R) - b_k(R_0)| R^-k` over the retained coefficients.
    pub disagreement: f64,
    pub cr_residual: f64,
}

/// Laurent expansion `f(z) = z + Σ b_k z^-k` of a principal map on the exterior disk,
/// from discrete Fourier analysis on the circles of [`FIT_RADII`].
pub fn laurent_fit_fn(f: &(dyn Fn(C64) -> C64 + Sync), samples: usize) -> Result<LaurentFit> {
    let probe: Vec<C64> = (0..64)
        .map(|j| C64::from_polar(1.25, std::f64::consts::TAU * j as f64 / 64.0))
        .collect();
    let cr = cauchy_riemann_residual(f, &probe, 1e-4);
    if !(cr < 1e-6) {
        return Err(Error::Precondition(format!(
            "map is not holomorphic outside the disk (Cauchy-Riemann residual {cr:.2e})"
        )));
    }
    let mut fits = Vec::with_capacity(FIT_RADII.len());
    for &r in &FIT_RADII {
        let (lead, coeffs) = circle_coefficients(f, r, samples)?;
        if (lead - 1.0).norm() > 1e-8 || coeffs[0].norm() > 1e-8 {
            return Err(Error::Precondition(format!(
                "map is not principally normalized (leading {lead:.3e}, constant {:.3e})",
                coeffs[0]
            )));
        }
        fits.push(coeffs);
    }
    let r0 = FIT_RADII[0];
    let base = &fits[0];
    let kmax = base
        .iter()
        .enumerate()
        .rposition(|(k, b)| b.norm() * r0.powi(-(k as i32)) >= FIT_CUTOFF)
        .unwrap_or(0);
    let mut disagreement: f64 = 0.0;
    for (fit, &r) in fits.iter().zip(&FIT_RADII).skip(1) {
        for k in 1..=kmax {
            disagreement = disagreement.max((fit[k] - base[k]).norm() * r.powi(-(k as i32)));
        }
    }
    if disagreement > FIT_AGREEMENT {
        return Err(Error::Accuracy(format!(
            "Laurent coefficients disagree across radii by {disagreement:.2e}"
        )));
    }
    let mut coeffs = base[..=kmax].to_vec();
    coeffs[0] = C64::new(0.0, 0.0);
    Ok(LaurentFit {
        series: LaurentSeries::map(coeffs),
        disagreement,
        cr_residual: cr,
    })
}

pub fn laurent_fit(f: &QCSolution) -> Result<LaurentFit> {
    if f.normalization() == Normalization::Selfmap01 {
        return Err(Error::Precondition(
            "self-maps are not principally normalized".into(),
        ));
    }
    let samples = (2 * f.grid().angles).max(256);
    laurent_fit_fn(&|z| f.eval(z), samples)
}

/// `Φ(μ)`, the Schwarzian of `f_μ` on the exterior disk, from an already
/// solved conformal extension. The full solver series is used; the three-circle
/// fit must reproduce its leading coefficients.
pub fn bers_projection_with(mu: &BeltramiField, f: &QCSolution) -> Result<HolomorphicField> {
    let series = f
        .exterior_laurent()
        .ok_or_else(|| Error::Unsupported("solution carries no exterior series".into()))?;
    let fit = laurent_fit(f)?;
    let check = fit
        .series
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, b)| (b - series.coeff(k)).norm() * FIT_RADII[0].powi(-(k as i32)))
        .fold(0.0, f64::max);
    if check > FIT_AGREEMENT {
        return Err(Error::Accuracy(format!(
            "fitted series departs from the solver series by {check:.2e}"
        )));
    }
    let phi = schwarzian(mu.grid().clone(), series)?;
    let norm = sup_norm_weighted(&phi, -2.0)?.value;
    let bound = 1.5 * mu.sup() * (1.0 + NEHARI_SLACK) + 1e-12;
    if norm > bound {
        return Err(Error::Accuracy(format!(
            "Nehari gate failed: ‖Φ(μ)‖ = {norm:.6} exceeds {bound:.6}"
        )));
    }
    Ok(phi)
}

pub fn bers_projection(mu: &BeltramiField, cfg: &SolverConfig) -> Result<HolomorphicField> {
    let f = conformal_exterior(mu, cfg)?;
    bers_projection_with(mu, &f)
}

/// `-6 Σ_m C(m+3, 3) b_{m+1} z^{-m-4}` for moments `π b_{m+1} = ∫ λ w^m dA`.
pub(crate) fn quartic_series(b: &[C64]) -> LaurentSeries {
    let n = b.len();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 3];
    for m in 0..n.saturating_sub(1) {
        let mf = m as f64;
        let binom = (mf + 1.0) * (mf + 2.0) * (mf + 3.0) / 6.0;
        coeffs[m + 4] = -6.0 * binom * b[m + 1];
    }
    LaurentSeries::plain(coeffs)
}

/// `d₀Φ(μ)(z) = -(6/π) ∫_𝔻 μ(ζ)/(ζ - z)^4 dA(ζ)`, expanded in the moments of μ.
pub fn d0_phi_series(mu_samples: &[C64], grid: &Arc<DiskGrid>) -> LaurentSeries {
    let ops = PolarTransforms::new(grid.clone());
    let b = ops.exterior_coefficients(&ops.forward(mu_samples));
    quartic_series(&b)
}

pub fn d0_phi(mu: &BeltramiField) -> HolomorphicField {
    let series = d0_phi_series(mu.values(), mu.grid());
    HolomorphicField::from_laurent(mu.grid().clone(), series)
}

/// Pointwise value of `d₀Φ(μ)` at a target off the closed disk.
pub fn d0_phi_at(phi: &HolomorphicField, z: C64) -> Result<C64> {
    if !(z.norm() > 1.0) {
        return Err(Error::Domain(format!(
            "target {z} lies on or inside the unit circle"
        )));
    }
    Ok(phi.eval(z))
}

/// `σ(φ)(z) = -(1-|z|²)²/(2|z|⁴) (z/z̄)² φ(1/z̄)`.
#[inline]
pub fn aw_value(phi_at_reflection: C64, z: C64) -> C64 {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let rot = (z / z.conj()).powi(2);
    -phi_at_reflection * rot * ((1.0 - r2).powi(2) / (2.0 * r2 * r2))
}

/// `σ` applied to node samples; linear, with no size restriction.
pub fn aw_samples(phi: &HolomorphicField) -> Vec<C64> {
    let g = phi.grid();
    phi.values()
        .par_iter()
        .enumerate()
        .map(|(i, v)| aw_value(*v, g.node_at(i)))
        .collect()
}

/// The Ahlfors–Weill section `σ(φ)` for `‖φ‖_∞ < 1/2`.
pub fn aw_section(phi: &HolomorphicField) -> Result<BeltramiField> {
    let norm = sup_norm_weighted(phi, -2.0)?.value;
    if !(norm < 0.5) {
        return Err(Error::Precondition(format!(
            "‖φ‖_∞ = {norm:.4} is not below 1/2"
        )));
    }
    let grid = phi.grid().clone();
    let c4 = phi.laurent().map(|s| s.coeff(4));
    if phi.has_evaluator() {
        let f = phi.evaluator();
        BeltramiField::from_fn(grid, move |z| {
            if z.norm_sqr() < 1e-24 {
                // limit at the origin is -c_4/2
                return c4.map_or(C64::new(0.0, 0.0), |c| -0.5 * c);
            }
            aw_value(f(z.conj().inv()), z)
        })
    } else {
        BeltramiField::from_samples(grid, aw_samples(phi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreSchwarzianProfile {
    pub t: Vec<f64>,
    /// `sup_{1<|z|<=1+t} (|z|-1)^{1-α} |f''/f'|`
    pub beta: Vec<f64>,
    pub alpha: f64,
}

/// Ladder of boundary suprema of the weighted pre-Schwarzian `f''/f'`.
pub fn preschwarzian_decay(
    series: Option<&LaurentSeries>,
    grid: &DiskGrid,
    ladder: &[f64],
    alpha: f64,
) -> Result<PreSchwarzianProfile> {
    let s = series.ok_or_else(|| Error::Unsupported("pre-Schwarzian needs Laurent data".into()))?;
    if s.form != SeriesForm::Map {
        return Err(Error::Unsupported(
            "pre-Schwarzian needs a map-form series".into(),
        ));
    }
    let tmax = ladder.iter().copied().fold(0.0, f64::max);
    let m = grid.angles;
    let rings: Vec<(f64, f64)> = (0..grid.rings())
        .into_par_iter()
        .filter_map(|j| {
            let dist = 1.0 / grid.radii()[j] - 1.0;
            if dist > tmax {
                return None;
            }
            let sup = (0..m)
                .map(|a| {
                    let d = s.derivatives(grid.exterior_node(j, a));
                    (d[2] / d[1]).norm()
                })
                .fold(0.0, f64::max);
            Some((dist, sup * dist.powf(1.0 - alpha)))
        })
        .collect();
    let beta = ladder
        .iter()
        .map(|&t| {
            rings
                .iter()
                .filter(|(d, _)| *d <= t)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(PreSchwarzianProfile {
        t: ladder.to_vec(),
        beta,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;
    use crate::quadrature::gauss_legendre;

    fn grid(m: usize) -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(m).build().unwrap())
    }

    #[test]
    fn fit_recovers_joukowski() {
        let k = C64::new(0.3, -0.1);
        let fit = laurent_fit_fn(&move |z| z + k / z, 256).unwrap();
        assert_eq!(fit.series.order(), 1);
        assert!((fit.series.coeffs[1] - k).norm() < 1e-14);
        let id = laurent_fit_fn(&|z| z, 256).unwrap();
        assert!(id.series.coeffs.iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn fit_rejects_non_holomorphic_and_unnormalized() {
        assert!(laurent_fit_fn(&|z: C64| z + 0.1 * z.conj(), 128).is_err());
        assert!(laurent_fit_fn(&|z: C64| 2.0 * z, 128).is_err());
    }

    #[test]
    fn projection_of_disk_indicator() {
        let g = grid(256);
        let k = 0.2;
        let mu = BeltramiField::constant(g.clone(), C64::new(k, 0.0)).unwrap();
        let phi = bers_projection(&mu, &SolverConfig::default()).unwrap();
        let exact = HolomorphicField::from_fn(g, move |z| -6.0 * k / (z * z - k).powi(2));
        let diff = phi
            .combine(C64::new(1.0, 0.0), &exact, C64::new(-1.0, 0.0))
            .unwrap();
        let err = sup_norm_weighted(&diff, -2.0).unwrap().value;
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn d0_phi_of_indicator_and_zero() {
        let g = grid(128);
        let k = 0.3;
        let mu = BeltramiField::constant(g.clone(), C64::new(k, 0.0)).unwrap();
        let s = d0_phi(&mu);
        let series = s.laurent().unwrap();
        assert!((series.coeff(4) + 6.0 * k).norm() < 1e-12);
        assert!(series
            .coeffs
            .iter()
            .enumerate()
            .all(|(j, c)| j == 4 || c.norm() < 1e-12));
        assert!(d0_phi(&BeltramiField::zero(g))
            .values()
            .iter()
            .all(|v| v.norm() == 0.0));
        assert!(d0_phi_at(&s, C64::new(1.0, 0.0)).is_err());
    }

    fn d0_phi_direct(target: C64) -> C64 {
        // tensor Gauss-Legendre in r, periodic trapezoid in θ
        let (nodes, weights) = gauss_legendre(64);
        let na = 512;
        let mut direct = C64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(&weights) {
            let r = 0.5 * (x + 1.0);
            for a in 0..na {
                let z = C64::from_polar(r, std::f64::consts::TAU * a as f64 / na as f64);
                let m = 0.2 * z.conj() * (1.0 - z.norm_sqr());
                direct +=
                    m / (z - target).powi(4) * (0.5 * w * r * std::f64::consts::TAU / na as f64);
            }
        }
        direct * (-6.0 / std::f64::consts::PI)
    }

    #[test]
    fn d0_phi_matches_direct_quadrature() {
        let target = C64::new(1.3, 0.8);
        let direct = d0_phi_direct(target);
        assert!((direct + 0.8 / target.powi(5)).norm() < 1e-13);
        // radial moments are second order in the ring spacing
        let rel = |inner: usize, per_octave: usize| {
            let mut spec = GridSpec::default().with_angles(64);
            spec.inner_rings = inner;
            spec.per_octave = per_octave;
            let g = Arc::new(spec.build().unwrap());
            let mu = BeltramiField::from_fn(g, |z| 0.2 * z.conj() * (1.0 - z.norm_sqr())).unwrap();
            (d0_phi(&mu).eval(target) - direct).norm() / direct.norm()
        };
        let (coarse, fine) = (rel(32, 8), rel(64, 16));
        assert!(coarse < 1e-3, "{coarse}");
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn aw_section_of_quartic() {
        let g = grid(64);
        let c = C64::new(0.4, 0.0);
        let phi = HolomorphicField::monomial(g.clone(), c, 4);
        let mu = aw_section(&phi).unwrap();
        for i in (0..g.len()).step_by(13) {
            let z = g.node_at(i);
            let want = -0.5 * c * (1.0 - z.norm_sqr()).powi(2);
            assert!((mu.values()[i] - want).norm() < 1e-14);
        }
        assert!((mu.eval(C64::new(0.0, 0.0)) + 0.5 * c).norm() < 1e-15);
        let big = HolomorphicField::monomial(g, C64::new(2.4, 0.0), 4);
        assert!(matches!(aw_section(&big), Err(Error::Precondition(_))));
    }

    #[test]
    fn preschwarzian_of_joukowski() {
        let g = grid(128);
        let k = 0.2;
        let s = LaurentSeries::map(vec![C64::new(0.0, 0.0), C64::new(k, 0.0)]);
        let ladder = [0.5, 0.1, 0.01, 0.001];
        let prof = preschwarzian_decay(Some(&s), &g, &ladder, 0.0).unwrap();
        for w in prof.beta.windows(2) {
            assert!(w[1] < w[0]);
        }
        // |f''/f'| = 2k/|z(z²-k)|, largest on the positive axis
        let ring_sup = |d: f64| d * 2.0 * k / ((1.0 + d) * ((1.0 + d).powi(2) - k));
        for (t, b) in ladder.iter().zip(&prof.beta) {
            let want = g
                .radii()
                .iter()
                .map(|r| 1.0 / r - 1.0)
                .filter(|d| d <= t)
                .map(ring_sup)
                .fold(0.0, f64::max);
            assert!(
                *b <= want * (1.0 + 1e-12) && *b >= 0.99 * want,
                "{t} {b} {want}"
            );
        }
        let id = preschwarzian_decay(Some(&LaurentSeries::identity()), &g, &ladder, 0.0).unwrap();
        assert!(id.beta.iter().all(|b| *b == 0.0));
        assert!(preschwarzian_decay(None, &g, &ladder, 0.0).is_err());
    }
}
