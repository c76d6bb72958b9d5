//! Schwarzian derivatives of maps given by expansions at infinity.
//!
//! With `t = 1/z` and `g(t) = f'(z)` written as `t^m h(t)`, `h(0) != 0`,
//!
//! ```text
//! S_f = (m - m²/2) t² + (2 - m) t³ h'/h + t⁴ (h''/h - 3/2 (h'/h)²)
//! ```
//!
//! so everything reduces to power-series arithmetic in `t`.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;
use std::sync::Arc;

use super::laurent::{series_inv, series_mul, LaurentSeries, SeriesForm};
use crate::error::{Error, Result};
use crate::fields::{DiskGrid, HolomorphicField};

/// Schwarzian of a map whose derivative is `Σ g_j t^j`, to `n` terms.
pub fn schwarzian_of_derivative(g: &[C64], n: usize) -> Result<LaurentSeries> {
    let scale = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let m = g
        .iter()
        .position(|c| c.norm() > 1e-14 * scale)
        .ok_or_else(|| {
            Error::singular(
                C64::new(f64::INFINITY, 0.0),
                "derivative vanishes identically",
            )
        })?;
    let h = &g[m..];
    let hinv = series_inv(h, n);
    let h1: Vec<C64> = (1..h.len()).map(|j| h[j] * j as f64).collect();
    let h2: Vec<C64> = (2..h.len()).map(|j| h[j] * (j * (j - 1)) as f64).collect();
    let q1 = series_mul(&h1, &hinv, n);
    let q2 = series_mul(&h2, &hinv, n);
    let q1sq = series_mul(&q1, &q1, n);
    let mf = m as f64;
    let mut out = vec![C64::new(0.0, 0.0); n];
    if n > 2 {
        out[2] += mf - 0.5 * mf * mf;
    }
    for j in 0..n {
        if j + 3 < n {
            out[j + 3] += q1[j] * (2.0 - mf);
        }
        if j + 4 < n {
            out[j + 4] += q2[j] - 1.5 * q1sq[j];
        }
    }
    let top = out.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(LaurentSeries::plain(out).trimmed(1e-18 * top))
}

/// Terms kept beyond the input order; the Schwarzian of a polynomial in `1/z`
/// is an infinite series.
const EXTRA_TERMS: usize = 64;

/// Symbolic Schwarzian of a map-form series.
pub fn schwarzian_series(f: &LaurentSeries) -> Result<LaurentSeries> {
    if f.form != SeriesForm::Map {
        return Err(Error::Unsupported(
            "Schwarzian needs a map-form series".into(),
        ));
    }
    let n = f.coeffs.len() + 2 + EXTRA_TERMS;
    schwarzian_of_derivative(&f.derivative_in_t(n), n)
}

/// Coefficients `a_n` of `f(z) = Σ_{n >= -1} a_n z^-n` from `N` samples on `|z| = R`,
/// returned as `(a_-1, [a_0, a_1, ...])`. Larger positive powers must be absent.
pub(crate) fn circle_coefficients(
    f: &(dyn Fn(C64) -> C64 + Sync),
    radius: f64,
    n: usize,
) -> Result<(C64, Vec<C64>)> {
    let mut buf: Vec<C64> = (0..n)
        .map(|j| f(C64::from_polar(radius, TAU * j as f64 / n as f64)))
        .collect();
    let size = buf.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    // e^{ipθ} sits at bin p mod n; z^-k contributes to p = -k.
    for p in 2..n / 2 {
        if (buf[p] * inv_n).norm() > 1e-9 * size {
            return Err(Error::Unsupported(format!(
                "growth faster than z at infinity (mode {p})"
            )));
        }
    }
    let lead = buf[1] * inv_n / radius;
    // bins at the rounding floor would be blown up by R^k
    let coeffs = (0..n / 2)
        .map(|k| {
            let v = buf[(n - k) % n] * inv_n;
            if v.norm() > 1e-14 * size {
                v * radius.powi(k as i32)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok((lead, coeffs))
}

/// Schwarzian of a map given only by an evaluator holomorphic on `|z| > 1`,
/// via its expansion on `|z| = radius` with `n` samples.
pub fn schwarzian_fn(
    f: &(dyn Fn(C64) -> C64 + Sync),
    radius: f64,
    n: usize,
) -> Result<LaurentSeries> {
    let (lead, a) = circle_coefficients(f, radius, n)?;
    let kmax = a.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    // f' = lead - Σ k a_k t^{k+1}
    let mut g = vec![C64::new(0.0, 0.0); kmax + 2];
    g[0] = lead;
    for (k, c) in a.iter().enumerate().take(kmax + 1).skip(1) {
        g[k + 1] -= c * k as f64;
    }
    schwarzian_of_derivative(&g, kmax + 2 + EXTRA_TERMS)
}

/// Schwarzian sampled on the exterior grid, keeping the series.
pub fn schwarzian(grid: Arc<DiskGrid>, f: &LaurentSeries) -> Result<HolomorphicField> {
    let s = schwarzian_series(f)?;
    // f' as a series in t = 1/z, sampled at the exterior nodes
    let fp = crate::fields::field::sample_series_exterior(
        &grid,
        &LaurentSeries::plain(f.derivative_in_t(f.coeffs.len() + 2)),
    );
    let rings = grid.rings();
    let m = grid.angles;
    for (i, v) in fp.iter().enumerate() {
        if v.norm() < 1e-12 {
            let z = grid.exterior_node_at(i);
            return Err(Error::singular(
                z,
                format!("f' vanishes (ring {} of {rings}, angle {})", i / m, i % m),
            ));
        }
    }
    Ok(HolomorphicField::from_laurent(grid, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::GridSpec;

    fn joukowski(k: f64) -> LaurentSeries {
        LaurentSeries::map(vec![C64::new(0.0, 0.0), C64::new(k, 0.0)])
    }

    #[test]
    fn joukowski_closed_form() {
        let k = 0.2;
        let s = schwarzian_series(&joukowski(k)).unwrap();
        for z in [
            C64::new(1.1, 0.3),
            C64::new(-2.0, 0.5),
            C64::new(0.2, -1.05),
        ] {
            let want = -6.0 * k / (z * z - k).powi(2);
            assert!((s.eval(z) - want).norm() < 1e-12, "{z}");
        }
        assert!(s.coeffs[..4].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn identity_has_zero_schwarzian() {
        let s = schwarzian_series(&LaurentSeries::identity()).unwrap();
        assert!(s.coeffs.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn mobius_post_composition_invariance() {
        let k = 0.25;
        let f = move |z: C64| z + k / z;
        // γ(w) = (2w + 1)/(w - 0.1i): pole inside f(𝔻), so γ∘f is holomorphic on 𝔻*
        let g = move |z: C64| {
            let w = f(z);
            (2.0 * w + 1.0) / (w - C64::new(0.0, 0.1))
        };
        let sf = schwarzian_series(&joukowski(k)).unwrap();
        let sg = schwarzian_fn(&g, 1.1, 1024).unwrap();
        for z in [C64::new(1.2, 0.4), C64::new(-1.5, -1.0)] {
            assert!(
                (sf.eval(z) - sg.eval(z)).norm() < 1e-9,
                "{} {}",
                sf.eval(z),
                sg.eval(z)
            );
        }
        // affine post-composition as well
        let sa = schwarzian_fn(&move |z| 3.0 * f(z) - 2.0, 2.0, 256).unwrap();
        assert!((sa.eval(C64::new(1.3, 0.2)) - sf.eval(C64::new(1.3, 0.2))).norm() < 1e-10);
    }

    #[test]
    fn polynomial_growth_rejected() {
        assert!(schwarzian_fn(&|z: C64| z * z, 2.0, 64).is_err());
    }

    #[test]
    fn sampled_field_keeps_series() {
        let g = Arc::new(GridSpec::default().with_angles(32).build().unwrap());
        let phi = schwarzian(g, &joukowski(0.1)).unwrap();
        assert!(phi.laurent().is_some());
        assert!(phi.series_consistency().unwrap() < 1e-12);
    }
}
