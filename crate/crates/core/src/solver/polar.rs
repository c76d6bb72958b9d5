//! Cauchy and Beurling transforms of fields supported in the closed unit disk,
//! evaluated on the nodes of a [`DiskGrid`].
//!
//! A field is split into angular modes `ω(ρe^{iφ}) = Σ ω_n(ρ) e^{inφ}` by one
//! FFT per ring. For each mode the transforms reduce to one-sided radial
//! integrals
//!
//! ```text
//! (Cω)_n(r) =  2 ∫_0^r ω_{n+1}(ρ) (ρ/r)^{-n} dρ            n <= -1
//! (Cω)_n(r) = -2 ∫_r^1 ω_{n+1}(ρ) (r/ρ)^{n}  dρ            n >= 0
//! (Sω)_k(r) = ω_{k+2}(r) + 2(k+1)/r ∫_0^r ω_{k+2} (ρ/r)^{-k-1} dρ    k <= -2
//! (Sω)_k(r) = ω_{k+2}(r) - 2(k+1)/r ∫_r^1 ω_{k+2} (r/ρ)^{k+1} dρ     k >= -1
//! ```
//!
//! with `C ω(z) = (1/π)∫ ω(ζ)/(z-ζ) dA` and `S = ∂C`. Radial profiles are
//! taken piecewise linear between ring nodes, constant on `[0, ρ_0]` and on
//! `[ρ_last, 1]`, and the integrals are accumulated ring by ring with exact
//! monomial weights, so the unit circle needs no special treatment.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::fields::DiskGrid;

/// `∫_β^1 x^p dx`.
#[inline]
fn g_int(p: i64, beta: f64) -> f64 {
    if p == -1 {
        -beta.ln()
    } else {
        let e = (p + 1) as f64;
        -((e * beta.ln()).exp_m1()) / e
    }
}

/// Per-ring weights of one recurrence: `P_j = ratio·P_{prev} + a·w_prev + b·w_j`.
#[derive(Debug, Clone)]
struct Recurrence {
    ratio: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Recurrence {
    fn with_capacity(n: usize) -> Self {
        Self {
            ratio: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
        }
    }
}

pub struct PolarTransforms {
    grid: Arc<DiskGrid>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// `inner[m]`, m = 0..=mmax, indexed by ring (ring 0 is the start).
    inner: Vec<Recurrence>,
    /// Weights carrying ring R-1 up to the unit circle.
    inner_end: Vec<(f64, f64)>,
    /// `outer[q]`, indexed by ring (ring R-1 is the start).
    outer: Vec<Recurrence>,
    phase: Vec<C64>,
}

impl std::fmt::Debug for PolarTransforms {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarTransforms")
            .field("rings", &self.grid.rings())
            .field("angles", &self.grid.angles)
            .finish()
    }
}

impl PolarTransforms {
    pub fn new(grid: Arc<DiskGrid>) -> Self {
        let m = grid.angles;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        let rho = grid.radii().to_vec();
        let nr = rho.len();
        let mmax = m / 2 + 2;

        let inner: Vec<Recurrence> = (0..=mmax)
            .into_par_iter()
            .map(|mm| {
                let e = mm as i64;
                let mut rec = Recurrence::with_capacity(nr);
                rec.ratio.push(0.0);
                rec.a.push(0.0);
                rec.b.push(rho[0] / (mm as f64 + 1.0));
                for j in 1..nr {
                    let (a, b) = (rho[j - 1], rho[j]);
                    let al = a / b;
                    let g0 = g_int(e, al);
                    let h = (g_int(e + 1, al) - al * g0) / (1.0 - al);
                    rec.ratio.push(al.powi(mm as i32));
                    rec.a.push(b * (g0 - h));
                    rec.b.push(b * h);
                }
                rec
            })
            .collect();
        let last = rho[nr - 1];
        let inner_end = (0..=mmax)
            .map(|mm| (last.powi(mm as i32), g_int(mm as i64, last)))
            .collect();

        let outer: Vec<Recurrence> = (0..=mmax)
            .into_par_iter()
            .map(|q| {
                let e = q as i64;
                let mut rec = Recurrence::with_capacity(nr);
                for j in 0..nr - 1 {
                    let (a, b) = (rho[j], rho[j + 1]);
                    let be = a / b;
                    let g2 = g_int(e - 2, be);
                    let k = be / (1.0 - be) * (g_int(e - 3, be) - g2);
                    rec.ratio.push(be.powi(q as i32));
                    rec.a.push(a * (g2 - k));
                    rec.b.push(a * k);
                }
                // Ring R-1 to the circle with the profile held constant.
                rec.ratio.push(0.0);
                rec.a.push(last * g_int(e - 2, last));
                rec.b.push(0.0);
                rec
            })
            .collect();

        let phase = (0..m)
            .map(|q| {
                let n = mode_of(q, m) as f64;
                C64::from_polar(1.0, -PI * n / m as f64)
            })
            .collect();
        Self {
            grid,
            fft,
            ifft,
            inner,
            inner_end,
            outer,
            phase,
        }
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    /// Angular Fourier coefficients per ring, ring-major, `n` stored at `n mod M`.
    pub fn forward(&self, values: &[C64]) -> Vec<C64> {
        let m = self.grid.angles;
        let mut buf = values.to_vec();
        let scale = 1.0 / m as f64;
        buf.par_chunks_mut(m).for_each(|row| {
            self.fft.process(row);
            for (q, v) in row.iter_mut().enumerate() {
                *v *= self.phase[q] * scale;
            }
        });
        buf
    }

    /// Node values from angular coefficients; the Nyquist mode is dropped.
    pub fn inverse(&self, mut modes: Vec<C64>) -> Vec<C64> {
        let m = self.grid.angles;
        modes.par_chunks_mut(m).for_each(|row| {
            row[m / 2] = C64::new(0.0, 0.0);
            for (q, v) in row.iter_mut().enumerate() {
                *v *= self.phase[q].conj();
            }
            self.ifft.process(row);
        });
        modes
    }

    fn source(&self, modes: &[C64], n: i64, j: usize) -> C64 {
        let m = self.grid.angles as i64;
        if n < -m / 2 || n >= m / 2 {
            return C64::new(0.0, 0.0);
        }
        modes[j * m as usize + n.rem_euclid(m) as usize]
    }

    /// `∫_0^{ρ_j} w (ρ/ρ_j)^e dρ` for every ring, for source mode `s`.
    fn inner_profile(&self, modes: &[C64], s: i64, e: usize, out: &mut [C64]) {
        let rec = &self.inner[e];
        let nr = self.grid.rings();
        let mut prev = C64::new(0.0, 0.0);
        let mut wprev = C64::new(0.0, 0.0);
        for j in 0..nr {
            let w = self.source(modes, s, j);
            let p = prev * rec.ratio[j] + wprev * rec.a[j] + w * rec.b[j];
            out[j] = p;
            prev = p;
            wprev = w;
        }
    }

    /// `∫_{ρ_j}^1 w (ρ_j/ρ)^e dρ` for every ring, for source mode `s`.
    fn outer_profile(&self, modes: &[C64], s: i64, e: usize, out: &mut [C64]) {
        let rec = &self.outer[e];
        let nr = self.grid.rings();
        let mut next = C64::new(0.0, 0.0);
        let mut wnext = C64::new(0.0, 0.0);
        for j in (0..nr).rev() {
            let w = self.source(modes, s, j);
            // a weighs w_j, b weighs w_{j+1}
            let p = next * rec.ratio[j] + w * rec.a[j] + wnext * rec.b[j];
            out[j] = p;
            next = p;
            wnext = w;
        }
    }

    fn per_mode(&self, f: impl Fn(i64, &mut [C64]) + Sync) -> Vec<C64> {
        let m = self.grid.angles;
        let nr = self.grid.rings();
        let cols: Vec<Vec<C64>> = (0..m)
            .into_par_iter()
            .map(|q| {
                let mut col = vec![C64::new(0.0, 0.0); nr];
                f(mode_of(q, m), &mut col);
                col
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); nr * m];
        for (q, col) in cols.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                out[j * m + q] = *v;
            }
        }
        out
    }

    pub fn cauchy_modes(&self, modes: &[C64]) -> Vec<C64> {
        self.per_mode(|n, col| {
            if n <= -1 {
                self.inner_profile(modes, n + 1, (-n) as usize, col);
                col.iter_mut().for_each(|v| *v *= 2.0);
            } else {
                self.outer_profile(modes, n + 1, n as usize, col);
                col.iter_mut().for_each(|v| *v *= -2.0);
            }
        })
    }

    pub fn beurling_modes(&self, modes: &[C64]) -> Vec<C64> {
        let radii = self.grid.radii();
        self.per_mode(|k, col| {
            if k <= -2 {
                self.inner_profile(modes, k + 2, (-k - 1) as usize, col);
            } else {
                self.outer_profile(modes, k + 2, (k + 1) as usize, col);
            }
            let c = -2.0 * (k + 1) as f64 * if k <= -2 { -1.0 } else { 1.0 };
            for (j, v) in col.iter_mut().enumerate() {
                *v = self.source(modes, k + 2, j) + *v * (c / radii[j]);
            }
        })
    }

    pub fn cauchy(&self, values: &[C64]) -> Vec<C64> {
        self.inverse(self.cauchy_modes(&self.forward(values)))
    }

    pub fn beurling(&self, values: &[C64]) -> Vec<C64> {
        self.inverse(self.beurling_modes(&self.forward(values)))
    }

    /// `Cω(0) = -2 ∫_0^1 ω_1(ρ) dρ` under the same piecewise-linear profiles.
    pub fn cauchy_at_origin(&self, modes: &[C64]) -> C64 {
        let radii = self.grid.radii();
        let nr = radii.len();
        let w = |j: usize| self.source(modes, 1, j);
        let mut acc = w(0) * radii[0] + w(nr - 1) * (1.0 - radii[nr - 1]);
        for j in 1..nr {
            acc += (w(j - 1) + w(j)) * (0.5 * (radii[j] - radii[j - 1]));
        }
        -2.0 * acc
    }

    /// `b_k = (1/π)∫ ω ζ^{k-1} dA` for `k = 0..=M/2`, so that
    /// `Cω(z) = Σ_{k≥1} b_k z^-k` for `|z| >= 1`.
    pub fn exterior_coefficients(&self, modes: &[C64]) -> Vec<C64> {
        let m = self.grid.angles;
        let nr = self.grid.rings();
        let kmax = m / 2;
        let mut out = vec![C64::new(0.0, 0.0); kmax + 1];
        let mut col = vec![C64::new(0.0, 0.0); nr];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let s = 1 - k as i64;
            self.inner_profile(modes, s, k, &mut col);
            let (ratio, wt) = self.inner_end[k];
            let p = col[nr - 1] * ratio + self.source(modes, s, nr - 1) * wt;
            *slot = 2.0 * p;
        }
        out
    }
}

#[inline]
pub(crate) fn mode_of(q: usize, m: usize) -> i64 {
    if q < m / 2 {
        q as i64
    } else {
        q as i64 - m as i64
    }
}
