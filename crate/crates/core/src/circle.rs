//! Orientation-preserving circle homeomorphisms through their lifts.
//!
//! Lifts live on period 1: `g(x + 1) = g(x) + 1`. The Liouville cocycle is
//! written in the angle `θ = 2πx`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::path::Path;

use crate::error::{Error, Result};
use crate::moebius::{Domain, MobiusMap};
use crate::quadrature::gauss_legendre_on;

/// Tolerance of [`CircleMapLift::inverse`].
pub const INVERSE_TOL: f64 = 1e-12;
/// Default number of derivative samples.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Default half-width of the excluded diagonal band (in `θ`).
pub const DEFAULT_DIAGONAL_BAND: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LiftKind {
    Identity,
    Rotation {
        shift: f64,
    },
    /// `x + a sin(2π n x)/(2π n)`
    Sine {
        amplitude: f64,
        frequency: u32,
    },
    /// Boundary map of `e^{iθ}(z - p)/(1 - p̄z)`.
    Mobius {
        theta: f64,
        p: C64,
    },
    /// Slope `2b` on `[0, 1/2]` and `2(1-b)` on `[1/2, 1]`.
    TwoSlope {
        b: f64,
    },
    Table(Table),
}

/// Monotone cubic through samples on a uniform grid of `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    values: Vec<f64>,
    slopes: Vec<f64>,
    derivative: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMapLift {
    pub kind: LiftKind,
}

impl CircleMapLift {
    pub fn identity() -> Self {
        Self {
            kind: LiftKind::Identity,
        }
    }

    pub fn rotation(shift: f64) -> Self {
        Self {
            kind: LiftKind::Rotation { shift },
        }
    }

    pub fn sine(amplitude: f64, frequency: u32) -> Result<Self> {
        if !(amplitude.abs() < 1.0) || frequency == 0 {
            return Err(Error::Validation(format!(
                "sine lift needs |a| < 1 and n >= 1 (a = {amplitude}, n = {frequency})"
            )));
        }
        Ok(Self {
            kind: LiftKind::Sine {
                amplitude,
                frequency,
            },
        })
    }

    /// Boundary values of a disk automorphism.
    pub fn mobius(m: &MobiusMap) -> Result<Self> {
        m.check_preserves(Domain::Disk)?;
        let p = m.inverse().apply(C64::new(0.0, 0.0));
        let one = C64::new(1.0, 0.0);
        let rot = m.apply(one) * (one - p.conj()) / (one - p);
        Ok(Self {
            kind: LiftKind::Mobius {
                theta: rot.arg(),
                p,
            },
        })
    }

    pub fn two_slope(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Validation(format!(
                "two-slope break value {b} not in (0,1)"
            )));
        }
        Ok(Self {
            kind: LiftKind::TwoSlope { b },
        })
    }

    /// Lift from values `g(i/N)` and optionally `g'(i/N)`, `i = 0..N`.
    pub fn from_samples(values: Vec<f64>, derivative: Option<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        if n < 4 {
            return Err(Error::Validation("need at least four samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite lift sample".into()));
        }
        for i in 0..n {
            let next = if i + 1 < n {
                values[i + 1]
            } else {
                values[0] + 1.0
            };
            if !(next > values[i]) {
                return Err(Error::Validation(format!(
                    "lift samples not strictly increasing at index {i}"
                )));
            }
        }
        if let Some(d) = &derivative {
            if d.len() != n {
                return Err(Error::Validation("derivative column length differs".into()));
            }
        }
        let slopes = pchip_slopes(&values);
        Ok(Self {
            kind: LiftKind::Table(Table {
                values,
                slopes,
                derivative,
            }),
        })
    }

    /// Reads columns `x, g(x)[, g'(x)]` with a header row; `x` must be `i/N`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut xs = Vec::new();
        let mut gs = Vec::new();
        let mut ds = Vec::new();
        let mut cols = None;
        for rec in rdr.records() {
            let rec = rec?;
            let c = *cols.get_or_insert(rec.len());
            if rec.len() != c || !(2..=3).contains(&c) {
                return Err(Error::Validation(
                    "circle map CSV needs 2 or 3 columns".into(),
                ));
            }
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Validation(format!("bad number {:?}: {e}", &rec[i])))
            };
            xs.push(num(0)?);
            gs.push(num(1)?);
            if c == 3 {
                ds.push(num(2)?);
            }
        }
        let n = xs.len() as f64;
        if xs
            .iter()
            .enumerate()
            .any(|(i, x)| (x - i as f64 / n).abs() > 1e-9)
        {
            return Err(Error::Validation(
                "x column must be the uniform grid i/N".into(),
            ));
        }
        Self::from_samples(gs, if ds.is_empty() { None } else { Some(ds) })
    }

    pub fn write_csv(&self, path: &Path, n: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let with_d = self.has_derivative();
        if with_d {
            w.write_record(["x", "g", "gprime"])?;
        } else {
            w.write_record(["x", "g"])?;
        }
        for i in 0..n {
            let x = i as f64 / n as f64;
            let mut row = vec![format!("{x:.17e}"), format!("{:.17e}", self.eval(x))];
            if with_d {
                row.push(format!("{:.17e}", self.derivative(x).unwrap_or(f64::NAN)));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let fl = x.floor();
        let t = x - fl;
        fl + self.eval_unit(t)
    }

    /// Value on `[0, 1)`, allowed to leave `[0, 1)` by the lift's offset.
    fn eval_unit(&self, t: f64) -> f64 {
        match &self.kind {
            LiftKind::Identity => t,
            LiftKind::Rotation { shift } => t + shift,
            LiftKind::Sine {
                amplitude,
                frequency,
            } => {
                let w = TAU * *frequency as f64;
                t + amplitude * (w * t).sin() / w
            }
            LiftKind::Mobius { theta, p } => {
                let z = C64::from_polar(1.0, TAU * t);
                let a = (C64::new(1.0, 0.0) - p.conj() * z).arg();
                t + (theta - 2.0 * a) / TAU
            }
            LiftKind::TwoSlope { b } => {
                if t <= 0.5 {
                    2.0 * b * t
                } else {
                    b + 2.0 * (1.0 - b) * (t - 0.5)
                }
            }
            LiftKind::Table(tab) => tab.eval(t),
        }
    }

    pub fn has_derivative(&self) -> bool {
        match &self.kind {
            LiftKind::Table(t) => t.derivative.is_some(),
            _ => true,
        }
    }

    pub fn derivative(&self, x: f64) -> Option<f64> {
        let t = x - x.floor();
        Some(match &self.kind {
            LiftKind::Identity | LiftKind::Rotation { .. } => 1.0,
            LiftKind::Sine {
                amplitude,
                frequency,
            } => 1.0 + amplitude * (TAU * *frequency as f64 * t).cos(),
            LiftKind::Mobius { p, .. } => {
                let z = C64::from_polar(1.0, TAU * t);
                (1.0 - p.norm_sqr()) / (C64::new(1.0, 0.0) - p.conj() * z).norm_sqr()
            }
            LiftKind::TwoSlope { b } => {
                if t < 0.5 {
                    2.0 * b
                } else {
                    2.0 * (1.0 - b)
                }
            }
            LiftKind::Table(tab) => tab.derivative_at(t)?,
        })
    }

    /// Derivative samples at `i/n`.
    pub fn derivative_samples(&self, n: usize) -> Result<Vec<f64>> {
        if !self.has_derivative() {
            return Err(Error::Unsupported("lift has no derivative".into()));
        }
        Ok((0..n)
            .map(|i| self.derivative(i as f64 / n as f64).unwrap())
            .collect())
    }

    /// `g⁻¹(y)` by bisection.
    pub fn inverse(&self, y: f64) -> f64 {
        let g0 = self.eval(0.0);
        // g(x) - x is periodic, so the root lies within one period of y - g0
        let (mut lo, mut hi) = (y - g0 - 1.0, y - g0 + 1.0);
        while hi - lo > INVERSE_TOL {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Periodicity and strict monotonicity at `n` grid points.
    pub fn validate(&self, n: usize) -> Result<()> {
        for i in 0..n {
            let x = i as f64 / n as f64;
            let (a, b) = (self.eval(x), self.eval(x + 1.0));
            if (b - a - 1.0).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "lift is not periodic at x = {x}"
                )));
            }
            if !(self.eval(x + 1.0 / n as f64) > a) {
                return Err(Error::Validation(format!(
                    "lift is not increasing at x = {x}"
                )));
            }
        }
        Ok(())
    }
}

impl Table {
    fn n(&self) -> usize {
        self.values.len()
    }

    fn node(&self, i: isize) -> (f64, f64) {
        let n = self.n() as isize;
        let k = i.div_euclid(n);
        let j = i.rem_euclid(n) as usize;
        (self.values[j] + k as f64, self.slopes[j])
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.n() as f64;
        let s = t * n;
        let i = s.floor() as isize;
        let u = s - i as f64;
        let (y0, m0) = self.node(i);
        let (y1, m1) = self.node(i + 1);
        let h = 1.0 / n;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * h * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * h * m1
    }

    fn derivative_at(&self, t: f64) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        let n = self.n();
        let s = t * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let u = s - i as f64;
        Some((1.0 - u) * d[i] + u * d[(i + 1) % n])
    }
}

/// Fritsch–Carlson slopes for periodic lift samples.
fn pchip_slopes(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let h = 1.0 / n as f64;
    let at = |i: isize| -> f64 {
        let k = i.div_euclid(n as isize);
        values[i.rem_euclid(n as isize) as usize] + k as f64
    };
    (0..n as isize)
        .map(|i| {
            let d0 = (at(i) - at(i - 1)) / h;
            let d1 = (at(i + 1) - at(i)) / h;
            if d0 * d1 <= 0.0 {
                0.0
            } else {
                2.0 * d0 * d1 / (d0 + d1)
            }
        })
        .collect()
}

/// `m_g(x, t) = (g(x+t) - g(x)) / (g(x) - g(x-t))`.
pub fn qs_quotient(g: &CircleMapLift, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Validation(format!("t = {t} must be positive")));
    }
    let gx = g.eval(x);
    let num = g.eval(x + t) - gx;
    let den = gx - g.eval(x - t);
    if !(num > 0.0 && den > 0.0) {
        return Err(Error::Validation(format!(
            "lift is not increasing near x = {x}"
        )));
    }
    Ok(num / den)
}

/// `sup_x |m_g(x, t) - 1|` over `xs`.
pub fn symmetry_modulus(g: &CircleMapLift, t: f64, xs: &[f64]) -> Result<f64> {
    xs.iter()
        .map(|&x| qs_quotient(g, x, t).map(|m| (m - 1.0).abs()))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

/// `n` uniform points of `[0, 1)`.
pub fn uniform_points(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryProfile {
    pub t: Vec<f64>,
    pub modulus: Vec<f64>,
    /// `sup m_g` and `inf m_g` over the grid for each `t`.
    pub max_quotient: Vec<f64>,
    pub min_quotient: Vec<f64>,
}

impl SymmetryProfile {
    pub fn decreasing(&self) -> bool {
        self.modulus.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Symmetry modulus along `t = 2^-k`, `k = 1..=levels`, on `n` points.
pub fn symmetry_ladder(g: &CircleMapLift, levels: u32, n: usize) -> Result<SymmetryProfile> {
    let xs = uniform_points(n);
    let mut out = SymmetryProfile {
        t: vec![],
        modulus: vec![],
        max_quotient: vec![],
        min_quotient: vec![],
    };
    for k in 1..=levels {
        let t = 2f64.powi(-(k as i32));
        let m: Vec<f64> = xs
            .iter()
            .map(|&x| qs_quotient(g, x, t))
            .collect::<Result<_>>()?;
        out.t.push(t);
        out.modulus
            .push(m.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
        out.max_quotient
            .push(m.iter().copied().fold(f64::MIN, f64::max));
        out.min_quotient
            .push(m.iter().copied().fold(f64::MAX, f64::min));
    }
    Ok(out)
}

/// `max |g'(x) - g'(y)| / |x - y|^α` over sample pairs at circular distance at most 1/2.
pub fn holder_seminorm(gprime: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("α = {alpha} not in (0,1)")));
    }
    let n = gprime.len();
    if n < 2 {
        return Err(Error::Validation(
            "need at least two derivative samples".into(),
        ));
    }
    let weights: Vec<f64> = (0..=n / 2)
        .map(|k| (k as f64 / n as f64).powf(-alpha))
        .collect();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            (1..=n / 2)
                .map(|k| (gprime[i] - gprime[(i + k) % n]).abs() * weights[k])
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>();
    Ok(best.into_iter().fold(0.0, f64::max))
}

/// [`holder_seminorm`] of the lift's derivative sampled at `n` points.
pub fn holder_seminorm_of(g: &CircleMapLift, alpha: f64, n: usize) -> Result<f64> {
    holder_seminorm(&g.derivative_samples(n)?, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleReport {
    /// `∫∫ |c(g)|` over `|θ - θ'| >= band`.
    pub off_band: f64,
    /// Extrapolated contribution of `|θ - θ'| < band`.
    pub band_estimate: f64,
    pub band: f64,
    pub samples: usize,
}

impl LiouvilleReport {
    pub fn total(&self) -> f64 {
        self.off_band + self.band_estimate
    }
}

/// Panels of the Gauss-Legendre rule in the offset variable.
const OFFSET_PANELS: usize = 64;

/// `c(g)(θ, θ+d)` for the lift in angle coordinates.
fn cocycle(g: &CircleMapLift, theta: f64, d: f64) -> f64 {
    let (x, y) = (theta / TAU, (theta + d) / TAU);
    let dg = TAU * (g.eval(y) - g.eval(x));
    let (gx, gy) = (g.derivative(x).unwrap(), g.derivative(y).unwrap());
    let s1 = (0.5 * dg).sin();
    let s0 = (0.5 * d).sin();
    gx * gy / (4.0 * s1 * s1) - 1.0 / (4.0 * s0 * s0)
}

/// `∫∫_{𝕊¹×𝕊¹} |c(g)(θ, θ')| dθ dθ'`: uniform in `θ` with `n` points, Gauss-Legendre
/// panels in the offset `d = θ' - θ` on `[band, π]`, doubled by the symmetry of `c`.
pub fn liouville_norm(g: &CircleMapLift, n: usize, band: f64) -> Result<LiouvilleReport> {
    if !g.has_derivative() {
        return Err(Error::Unsupported(
            "Liouville cocycle needs the derivative".into(),
        ));
    }
    if !(band > 0.0 && band < 0.1) || n < 8 {
        return Err(Error::Validation(format!(
            "bad cocycle quadrature (n = {n}, band = {band})"
        )));
    }
    let thetas: Vec<f64> = (0..n).map(|i| TAU * (i as f64 + 0.5) / n as f64).collect();
    let mut ds = Vec::new();
    let mut ws = Vec::new();
    // panels graded towards the diagonal
    let edges: Vec<f64> = (0..=OFFSET_PANELS)
        .map(|k| band * (PI / band).powf(k as f64 / OFFSET_PANELS as f64))
        .collect();
    for p in 0..OFFSET_PANELS {
        let (x, w) = gauss_legendre_on(8, edges[p], edges[p + 1]);
        ds.extend(x);
        ws.extend(w);
    }
    let line_mean =
        |d: f64| -> f64 { thetas.iter().map(|&t| cocycle(g, t, d).abs()).sum::<f64>() / n as f64 };
    let rows: Vec<f64> = ds.par_iter().map(|&d| line_mean(d)).collect();
    let off_band = 2.0 * TAU * rows.iter().zip(&ws).map(|(v, w)| v * w).sum::<f64>();
    // line mean is even in d: L(d) ≈ L0 + a d²
    let (l1, l2) = (line_mean(band), line_mean(0.5 * band));
    let a = (l1 - l2) / (0.75 * band * band);
    let l0 = l2 - 0.25 * a * band * band;
    let band_estimate = (2.0 * TAU * band * (l0 + a * band * band / 3.0)).max(0.0);
    Ok(LiouvilleReport {
        off_band,
        band_estimate,
        band,
        samples: n,
    })
}
