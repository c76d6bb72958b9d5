use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

use super::grid::DiskGrid;
use super::interp;
use crate::bers::laurent::{LaurentSeries, SeriesForm};
use crate::error::{Error, Result};

/// A pointwise evaluator shared between fields.
pub type ComplexFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// Beltrami coefficient sampled on the nodes of a [`DiskGrid`].
#[derive(Clone)]
pub struct BeltramiField {
    grid: Arc<DiskGrid>,
    values: Vec<C64>,
    sup: f64,
    source: Option<ComplexFn>,
}

impl fmt::Debug for BeltramiField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BeltramiField")
            .field("nodes", &self.values.len())
            .field("sup", &self.sup)
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

fn sup_abs(values: &[C64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

impl BeltramiField {
    pub fn from_samples(grid: Arc<DiskGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Validation("non-finite Beltrami sample".into()));
        }
        let sup = sup_abs(&values);
        if sup >= 1.0 {
            return Err(Error::Validation(format!("sup|mu| = {sup} is not below 1")));
        }
        Ok(Self {
            grid,
            values,
            sup,
            source: None,
        })
    }

    /// Samples `f` on the grid and keeps it as the evaluator off the nodes.
    pub fn from_fn(
        grid: Arc<DiskGrid>,
        f: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let f: ComplexFn = Arc::new(f);
        let values = sample(&grid, |z| f(z));
        let mut field = Self::from_samples(grid, values)?;
        field.source = Some(f);
        Ok(field)
    }

    pub fn zero(grid: Arc<DiskGrid>) -> Self {
        Self::from_fn(grid, |_| C64::new(0.0, 0.0)).expect("zero is valid")
    }

    pub fn constant(grid: Arc<DiskGrid>, k: C64) -> Result<Self> {
        Self::from_fn(grid, move |_| k)
    }

    /// `k` on `|z| <= rho`, zero elsewhere.
    pub fn disk_indicator(grid: Arc<DiskGrid>, k: C64, rho: f64) -> Result<Self> {
        Self::from_fn(grid, move |z| {
            if z.norm() <= rho {
                k
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn has_evaluator(&self) -> bool {
        self.source.is_some()
    }

    /// Value at `z`; zero off the disk.
    pub fn eval(&self, z: C64) -> C64 {
        if z.norm_sqr() >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        match &self.source {
            Some(f) => f(z),
            None => interp::polar(&self.grid, &self.values, z),
        }
    }

    pub fn map(&self, f: impl Fn(C64, C64) -> C64 + Send + Sync + 'static) -> Result<Self> {
        let grid = self.grid.clone();
        let vals: Vec<C64> = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| f(grid.node_at(i), *v))
            .collect();
        match &self.source {
            Some(src) => {
                let src = src.clone();
                let mut out = Self::from_samples(grid, vals)?;
                out.source = Some(Arc::new(move |z| f(z, src(z))));
                Ok(out)
            }
            None => Self::from_samples(grid, vals),
        }
    }

    /// Pointwise multiple `s·μ` keeping any evaluator.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        self.map(move |_, v| v * s)
    }
}

/// Holomorphic function on the exterior disk sampled at the reflected grid nodes.
#[derive(Clone)]
pub struct HolomorphicField {
    grid: Arc<DiskGrid>,
    values: Vec<C64>,
    laurent: Option<LaurentSeries>,
    source: Option<ComplexFn>,
}

impl fmt::Debug for HolomorphicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HolomorphicField")
            .field("nodes", &self.values.len())
            .field("laurent_order", &self.laurent.as_ref().map(|l| l.order()))
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

impl HolomorphicField {
    pub fn from_samples(grid: Arc<DiskGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            laurent: None,
            source: None,
        })
    }

    pub fn from_fn(grid: Arc<DiskGrid>, f: impl Fn(C64) -> C64 + Send + Sync + 'static) -> Self {
        let f: ComplexFn = Arc::new(f);
        let values = sample_exterior(&grid, |z| f(z));
        Self {
            grid,
            values,
            laurent: None,
            source: Some(f),
        }
    }

    pub fn from_laurent(grid: Arc<DiskGrid>, series: LaurentSeries) -> Self {
        let values = sample_series_exterior(&grid, &series);
        Self {
            grid,
            values,
            laurent: Some(series),
            source: None,
        }
    }

    pub fn zero(grid: Arc<DiskGrid>) -> Self {
        Self::from_laurent(grid, LaurentSeries::plain(vec![C64::new(0.0, 0.0)]))
    }

    /// `c z^-n`.
    pub fn monomial(grid: Arc<DiskGrid>, c: C64, n: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = c;
        Self::from_laurent(grid, LaurentSeries::plain(coeffs))
    }

    pub fn grid(&self) -> &Arc<DiskGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn laurent(&self) -> Option<&LaurentSeries> {
        self.laurent.as_ref()
    }

    pub fn has_evaluator(&self) -> bool {
        self.source.is_some() || self.laurent.is_some()
    }

    /// Value at `z` with `|z| > 1`: the evaluator, else the series, else interpolation.
    pub fn eval(&self, z: C64) -> C64 {
        if let Some(f) = &self.source {
            return f(z);
        }
        if let Some(s) = &self.laurent {
            return s.eval(z);
        }
        interp::exterior(&self.grid, &self.values, z)
    }

    /// An evaluator usable after `self` is dropped.
    pub fn evaluator(&self) -> ComplexFn {
        if let Some(f) = &self.source {
            return f.clone();
        }
        if let Some(s) = &self.laurent {
            let s = s.clone();
            return Arc::new(move |z| s.eval(z));
        }
        let grid = self.grid.clone();
        let vals = self.values.clone();
        Arc::new(move |z| interp::exterior(&grid, &vals, z))
    }

    pub fn with_evaluator(grid: Arc<DiskGrid>, f: ComplexFn) -> Self {
        let values = sample_exterior(&grid, |z| f(z));
        Self {
            grid,
            values,
            laurent: None,
            source: Some(f),
        }
    }

    /// Linear combination `a·self + b·other`, keeping series or evaluators when both have them.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        if self.grid.spec() != other.grid.spec() {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        let values: Vec<C64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let laurent = match (&self.laurent, &other.laurent) {
            (Some(s), Some(t)) if s.form == t.form => {
                let n = s.coeffs.len().max(t.coeffs.len());
                Some(LaurentSeries {
                    form: s.form,
                    coeffs: (0..n).map(|k| a * s.coeff(k) + b * t.coeff(k)).collect(),
                })
            }
            _ => None,
        };
        let source: Option<ComplexFn> =
            if laurent.is_none() && self.has_evaluator() && other.has_evaluator() {
                let (f, g) = (self.evaluator(), other.evaluator());
                Some(Arc::new(move |z| a * f(z) + b * g(z)))
            } else {
                None
            };
        Ok(Self {
            grid: self.grid.clone(),
            values,
            laurent,
            source,
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        self.combine(s, self, C64::new(0.0, 0.0))
            .expect("same grid")
    }

    /// Largest relative deviation between samples and series on the node ring nearest `|z| = 2`.
    pub fn series_consistency(&self) -> Option<f64> {
        let s = self.laurent.as_ref()?;
        let g = &self.grid;
        let j = g.radii().partition_point(|&r| r < 0.5).min(g.rings() - 1);
        let worst = (0..g.angles)
            .map(|a| {
                let want = s.eval(g.exterior_node(j, a));
                (want - self.values[g.index(j, a)]).norm() / (1.0 + want.norm())
            })
            .fold(0.0, f64::max);
        Some(worst)
    }
}

pub fn sample(grid: &DiskGrid, f: impl Fn(C64) -> C64 + Sync) -> Vec<C64> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| f(grid.node_at(i)))
        .collect()
}

pub fn sample_exterior(grid: &DiskGrid, f: impl Fn(C64) -> C64 + Sync) -> Vec<C64> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| f(grid.exterior_node_at(i)))
        .collect()
}

/// Series values at the exterior nodes, one FFT per ring.
pub fn sample_series_exterior(grid: &DiskGrid, series: &LaurentSeries) -> Vec<C64> {
    let m = grid.angles;
    let fft = rustfft::FftPlanner::new().plan_fft_forward(m);
    let mut out = vec![C64::new(0.0, 0.0); grid.len()];
    out.par_chunks_mut(m).enumerate().for_each(|(j, row)| {
        let r = grid.radii()[j];
        // z^-k at angle 2π(a+½)/M is r^k e^{-iπk/M} e^{-2πika/M}
        let mut pk = 1.0;
        for (k, c) in series.coeffs.iter().enumerate() {
            if pk < 1e-300 {
                break;
            }
            let ph = C64::from_polar(pk, -std::f64::consts::PI * k as f64 / m as f64);
            row[k % m] += c * ph;
            pk *= r;
        }
        fft.process(row);
        if series.form == SeriesForm::Map {
            for (a, v) in row.iter_mut().enumerate() {
                *v += grid.exterior_node(j, a);
            }
        }
    });
    out
}

/// Relative size of `∂̄f` from centred differences at the given points.
pub fn cauchy_riemann_residual(f: &(dyn Fn(C64) -> C64 + Sync), points: &[C64], h: f64) -> f64 {
    points
        .par_iter()
        .map(|&z| {
            let dx = f(z + h) - f(z - h);
            let dy = f(z + C64::new(0.0, h)) - f(z - C64::new(0.0, h));
            let dbar = (dx + C64::i() * dy) / (4.0 * h);
            let d = (dx - C64::i() * dy) / (4.0 * h);
            dbar.norm() / d.norm().max(1e-300)
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::GridSpec;

    fn grid() -> Arc<DiskGrid> {
        Arc::new(GridSpec::default().with_angles(128).build().unwrap())
    }

    #[test]
    fn rejects_sup_at_least_one() {
        assert!(BeltramiField::constant(grid(), C64::new(1.0, 0.0)).is_err());
        assert!(BeltramiField::constant(grid(), C64::new(0.8, 0.7)).is_err());
        let f = BeltramiField::constant(grid(), C64::new(0.3, 0.4)).unwrap();
        assert!((f.sup() - 0.5).abs() < 1e-15);
        assert_eq!(f.eval(C64::new(1.5, 0.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn laurent_matches_samples_on_radius_two() {
        let phi = HolomorphicField::from_laurent(
            grid(),
            LaurentSeries::plain(vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.1),
                C64::new(0.0, 0.2),
            ]),
        );
        assert!(phi.series_consistency().unwrap() < 1e-8);
    }

    #[test]
    fn holomorphic_cr_residual_small() {
        let f = |z: C64| z.powi(-4) + 0.3 * z.powi(-5);
        let pts: Vec<C64> = (0..50)
            .map(|j| C64::from_polar(1.2 + 0.02 * j as f64, 0.37 * j as f64))
            .collect();
        assert!(cauchy_riemann_residual(&f, &pts, 1e-4) < 1e-6);
        let g = |z: C64| z.conj();
        assert!(cauchy_riemann_residual(&g, &pts, 1e-4) > 0.5);
    }

    #[test]
    fn combine_keeps_series() {
        let g = grid();
        let a = HolomorphicField::monomial(g.clone(), C64::new(1.0, 0.0), 4);
        let b = HolomorphicField::monomial(g, C64::new(0.0, 2.0), 5);
        let c = a
            .combine(C64::new(2.0, 0.0), &b, C64::new(-1.0, 0.0))
            .unwrap();
        let z = C64::new(1.7, 0.4);
        let want = 2.0 * z.powi(-4) - C64::new(0.0, 2.0) * z.powi(-5);
        assert!((c.eval(z) - want).norm() < 1e-14);
        assert!(c.laurent().is_some());
    }

    #[test]
    fn series_sampling_matches_horner() {
        let g = GridSpec::default()
            .with_angles(16)
            .with_cutoff(6)
            .build()
            .unwrap();
        let coeffs: Vec<C64> = (0..40)
            .map(|k| C64::new(0.3f64.powi(k), 0.1 * k as f64))
            .collect();
        for s in [
            LaurentSeries::plain(coeffs.clone()),
            LaurentSeries::map(coeffs),
        ] {
            let fast = sample_series_exterior(&g, &s);
            for (i, v) in fast.iter().enumerate() {
                let z = g.exterior_node_at(i);
                assert!((v - s.eval(z)).norm() < 1e-9 * (1.0 + v.norm()));
            }
        }
    }
}
