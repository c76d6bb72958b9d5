use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Polar grid on the unit disk.
///
/// Rings are uniform on `[0, 1/2]`, then geometric in `1 - r` with
/// `per_octave` rings per halving, down to `1 - r_max = 2^-k`. Nodes sit at
/// ring midpoints and at angles `2π(a + 1/2)/M`; each node carries the exact
/// area of its annular cell. The exterior disk is covered by the reflection
/// `ζ = 1/z̄` of the same nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    pub k: u32,
    pub angles: usize,
    pub inner_rings: usize,
    pub per_octave: usize,
    edges: Vec<f64>,
    radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub k: u32,
    pub angles: usize,
    pub inner_rings: usize,
    pub per_octave: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            k: 14,
            angles: 1024,
            inner_rings: 32,
            per_octave: 8,
        }
    }
}

impl GridSpec {
    pub fn with_angles(mut self, m: usize) -> Self {
        self.angles = m;
        self
    }

    pub fn with_cutoff(mut self, k: u32) -> Self {
        self.k = k;
        self
    }

    pub fn build(&self) -> Result<DiskGrid> {
        DiskGrid::new(self.k, self.angles, self.inner_rings, self.per_octave)
    }
}

impl Default for DiskGrid {
    fn default() -> Self {
        GridSpec::default().build().expect("default grid is valid")
    }
}

impl DiskGrid {
    pub fn new(k: u32, angles: usize, inner_rings: usize, per_octave: usize) -> Result<Self> {
        if !(2..=30).contains(&k) {
            return Err(Error::Config(format!(
                "cutoff exponent k={k} outside 2..=30"
            )));
        }
        if angles < 8 || angles % 2 != 0 {
            return Err(Error::Config(format!(
                "angle count {angles} must be even and >= 8"
            )));
        }
        if inner_rings == 0 || per_octave == 0 {
            return Err(Error::Config("ring counts must be positive".into()));
        }
        let mut edges = Vec::with_capacity(inner_rings + per_octave * k as usize + 1);
        for j in 0..=inner_rings {
            edges.push(0.5 * j as f64 / inner_rings as f64);
        }
        for octave in 1..k {
            for s in 1..=per_octave {
                let e = octave as f64 + s as f64 / per_octave as f64;
                edges.push(1.0 - (-e * std::f64::consts::LN_2).exp());
            }
        }
        let radii = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Ok(Self {
            k,
            angles,
            inner_rings,
            per_octave,
            edges,
            radii,
        })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            k: self.k,
            angles: self.angles,
            inner_rings: self.inner_rings,
            per_octave: self.per_octave,
        }
    }

    pub fn rings(&self) -> usize {
        self.radii.len()
    }

    pub fn len(&self) -> usize {
        self.rings() * self.angles
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn r_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    #[inline]
    pub fn theta(&self, a: usize) -> f64 {
        TAU * (a as f64 + 0.5) / self.angles as f64
    }

    #[inline]
    pub fn index(&self, ring: usize, a: usize) -> usize {
        ring * self.angles + a
    }

    #[inline]
    pub fn ring_of(&self, idx: usize) -> usize {
        idx / self.angles
    }

    #[inline]
    pub fn node(&self, ring: usize, a: usize) -> C64 {
        C64::from_polar(self.radii[ring], self.theta(a))
    }

    pub fn node_at(&self, idx: usize) -> C64 {
        self.node(idx / self.angles, idx % self.angles)
    }

    /// Reflected node `1/z̄` in the exterior disk.
    #[inline]
    pub fn exterior_node(&self, ring: usize, a: usize) -> C64 {
        C64::from_polar(1.0 / self.radii[ring], self.theta(a))
    }

    pub fn exterior_node_at(&self, idx: usize) -> C64 {
        self.exterior_node(idx / self.angles, idx % self.angles)
    }

    pub fn nodes(&self) -> Vec<C64> {
        (0..self.len()).map(|i| self.node_at(i)).collect()
    }

    pub fn exterior_nodes(&self) -> Vec<C64> {
        (0..self.len()).map(|i| self.exterior_node_at(i)).collect()
    }

    /// Area of one cell of ring `j`.
    #[inline]
    pub fn weight(&self, ring: usize) -> f64 {
        let (a, b) = (self.edges[ring], self.edges[ring + 1]);
        0.5 * (b * b - a * a) * TAU / self.angles as f64
    }

    /// Area of the image cell under `z -> 1/z̄`.
    #[inline]
    pub fn exterior_weight(&self, ring: usize) -> f64 {
        let (a, b) = (self.edges[ring], self.edges[ring + 1]);
        // ∫ r^-4 r dr dθ over [a,b] = (a^-2 - b^-2)/2 · Δθ; infinite for the central ring.
        if a == 0.0 {
            f64::INFINITY
        } else {
            0.5 * (1.0 / (a * a) - 1.0 / (b * b)) * TAU / self.angles as f64
        }
    }

    /// Midpoint-rule weight for integrals over the exterior written in the `z`
    /// chart: `∫_{𝔻*} F dA = ∫_𝔻 F(1/z̄) |z|^-4 dA(z)`.
    #[inline]
    pub fn exterior_chart_weight(&self, ring: usize) -> f64 {
        let r = self.radii[ring];
        self.weight(ring) / (r * r * r * r)
    }

    /// Area of the truncated disk `|z| <= r_max`.
    pub fn truncated_area(&self) -> f64 {
        PI * self.r_max() * self.r_max()
    }

    /// Index of the first ring of octave `j` (the rings with `2^-(j+1) <= 1-r < 2^-j`).
    pub fn octave_start(&self, octave: u32) -> usize {
        if octave == 0 {
            0
        } else {
            self.inner_rings + (octave as usize - 1) * self.per_octave
        }
    }

    /// Rings strictly inside `|z| <= rho`.
    pub fn rings_within(&self, rho: f64) -> usize {
        self.edges[1..].partition_point(|&e| e <= rho + 1e-15)
    }
}
