//! Cubic interpolation of node samples on a [`DiskGrid`].

use num_complex::Complex64 as C64;
use std::f64::consts::TAU;

use super::grid::DiskGrid;

#[inline]
fn lagrange4(x: [f64; 4], t: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (t - x[j]) / (x[i] - x[j]);
            }
        }
    }
    w
}

#[inline]
fn cubic_uniform(u: f64) -> [f64; 4] {
    // nodes at -1, 0, 1, 2
    [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ]
}

/// Interpolates node values at an arbitrary point of the closed unit disk.
///
/// Near the centre the stencil continues through the origin onto the
/// opposite ring; past the outermost ring it extrapolates.
pub fn polar(grid: &DiskGrid, values: &[C64], z: C64) -> C64 {
    let m = grid.angles;
    let radii = grid.radii();
    let nr = radii.len();
    let r = z.norm();
    let theta = z.im.atan2(z.re).rem_euclid(TAU);

    let pos = radii.partition_point(|&x| x <= r) as isize - 1;
    let start = pos.clamp(-2, nr as isize - 3) - 1;
    let mut xs = [0.0; 4];
    let mut rows = [(0usize, 0usize); 4];
    for s in 0..4 {
        let i = start + s as isize;
        if i < 0 {
            let j = (-i - 1) as usize;
            xs[s] = -radii[j];
            rows[s] = (j, m / 2);
        } else {
            xs[s] = radii[i as usize];
            rows[s] = (i as usize, 0);
        }
    }
    let wr = lagrange4(xs, r);

    let u = theta * m as f64 / TAU - 0.5;
    let a0 = u.floor();
    let wa = cubic_uniform(u - a0);
    let a0 = a0 as isize;

    let mut acc = C64::new(0.0, 0.0);
    for s in 0..4 {
        let (ring, shift) = rows[s];
        let base = ring * m;
        let mut row = C64::new(0.0, 0.0);
        for (t, w) in wa.iter().enumerate() {
            let a = (a0 - 1 + t as isize + shift as isize).rem_euclid(m as isize) as usize;
            row += values[base + a] * *w;
        }
        acc += row * wr[s];
    }
    acc
}

/// Interpolates samples stored at reflected exterior nodes.
pub fn exterior(grid: &DiskGrid, values: &[C64], zeta: C64) -> C64 {
    polar(grid, values, zeta.conj().inv())
}
