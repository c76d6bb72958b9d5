//! Composition algebra of Beltrami coefficients through normalized self-maps.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::principal::{Normalization, QCSolution, SolverConfig};
use super::selfmap::solve_selfmap;
use crate::error::{Error, Result};
use crate::fields::BeltramiField;

/// Complex dilatation of a solved map.
pub fn dilatation(f: &QCSolution) -> Result<BeltramiField> {
    f.dilatation()
}

fn require_selfmap(f: &QCSolution) -> Result<()> {
    if f.normalization() != Normalization::Selfmap01 {
        return Err(Error::Precondition(
            "composition needs a normalized self-map".into(),
        ));
    }
    Ok(())
}

/// Dilatation of `f^μ ∘ f^ν`, given the solved `f^ν`.
pub fn star_with(
    mu: &BeltramiField,
    nu: &BeltramiField,
    f_nu: &QCSolution,
) -> Result<BeltramiField> {
    require_selfmap(f_nu)?;
    let vals: Vec<C64> = (0..nu.grid().len())
        .into_par_iter()
        .map(|i| {
            let w = f_nu.values()[i];
            let p = f_nu.df()[i];
            let theta = p.conj() / p;
            let n = nu.values()[i];
            let m = mu.eval(w);
            (n + m * theta) / (1.0 + n.conj() * m * theta)
        })
        .collect();
    BeltramiField::from_samples(nu.grid().clone(), vals)
}

/// Dilatation of `f^μ ∘ f^ν`.
pub fn star(mu: &BeltramiField, nu: &BeltramiField, cfg: &SolverConfig) -> Result<BeltramiField> {
    star_with(mu, nu, &solve_selfmap(nu, cfg)?)
}

/// Preimages of every grid node under `f`, found by Newton continuation
/// outward along each angular column.
pub fn node_preimages(f: &QCSolution) -> Result<Vec<C64>> {
    let grid = f.grid().clone();
    let m = grid.angles;
    let nr = grid.rings();
    let cols: Vec<Result<Vec<C64>>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::with_capacity(nr);
            let mut guess = grid.node(0, a);
            for j in 0..nr {
                let w = grid.node(j, a);
                let z = f.invert(w, guess).or_else(|_| f.invert(w, w))?;
                out.push(z);
                guess = z;
            }
            Ok(out)
        })
        .collect();
    let mut z = vec![C64::new(0.0, 0.0); grid.len()];
    for (a, col) in cols.into_iter().enumerate() {
        for (j, v) in col?.into_iter().enumerate() {
            z[j * m + a] = v;
        }
    }
    Ok(z)
}

/// Applies `(z, ∂f(z)) -> value` at `z = f^{-1}(node)` for every node.
fn over_preimages(f: &QCSolution, g: impl Fn(C64, C64) -> C64 + Sync) -> Result<BeltramiField> {
    require_selfmap(f)?;
    let zs = node_preimages(f)?;
    let vals: Vec<C64> = zs
        .par_iter()
        .map(|&z| {
            let (p, _) = f.derivatives(z);
            g(z, p)
        })
        .collect();
    BeltramiField::from_samples(f.grid().clone(), vals)
}

/// Dilatation of `(f^ν)^{-1}`, given the solved `f^ν`.
pub fn inverse_with(nu: &BeltramiField, f_nu: &QCSolution) -> Result<BeltramiField> {
    over_preimages(f_nu, |z, p| -nu.eval(z) * p / p.conj())
}

pub fn inverse(nu: &BeltramiField, cfg: &SolverConfig) -> Result<BeltramiField> {
    inverse_with(nu, &solve_selfmap(nu, cfg)?)
}

/// `r_ν(μ) = μ ∗ ν^{-1}`, the dilatation of `f^μ ∘ (f^ν)^{-1}`, given `f^ν`.
pub fn r_translate_with(
    nu: &BeltramiField,
    mu: &BeltramiField,
    f_nu: &QCSolution,
) -> Result<BeltramiField> {
    over_preimages(f_nu, |z, p| {
        let (a, b) = (mu.eval(z), nu.eval(z));
        (a - b) / (1.0 - b.conj() * a) * p / p.conj()
    })
}

pub fn r_translate(
    nu: &BeltramiField,
    mu: &BeltramiField,
    cfg: &SolverConfig,
) -> Result<BeltramiField> {
    r_translate_with(nu, mu, &solve_selfmap(nu, cfg)?)
}
