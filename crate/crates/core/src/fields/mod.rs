//! Disk grids, sampled fields, weighted norms and quadrature.

pub mod field;
pub mod grid;
pub mod interp;
pub mod io;
pub mod norms;

pub use field::{cauchy_riemann_residual, BeltramiField, ComplexFn, HolomorphicField};
pub use grid::{DiskGrid, GridSpec};
pub use norms::{
    compass_max, decay_exponent_fit, hyperbolic_lp_of, lp_norm_hyperbolic, quartic_kernel_integral,
    sup_norm_refined, sup_norm_weighted, DecayFit, NormKind, NormReport,
};
