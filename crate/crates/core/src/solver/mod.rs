//! Numerical measurable Riemann mapping on the unit disk.

pub mod algebra;
pub mod polar;
pub mod principal;
pub mod selfmap;

pub use algebra::{dilatation, inverse, r_translate, star};
pub use polar::PolarTransforms;
pub use principal::{
    conformal_exterior, exterior_winding, solve_principal, solve_principal_fn, Normalization,
    QCSolution, SolveDiagnostics, SolverConfig,
};
pub use selfmap::solve_selfmap;
