//! Numerical quasiconformal Teichmüller theory on the unit disk.

pub mod bers;
pub mod circle;
pub mod cli;
pub mod error;
pub mod fields;
pub mod moebius;
pub mod quadrature;
pub mod rigidity;
pub mod solver;
pub mod wp;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
