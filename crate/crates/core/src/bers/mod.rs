//! Schwarzian derivatives, the Bers projection and the Ahlfors–Weill section.

pub mod laurent;
pub mod projection;
pub mod schwarzian;

pub use laurent::{LaurentSeries, SeriesForm};
pub use projection::{
    aw_samples, aw_section, bers_projection, bers_projection_with, d0_phi, d0_phi_at,
    d0_phi_series, laurent_fit, laurent_fit_fn, preschwarzian_decay, LaurentFit,
    PreSchwarzianProfile,
};
pub use schwarzian::{schwarzian, schwarzian_fn, schwarzian_series};
