//! Error norms, convergence orders, energy spectra and the algebraic
//! utilities behind the stability analysis.

pub mod identities;
pub mod norms;
pub mod spectrum;

pub use identities::{discrete_gronwall_bound, splitting_identity_residuals};
pub use norms::{
    discrete_time_norm, eoc, lps_norm, pressure_l2_error, velocity_errors, velocity_l2_error,
    ErrorAccumulator, ErrorReport, LevelErrors, TimeNorm, VelocityErrors,
};
pub use spectrum::{energy_spectrum, sample_velocity_grid, SpectrumReport};
