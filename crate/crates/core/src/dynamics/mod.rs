//! The generator of the first-order system, its resolvent, time stepping,
//! and spectral estimates.

mod generator;
mod resolvent;
mod spectral;
mod stepping;

pub use generator::{apply_generator, damping_rate, dissipativity_report, DissipativityReport};
pub use resolvent::{
    discrete_resolvent_weight, resolvent_defect, resolvent_solve, ResolventReport, DEFECT_BOUND,
};
pub use spectral::{
    spectral_abscissa_estimate, thermal_abscissa_closed_form, SpectralEstimate, SpectralOptions,
    Subsystem,
};
pub use stepping::{
    explicit_step_bound, implicit_euler_step, rk4_step, spectral_radius_estimate, step, Scheme,
    Stepper,
};

#[cfg(test)]
mod tests;
