//! Few-photon Fock-state wave packets scattering on a Jaynes-Cummings (JC)
//! system side-coupled to a chiral waveguide.
//!
//! The crate carries two independent computation paths for the same
//! dynamics:
//!
//! - [`dynamics`] discretises the waveguide continuum on a uniform grid and
//!   integrates the one- and two-excitation amplitude equations with an
//!   adaptive Dormand-Prince 5(4) stepper;
//! - [`analytic`] evaluates the Laplace-transform solutions in closed form
//!   (exponential sums for the transient, rational formulas for the
//!   long-time scattered state).
//!
//! [`spectrum`] and [`entanglement`] post-process the scattered two-photon
//! spectral distribution function (SDF), and [`validation`] bundles the
//! cross-checks between the two paths.
//!
//! All frequencies are detunings from the bare cavity frequency; the default
//! unit is the cavity decay rate `kappa = 1`.

pub mod analytic;
pub mod dynamics;
pub mod entanglement;
mod error;
pub mod model;
pub mod quadrature;
pub mod spectrum;
pub mod validation;

pub use error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub use analytic::{
    one_exc_closed_form, scattered_pair_sdf, scattered_single_sdf, two_exc_transient,
    ScatteredSdf,
};
pub use dynamics::{
    evolve, initial_states, make_grid, observables, rhs_one, rhs_two, EvolveOptions,
    FrequencyGrid, Observables, OneExcState, Trajectory, TwoExcState,
};
pub use entanglement::{build_kernel, entropy, schmidt, SchmidtResult};
pub use model::{
    pulse_sdf, pulse_time_profile, single_photon_phase, single_photon_resonances,
    two_photon_resonances, PhotonCount, Pulse, Resonances, SystemParams,
};
pub use spectrum::{input_spectrum, output_spectrum, SpectrumResult};
