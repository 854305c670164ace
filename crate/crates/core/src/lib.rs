//! Linear models of isothermal gas transport in a single high-pressure pipe.
//!
//! Three representations are provided and cross-checked against one another:
//!
//! * a finite-difference state-space realization with `2N + 1` states
//!   ([`statespace`]),
//! * the exact transfer functions as truncated infinite products, together with
//!   compact delay-based approximations ([`transferfn`]),
//! * time-domain simulation of the compact model through exact delay buffers
//!   ([`simulate`]).
//!
//! [`spectral`] holds the closed-form poles and zeros, and [`meromorphic`] the
//! pole expansions that connect the product form to the delay form.

pub mod eig;
pub mod error;
pub mod io;
pub mod meromorphic;
pub mod params;
pub mod simulate;
pub mod spectral;
pub mod statespace;
pub mod transferfn;

mod sum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{derive_constants, steady_profile, DerivedConstants, PipeParameters, SteadyProfile};
pub use statespace::{
    build_state_space, build_transformed_realization, integrate, DiscretizationGrid, InputHold,
    IntegrationOptions, Scheme, SimulationResult, StateSpaceModel,
};
pub use simulate::TimeSeries;
