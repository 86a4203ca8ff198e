//! Coupled-mode linear response for chiral phonon damping in a whispering
//! gallery resonator.
//!
//! * [`model`] holds the physical parameters and assembles the
//!   frequency-domain coefficient matrices of the four- and six-mode systems.
//! * [`response`] inverts those matrices numerically: susceptibilities,
//!   single-mode elimination, noise-weighted temperatures and poles.
//! * [`closedform`] evaluates the analytic linewidths, shifts, temperatures
//!   and back-scattering poles; tests hold it against [`response`].
//! * [`bath`] reduces a discretized continuum of bulk phonons to the
//!   quasi-mode rates.
//! * [`fitting`] converts pump power to amplitude and fits measured
//!   linewidth-versus-power data.

pub mod bath;
pub mod closedform;
pub mod error;
pub mod fitting;
pub mod model;
pub mod response;

pub use closedform::Direction;
pub use error::{BathError, FitError, ModelError, ResponseError};
pub use model::{CutTopology, DynamicalMatrix, ModeIndex, SystemParams};
pub use response::EffectiveResponse;
