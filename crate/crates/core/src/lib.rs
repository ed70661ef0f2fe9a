//! Next-jump dynamics of a resonantly driven three-level atom.
//!
//! The atom has a ground level `|0⟩`, a short-lived bright level `|1⟩` and a
//! long-lived dark level `|2⟩`, both driven from `|0⟩` with no `|1⟩–|2⟩`
//! coupling. Between photon emissions the state is described by the real
//! conditional amplitudes `(c0, c1, c2)`; their squared norm is the
//! probability that no photon has been emitted since the last reset.
//!
//! * [`model`]: physical parameters, dimensionless groups, regime tags.
//! * [`propagator`]: the linear no-jump generator, RK4 and exact stepping,
//!   survival probability and conditioning on null emission.
//! * [`spectral`]: exact eigenvalues of the generator and the small-drive
//!   asymptotic forms.
//! * [`regimes`]: closed-form amplitudes for the underdamped and overdamped
//!   dark periods, the shelving diagnostic `Z` and analytic probabilities.
//! * [`trajectories`]: Monte Carlo photon records and dark-period statistics.
//!
//! The crate is `no_std` (with `alloc`). The `std` feature only forwards
//! `std` to dependencies.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
mod linalg;

pub mod model;
pub mod propagator;
pub mod regimes;
pub mod spectral;
pub mod trajectories;

pub use error::{Error, Result};
pub use model::{DerivedRates, Regime, RegimeTag, RegimeThresholds, SystemParams};
pub use propagator::{AmplitudeState, Generator, StepMatrix};
pub use spectral::{EigenKind, EigenTriple};
pub use trajectories::{Channel, DarkStats, PhotonRecord};
