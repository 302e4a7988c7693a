//! Simulation library for a two-photon-counting Josephson photomultiplier
//! (JPM) coupled to a microwave resonator.
//!
//! The crate is layered bottom-up:
//! - [`circuit`]: device parameters, washboard level structure, couplings;
//! - [`semiclassics`]: WKB tunneling rates out of the metastable well;
//! - [`liouville`]: joint density-matrix model (Hamiltonians, Lindbladian,
//!   dressed first-order corrections, trajectory integration);
//! - [`rate_model`]: the fast-decoherence analytic layer (absorption rates,
//!   count probabilities, discrimination errors, protocol analysis);
//! - [`harness`]: end-to-end reproduction runs and cross-checks.

pub mod circuit;
pub mod constants;
pub mod error;
pub mod harness;
pub mod liouville;
pub mod ode;
pub mod rate_model;
pub mod semiclassics;

pub use circuit::{CouplingRates, DeviceConfig, LevelStructure, RenormalizedCapacitances};
pub use error::{Error, Result};
pub use liouville::{HilbertLayout, JointState, Superoperator, Trajectory};
pub use semiclassics::TunnelingResult;
