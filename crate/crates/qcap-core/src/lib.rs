//! Numerical toolkit for finite-dimensional quantum channels.
//!
//! The crate computes the standard figures of merit for completely positive
//! trace-preserving maps at desk scale (dimensions up to ~64): Schatten norms,
//! entanglement/channel/average/minimum fidelities, witness-certified lower
//! bounds on the 1→1 and completely bounded norms, capacity bounds (partial
//! transposition, coherent information, hashing-code rates), the dimension
//! independent equivalence chain between those error measures, and the
//! combinatorics of achievable-rate integer sequences.
//!
//! All estimators are deterministic given a seed; Monte-Carlo routines report
//! standard errors and optimizers return exact witnesses so that every
//! reported value can be re-derived from its witness.

pub mod bounds;
pub mod channels;
pub mod equivalence;
pub mod error;
pub mod fidelity;
pub mod json;
pub mod operators;
pub mod optim;
pub mod random;
pub mod sequences;
pub mod supnorms;
pub mod verify;

pub use channels::{Channel, CodingScheme, CpMap, Instrument, Superoperator};
pub use error::{Error, Result};
pub use operators::{CMat, CVec, DensityOperator, UnitVector};
pub use supnorms::NormEstimate;
