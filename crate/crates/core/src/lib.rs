//! Simulation library for Trotter errors in p-spin models.
//!
//! The target Hamiltonian `H(s) = −(1−s) Jz − s/(p J^{p−1}) Jx^p` is
//! simulated by the first-order product formula whose one-step unitary is
//! the Floquet operator of a periodically kicked top. The modules cover the
//! exact quantum problem in the symmetric subspace ([`spin`], [`dynamics`],
//! [`observables`]), its mean-field limit ([`classical`]) and the
//! perturbative and effective-Hamiltonian description of structural
//! instabilities ([`instability`]).

pub mod classical;
pub mod dynamics;
pub mod error;
pub mod instability;
pub mod linalg;
pub mod observables;
pub mod spin;

pub use error::{Error, Result};
pub use spin::{CollectiveOperators, ModelParams, SpinSector, StateVector};
