//! Simulation and verification toolkit for Bell sampling: transversal
//! Bell-basis measurement of two copies of a (noisy) circuit state, and the
//! diagnostics built on those samples.

pub mod bits;
pub mod circuit;
pub mod clifford_group;
pub mod error;
pub mod estimators;
pub mod noise;
pub mod protocols;
pub mod rng;
pub mod samples;
pub mod sources;
pub mod stabilizer;
pub mod statevector;
pub mod symplectic;

pub use bits::{AffineSampler, BitString};
pub use circuit::{Architecture, Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use estimators::EstimateWithError;
pub use noise::{NoiseSpec, PauliChannel};
pub use samples::BellSampleSet;
pub use stabilizer::{simulate_tableau, Tableau};
pub use statevector::{simulate_state, DensityMatrix, StateVec};
pub use symplectic::{F2Subspace, Pauli, PauliVec};
