//! Quantum state transfer through open spin-1/2 chains with nearest and
//! next-nearest exchange, a uniform magnetic field and a magnetoelectric
//! (chirality) coupling driven by periodic electric-field kicks.
//!
//! Dynamics are confined to the 0, 1 and 2 excitation sectors. The core is
//! generic over the scalar type; `f64` aliases are provided at the root.

pub mod basis;
pub mod chain;
pub mod cli;
pub mod conformance;
pub mod error;
pub mod fidelity;
pub mod linalg;
pub mod propagator;
pub mod scalar;
pub mod sweep;

pub use basis::{Config, ExcitationBasis};
pub use chain::{build_hamiltonian, ChainParams, CouplingProfile, ImpurityKind, ImpuritySpec};
pub use error::{Error, Result};
pub use fidelity::{AmplitudeGauge, Omega2Convention, StateTag};
pub use linalg::{DenseMatrix, Eigen};
pub use propagator::{KickSchedule, StateVector, U0Convention, UnitaryPropagator};
pub use scalar::Scalar;
pub use sweep::{sweep_axis, ChainTemplate, Conventions, SweepAxis, SweepPlan};

pub type Complex64 = scalar::C<f64>;
pub type Matrix64 = DenseMatrix<f64>;
pub type ChainParams64 = ChainParams<f64>;
pub type CouplingProfile64 = CouplingProfile<f64>;
pub type KickSchedule64 = KickSchedule<f64>;
pub type StateVector64 = StateVector<f64>;
pub type Propagator64 = UnitaryPropagator<f64>;
pub type ChainTemplate64 = ChainTemplate<f64>;
pub type SweepPlan64 = SweepPlan<f64>;
