//! Geometric phases and holonomies, and the gates built from them.
//!
//! The numerical core is generic over the real scalar type ([`Scalar`],
//! implemented for `f32` and `f64`). Aliases for the double-precision
//! instantiation are exported at the crate root.
//!
//! Modules:
//! - [`qcore`]: states, density matrices, unitaries, Bloch vectors.
//! - [`phase`]: Pancharatnam phases, parallel transport, solid angles, curvature.
//! - [`adiabatic`]: Schrödinger integration, Berry connection and phase.
//! - [`classical`]: Foucault pendulum.
//! - [`interferometer`]: Mach–Zehnder mixed-state phase and visibility.
//! - [`holonomy`]: Wilczek–Zee connection, path ordering, the four-level dark-state model.
//! - [`gates`]: standard and geometric gates, Deutsch's algorithm.
//! - [`compiler`]: compiling target phases into control loops, noise robustness.

pub mod adiabatic;
pub mod classical;
pub mod compiler;
pub mod error;
pub mod gates;
pub mod holonomy;
pub mod interferometer;
pub mod linalg;
pub mod phase;
pub mod qcore;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{cis, wrap_phase, Scalar, C, CMat, CVec};

pub type PureState = qcore::PureState<f64>;
pub type DensityMatrix = qcore::DensityMatrix<f64>;
pub type UnitaryOp = qcore::UnitaryOp<f64>;
pub type BlochVector = qcore::BlochVector<f64>;
pub type PhaseValue = phase::PhaseValue<f64>;
pub type StatePath = phase::StatePath<f64>;
pub type HamiltonianPath<'a> = adiabatic::HamiltonianPath<'a, f64>;
pub type EigenFrame = adiabatic::EigenFrame<f64>;
pub type PhaseDecomposition = adiabatic::PhaseDecomposition<f64>;
pub type PendulumParams = classical::PendulumParams<f64>;
pub type PendulumTrajectory = classical::PendulumTrajectory<f64>;
pub type MzConfig = interferometer::MzConfig<f64>;
pub type FringeScan = interferometer::FringeScan<f64>;
pub type DegenerateFrame = holonomy::DegenerateFrame<f64>;
pub type WzConnection = holonomy::WzConnection<f64>;
pub type HolonomyMatrix = holonomy::HolonomyMatrix<f64>;
pub type PulseSchedule<'a> = holonomy::PulseSchedule<'a, f64>;
pub type GateOp = gates::GateOp<f64>;
pub type CompileResult = compiler::CompileResult<f64>;
pub type NoiseReport = compiler::NoiseReport<f64>;
