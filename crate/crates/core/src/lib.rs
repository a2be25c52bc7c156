//! Finite-dimensional quantum measurement toolkit.
//!
//! Observables are discrete POVMs on `C^d`; measurement schemes couple the
//! system to a probe through a unitary and read a pointer observable. The
//! [`metrics`] module evaluates noise and disturbance measures for such
//! schemes, each by every available route, and [`gallery`] collects worked
//! instances with self-checking verdicts.

pub mod error;
pub mod gallery;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod observables;
pub mod random;
pub mod schemes;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, Tolerance};
pub use metrics::{NoiseReport, OutcomeDistribution};
pub use num_complex::Complex64;
pub use observables::{DiscretePovm, HermitianObservable, PureState, SmearingKernel, SpectralMeasure};
pub use schemes::{InvarianceReport, MeasurementScheme, QuantumChannel};

/// Toolkit version recorded in report files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
