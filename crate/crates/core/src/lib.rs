//! Paging in directional multi-beam cellular systems: an analytic activation
//! model and a cycle-driven simulator of the Legacy, MADP and MFEP paging
//! schemes.
//!
//! The counting and analytic layers are generic over [`Real`]; the aliases
//! below fix the scalar for the common cases.

pub mod accounting;
pub mod analytic;
pub mod combinatorics;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod protocol;
pub mod scalar;
pub mod sim;

pub use accounting::{CostModel, ResourceUnits};
pub use error::{CombinatoricsError, ConfigError, ExperimentError, GeometryError, ModelError};
pub use experiments::{run_experiment, ExperimentSpec, Mode, Profile, ResultRow};
pub use protocol::{MonitoringCycles, SchemeKind};
pub use scalar::Real;
pub use sim::{run_simulation, MetricsSummary, SimConfig};

pub type Pmf64 = analytic::Pmf<f64>;
pub type Pmf32 = analytic::Pmf<f32>;
pub type LogCount64 = combinatorics::LogCount<f64>;
pub type LogCount32 = combinatorics::LogCount<f32>;
pub type ActivationModelParams64 = analytic::ActivationModelParams<f64>;
pub type ActivationModelParams32 = analytic::ActivationModelParams<f32>;
pub type ActivationEstimate64 = analytic::ActivationEstimate<f64>;
pub type GainParams64 = analytic::GainParams<f64>;
pub type SurjectionTable64 = combinatorics::SurjectionTable<f64>;
pub type TruncatedPoisson64 = combinatorics::TruncatedPoisson<f64>;
