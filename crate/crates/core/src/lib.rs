//! Two-frames group (TFG) and the invariant extended Kalman filter built on it.
//!
//! The core (`lie`, `tfg`, `system_model`, `filter`) is generic over the
//! scalar type through [`Real`]; `f64` and `f32` aliases are provided below.
//! Scenarios and baselines work in `f64`.

pub mod baselines;
pub mod error;
pub mod filter;
pub mod lie;
pub mod sampling;
pub mod scalar;
pub mod scenarios;
pub mod system_model;
pub mod tfg;

pub use error::{Result, TfgError};
pub use filter::{FilterState, NoiseModel};
pub use lie::Rotation;
pub use scalar::Real;
pub use system_model::{
    ErrorSide, Frame, FrameDynamics, OutputModel, StepDynamics, TwoFramesSystem, VectorDynamics,
};
pub use tfg::{TfgElement, TfgShape, TfgTangent};

pub type Rotation64 = Rotation<f64>;
pub type Rotation32 = Rotation<f32>;
pub type TfgElement64 = TfgElement<f64>;
pub type TfgElement32 = TfgElement<f32>;
pub type TfgTangent64 = TfgTangent<f64>;
pub type TfgTangent32 = TfgTangent<f32>;
pub type FilterState64 = FilterState<f64>;
pub type FilterState32 = FilterState<f32>;
pub type TwoFramesSystem64 = TwoFramesSystem<f64>;
pub type TwoFramesSystem32 = TwoFramesSystem<f32>;
