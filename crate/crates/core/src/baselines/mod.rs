//! Reference filters for the inertial navigation comparison.
//!
//! Both consume the same IMU and landmark logs as the two-frames filter and
//! implement [`NavFilter`].

pub mod imperfect;
pub mod mekf;

pub use crate::scenarios::inertial::NavFilter;
pub use imperfect::ImperfectIekf;
pub use mekf::Mekf;
