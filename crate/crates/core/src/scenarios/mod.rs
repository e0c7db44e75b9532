//! Ready-made application systems, truth simulation and the Monte-Carlo
//! comparison experiment.

pub mod inertial;
pub mod lever_arm;
pub mod monte_carlo;
pub mod slammot;
