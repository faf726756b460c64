//! Built-in test systems and error-analysis utilities.

pub mod analysis;
pub mod multimachine;
pub mod network;
pub mod scalar;
pub mod smib;
