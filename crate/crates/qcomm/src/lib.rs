//! Simulation and exact audits of small quantum communication protocols with
//! bounded shared entanglement.

pub mod bhm;
pub mod entanglement;
pub mod error;
pub mod exact;
pub mod forrelation;
pub mod hyperfourier;
pub mod label;
pub mod protocol;
pub mod qcore;
pub mod seed;

pub use error::{Error, Result};
pub use label::Label;
