//! Time-asynchronous Gaussian multiple-access relay channel (TA-MARC).
//!
//! Channel model, finite-n bounds, rate regions and a small-scale
//! separate source-channel coding simulator.

pub mod bounds;
pub mod coding;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod regions;
pub mod subset;
pub mod units;

pub use error::{Error, Result};
pub use subset::Subset;
pub use units::LogBase;
