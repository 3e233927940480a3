//! Change-point detection of DDoS attacks in software-defined wireless
//! sensor networks, with the simulator and evaluation harness used to
//! exercise it.

pub mod critical;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod monitor;
pub mod offline;
pub mod online;
pub mod series;
pub mod sim;
pub mod trend;

pub use error::{Error, Result};
