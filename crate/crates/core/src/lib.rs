//! Scenario simulator for water distribution networks.
//!
//! The crate covers the whole chain from a network description to labelled
//! sensor data and a detection baseline:
//!
//! - [`network`] and [`inp`]: the network model and INP text I/O
//! - [`hydraulics`]: demand-driven extended-period simulation
//! - [`quality`]: single-species transport and decay
//! - [`events`] and [`uncertainty`]: leaks, actuator changes, sensor faults,
//!   communication failures and parameter or measurement uncertainty
//! - [`scada`]: sensor readings and their corruption
//! - [`detection`]: residual-based sensor interpolation detector and metrics
//! - [`env`]: a reset/step control environment
//! - [`scenario`]: TOML scenario files tying everything together
//!
//! The `examples/` directory has one runnable program per capability.

#![allow(clippy::needless_range_loop)]

pub mod detection;
pub mod env;
pub mod events;
pub mod hydraulics;
pub mod inp;
pub mod network;
pub mod quality;
pub mod scada;
pub mod scenario;
pub mod uncertainty;

#[doc(hidden)]
pub mod cli;

/// Lowercase hex encoding.
pub(crate) fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
