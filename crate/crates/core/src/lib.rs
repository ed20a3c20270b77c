//! Calibrated S-parameter pipeline for travelling-wave parametric amplifiers.
//!
//! The crate covers the whole measurement analysis chain:
//!
//! - [`touchstone`]: Touchstone v1 two-port reader/writer and CSV/JSON tables
//! - [`network`]: two-port algebra, component synthesis and band metrics
//! - [`trl`]: Thru-Reflect-Line solution of the 8-term error model and de-embedding
//! - [`twpa`]: Fabry-Perot reflection/gain model, gain extraction, gain maps
//! - [`sim`]: synthetic measurement chain used as an end-to-end oracle
//! - [`cli`]: the `twpacal` command-line front end
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod cli;
pub mod network;
pub mod sim;
pub mod touchstone;
pub mod trl;
pub mod twpa;

pub use network::{Band, ComponentSpec, NetworkData, SParam, Scale, TwoPortS, TwoPortT};
