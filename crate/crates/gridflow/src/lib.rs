//! Power-flow analysis engine built around the fast decoupled method.
//!
//! The crate is organized as a pipeline:
//!
//! * [`model`] parses case files into a validated per-unit [`model::Network`].
//! * [`admittance`] assembles the complex Ybus and the constant decoupled
//!   coefficient matrices from the network graph.
//! * [`sparse`] provides the fill-reducing ordering, elimination-tree
//!   symbolic analysis, level scheduling and level-parallel Cholesky solves.
//! * [`fdpf`] runs the alternating half-iteration solver loop.
//! * [`partition`] splits the grid into isolated areas with equivalent
//!   boundary load injections taken from a reference state.
//! * [`distributed`] solves all areas concurrently and merges the results.
//! * [`report`] renders solutions and comparisons in text and JSON form.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `gridflow` binary for the command-line interface.

pub mod admittance;
pub mod distributed;
pub mod fdpf;
pub mod model;
pub mod partition;
pub mod report;
pub mod sparse;
pub mod synth;
