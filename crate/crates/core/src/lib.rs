//! Finite-range contact processes on `Z_M` built from a shared graphical
//! representation, the break points of the right edge, the restart chain
//! behind their geometric law, and density deviations of oriented site
//! percolation.
//!
//! Every process in this crate is driven by an immutable [`graph::EventLog`]
//! so that arbitrarily many initial conditions, edge masks and rate
//! thinnings can be compared on one realization. The per-realization
//! identities (additivity, monotonicity, coupling identities) are exact and
//! are what the test suite leans on; the statistical checks in [`stats`]
//! sit on top of them.

pub mod breakpoints;
pub mod contact;
pub mod error;
pub mod graph;
pub mod percolation;
pub mod seeding;
pub mod stats;

pub use error::{Error, Result};
