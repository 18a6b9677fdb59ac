//! Reference implementations used only by test suites.
//!
//! Everything here is deliberately naive: plain definitions, dense exact
//! arithmetic, double-double floats. None of it shares code with
//! `shiftcert-core`.

pub mod dd;
pub mod exact;
pub mod graph;
pub mod homology;
pub mod linalg;
pub mod lorenz;
pub mod rng;
