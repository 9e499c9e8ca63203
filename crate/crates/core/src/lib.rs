//! Parking assignment and parking-search simulation for large events.
//!
//! The crate covers two halves of the same problem:
//!
//! * **Planning.** [`assignment`] builds a vehicle-by-lot matrix of drive,
//!   in-lot search and walk times and solves the capacitated assignment
//!   exactly.
//! * **Evaluation.** [`simulator`] replays a seeded population of drivers
//!   through a discrete-event model in which drivers follow heterogeneous
//!   lot-choice rules ([`strategies`]), get redirected when a lot is full and
//!   give up once their patience runs out. [`report`] aggregates Monte Carlo
//!   replications and writes CSV tables.
//!
//! Geometry is planar: coordinates are Miller-projected ([`geo`]) and every
//! leg is measured with the Manhattan metric.

pub mod assignment;
pub mod error;
pub mod geo;
pub mod layout;
pub mod lot_model;
pub mod report;
pub mod scenario;
pub mod simulator;
pub mod stochastic;
pub mod strategies;

pub use error::{Error, Result, Violation};
