//! Solver and verification lab for the bike-dock reallocation problem.
//!
//! Stations hold `d(i)` open docks and `b(i)` docks with a bike. Starting from
//! an initial allocation `(d̄, b̄)`, the solver moves docks and bikes between
//! stations to minimise a sum of multimodular per-station costs, subject to
//! dock conservation, a bike budget, an ℓ1 reallocation budget `2γ`, and
//! per-station capacity bounds.
//!
//! The crate is organised as follows:
//!
//! - [`model`]: instances, allocations, feasibility, distances, objective.
//! - [`costs`]: multimodular cost families and their validators.
//! - [`transform`]: the relaxed problem, the P/Q split and the restricted
//!   problem with its scaled views.
//! - [`solver`]: the proximity-scaling pipeline.
//! - [`oracle`]: brute-force ground truth for small instances.
//! - [`proxlab`]: empirical checks of the proximity bound and its case
//!   analysis.
//! - [`format`], [`generate`], [`report`]: instance files, seeded instance
//!   generation and CSV report rows used by the command-line tool.
//!
//! All arithmetic on costs is exact ([`Rational`]); there are no tolerances
//! anywhere in the crate.

pub mod costs;
mod descent;
pub mod error;
pub mod format;
pub mod generate;
pub mod model;
pub mod oracle;
pub mod proxlab;
pub mod report;
pub mod solver;
pub mod transform;

pub use costs::{ConvexSpec, CostModel, Rational, StationCost};
pub use error::{Error, Infeasibility, Result};
pub use model::{Allocation, Instance};
