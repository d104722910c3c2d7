//! Multifactor CES elasticity estimation and general-equilibrium price
//! propagation on linked input-output tables.
//!
//! The crate is organised bottom-up:
//!
//! * [`table`] holds input-output tables, deflators and the regression
//!   samples assembled from two periods of data.
//! * [`estimation`] fits sector-wise share-growth regressions, recovering the
//!   elasticity of substitution and productivity growth, with bootstrap
//!   inference and a Törnqvist benchmark.
//! * [`equilibrium`] solves projected prices under exogenous productivity
//!   change for Leontief, Cobb-Douglas and CES technologies and accounts the
//!   resulting social cost saved.
//! * [`synthetic`] generates seeded ground-truth economies used as oracles.
//! * [`io`] reads and writes the CSV bundle formats.
//!
//! Batch work (per-sector estimation, scenario sweeps) fans out over rayon
//! when the `parallel` feature is on; see [`par`].

pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod io;
pub mod par;
pub mod synthetic;
pub mod table;

pub use error::{Error, Result};
pub use equilibrium::{Economy, ShockResult};
pub use estimation::SectorEstimate;
pub use table::{DeflatorVector, IOTable, LinkedObservation, RegressionSample};
