//! Numerical laboratory for a pair of coupled real scalar fields in 1+1
//! dimensions with the potential
//!
//! ```text
//! V(phi, psi) = phi^2 (psi^2 - psi0^2)^2 + psi^2 (phi^2 - phi0^2)^2
//! ```
//!
//! which has five degenerate vacua. Static kinks interpolating between
//! neighbouring vacua come in three families (horizontal, vertical and
//! diagonal). The crate builds analytic seeds for them, relaxes seeds to
//! lattice energy minima with an accept-if-lower random search, assigns
//! topological charges and sectors, integrates the field equations in time
//! and runs the stimulated V-type decay experiment.
//!
//! Module map:
//!
//! - [`model`]: potential, gradient and the vacuum set.
//! - [`lattice`]: grids, field states, stencils, integrated densities, CSV snapshots.
//! - [`seeds`]: analytic initial profiles, first-order (BPS) integration, boosts, orbit law.
//! - [`charges`]: topological charges, sector labels and soliton arrays.
//! - [`relaxer`]: step-wise variational energy minimisation.
//! - [`evolver`]: leapfrog time integration.
//! - [`experiments`]: soliton tracking, pumping, decay runs and the mass census.
//! - [`cli`]: key=value run configuration and the command implementations behind the binary.

pub mod charges;
pub mod cli;
pub mod error;
pub mod evolver;
pub mod experiments;
pub mod lattice;
pub mod model;
pub mod relaxer;
pub mod seeds;

pub use charges::{Charge, Family, SectorLabel};
pub use error::{Error, Result};
pub use evolver::{EvolveConfig, RunReport};
pub use lattice::{FieldState, Grid};
pub use model::{ModelParams, Vacuum, VacuumPoint};
pub use relaxer::{RelaxConfig, RelaxOutcome};
