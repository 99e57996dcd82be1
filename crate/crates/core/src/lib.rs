//! Numerical simulator and verification suite for a vector-field theory of
//! gravity in which a heavy-mass 4-flux sources a 4-potential through the
//! wave equation, and the gravitational field is described by two vector
//! fields `F` and `G` in close analogy with electrodynamics.
//!
//! Module map:
//!
//! * [`spacetime`]: units, the `ict` conventions, grids and stencils
//! * [`sources`]: heavy-mass density/flux scenarios and continuity checks
//! * [`potentials`]: leapfrog, static Poisson and retarded-potential solvers
//! * [`fields`]: `F`, `G`, the force density, gauge scalar and field-equation residuals
//! * [`force_laws`]: pointwise complex catalog of candidate force constructions
//! * [`energy`]: the energy-momentum tensor, energy density, flux, conservation
//! * [`waves`]: plane gravitational waves and radiation runs
//! * [`config`], [`runner`]: configuration and the `vecgrav` command line

pub mod config;
pub mod convergence;
pub mod energy;
pub mod error;
pub mod fields;
pub mod force_laws;
pub mod output;
pub mod pipeline;
pub mod potentials;
pub mod runner;
pub mod sources;
pub mod spacetime;
pub mod waves;

pub use error::{Error, Result};
pub use spacetime::{Grid3, Region, ScalarField, SimulationUnits, VectorField};
