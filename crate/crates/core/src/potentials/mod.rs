//! Solvers for the potential wave system in real form:
//!
//! ```text
//! d2phi/dt2 = c^2 lap(phi) - 4 pi kappa c^2 sigma
//! d2A/dt2   = c^2 lap(A)   + 4 pi kappa s
//! ```
//!
//! Three independent routes are provided for cross-validation: explicit
//! leapfrog on the grid ([`WaveSolver`]), red-black SOR for the static limit
//! `lap(phi) = 4 pi kappa sigma0` ([`solve_static`]), and direct quadrature of
//! the retarded integrals over the analytic source ([`retarded_potential`]).
//! All three are linear in the source.

mod multipole;
mod retarded;
mod static_solve;
mod wave;

pub use multipole::{far_field, MomentHistory, SourceMoments};
pub use retarded::{retarded_potential, retarded_potential_with};
pub use static_solve::{solve_static, solve_static_report, StaticSolution};
pub use wave::{step_wave, WaveSolver};

use crate::error::{Error, Result};
use crate::spacetime::{Grid3, ScalarField, VectorField};

/// Largest stable Courant number of the 3D seven-point leapfrog scheme.
pub const CFL_LIMIT: f64 = 0.577_350_269_189_625_8;

/// Scalar and vector potential on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialLevel {
    pub phi: ScalarField,
    pub a: VectorField,
}

impl PotentialLevel {
    pub fn zeros(grid: &Grid3) -> Self {
        Self {
            phi: ScalarField::zeros(grid),
            a: VectorField::zeros(grid),
        }
    }

    pub fn new(phi: ScalarField, a: VectorField) -> Result<Self> {
        phi.grid().check_same(a.grid(), "potential level")?;
        Ok(Self { phi, a })
    }

    pub fn grid(&self) -> &Grid3 {
        self.phi.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.a.is_finite()
    }
}

/// Two consecutive leapfrog levels: `previous` at `time - dt`, `current`
/// at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    pub previous: PotentialLevel,
    pub current: PotentialLevel,
    pub time: f64,
    pub dt: f64,
    /// Number of steps taken since the initial data.
    pub step: u64,
}

impl PotentialState {
    pub fn zeros(grid: &Grid3, time: f64, dt: f64) -> Result<Self> {
        Self::new(PotentialLevel::zeros(grid), PotentialLevel::zeros(grid), time, dt)
    }

    pub fn new(previous: PotentialLevel, current: PotentialLevel, time: f64, dt: f64) -> Result<Self> {
        previous.grid().check_same(current.grid(), "potential state levels")?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        Ok(Self {
            previous,
            current,
            time,
            dt,
            step: 0,
        })
    }

    /// Time-independent data: both levels equal `level`.
    pub fn at_rest(level: PotentialLevel, time: f64, dt: f64) -> Result<Self> {
        Self::new(level.clone(), level, time, dt)
    }

    pub fn grid(&self) -> &Grid3 {
        self.current.grid()
    }
}

/// What the outermost nodes are pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryKind {
    /// Retarded multipole expansion (through second moments) of the source
    /// about the grid centre; the sponge relaxes toward the same field.
    #[default]
    Multipole,
    /// Boundary values held at their initial values; the sponge damps the
    /// time derivative.
    Frozen,
}

/// How the run starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPolicy {
    /// Zero potentials; the source mass is ramped on over `ramp_time`.
    #[default]
    Zero,
    /// Static solution of the `t = 0` source with `A = 0`; the source
    /// motion is ramped on over `ramp_time`, so continuity holds throughout.
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// `c dt / dx`.
    pub cfl: f64,
    /// Sponge thickness in cells, not counting the boundary node.
    pub sponge_width: usize,
    /// Peak damping rate in units of `c / (sponge_width dx)`.
    pub sponge_strength: f64,
    pub boundary: BoundaryKind,
    pub init: InitPolicy,
    pub ramp_time: f64,
    /// Static solve stops when `max|residual| <= tol * max|rhs|`.
    pub static_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            sponge_width: 8,
            sponge_strength: 4.0,
            boundary: BoundaryKind::Multipole,
            init: InitPolicy::Zero,
            ramp_time: 1.0,
            static_tolerance: 1e-9,
            max_iterations: 20_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= CFL_LIMIT * (1.0 + 1e-12)) {
            return Err(Error::Stability {
                cfl: self.cfl,
                bound: CFL_LIMIT,
            });
        }
        if !(self.sponge_strength >= 0.0 && self.sponge_strength.is_finite()) {
            return Err(Error::param("solver.sponge_strength", "must be >= 0"));
        }
        if !(self.ramp_time >= 0.0 && self.ramp_time.is_finite()) {
            return Err(Error::param("solver.ramp_time", "must be >= 0"));
        }
        if !(self.static_tolerance > 0.0 && self.static_tolerance.is_finite()) {
            return Err(Error::param("solver.static_tolerance", "must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("solver.max_iterations", "must be > 0"));
        }
        Ok(())
    }

    pub fn dt(&self, grid: &Grid3, c: f64) -> f64 {
        self.cfl * grid.dx / c
    }

    /// Damping rate at a node `depth` cells from the nearest face.
    pub fn sponge_rate(&self, depth: usize, grid: &Grid3, c: f64) -> f64 {
        let w = self.sponge_width;
        if depth == 0 || depth >= w {
            return 0.0;
        }
        let x = (w - depth) as f64 / w as f64;
        self.sponge_strength * c / (w as f64 * grid.dx) * x * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cfl_bound_is_enforced() {
        let ok = SolverConfig::default();
        ok.validate().unwrap();
        let bad = SolverConfig {
            cfl: 0.9,
            ..ok
        };
        assert!(matches!(bad.validate(), Err(Error::Stability { .. })));
        let edge = SolverConfig {
            cfl: 1.0 / 3f64.sqrt(),
            ..ok
        };
        edge.validate().unwrap();
    }

    #[test]
    fn sponge_profile_vanishes_outside_layer() {
        let g = Grid3::centered(16, 0.1).unwrap();
        let cfg = SolverConfig::default();
        assert_eq!(cfg.sponge_rate(0, &g, 1.0), 0.0);
        assert_eq!(cfg.sponge_rate(8, &g, 1.0), 0.0);
        assert!(cfg.sponge_rate(1, &g, 1.0) > cfg.sponge_rate(4, &g, 1.0));
        assert!(cfg.sponge_rate(7, &g, 1.0) > 0.0);
    }
}
