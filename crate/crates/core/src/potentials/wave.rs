//! Three-level leapfrog with a damping sponge.
//!
//! Away from the faces each component obeys
//! `u+ = 2u - u- + dt^2 (c^2 lap(u) + f)`. Inside the sponge the update adds
//! `2 eta (u_t - r_t)`, discretised as
//!
//! ```text
//! (1 + eta dt) u+ = 2u - (1 - eta dt) u- + dt^2 (c^2 lap(u) + f) + eta dt (r+ - r-)
//! ```
//!
//! where `r` is the boundary reference field (the retarded multipole field,
//! or a constant for frozen boundaries). Static fields are never damped.
//! Boundary nodes are Dirichlet.

use super::multipole::{far_field, MomentHistory};
use super::{BoundaryKind, InitPolicy, PotentialLevel, PotentialState, SolverConfig, CFL_LIMIT};
use crate::error::{Error, Result};
use crate::sources::MassFluxState;
use crate::spacetime::{ops, Grid3, ScalarField, SimulationUnits, VectorField};

/// Advances `state` by one step with the source sampled at `state.time`.
///
/// `history` must already contain the source moments up to `state.time`
/// when the boundary is [`BoundaryKind::Multipole`]; it is ignored for
/// frozen boundaries.
pub fn step_wave(
    state: &PotentialState,
    source: &MassFluxState,
    cfg: &SolverConfig,
    units: &SimulationUnits,
    history: &MomentHistory,
) -> Result<PotentialState> {
    let g = *state.grid();
    g.check_same(source.grid(), "wave step: source")?;
    let dt = state.dt;
    let c = units.c;
    let courant = c * dt / g.dx;
    if courant > CFL_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Stability {
            cfl: courant,
            bound: CFL_LIMIT,
        });
    }
    if (source.time - state.time).abs() > 1e-9 * dt.max(state.time.abs() * 1e-6) {
        return Err(Error::Scheduling(format!(
            "source sampled at t = {}, potentials at t = {}",
            source.time, state.time
        )));
    }
    let multipole = cfg.boundary == BoundaryKind::Multipole;
    if multipole {
        check_multipole(&g)?;
        match history.last_time() {
            Some(last) if (last - state.time).abs() <= 1e-6 * dt => {}
            _ => {
                return Err(Error::Scheduling(format!(
                    "boundary history does not reach t = {}",
                    state.time
                )))
            }
        }
    }

    let t = state.time;
    let cur = &state.current;
    let prev = &state.previous;
    let fields: [&[f64]; 4] = [
        cur.phi.data(),
        cur.a.component(0),
        cur.a.component(1),
        cur.a.component(2),
    ];
    let olds: [&[f64]; 4] = [
        prev.phi.data(),
        prev.a.component(0),
        prev.a.component(1),
        prev.a.component(2),
    ];
    let sigma = source.sigma.data();
    let flux = [
        source.flux.component(0),
        source.flux.component(1),
        source.flux.component(2),
    ];
    let fpk = units.four_pi_kappa();
    let c2 = c * c;
    let dt2 = dt * dt;
    let [phi, ax, ay, az] = g.fill_many::<4, _>(|i, j, k| {
        let idx = g.index(i, j, k);
        if g.is_boundary(i, j, k) {
            return if multipole {
                far_field(history, g.position(i, j, k), t + dt, units)
            } else {
                [fields[0][idx], fields[1][idx], fields[2][idx], fields[3][idx]]
            };
        }
        let eta = cfg.sponge_rate(g.depth(i, j, k), &g, c);
        let drive = if eta > 0.0 && multipole {
            let p = g.position(i, j, k);
            let plus = far_field(history, p, t + dt, units);
            let minus = far_field(history, p, t - dt, units);
            [plus[0] - minus[0], plus[1] - minus[1], plus[2] - minus[2], plus[3] - minus[3]]
        } else {
            [0.0; 4]
        };
        let src = [-fpk * c2 * sigma[idx], fpk * flux[0][idx], fpk * flux[1][idx], fpk * flux[2][idx]];
        let ed = eta * dt;
        let mut out = [0.0; 4];
        for n in 0..4 {
            let u = fields[n][idx];
            let um = olds[n][idx];
            let rhs = 2.0 * u - um + dt2 * (c2 * ops::lap(fields[n], &g, i, j, k) + src[n]);
            out[n] = if ed > 0.0 { (rhs + ed * (um + drive[n])) / (1.0 + ed) } else { rhs };
        }
        out
    });
    let next = PotentialLevel {
        phi: ScalarField::from_vec(&g, phi)?,
        a: VectorField::from_components(&g, [ax, ay, az])?,
    };
    let step = state.step + 1;
    if !next.is_finite() {
        return Err(Error::Divergence { step });
    }
    Ok(PotentialState {
        previous: cur.clone(),
        current: next,
        time: t + dt,
        dt,
        step,
    })
}

fn check_multipole(g: &Grid3) -> Result<()> {
    if g.periodic.iter().any(|&p| p) {
        return Err(Error::Geometry(
            "multipole boundary needs open boundaries on every axis; use a frozen boundary".into(),
        ));
    }
    Ok(())
}

/// Leapfrog driver owning the state and the boundary history.
#[derive(Debug, Clone)]
pub struct WaveSolver {
    state: PotentialState,
    cfg: SolverConfig,
    units: SimulationUnits,
    history: MomentHistory,
}

impl WaveSolver {
    pub fn new(initial: PotentialState, cfg: SolverConfig, units: SimulationUnits) -> Result<Self> {
        cfg.validate()?;
        units.validate()?;
        let g = *initial.grid();
        if cfg.boundary == BoundaryKind::Multipole {
            check_multipole(&g)?;
        }
        let courant = units.c * initial.dt / g.dx;
        if courant > CFL_LIMIT * (1.0 + 1e-12) {
            return Err(Error::Stability {
                cfl: courant,
                bound: CFL_LIMIT,
            });
        }
        let history = MomentHistory::new(g.center(), initial.time, initial.dt)?;
        Ok(Self {
            state: initial,
            cfg,
            units,
            history,
        })
    }

    /// Initial data per `cfg.init` for a source sampled at the start time.
    ///
    /// `Static` solves `lap(phi) = 4 pi kappa sigma` for the lab density of
    /// the (then motionless) source, with `A = 0` on both levels.
    pub fn initial_state(
        source: &MassFluxState,
        cfg: &SolverConfig,
        units: &SimulationUnits,
    ) -> Result<PotentialState> {
        let g = *source.grid();
        let dt = cfg.dt(&g, units.c);
        match cfg.init {
            InitPolicy::Zero => PotentialState::zeros(&g, source.time, dt),
            InitPolicy::Static => {
                let phi = super::solve_static(&source.sigma, cfg, units)?;
                let level = PotentialLevel::new(phi, VectorField::zeros(&g))?;
                PotentialState::at_rest(level, source.time, dt)
            }
        }
    }

    pub fn state(&self) -> &PotentialState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn history(&self) -> &MomentHistory {
        &self.history
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Advances one step with the source sampled at the current time.
    pub fn step(&mut self, source: &MassFluxState) -> Result<&PotentialState> {
        if self.cfg.boundary == BoundaryKind::Multipole {
            self.history.observe(source)?;
        }
        self.state = step_wave(&self.state, source, &self.cfg, &self.units, &self.history)?;
        Ok(&self.state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{sample_scenario, Ball, SourceScenario};
    use crate::spacetime::Region;

    fn units() -> SimulationUnits {
        SimulationUnits::default()
    }

    #[test]
    fn zero_source_keeps_zero_state() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let cfg = SolverConfig::default();
        let init = PotentialState::zeros(&g, 0.0, cfg.dt(&g, 1.0)).unwrap();
        let mut solver = WaveSolver::new(init, cfg, units()).unwrap();
        for _ in 0..10 {
            let t = solver.time();
            solver.step(&crate::sources::MassFluxState::zeros(&g, t)).unwrap();
        }
        let s = solver.state();
        assert_eq!(s.step, 10);
        assert!(s.current.phi.data().iter().all(|&v| v == 0.0));
        assert!(s.current.a.norms(&Region::full(&g)).max == 0.0);
    }

    #[test]
    fn static_initial_data_is_stationary() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let cfg = SolverConfig {
            init: InitPolicy::Static,
            static_tolerance: 1e-12,
            ..SolverConfig::default()
        };
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.05, 0.0, 0.0], 1.0, 0.2));
        let src0 = sample_scenario(&sc, 0.0, &g, &units()).unwrap();
        let init = WaveSolver::initial_state(&src0, &cfg, &units()).unwrap();
        let phi0 = init.current.phi.clone();
        let mut solver = WaveSolver::new(init, cfg, units()).unwrap();
        for _ in 0..20 {
            let src = sample_scenario(&sc, solver.time(), &g, &units()).unwrap();
            solver.step(&src).unwrap();
        }
        let drift = solver.state().current.phi.zip_map(&phi0, |a, b| a - b).unwrap();
        let scale = phi0.norms(&Region::full(&g)).max;
        assert!(drift.norms(&Region::full(&g)).max < 1e-9 * scale);
    }

    #[test]
    fn excessive_courant_number_is_rejected() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let init = PotentialState::zeros(&g, 0.0, 0.07).unwrap();
        assert!(matches!(
            WaveSolver::new(init, SolverConfig::default(), units()),
            Err(Error::Stability { .. })
        ));
    }

    #[test]
    fn mismatched_source_time_is_a_scheduling_error() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let cfg = SolverConfig {
            boundary: BoundaryKind::Frozen,
            ..SolverConfig::default()
        };
        let init = PotentialState::zeros(&g, 0.0, cfg.dt(&g, 1.0)).unwrap();
        let hist = MomentHistory::new([0.0; 3], 0.0, 0.05).unwrap();
        let src = crate::sources::MassFluxState::zeros(&g, 0.3);
        assert!(matches!(
            step_wave(&init, &src, &cfg, &units(), &hist),
            Err(Error::Scheduling(_))
        ));
    }

    #[test]
    fn blow_up_reports_the_step() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let cfg = SolverConfig {
            boundary: BoundaryKind::Frozen,
            ..SolverConfig::default()
        };
        let mut init = PotentialState::zeros(&g, 0.0, cfg.dt(&g, 1.0)).unwrap();
        init.current.phi.set(5, 5, 5, f64::INFINITY);
        init.step = 41;
        let hist = MomentHistory::new([0.0; 3], 0.0, 0.05).unwrap();
        let src = crate::sources::MassFluxState::zeros(&g, 0.0);
        assert!(matches!(
            step_wave(&init, &src, &cfg, &units(), &hist),
            Err(Error::Divergence { step: 42 })
        ));
    }
}
