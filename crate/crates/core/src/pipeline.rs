//! Time-stepping driver: source sampling, potential update, and a sliding
//! window of the last five potential levels from which fields, the gauge
//! scalar and the residual diagnostics at the window centre are derived.

use std::collections::VecDeque;

use crate::energy::{conservation_residual, ConservationReport};
use crate::error::{Error, Result};
use crate::fields::{eq5_residuals, fields_from_levels, gauge_scalar, FieldPair, GaugeScalar, MaxwellResiduals};
use crate::potentials::{InitPolicy, PotentialLevel, PotentialState, SolverConfig, WaveSolver};
use crate::sources::{MassFluxState, SourceSampler, SourceScenario, SwitchOn};
use crate::spacetime::{Grid3, Region, SimulationUnits};

const DEPTH: usize = 5;

/// Switch-on implied by the initial-data policy.
pub fn switch_for(cfg: &SolverConfig) -> SwitchOn {
    if cfg.ramp_time == 0.0 {
        return SwitchOn::Immediate;
    }
    match cfg.init {
        InitPolicy::Zero => SwitchOn::MassRamp(cfg.ramp_time),
        InitPolicy::Static => SwitchOn::MotionRamp(cfg.ramp_time),
    }
}

#[derive(Debug, Clone)]
pub struct Pipeline {
    grid: Grid3,
    units: SimulationUnits,
    sampler: Option<SourceSampler>,
    solver: WaveSolver,
    /// Oldest first; the last entry is the solver's current level.
    levels: VecDeque<PotentialLevel>,
    /// Sources at the same times as `levels`.
    sources: VecDeque<MassFluxState>,
}

impl Pipeline {
    /// Starts at `t = 0` from the initial data selected by `cfg.init`, with
    /// the matching switch-on applied to `scenario`.
    pub fn for_scenario(grid: Grid3, scenario: SourceScenario, cfg: SolverConfig, units: SimulationUnits) -> Result<Self> {
        let sampler = SourceSampler::new(scenario, switch_for(&cfg));
        sampler.validate(&units)?;
        let source = sampler.sample(0.0, &grid, &units)?;
        let initial = WaveSolver::initial_state(&source, &cfg, &units)?;
        Self::with_initial(grid, Some(sampler), initial, cfg, units)
    }

    /// Starts from explicit initial data. `None` means no source.
    pub fn with_initial(
        grid: Grid3,
        sampler: Option<SourceSampler>,
        initial: PotentialState,
        cfg: SolverConfig,
        units: SimulationUnits,
    ) -> Result<Self> {
        grid.check_same(initial.grid(), "initial state")?;
        let t = initial.time;
        let dt = initial.dt;
        let mut p = Self {
            grid,
            units,
            sampler,
            levels: VecDeque::from([initial.previous.clone(), initial.current.clone()]),
            solver: WaveSolver::new(initial, cfg, units)?,
            sources: VecDeque::new(),
        };
        p.sources.push_back(p.sample(t - dt)?);
        p.sources.push_back(p.sample(t)?);
        Ok(p)
    }

    fn sample(&self, t: f64) -> Result<MassFluxState> {
        match &self.sampler {
            Some(s) => s.sample(t, &self.grid, &self.units),
            None => Ok(MassFluxState::zeros(&self.grid, t)),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn units(&self) -> &SimulationUnits {
        &self.units
    }

    pub fn config(&self) -> &SolverConfig {
        self.solver.config()
    }

    pub fn solver(&self) -> &WaveSolver {
        &self.solver
    }

    pub fn state(&self) -> &PotentialState {
        self.solver.state()
    }

    pub fn time(&self) -> f64 {
        self.solver.time()
    }

    pub fn dt(&self) -> f64 {
        self.state().dt
    }

    pub fn step_count(&self) -> u64 {
        self.state().step
    }

    /// Source at the current time.
    pub fn current_source(&self) -> &MassFluxState {
        self.sources.back().expect("pipeline always holds a source")
    }

    /// Advances one step.
    pub fn advance(&mut self) -> Result<()> {
        let source = self.sources.back().expect("pipeline always holds a source");
        let next = self.solver.step(source)?.current.clone();
        let t = self.solver.time();
        self.levels.push_back(next);
        self.sources.push_back(self.sample(t)?);
        while self.levels.len() > DEPTH {
            self.levels.pop_front();
            self.sources.pop_front();
        }
        Ok(())
    }

    /// Number of whole steps from the current time to `t_end`; fails unless
    /// `t_end` is on the step lattice.
    pub fn steps_until(&self, t_end: f64) -> Result<u64> {
        let n = (t_end - self.time()) / self.dt();
        let rounded = n.round();
        if rounded < 0.0 || (n - rounded).abs() > 1e-6 {
            return Err(Error::Scheduling(format!(
                "t = {t_end} is not a whole number of steps (dt = {}) after t = {}",
                self.dt(),
                self.time()
            )));
        }
        Ok(rounded as u64)
    }

    /// Advances `steps` steps, calling `observe` after each.
    pub fn run<F>(&mut self, steps: u64, mut observe: F) -> Result<()>
    where
        F: FnMut(&Pipeline) -> Result<()>,
    {
        for _ in 0..steps {
            self.advance()?;
            observe(self)?;
        }
        Ok(())
    }

    /// Fields one step behind the current time (needs two steps of history).
    pub fn latest_fields(&self) -> Option<Result<FieldPair>> {
        let n = self.levels.len();
        if n < 3 {
            return None;
        }
        let lv = [&self.levels[n - 3], &self.levels[n - 2], &self.levels[n - 1]];
        Some(fields_from_levels(lv, self.time() - self.dt(), self.dt()))
    }

    /// Source at the time of [`Pipeline::latest_fields`].
    pub fn latest_fields_source(&self) -> &MassFluxState {
        &self.sources[self.sources.len() - 2]
    }

    /// The full five-level window, centred two steps behind the current time.
    pub fn window(&self) -> Option<Window<'_>> {
        if self.levels.len() < DEPTH {
            return None;
        }
        Some(Window {
            levels: std::array::from_fn(|i| &self.levels[i]),
            sources: std::array::from_fn(|i| &self.sources[i]),
            time: self.time() - 2.0 * self.dt(),
            dt: self.dt(),
            units: self.units,
        })
    }
}

/// Five consecutive potential levels and sources; the diagnostics refer to
/// the centre time.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a> {
    pub levels: [&'a PotentialLevel; 5],
    pub sources: [&'a MassFluxState; 5],
    pub time: f64,
    pub dt: f64,
    pub units: SimulationUnits,
}

impl Window<'_> {
    /// Fields at the centre time and one step either side.
    pub fn fields(&self) -> Result<[FieldPair; 3]> {
        let l = &self.levels;
        Ok([
            fields_from_levels([l[0], l[1], l[2]], self.time - self.dt, self.dt)?,
            fields_from_levels([l[1], l[2], l[3]], self.time, self.dt)?,
            fields_from_levels([l[2], l[3], l[4]], self.time + self.dt, self.dt)?,
        ])
    }

    pub fn gauge(&self) -> Result<[GaugeScalar; 3]> {
        let l = &self.levels;
        let u = &self.units;
        Ok([
            gauge_scalar([l[0], l[1], l[2]], self.time - self.dt, self.dt, u)?,
            gauge_scalar([l[1], l[2], l[3]], self.time, self.dt, u)?,
            gauge_scalar([l[2], l[3], l[4]], self.time + self.dt, self.dt, u)?,
        ])
    }

    /// Source at the centre time.
    pub fn source(&self) -> &MassFluxState {
        self.sources[2]
    }

    pub fn maxwell_residuals(&self, region: &Region) -> Result<MaxwellResiduals> {
        let f = self.fields()?;
        let g = self.gauge()?;
        eq5_residuals([&f[0], &f[1], &f[2]], [&g[0], &g[1], &g[2]], self.source(), &self.units, region)
    }

    pub fn conservation(&self, region: &Region) -> Result<ConservationReport> {
        let f = self.fields()?;
        let s = &self.sources;
        conservation_residual([&f[0], &f[1], &f[2]], [s[1], s[2], s[3]], &self.units, region)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::diagnostic_region;
    use crate::sources::Ball;

    #[test]
    fn window_needs_three_steps() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 1.0, 0.2));
        let cfg = SolverConfig {
            sponge_width: 4,
            ..SolverConfig::default()
        };
        let mut p = Pipeline::for_scenario(g, sc, cfg, SimulationUnits::default()).unwrap();
        assert!(p.latest_fields().is_none());
        p.advance().unwrap();
        assert!(p.latest_fields().is_some());
        p.advance().unwrap();
        assert!(p.window().is_none());
        p.advance().unwrap();
        let w = p.window().unwrap();
        assert!((w.time - p.dt()).abs() < 1e-12);
        let r = w.maxwell_residuals(&diagnostic_region(&g, 4)).unwrap();
        assert!(r.norms.iter().all(|n| n.max.is_finite()));
    }

    #[test]
    fn off_lattice_end_time_is_rejected() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 1.0, 0.2));
        let p = Pipeline::for_scenario(g, sc, SolverConfig::default(), SimulationUnits::default()).unwrap();
        assert_eq!(p.steps_until(0.5).unwrap(), 10);
        assert!(matches!(p.steps_until(0.512), Err(Error::Scheduling(_))));
    }

    #[test]
    fn static_start_has_zero_motion_switch() {
        let cfg = SolverConfig {
            init: InitPolicy::Static,
            ..SolverConfig::default()
        };
        assert_eq!(switch_for(&cfg), SwitchOn::MotionRamp(1.0));
        assert_eq!(switch_for(&SolverConfig::default()), SwitchOn::MassRamp(1.0));
    }
}
