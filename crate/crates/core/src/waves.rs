//! Plane waves travelling along `+x` and the radiating-source scenario.
//!
//! The wave is `F = (0, c a1(u), c a2(u))`, `G = (0, -a2(u), a1(u))` with
//! `u = x - ct`. It has `F.G = 0`, `|F| = c|G|`, energy density
//! `W = -c^2 (a1^2 + a2^2) / (4 pi kappa)` and flux `S = (W c, 0, 0)`:
//! the flux points against the direction of travel, so the energy carried
//! forward is negative. One potential producing it is `phi = 0`,
//! `A = (0, P1(u), P2(u))` with `P_i' = a_i`, which has zero gauge scalar.

use std::f64::consts::PI;

use libm::erf;

use crate::energy::{budget_residual, budget_sample, energy_density, energy_flux, BoxSurface, BudgetSample};
use crate::error::{Error, Result};
use crate::fields::diagnostic_region;
use crate::pipeline::Pipeline;
use crate::potentials::{BoundaryKind, PotentialLevel, PotentialState, SolverConfig};
use crate::sources::SourceScenario;
use crate::spacetime::{Grid3, Region, ResidualNorms, ScalarField, SimulationUnits, VectorField};

/// Shape of one transverse amplitude as a function of `u = x - ct`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveProfile {
    Constant(f64),
    /// `amplitude * cos(wavenumber * u + phase)`.
    Sinusoid { amplitude: f64, wavenumber: f64, phase: f64 },
    /// `amplitude * exp(-(u - center)^2 / (2 width^2))`.
    GaussianPulse { amplitude: f64, center: f64, width: f64 },
}

impl WaveProfile {
    pub fn zero() -> Self {
        WaveProfile::Constant(0.0)
    }

    pub fn value(&self, u: f64) -> f64 {
        match *self {
            WaveProfile::Constant(a) => a,
            WaveProfile::Sinusoid { amplitude, wavenumber, phase } => amplitude * (wavenumber * u + phase).cos(),
            WaveProfile::GaussianPulse { amplitude, center, width } => {
                let z = (u - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
        }
    }

    /// Antiderivative in `u`; the pulse form is odd about its centre.
    pub fn antiderivative(&self, u: f64) -> f64 {
        match *self {
            WaveProfile::Constant(a) => a * u,
            WaveProfile::Sinusoid { amplitude, wavenumber, phase } => amplitude / wavenumber * (wavenumber * u + phase).sin(),
            WaveProfile::GaussianPulse { amplitude, center, width } => {
                amplitude * width * (0.5 * PI).sqrt() * erf((u - center) / (std::f64::consts::SQRT_2 * width))
            }
        }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let ok = match *self {
            WaveProfile::Constant(a) => a.is_finite(),
            WaveProfile::Sinusoid { amplitude, wavenumber, phase } => {
                amplitude.is_finite() && phase.is_finite() && wavenumber.is_finite() && wavenumber != 0.0
            }
            WaveProfile::GaussianPulse { amplitude, center, width } => {
                amplitude.is_finite() && center.is_finite() && width.is_finite() && width > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param(name, format!("invalid profile {self:?}")))
        }
    }

    fn width(&self) -> Option<f64> {
        match *self {
            WaveProfile::GaussianPulse { width, .. } => Some(width),
            WaveProfile::Sinusoid { wavenumber, .. } => Some(2.0 * PI / wavenumber.abs()),
            WaveProfile::Constant(_) => None,
        }
    }
}

/// Two transverse amplitudes of a wave travelling along `+x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveSpec {
    pub a1: WaveProfile,
    pub a2: WaveProfile,
}

impl PlaneWaveSpec {
    pub fn validate(&self) -> Result<()> {
        self.a1.validate("wave.a1")?;
        self.a2.validate("wave.a2")
    }

    /// Pulse widths and sinusoid wavelengths must span at least four cells.
    pub fn check_resolved(&self, dx: f64) -> Result<()> {
        for (name, p) in [("wave.a1", self.a1), ("wave.a2", self.a2)] {
            if let Some(w) = p.width() {
                if w < 4.0 * dx {
                    return Err(Error::param(name, format!("width {w} is under 4 cells (dx = {dx})")));
                }
            }
        }
        Ok(())
    }
}

/// `(F, G)` at `x`, `t`.
pub fn plane_wave_fields(spec: &PlaneWaveSpec, x: [f64; 3], t: f64, units: &SimulationUnits) -> ([f64; 3], [f64; 3]) {
    let u = x[0] - units.c * t;
    let (a1, a2) = (spec.a1.value(u), spec.a2.value(u));
    ([0.0, units.c * a1, units.c * a2], [0.0, -a2, a1])
}

/// `(phi, A)` at `x`, `t`.
pub fn plane_wave_potential(spec: &PlaneWaveSpec, x: [f64; 3], t: f64, units: &SimulationUnits) -> (f64, [f64; 3]) {
    let u = x[0] - units.c * t;
    (0.0, [0.0, spec.a1.antiderivative(u), spec.a2.antiderivative(u)])
}

/// `(W, S)` at `x`, `t`.
pub fn wave_energy(spec: &PlaneWaveSpec, x: [f64; 3], t: f64, units: &SimulationUnits) -> (f64, [f64; 3]) {
    let u = x[0] - units.c * t;
    let (a1, a2) = (spec.a1.value(u), spec.a2.value(u));
    let w = -units.c * units.c / units.four_pi_kappa() * (a1 * a1 + a2 * a2);
    (w, [w * units.c, 0.0, 0.0])
}

/// The analytic potential sampled on `grid` at time `t`.
pub fn plane_wave_level(spec: &PlaneWaveSpec, grid: &Grid3, t: f64, units: &SimulationUnits) -> PotentialLevel {
    let a = VectorField::from_fn(grid, |p| plane_wave_potential(spec, p, t, units).1);
    PotentialLevel::new(ScalarField::zeros(grid), a).expect("same grid")
}

/// Line grid for wave runs: `nx` nodes over `[-length/2, length/2]`, three
/// periodic nodes across.
pub fn wave_grid(nx: usize, length: f64) -> Result<Grid3> {
    if nx < 8 {
        return Err(Error::param("grid.n", "wave runs need at least 8 nodes"));
    }
    let dx = length / (nx - 1) as f64;
    Grid3::with_periodic([nx, 3, 3], dx, [-0.5 * length, -dx, -dx], [false, true, true])
}

/// Translation run: the analytic wave is loaded at `t = -dt` and `t = 0`
/// and advanced with no source for `distance / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationPlan {
    pub nx: usize,
    pub length: f64,
    pub cfl: f64,
    pub distance: f64,
}

/// Outcome of a translation run.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveDiagnostics {
    pub dx: f64,
    pub time: f64,
    /// RMS of `A - A_exact` over the interior line.
    pub potential_error: f64,
    /// RMS of `F - F_exact` at the window centre.
    pub field_error: f64,
    /// Norms of `r1..r4` at the window centre.
    pub maxwell: [ResidualNorms; 4],
    /// Energy and momentum conservation residual norms.
    pub conservation: [ResidualNorms; 2],
    /// RMS values of the field relations and conservation residuals. The
    /// line grid narrows with `dx`, so these, not the L2 norms, measure
    /// the convergence order.
    pub maxwell_rms: [f64; 4],
    pub conservation_rms: [f64; 2],
    /// `(x, W, Sx)` along the line at the window centre.
    pub profile: Vec<[f64; 3]>,
    /// Largest `W` anywhere on the grid.
    pub max_w: f64,
}

pub fn run_translation(spec: &PlaneWaveSpec, plan: &TranslationPlan, units: &SimulationUnits) -> Result<WaveDiagnostics> {
    spec.validate()?;
    let grid = wave_grid(plan.nx, plan.length)?;
    spec.check_resolved(grid.dx)?;
    let cfg = SolverConfig {
        cfl: plan.cfl,
        sponge_width: 0,
        boundary: BoundaryKind::Frozen,
        ..SolverConfig::default()
    };
    cfg.validate()?;
    let dt = cfg.dt(&grid, units.c);
    let initial = PotentialState::new(
        plane_wave_level(spec, &grid, -dt, units),
        plane_wave_level(spec, &grid, 0.0, units),
        0.0,
        dt,
    )?;
    let mut p = Pipeline::with_initial(grid, None, initial, cfg, *units)?;
    let steps = p.steps_until(plan.distance / units.c)?;
    // Two more steps put the window centre at the requested time.
    p.run(steps + 2, |_| Ok(()))?;
    let win = p.window().ok_or_else(|| Error::Scheduling("translation run too short for diagnostics".into()))?;
    let region = diagnostic_region(&grid, 0);
    let t = win.time;

    let exact = plane_wave_level(spec, &grid, t, units);
    let level = win.levels[2];
    let potential_error = rms_difference(&level.a, &exact.a, &region);
    let fields = win.fields()?;
    let exact_f = VectorField::from_fn(&grid, |x| plane_wave_fields(spec, x, t, units).0);
    let field_error = rms_difference(&fields[1].f, &exact_f, &region);
    let maxwell = win.maxwell_residuals(&region)?.norms;
    let conservation = win.conservation(&region)?.norms;

    let w = energy_density(&fields[1], units);
    let s = energy_flux(&fields[1], units);
    let profile = (0..grid.counts[0])
        .map(|i| [grid.position(i, 1, 1)[0], w.at(i, 1, 1), s.at(i, 1, 1)[0]])
        .collect();
    let max_w = w.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(WaveDiagnostics {
        dx: grid.dx,
        time: t,
        potential_error,
        field_error,
        maxwell_rms: maxwell.map(|n| n.rms(&grid, &region)),
        conservation_rms: conservation.map(|n| n.rms(&grid, &region)),
        maxwell,
        conservation,
        profile,
        max_w,
    })
}

fn rms_difference(a: &VectorField, b: &VectorField, region: &Region) -> f64 {
    let g = *a.grid();
    let sum = g.sum_over(region, |i, j, k| {
        let (x, y) = (a.at(i, j, k), b.at(i, j, k));
        (0..3).map(|c| (x[c] - y[c]).powi(2)).sum::<f64>()
    });
    (sum / region.count() as f64).sqrt()
}

/// Largest `cfl <= max_cfl` for which `period` is a whole number of steps.
pub fn cfl_for_period(grid: &Grid3, period: f64, max_cfl: f64, c: f64) -> Result<(f64, u64)> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::param("radiation.period", "must be > 0"));
    }
    let steps = (period * c / (max_cfl * grid.dx)).ceil();
    Ok((period * c / (steps * grid.dx), steps as u64))
}

/// What to measure on a radiating run.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPlan {
    /// Half-widths of the centred measurement boxes.
    pub boxes: Vec<f64>,
    /// Averaging period (the source period).
    pub period: f64,
    /// Whole periods discarded before averaging.
    pub transient_periods: u64,
    /// Whole periods averaged.
    pub periods: u64,
    /// Points where `phi` is recorded every step.
    pub probes: Vec<[f64; 3]>,
}

/// Per-period averages of one box.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRecord {
    pub half_width: f64,
    /// Time-averaged outward flux of `S` over each period.
    pub mean_flux: Vec<f64>,
    /// Time-averaged work on the source over each period.
    pub mean_work: Vec<f64>,
    /// Field energy in the box plus the energy exported through its faces,
    /// sampled at the end of each period (exported energy counted from the
    /// end of the transient).
    pub field_energy: Vec<f64>,
    /// Largest `|d/dt E_box + flux + work|` after the transient, and the
    /// largest `|work|` for scale.
    pub budget_residual: f64,
    pub work_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationReport {
    pub dt: f64,
    pub steps_per_period: u64,
    pub boxes: Vec<BoxRecord>,
    /// Energy budget of the first box at every step.
    pub budget: Vec<BudgetSample>,
    /// `(t, phi at each probe)` every step.
    pub probes: Vec<(f64, Vec<f64>)>,
    pub max_w: f64,
}

impl RadiationReport {
    /// Flux averaged over all measured periods, per box.
    pub fn mean_flux(&self) -> Vec<f64> {
        self.boxes
            .iter()
            .map(|b| b.mean_flux.iter().sum::<f64>() / b.mean_flux.len().max(1) as f64)
            .collect()
    }
}

/// Step-by-step energy bookkeeping for a set of centred boxes, with
/// optional period averaging and `phi` probes. Feed it the pipeline after
/// every step.
#[derive(Debug, Clone)]
pub struct RadiationMonitor {
    surfaces: Vec<BoxSurface>,
    dt: f64,
    period: Option<(f64, u64)>,
    start: u64,
    probe_idx: Vec<(usize, usize, usize)>,
    records: Vec<BoxRecord>,
    history: Vec<Vec<BudgetSample>>,
    exported: Vec<f64>,
    acc: Vec<(f64, f64)>,
    budget: Vec<BudgetSample>,
    probes: Vec<(f64, Vec<f64>)>,
    max_w: f64,
}

impl RadiationMonitor {
    /// `period` is `(duration, steps)`; averaging starts after
    /// `transient_periods` periods. Without a period the budget and probes
    /// are still recorded from the first step.
    pub fn new(
        grid: &Grid3,
        scenario: &SourceScenario,
        sponge_width: usize,
        boxes: &[f64],
        probes: &[[f64; 3]],
        dt: f64,
        period: Option<(f64, u64)>,
        transient_periods: u64,
    ) -> Result<Self> {
        let surfaces = boxes
            .iter()
            .map(|&h| {
                let b = BoxSurface::new(grid, grid.center(), h, sponge_width + 1)?;
                b.check_clear_of(grid, scenario)?;
                Ok(b)
            })
            .collect::<Result<Vec<_>>>()?;
        let probe_idx = probes.iter().map(|&x| node_at(grid, x)).collect::<Result<Vec<_>>>()?;
        let n = surfaces.len();
        Ok(Self {
            surfaces,
            dt,
            period,
            start: period.map_or(0, |(_, per)| transient_periods * per),
            probe_idx,
            records: boxes
                .iter()
                .map(|&h| BoxRecord {
                    half_width: h,
                    mean_flux: Vec::new(),
                    mean_work: Vec::new(),
                    field_energy: Vec::new(),
                    budget_residual: 0.0,
                    work_scale: 0.0,
                })
                .collect(),
            history: vec![Vec::new(); n],
            exported: vec![0.0; n],
            acc: vec![(0.0, 0.0); n],
            budget: Vec::new(),
            probes: Vec::new(),
            max_w: f64::NEG_INFINITY,
        })
    }

    pub fn observe(&mut self, p: &Pipeline) -> Result<()> {
        let s = p.state();
        self.probes
            .push((s.time, self.probe_idx.iter().map(|&(i, j, k)| s.current.phi.at(i, j, k)).collect()));
        let f = match p.latest_fields() {
            Some(f) => f?,
            None => return Ok(()),
        };
        let units = p.units();
        let dt = self.dt;
        let n = (f.time / dt).round() as u64;
        let w = energy_density(&f, units);
        self.max_w = self.max_w.max(w.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        for (b, surface) in self.surfaces.iter().enumerate() {
            let sample = budget_sample(&f, p.latest_fields_source(), surface, units)?;
            if b == 0 {
                self.budget.push(sample);
            }
            let h = &mut self.history[b];
            h.push(sample);
            if h.len() > 3 {
                h.remove(0);
            }
            let rec = &mut self.records[b];
            if n < self.start {
                continue;
            }
            if h.len() == 3 && n > self.start {
                let r = budget_residual([&h[0], &h[1], &h[2]])?;
                rec.budget_residual = rec.budget_residual.max(r.abs());
                rec.work_scale = rec.work_scale.max(h[1].work_on_source.abs());
            }
            let Some((period, per)) = self.period else {
                continue;
            };
            if n == self.start {
                rec.field_energy.push(sample.total_w);
                continue;
            }
            // Trapezoid weights make each period average exact for periodic
            // integrands sampled on the step lattice.
            let prev = h[h.len() - 2].surface_flux;
            let wgt = if (n - self.start) % per == 0 { 0.5 } else { 1.0 };
            self.acc[b].0 += wgt * sample.surface_flux * dt;
            self.acc[b].1 += wgt * sample.work_on_source * dt;
            self.exported[b] += 0.5 * (sample.surface_flux + prev) * dt;
            if (n - self.start) % per == 0 {
                rec.mean_flux.push(self.acc[b].0 / period);
                rec.mean_work.push(self.acc[b].1 / period);
                rec.field_energy.push(sample.total_w + self.exported[b]);
                self.acc[b] = (0.5 * sample.surface_flux * dt, 0.5 * sample.work_on_source * dt);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> RadiationReport {
        RadiationReport {
            dt: self.dt,
            steps_per_period: self.period.map_or(0, |(_, per)| per),
            boxes: self.records,
            budget: self.budget,
            probes: self.probes,
            max_w: self.max_w,
        }
    }
}

/// Runs an oscillating source for `transient_periods + periods` periods.
/// The step is shortened so that a period is a whole number of steps.
pub fn run_radiation_scenario(
    scenario: &SourceScenario,
    grid: Grid3,
    cfg: &SolverConfig,
    plan: &RadiationPlan,
    units: &SimulationUnits,
) -> Result<RadiationReport> {
    if plan.boxes.is_empty() || plan.periods == 0 {
        return Err(Error::param("radiation", "need at least one box and one measured period"));
    }
    let (cfl, per) = cfl_for_period(&grid, plan.period, cfg.cfl, units.c)?;
    let cfg = SolverConfig { cfl, ..*cfg };
    let dt = cfg.dt(&grid, units.c);
    let mut monitor = RadiationMonitor::new(
        &grid,
        scenario,
        cfg.sponge_width,
        &plan.boxes,
        &plan.probes,
        dt,
        Some((plan.period, per)),
        plan.transient_periods,
    )?;
    let mut p = Pipeline::for_scenario(grid, scenario.clone(), cfg, *units)?;
    // Fields lag the solver by one step, so one extra step closes the last period.
    p.run((plan.transient_periods + plan.periods) * per + 1, |p| monitor.observe(p))?;
    Ok(monitor.finish())
}

/// Nearest node to `x`; fails outside the grid.
pub fn node_at(grid: &Grid3, x: [f64; 3]) -> Result<(usize, usize, usize)> {
    let mut idx = [0usize; 3];
    for a in 0..3 {
        let f = ((x[a] - grid.origin[a]) / grid.dx).round();
        if !(f >= 0.0 && (f as usize) < grid.counts[a]) {
            return Err(Error::Geometry(format!("probe {x:?} lies outside the grid")));
        }
        idx[a] = f as usize;
    }
    Ok((idx[0], idx[1], idx[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_density, stress_from_l, LSample, StressSample};
    use crate::fields::FieldPair;

    fn pulse() -> PlaneWaveSpec {
        PlaneWaveSpec {
            a1: WaveProfile::GaussianPulse { amplitude: 1.0, center: 0.3, width: 0.4 },
            a2: WaveProfile::Sinusoid { amplitude: 0.5, wavenumber: 3.0, phase: 0.2 },
        }
    }

    #[test]
    fn zero_profiles_give_zero_fields() {
        let s = PlaneWaveSpec { a1: WaveProfile::zero(), a2: WaveProfile::zero() };
        let u = SimulationUnits::default();
        assert_eq!(plane_wave_fields(&s, [0.3, 1.0, 2.0], 0.7, &u), ([0.0; 3], [0.0; 3]));
        assert_eq!(wave_energy(&s, [0.3, 1.0, 2.0], 0.7, &u), (0.0, [0.0; 3]));
    }

    #[test]
    fn constant_wave_reads_off_directly() {
        let s = PlaneWaveSpec { a1: WaveProfile::Constant(1.0), a2: WaveProfile::zero() };
        let u = SimulationUnits::new(2.0, 1.0).unwrap();
        let (f, g) = plane_wave_fields(&s, [0.1, 0.2, 0.3], 1.5, &u);
        assert_eq!(f, [0.0, 2.0, 0.0]);
        assert_eq!(g, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn unit_amplitudes_give_minus_one_over_two_pi() {
        let s = PlaneWaveSpec { a1: WaveProfile::Constant(1.0), a2: WaveProfile::Constant(1.0) };
        let u = SimulationUnits::default();
        let (w, flux) = wave_energy(&s, [0.4, 0.0, 0.0], 0.0, &u);
        let expected = -1.0 / (2.0 * PI);
        assert!((w - expected).abs() < 1e-15);
        assert!((flux[0] - expected).abs() < 1e-15);
        let (f, g) = plane_wave_fields(&s, [0.4, 0.0, 0.0], 0.0, &u);
        let from_tau = StressSample::from_tau(&stress_from_l(&LSample::from_fields(f, g, u.c), &u), u.c);
        assert!((from_tau.w - expected).abs() < 1e-12);
        assert!((from_tau.s[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_identities_hold() {
        let s = pulse();
        let u = SimulationUnits::new(1.3, 0.7).unwrap();
        for n in 0..200 {
            let x = [-2.0 + 0.02 * n as f64, 0.3, -0.1];
            let t = 0.01 * n as f64;
            let (f, g) = plane_wave_fields(&s, x, t, &u);
            let fg: f64 = (0..3).map(|a| f[a] * g[a]).sum();
            let nf = f.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ng = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(fg.abs() < 1e-14);
            assert!((nf - u.c * ng).abs() < 1e-14);
            let (w, flux) = wave_energy(&s, x, t, &u);
            let closed = StressSample::from_fields(f, g, &u);
            assert!((w - closed.w).abs() <= 1e-12 * w.abs().max(1e-300));
            assert!((flux[0] - closed.s[0]).abs() <= 1e-12 * flux[0].abs().max(1e-300));
            assert!(w <= 0.0);
        }
    }

    #[test]
    fn potential_derivatives_reproduce_fields() {
        let s = pulse();
        let u = SimulationUnits::new(1.3, 0.7).unwrap();
        let h = 1e-5;
        for n in 0..50 {
            let x = [-1.0 + 0.05 * n as f64, 0.0, 0.0];
            let t = 0.2;
            let at = |x: [f64; 3], t: f64| plane_wave_potential(&s, x, t, &u).1;
            let adot: Vec<f64> = (0..3).map(|a| (at(x, t + h)[a] - at(x, t - h)[a]) / (2.0 * h)).collect();
            let dxa: Vec<f64> = (0..3)
                .map(|a| (at([x[0] + h, 0.0, 0.0], t)[a] - at([x[0] - h, 0.0, 0.0], t)[a]) / (2.0 * h))
                .collect();
            let (f, g) = plane_wave_fields(&s, x, t, &u);
            assert!((-adot[1] - f[1]).abs() < 1e-8 && (-adot[2] - f[2]).abs() < 1e-8);
            assert!((-dxa[2] - g[1]).abs() < 1e-8 && (dxa[1] - g[2]).abs() < 1e-8);
        }
    }

    #[test]
    fn erf_antiderivative_is_exact_for_the_pulse() {
        let p = WaveProfile::GaussianPulse { amplitude: 2.0, center: 0.1, width: 0.3 };
        let h = 1e-4;
        for n in 0..40 {
            let u = -1.0 + 0.05 * n as f64;
            let d = (p.antiderivative(u + h) - p.antiderivative(u - h)) / (2.0 * h);
            assert!((d - p.value(u)).abs() < 1e-7);
        }
    }

    #[test]
    fn sampled_wave_energy_matches_grid_energy() {
        let s = pulse();
        let u = SimulationUnits::default();
        let g = wave_grid(40, 4.0).unwrap();
        let f = VectorField::from_fn(&g, |x| plane_wave_fields(&s, x, 0.3, &u).0);
        let gg = VectorField::from_fn(&g, |x| plane_wave_fields(&s, x, 0.3, &u).1);
        let w = energy_density(&FieldPair::new(f, gg, 0.3).unwrap(), &u);
        for i in 0..40 {
            let expected = wave_energy(&s, g.position(i, 0, 0), 0.3, &u).0;
            assert!((w.at(i, 0, 0) - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
        }
    }

    #[test]
    fn underresolved_pulse_is_rejected() {
        let s = PlaneWaveSpec {
            a1: WaveProfile::GaussianPulse { amplitude: 1.0, center: 0.0, width: 0.1 },
            a2: WaveProfile::zero(),
        };
        assert!(s.check_resolved(0.05).is_err());
        assert!(s.check_resolved(0.02).is_ok());
    }

    #[test]
    fn translation_is_second_order() {
        let s = PlaneWaveSpec {
            a1: WaveProfile::GaussianPulse { amplitude: 1.0, center: -1.0, width: 0.4 },
            a2: WaveProfile::zero(),
        };
        let u = SimulationUnits::default();
        let errs: Vec<f64> = [81, 161]
            .iter()
            .map(|&nx| {
                let plan = TranslationPlan { nx, length: 6.4, cfl: 0.5, distance: 2.0 };
                run_translation(&s, &plan, &u).unwrap().potential_error
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order} from {errs:?}");
    }

    #[test]
    fn still_source_radiates_nothing() {
        let sc = SourceScenario::OscillatingBlob {
            center: [0.0; 3],
            width: 0.3,
            mass: 1.0,
            axis: [0.0, 0.0, 1.0],
            amplitude: 0.0,
            omega: PI,
        };
        let g = Grid3::centered(25, 0.15).unwrap();
        let cfg = SolverConfig {
            init: crate::potentials::InitPolicy::Static,
            sponge_width: 4,
            ..SolverConfig::default()
        };
        let plan = RadiationPlan { boxes: vec![0.95], period: 0.6, transient_periods: 0, periods: 1, probes: vec![] };
        let r = run_radiation_scenario(&sc, g, &cfg, &plan, &SimulationUnits::default()).unwrap();
        assert_eq!(r.mean_flux(), vec![0.0]);
        assert!(r.max_w <= 0.0);
    }
}
