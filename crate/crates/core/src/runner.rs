//! Subcommand orchestration: each subcommand runs its pipeline, writes its
//! artifacts and returns a report whose checks decide the exit status.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::convergence::{cfl_for_time, fitted_order, sourced_study, wave_study, SourcedRow, WaveRow};
use crate::energy::{energy_density, tensor_suite, StressSample};
use crate::error::{Error, Result};
use crate::fields::{fields_from_levels, force_density};
use crate::force_laws::{identity_suite, IdentityCheck};
use crate::output::{csv_text, fields_text, fmt_f64, snapshot_text, energy_text, OutputDir, WAVE_PROFILE_HEADER};
use crate::pipeline::{switch_for, Pipeline};
use crate::potentials::{retarded_potential_with, solve_static_report, PotentialLevel, SolverConfig};
use crate::sources::{Ball, SourceSampler, SourceScenario};
use crate::spacetime::{ops, Grid3, VectorField};
use crate::waves::{
    cfl_for_period, plane_wave_fields, wave_energy, PlaneWaveSpec, RadiationMonitor, RadiationReport, TranslationPlan,
    WaveProfile,
};

/// Fitted refinement orders must land in this band.
pub const ORDER_BAND: (f64, f64) = (1.7, 2.3);
/// Relative tolerance of the exterior Newtonian potential.
pub const NEWTONIAN_TOLERANCE: f64 = 0.01;
/// Relative tolerance of the retarded-potential cross-check.
pub const RETARDED_TOLERANCE: f64 = 0.03;
/// Relative disagreement allowed between the mean fluxes of two boxes.
pub const FLUX_AGREEMENT: f64 = 0.10;
/// Roundoff bound for relations that hold exactly by construction,
/// relative to the natural scale of the compared quantity.
pub const EXACT_TOLERANCE: f64 = 1e-10;
/// Closed-form identities.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;
/// Retarded-potential comparisons per probe.
const RETARDED_SAMPLES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Static,
    Wave,
    Identities,
    Convergence,
}

impl Command {
    pub const ALL: [Command; 5] = [Command::Run, Command::Static, Command::Wave, Command::Identities, Command::Convergence];

    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Static => "static",
            Command::Wave => "wave",
            Command::Identities => "identities",
            Command::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown subcommand `{s}` (expected run, static, wave, identities or convergence)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Relation {
    AtMost(f64),
    Below(f64),
    Within(f64, f64),
}

impl Relation {
    fn holds(self, x: f64) -> bool {
        match self {
            Relation::AtMost(t) => x <= t,
            Relation::Below(t) => x < t,
            Relation::Within(lo, hi) => lo <= x && x <= hi,
        }
    }

    fn describe(self) -> String {
        match self {
            Relation::AtMost(t) => format!("<= {}", fmt_f64(t)),
            Relation::Below(t) => format!("< {}", fmt_f64(t)),
            Relation::Within(lo, hi) => format!("in [{}, {}]", fmt_f64(lo), fmt_f64(hi)),
        }
    }
}

/// One named check. A NaN observation always fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub relation: Relation,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, relation: Relation) -> Self {
        Self { name: name.into(), observed, relation }
    }

    pub fn passed(&self) -> bool {
        self.relation.holds(self.observed)
    }
}

impl From<&IdentityCheck> for Check {
    fn from(c: &IdentityCheck) -> Self {
        // Identity checks are upper bounds except the lower-bound controls.
        let relation = if c.lower_bound {
            Relation::Within(c.tolerance, f64::INFINITY)
        } else {
            Relation::AtMost(c.tolerance)
        };
        Check::new(c.name.clone(), c.observed, relation)
    }
}

/// Every check a subcommand ran, plus informational values.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub command: String,
    pub checks: Vec<Check>,
    pub info: Vec<(String, f64)>,
}

impl DiagnosticsReport {
    pub fn new(command: Command) -> Self {
        Self { command: command.name().into(), checks: Vec::new(), info: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, observed: f64, relation: Relation) {
        self.checks.push(Check::new(name, observed, relation));
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.info.push((name.into(), value));
    }

    /// True iff there is at least one check and all pass.
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command {}", self.command);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {} observed {} required {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                fmt_f64(c.observed),
                c.relation.describe()
            );
        }
        for (name, v) in &self.info {
            let _ = writeln!(out, "info {name} {}", fmt_f64(*v));
        }
        let _ = writeln!(
            out,
            "status {} ({} of {} checks passed)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.iter().filter(|c| c.passed()).count(),
            self.checks.len()
        );
        out
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<std::path::PathBuf>,
    /// Node count per axis; the physical domain length is kept.
    pub resolution: Option<usize>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &RunConfig) -> Result<RunConfig> {
        let mut cfg = cfg.clone();
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if let Some(n) = self.resolution {
            if n < 3 {
                return Err(Error::param("resolution", format!("need at least 3 nodes, got {n}")));
            }
            if let Some(g) = cfg.grid.as_mut() {
                g.dx = g.length() / (n - 1) as f64;
                g.n = n;
                let grid = g.grid()?;
                if let Some(s) = &cfg.scenario {
                    SourceSampler::new(s.clone(), switch_for(&cfg.solver)).check_fits(&grid)?;
                }
            }
            cfg.wave.nx = n;
        }
        if let Some(x) = self.lambda {
            cfg.force.lambda = x;
        }
        if let Some(x) = self.mu {
            cfg.force.mu = x;
        }
        if let Some(x) = self.nu {
            cfg.force.nu = x;
        }
        cfg.force.validate()?;
        Ok(cfg)
    }
}

/// Runs `command`, writing artifacts, `report.txt` and `manifest.txt` into
/// `cfg.output.dir`. On error the manifest is still written and flagged
/// partial.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<DiagnosticsReport> {
    let mut out = OutputDir::create(&cfg.output.dir, command.name())?;
    let result = match command {
        Command::Run => run_scenario(cfg, &mut out),
        Command::Static => run_static(cfg, &mut out),
        Command::Wave => run_wave(cfg, &mut out),
        Command::Identities => run_identities(cfg),
        Command::Convergence => run_convergence(cfg, &mut out),
    };
    match result {
        Ok(report) => {
            out.write("report", None, "report.txt", &report.to_text())?;
            out.finish()?;
            Ok(report)
        }
        Err(e) => {
            out.manifest.mark_partial(&e.to_string());
            out.finish()?;
            Err(e)
        }
    }
}

/// Reads, parses and runs a config file.
pub fn execute_file(command: Command, path: &Path, overrides: &Overrides) -> Result<DiagnosticsReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = overrides.apply(&crate::config::parse_config(&text)?)?;
    execute(command, &cfg)
}

fn run_identities(cfg: &RunConfig) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::new(Command::Identities);
    let n = cfg.identity_samples;
    for c in identity_suite(n, cfg.seed, &cfg.force, &cfg.units)? {
        report.checks.push((&c).into());
    }
    for c in tensor_suite(n, cfg.seed, &cfg.units)? {
        report.checks.push((&c).into());
    }
    report.note("samples", n as f64);
    Ok(report)
}

/// Balls whose exterior potential is `-kappa M / r`.
fn newtonian_balls(s: &SourceScenario) -> Result<Vec<Ball>> {
    match s {
        SourceScenario::StaticBall(b) => Ok(vec![*b]),
        SourceScenario::TwoStaticBalls(a, b) => Ok(vec![*a, *b]),
        _ => Err(Error::Usage("`static` needs scenario.kind = static_ball or two_balls".into())),
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Outcome of the static solve against the exterior point-mass potential.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonianCheck {
    /// Largest `|phi - phi_newton| / |phi_newton|` over interior nodes
    /// farther than `radius + 3 width` from every ball.
    pub max_relative_error: f64,
    /// Nodes that entered the comparison.
    pub compared: usize,
    /// Largest `|force_density + sigma0 grad(phi)|`; zero when the default
    /// law reduces to the Newtonian force cell by cell.
    pub force_mismatch: f64,
    pub iterations: usize,
    pub residual: f64,
    /// `(r, phi, phi_newton, relative_error)` along +x from the first ball.
    pub profile: Vec<[f64; 4]>,
    pub level: PotentialLevel,
    pub fields: crate::fields::FieldPair,
}

pub fn newtonian_check(grid: &Grid3, scenario: &SourceScenario, cfg: &SolverConfig, units: &crate::SimulationUnits) -> Result<NewtonianCheck> {
    let balls = newtonian_balls(scenario)?;
    let source = SourceSampler::immediate(scenario.clone()).sample(0.0, grid, units)?;
    let sigma0 = source.comoving_density(units)?;
    let sol = solve_static_report(&sigma0, cfg, units)?;
    let newton = |p: [f64; 3]| -> Option<f64> {
        let mut phi = 0.0;
        for b in &balls {
            let r = distance(p, b.center);
            if r <= b.radius + 3.0 * b.width {
                return None;
            }
            phi -= units.kappa * b.mass / r;
        }
        Some(phi)
    };
    let [nx, ny, nz] = grid.counts;
    let (mut worst, mut compared) = (0.0f64, 0usize);
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            for k in 1..nz - 1 {
                if let Some(e) = newton(grid.position(i, j, k)) {
                    worst = worst.max(((sol.phi.at(i, j, k) - e) / e).abs());
                    compared += 1;
                }
            }
        }
    }
    let level = PotentialLevel::new(sol.phi.clone(), VectorField::zeros(grid))?;
    let dt = cfg.dt(grid, units.c);
    let fields = fields_from_levels([&level, &level, &level], 0.0, dt)?;
    let g = force_density(&fields, &source)?;
    let grad = ops::grad(&sol.phi);
    let mut mismatch = 0.0f64;
    for idx in 0..grid.len() {
        for a in 0..3 {
            let newtonian = -sigma0.data()[idx] * grad.component(a)[idx];
            mismatch = mismatch.max((g.component(a)[idx] - newtonian).abs());
        }
    }
    let c0 = crate::waves::node_at(grid, balls[0].center)?;
    let profile = (c0.0..nx)
        .map(|i| {
            let p = grid.position(i, c0.1, c0.2);
            let phi = sol.phi.at(i, c0.1, c0.2);
            let r = distance(p, balls[0].center);
            let exact = -units.kappa * balls.iter().map(|b| b.mass / distance(p, b.center)).sum::<f64>();
            [r, phi, exact, ((phi - exact) / exact).abs()]
        })
        .collect();
    Ok(NewtonianCheck {
        max_relative_error: worst,
        compared,
        force_mismatch: mismatch,
        iterations: sol.iterations,
        residual: sol.residual,
        profile,
        level,
        fields,
    })
}

fn run_static(cfg: &RunConfig, out: &mut OutputDir) -> Result<DiagnosticsReport> {
    let grid = cfg.require_grid()?.grid()?;
    let scenario = cfg.require_scenario()?;
    let n = newtonian_check(&grid, scenario, &cfg.solver, &cfg.units)?;
    out.write(
        "radial_profile",
        Some(0.0),
        "radial_profile.csv",
        &csv_text("r,phi,phi_newton,relative_error", &n.profile),
    )?;
    out.write("snapshot", Some(0.0), "snapshot_static.csv", &snapshot_text(&n.level))?;
    out.write("fields", Some(0.0), "fields_static.csv", &fields_text(&n.fields))?;
    let mut report = DiagnosticsReport::new(Command::Static);
    report.check("exterior potential matches -kappa M / r (relative)", n.max_relative_error, Relation::AtMost(NEWTONIAN_TOLERANCE));
    report.check("exterior nodes compared", n.compared as f64, Relation::Within(1.0, f64::INFINITY));
    report.check("force density equals -sigma0 grad(phi) cellwise", n.force_mismatch, Relation::AtMost(0.0));
    let max_w = energy_density(&n.fields, &cfg.units).data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.check("max W (never positive)", max_w, Relation::AtMost(0.0));
    report.note("relaxation iterations", n.iterations as f64);
    report.note("relaxation residual", n.residual);
    Ok(report)
}

fn wave_spec(cfg: &RunConfig) -> PlaneWaveSpec {
    PlaneWaveSpec {
        a1: WaveProfile::GaussianPulse { amplitude: cfg.wave.amplitude, center: cfg.wave.center, width: cfg.wave.width },
        a2: WaveProfile::zero(),
    }
}

fn orders(h: &[f64], series: impl Fn(usize) -> f64, n: usize) -> Result<f64> {
    let e: Vec<f64> = (0..n).map(series).collect();
    fitted_order(h, &e)
}

fn run_wave(cfg: &RunConfig, out: &mut OutputDir) -> Result<DiagnosticsReport> {
    let spec = wave_spec(cfg);
    let w = &cfg.wave;
    let plan = TranslationPlan { nx: w.nx, length: w.length, cfl: w.cfl, distance: w.distance };
    let rows = wave_study(&spec, &plan, &cfg.units, 3)?;
    let mut report = DiagnosticsReport::new(Command::Wave);
    let mut table = Vec::new();
    for r in &rows {
        let d = crate::waves::run_translation(&spec, &TranslationPlan { nx: r.nx, ..plan }, &cfg.units)?;
        out.write("wave_profile", Some(d.time), &format!("wave_profile_nx{}.csv", r.nx), &csv_text(WAVE_PROFILE_HEADER, &d.profile))?;
        let exported: f64 = d.profile.iter().map(|p| p[2]).sum::<f64>() * d.dx;
        report.check(format!("nx {} wave energy flux along +x is negative", r.nx), exported, Relation::Below(0.0));
        table.push(wave_row_values(r));
    }
    out.write(
        "wave_convergence",
        None,
        "wave_convergence.csv",
        &csv_text("nx,dx,potential_error,field_error,energy_residual,momentum_residual,r1,r2,r3,r4,max_W", &table),
    )?;
    let h: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let band = Relation::Within(ORDER_BAND.0, ORDER_BAND.1);
    let n = rows.len();
    report.check("order of translated potential error", orders(&h, |i| rows[i].potential_error, n)?, band);
    report.check("order of translated field error", orders(&h, |i| rows[i].field_error, n)?, band);
    report.check("order of source-free energy conservation residual", orders(&h, |i| rows[i].conservation[0], n)?, band);
    report.check("order of source-free momentum conservation residual", orders(&h, |i| rows[i].conservation[1], n)?, band);
    report.check("order of sampled wave r4 residual", orders(&h, |i| rows[i].sampled_maxwell[3], n)?, band);
    let amp = w.amplitude.abs().max(f64::MIN_POSITIVE);
    for (k, name) in ["r1", "r2", "r3"].iter().enumerate() {
        let worst = rows.iter().map(|r| r.sampled_maxwell[k]).fold(0.0, f64::max) / amp;
        report.check(format!("sampled wave {name} residual vanishes (relative to amplitude)"), worst, Relation::AtMost(EXACT_TOLERANCE));
    }
    let max_w = rows.iter().map(|r| r.max_w).fold(f64::NEG_INFINITY, f64::max);
    report.check("max W on the translated wave (never positive)", max_w, Relation::AtMost(0.0));
    for (name, dev) in closed_form_wave_checks(&spec, cfg) {
        report.check(name, dev, Relation::AtMost(CLOSED_FORM_TOLERANCE));
    }
    Ok(report)
}

fn wave_row_values(r: &WaveRow) -> Vec<f64> {
    let mut v = vec![r.nx as f64, r.dx, r.potential_error, r.field_error, r.conservation[0], r.conservation[1]];
    v.extend(r.sampled_maxwell);
    v.push(r.max_w);
    v
}

/// Closed-form energy checks: the unit-amplitude wave value and the two
/// evaluations of `W` and `S` along the configured pulse.
fn closed_form_wave_checks(spec: &PlaneWaveSpec, cfg: &RunConfig) -> Vec<(String, f64)> {
    let u = &cfg.units;
    let unit = PlaneWaveSpec { a1: WaveProfile::Constant(1.0), a2: WaveProfile::Constant(1.0) };
    let (w, s) = wave_energy(&unit, [0.0; 3], 0.0, u);
    let expected = -u.c * u.c / (2.0 * std::f64::consts::PI * u.kappa);
    let mut unit_dev = ((w - expected) / expected).abs();
    unit_dev = unit_dev.max(((s[0] - expected * u.c) / (expected * u.c)).abs()).max(s[1].abs()).max(s[2].abs());
    let (mut dw, mut ds, mut sign) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for i in 0..=400 {
        let x = [-cfg.wave.length / 2.0 + cfg.wave.length * i as f64 / 400.0, 0.0, 0.0];
        let (f, g) = plane_wave_fields(spec, x, 0.0, u);
        let (w, s) = wave_energy(spec, x, 0.0, u);
        let closed = StressSample::from_fields(f, g, u);
        let scale = w.abs().max(f64::MIN_POSITIVE);
        dw = dw.max((w - closed.w).abs() / scale);
        ds = ds.max((0..3).map(|a| (s[a] - closed.s[a]).abs()).fold(0.0, f64::max) / (u.c * scale));
        sign = sign.max(w);
    }
    vec![
        ("unit plane wave W = -c^2/(2 pi kappa), S = (W c, 0, 0)".into(), unit_dev),
        ("pulse W closed form equals W from fields".into(), dw),
        ("pulse S closed form equals S from fields".into(), ds),
        ("pulse closed-form W (never positive)".into(), sign.max(0.0)),
    ]
}

fn sourced_row_values(r: &SourcedRow) -> Vec<f64> {
    let mut v = vec![r.n as f64, r.dx];
    v.extend(r.maxwell);
    v.extend([r.gauge, r.conservation[0], r.conservation[1], r.budget, r.work_scale, r.continuity, r.max_w]);
    v
}

fn run_convergence(cfg: &RunConfig, out: &mut OutputDir) -> Result<DiagnosticsReport> {
    let base = cfg.require_grid()?;
    let scenario = cfg.require_scenario()?;
    let cc = &cfg.convergence;
    if cc.resolutions.len() < 2 {
        return Err(Error::param("convergence.resolutions", "need at least two resolutions"));
    }
    let length = base.length();
    let sponge_length = cfg.solver.sponge_width as f64 * base.dx;
    let rows = sourced_study(scenario, &cfg.solver, &cfg.units, length, sponge_length, &cc.resolutions, cc.time, cc.box_half_width)?;
    out.write(
        "convergence",
        Some(cc.time),
        "convergence.csv",
        &csv_text(
            "n,dx,r1,r2,r3,r4,chi,energy_residual,momentum_residual,budget_residual,work_scale,continuity,max_W",
            rows.iter().map(sourced_row_values),
        ),
    )?;
    let mut report = DiagnosticsReport::new(Command::Convergence);
    let h: Vec<f64> = rows.iter().map(|r| r.dx).collect();
    let n = rows.len();
    let band = Relation::Within(ORDER_BAND.0, ORDER_BAND.1);
    for (k, name) in ["r1", "r2"].iter().enumerate() {
        let worst = rows.iter().map(|r| r.maxwell_max[k] / r.maxwell[2].max(r.maxwell[3])).fold(0.0, f64::max);
        report.check(format!("{name} vanishes identically (relative to r3, r4)"), worst, Relation::AtMost(EXACT_TOLERANCE));
    }
    report.check("order of r3", orders(&h, |i| rows[i].maxwell[2], n)?, band);
    report.check("order of r4", orders(&h, |i| rows[i].maxwell[3], n)?, band);
    report.check("order of gauge scalar", orders(&h, |i| rows[i].gauge, n)?, band);
    report.check("order of energy conservation residual", orders(&h, |i| rows[i].conservation[0], n)?, band);
    report.check("order of box energy budget residual", orders(&h, |i| rows[i].budget, n)?, band);
    let max_w = rows.iter().map(|r| r.max_w).fold(f64::NEG_INFINITY, f64::max);
    report.check("max W over every run (never positive)", max_w, Relation::AtMost(0.0));
    if let Ok(o) = orders(&h, |i| rows[i].conservation[1], n) {
        report.note("order of momentum conservation residual", o);
    }
    for r in &rows {
        report.note(format!("n {} budget residual relative to work", r.n), r.budget / r.work_scale.max(f64::MIN_POSITIVE));
    }
    Ok(report)
}

/// Outcome of a `run`: the radiation bookkeeping plus the retarded
/// cross-check at each probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub radiation: RadiationReport,
    /// Largest `|phi - phi_retarded| / |phi_retarded|` per probe after the
    /// transient.
    pub retarded_error: Vec<f64>,
    pub duration: f64,
}

/// Runs `cfg.scenario` for `cfg.duration`, calling `snapshot` with the
/// pipeline every `cfg.output.snapshot_stride` steps and after the last.
pub fn simulate(cfg: &RunConfig, mut snapshot: impl FnMut(&Pipeline) -> Result<()>) -> Result<ScenarioRun> {
    let grid = cfg.require_grid()?.grid()?;
    let scenario = cfg.require_scenario()?;
    let d = &cfg.diagnostics;
    let (cfl, period) = match d.period {
        Some(p) => {
            let (cfl, per) = cfl_for_period(&grid, p, cfg.solver.cfl, cfg.units.c)?;
            (cfl, Some((p, per)))
        }
        None => (cfl_for_time(grid.dx, cfg.duration, cfg.solver.cfl, cfg.units.c).0, None),
    };
    let solver = SolverConfig { cfl, ..cfg.solver };
    let dt = solver.dt(&grid, cfg.units.c);
    let mut monitor =
        RadiationMonitor::new(&grid, scenario, solver.sponge_width, &d.boxes, &d.probes, dt, period, d.transient_periods)?;
    let mut p = Pipeline::for_scenario(grid, scenario.clone(), solver, cfg.units)?;
    let steps = p.steps_until(cfg.duration)?;
    let stride = cfg.output.snapshot_stride;
    // Fields lag the state by one step, so one extra step lets the monitor
    // see the field sample at the end time.
    p.run(steps + 1, |p| {
        monitor.observe(p)?;
        let n = p.step_count();
        if n <= steps && ((stride > 0 && n % stride == 0) || n == steps) {
            snapshot(p)?;
        }
        Ok(())
    })?;
    let radiation = monitor.finish();
    let t0 = period.map_or(0.0, |(per, _)| per * d.transient_periods as f64);
    let sampler = SourceSampler::new(scenario.clone(), switch_for(&solver));
    let late: Vec<&(f64, Vec<f64>)> = radiation.probes.iter().filter(|(t, _)| *t >= t0 - 1e-9 && *t <= cfg.duration + 1e-9).collect();
    let picks: Vec<&(f64, Vec<f64>)> = if late.is_empty() {
        Vec::new()
    } else {
        (0..RETARDED_SAMPLES.min(late.len()))
            .map(|m| late[(m * (late.len() - 1)) / (RETARDED_SAMPLES.min(late.len()) - 1).max(1)])
            .collect()
    };
    let mut retarded_error = vec![0.0f64; d.probes.len()];
    for (t, phis) in picks {
        for (k, point) in d.probes.iter().enumerate() {
            let exact = retarded_potential_with(&sampler, *point, *t, d.retarded_resolution, &cfg.units)?.phi;
            let scale = exact.abs().max(f64::MIN_POSITIVE);
            retarded_error[k] = retarded_error[k].max((phis[k] - exact).abs() / scale);
        }
    }
    Ok(ScenarioRun { radiation, retarded_error, duration: cfg.duration })
}

/// Checks on a finished scenario run. Radiation checks apply to moving
/// sources with at least two boxes and a measured period.
pub fn scenario_checks(cfg: &RunConfig, run: &ScenarioRun, report: &mut DiagnosticsReport) {
    let rad = &run.radiation;
    report.check("max W over the run (never positive)", rad.max_w, Relation::AtMost(0.0));
    let moving = cfg.scenario.as_ref().is_some_and(|s| !s.is_static());
    let means = rad.mean_flux();
    for (b, rec) in rad.boxes.iter().enumerate() {
        let hw = rec.half_width;
        if !rec.mean_flux.is_empty() {
            report.note(format!("box {hw} mean outward flux"), means[b]);
        }
        report.note(format!("box {hw} budget residual relative to work"), rec.budget_residual / rec.work_scale.max(f64::MIN_POSITIVE));
        if moving && !rec.mean_flux.is_empty() {
            let worst = rec.mean_flux.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            report.check(format!("box {hw} period-averaged outward flux is negative"), worst, Relation::Below(0.0));
            let rise = rec.field_energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            report.check(format!("box {hw} field energy decreases every period"), rise, Relation::Below(0.0));
        }
    }
    if moving && rad.boxes.len() >= 2 && !rad.boxes[0].mean_flux.is_empty() {
        let (a, b) = (means[0], means[1]);
        let spread = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        report.check("mean flux agrees between the two boxes (relative)", spread, Relation::AtMost(FLUX_AGREEMENT));
    }
    for (k, e) in run.retarded_error.iter().enumerate() {
        report.check(format!("probe {k} phi agrees with the retarded potential (relative)"), *e, Relation::AtMost(RETARDED_TOLERANCE));
    }
}

fn run_scenario(cfg: &RunConfig, out: &mut OutputDir) -> Result<DiagnosticsReport> {
    let mut written = Vec::new();
    let run = simulate(cfg, |p| {
        let s = p.state();
        let n = p.step_count();
        written.push(("snapshot", s.time, format!("snapshot_{n:06}.csv"), snapshot_text(&s.current)));
        if let Some(f) = p.latest_fields() {
            let f = f?;
            written.push(("fields", f.time, format!("fields_{:06}.csv", n - 1), fields_text(&f)));
        }
        Ok(())
    });
    // Snapshots are written even when the run fails part-way.
    for (kind, t, name, text) in &written {
        out.write(kind, Some(*t), name, text)?;
    }
    let run = run?;
    let rad = &run.radiation;
    if !rad.budget.is_empty() {
        out.write("energy", None, "energy.csv", &energy_text(&rad.budget))?;
    }
    if !rad.probes.is_empty() && !cfg.diagnostics.probes.is_empty() {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..cfg.diagnostics.probes.len()).map(|k| format!("phi_probe{k}")))
            .collect();
        let rows = rad.probes.iter().map(|(t, v)| std::iter::once(*t).chain(v.iter().cloned()).collect::<Vec<f64>>());
        out.write("probes", None, "probes.csv", &csv_text(&header.join(","), rows))?;
    }
    if !rad.boxes.is_empty() {
        let rows = rad.boxes.iter().flat_map(|b| {
            (0..b.mean_flux.len()).map(move |k| vec![b.half_width, k as f64, b.mean_flux[k], b.mean_work[k], b.field_energy[k + 1]])
        });
        out.write(
            "periods",
            None,
            "periods.csv",
            &csv_text("half_width,period,mean_flux,mean_work,field_energy", rows),
        )?;
    }
    let mut report = DiagnosticsReport::new(Command::Run);
    scenario_checks(cfg, &run, &mut report);
    report.note("dt", rad.dt);
    report.note("duration", run.duration);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn report_passes_only_with_checks_all_passing() {
        let mut r = DiagnosticsReport::new(Command::Wave);
        assert!(!r.passed());
        r.check("a", 1.0, Relation::AtMost(1.0));
        assert!(r.passed());
        r.check("b", 0.0, Relation::Below(0.0));
        assert!(!r.passed());
        r.check("c", f64::NAN, Relation::Within(0.0, 1.0));
        assert_eq!(r.failures().count(), 2);
        assert!(r.to_text().contains("FAIL b observed"));
        assert!(r.to_text().ends_with("status FAIL (1 of 3 checks passed)\n"));
    }

    #[test]
    fn subcommand_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(Command::parse(c.name()).unwrap(), c);
        }
        assert!(Command::parse("plot").is_err());
    }

    #[test]
    fn resolution_override_keeps_the_domain() {
        let cfg = parse_config("grid.n = 31\ngrid.dx = 0.2\nscenario.kind = static_ball\nscenario.mass = 1\nscenario.width = 0.4\n").unwrap();
        let o = Overrides { resolution: Some(61), lambda: Some(0.5), ..Default::default() };
        let c2 = o.apply(&cfg).unwrap();
        let g = c2.grid.unwrap();
        assert_eq!(g.n, 61);
        assert!((g.length() - 6.0).abs() < 1e-12);
        assert_eq!(c2.force.lambda, 0.5);
        assert!(Overrides { resolution: Some(2), ..Default::default() }.apply(&cfg).is_err());
    }

    #[test]
    fn static_ball_reproduces_newtonian_potential() {
        let grid = Grid3::centered(33, 0.2).unwrap();
        let s = SourceScenario::StaticBall(Ball::gaussian(grid.center(), 1.0, 0.4));
        let n = newtonian_check(&grid, &s, &SolverConfig::default(), &crate::SimulationUnits::default()).unwrap();
        assert!(n.max_relative_error < 0.01, "{}", n.max_relative_error);
        assert_eq!(n.force_mismatch, 0.0);
        assert!(n.compared > 1000);
    }

    #[test]
    fn static_rejects_moving_scenarios() {
        let grid = Grid3::centered(21, 0.2).unwrap();
        let s = SourceScenario::OscillatingBlob {
            center: grid.center(),
            width: 0.4,
            mass: 1.0,
            axis: [0.0, 0.0, 1.0],
            amplitude: 0.1,
            omega: 1.0,
        };
        assert!(matches!(
            newtonian_check(&grid, &s, &SolverConfig::default(), &crate::SimulationUnits::default()),
            Err(Error::Usage(_))
        ));
    }
}
