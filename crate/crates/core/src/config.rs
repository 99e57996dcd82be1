//! Line-based run configuration: `section.key = value`, `#` comments.
//!
//! Every key is optional except where a subcommand needs it (`grid.*` and
//! `scenario.*` for grid runs). Unknown keys, duplicate keys and invalid
//! values are all reported together, each with its line number.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::force_laws::ForceLawParams;
use crate::potentials::{BoundaryKind, InitPolicy, SolverConfig};
use crate::sources::{Ball, SourceScenario};
use crate::spacetime::{Grid3, SimulationUnits};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

/// Cubic grid centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub dx: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid3> {
        Grid3::centered(self.n, self.dx)
    }

    /// Edge length `(n - 1) dx`.
    pub fn length(&self) -> f64 {
        (self.n - 1) as f64 * self.dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// Steps between snapshots; 0 writes only the final state.
    pub snapshot_stride: u64,
}

/// Energy boxes, period averaging and probes for grid runs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSpec {
    pub boxes: Vec<f64>,
    pub period: Option<f64>,
    pub transient_periods: u64,
    pub probes: Vec<[f64; 3]>,
    /// Quadrature cells per support diameter for retarded-potential probes.
    pub retarded_resolution: usize,
}

/// Gaussian-pulse translation test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveConfig {
    pub nx: usize,
    pub length: f64,
    pub distance: f64,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    pub cfl: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self {
            nx: 81,
            length: 6.4,
            distance: 2.0,
            amplitude: 1.0,
            width: 0.4,
            center: -1.0,
            cfl: 0.5,
        }
    }
}

/// Refinement study over a fixed physical domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub resolutions: Vec<usize>,
    /// Time at which residuals are measured.
    pub time: f64,
    /// Half-width of the energy-budget box.
    pub box_half_width: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 48, 64],
            time: 2.0,
            box_half_width: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: SimulationUnits,
    pub grid: Option<GridSpec>,
    pub solver: SolverConfig,
    pub scenario: Option<SourceScenario>,
    pub duration: f64,
    pub seed: u64,
    pub output: OutputSpec,
    pub force: ForceLawParams,
    pub diagnostics: DiagnosticsSpec,
    pub wave: WaveConfig,
    pub convergence: ConvergenceConfig,
    pub identity_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: SimulationUnits::default(),
            grid: None,
            solver: SolverConfig::default(),
            scenario: None,
            duration: 1.0,
            seed: 0,
            output: OutputSpec {
                dir: PathBuf::from("out"),
                snapshot_stride: 0,
            },
            force: ForceLawParams::default(),
            diagnostics: DiagnosticsSpec {
                retarded_resolution: 48,
                ..DiagnosticsSpec::default()
            },
            wave: WaveConfig::default(),
            convergence: ConvergenceConfig::default(),
            identity_samples: 100_000,
        }
    }
}

const KEYS: &[&str] = &[
    "units.c",
    "units.kappa",
    "grid.n",
    "grid.dx",
    "solver.cfl",
    "solver.sponge_width",
    "solver.sponge_strength",
    "solver.boundary",
    "solver.init",
    "solver.ramp_time",
    "solver.static_tolerance",
    "solver.max_iterations",
    "scenario.kind",
    "scenario.center",
    "scenario.mass",
    "scenario.width",
    "scenario.radius",
    "scenario.axis",
    "scenario.amplitude",
    "scenario.omega",
    "scenario.linear_density",
    "scenario.rate",
    "scenario.center2",
    "scenario.mass2",
    "scenario.width2",
    "scenario.radius2",
    "run.duration",
    "run.seed",
    "output.dir",
    "output.snapshot_stride",
    "force.lambda",
    "force.mu",
    "force.nu",
    "diagnostics.boxes",
    "diagnostics.period",
    "diagnostics.transient_periods",
    "diagnostics.probes",
    "diagnostics.retarded_resolution",
    "wave.nx",
    "wave.length",
    "wave.distance",
    "wave.amplitude",
    "wave.width",
    "wave.center",
    "wave.cfl",
    "convergence.resolutions",
    "convergence.time",
    "convergence.box",
    "identities.samples",
];

/// Keys each scenario kind reads besides `scenario.kind`.
fn scenario_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "static_ball" => &["center", "mass", "width", "radius"],
        "oscillating_blob" => &["center", "mass", "width", "axis", "amplitude", "omega"],
        "rotating_ring" => &["center", "radius", "linear_density", "omega", "width"],
        "two_balls" => &["center", "mass", "width", "radius", "center2", "mass2", "width2", "radius2"],
        "growing_ball" => &["center", "mass", "width", "radius", "rate"],
        _ => return None,
    })
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got `{v}`"))
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn parse_u64(v: &str) -> std::result::Result<u64, String> {
    v.parse::<u64>().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn parse_list<T>(v: &str, f: fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| f(x.trim())).collect()
}

fn parse_vec3(v: &str) -> std::result::Result<[f64; 3], String> {
    let xs = parse_list(v, parse_f64)?;
    xs.try_into().map_err(|_| format!("expected three comma-separated numbers, got `{v}`"))
}

fn parse_points(v: &str) -> std::result::Result<Vec<[f64; 3]>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(';').map(|p| parse_vec3(p.trim())).collect()
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(format!("line {line}: expected `section.key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            errors.push(format!("line {line}: unknown key `{key}`"));
            continue;
        }
        if let Some(first) = entries.get(key) {
            errors.push(format!("line {line}: duplicate key `{key}` (first set on line {})", first.line));
            continue;
        }
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }

    let mut cfg = RunConfig::default();
    let mut grid_n = None;
    let mut grid_dx = None;
    for (key, e) in &entries {
        let v = e.value.as_str();
        let r: std::result::Result<(), String> = (|| {
            match key.as_str() {
                "units.c" => cfg.units.c = parse_f64(v)?,
                "units.kappa" => cfg.units.kappa = parse_f64(v)?,
                "grid.n" => grid_n = Some(parse_usize(v)?),
                "grid.dx" => grid_dx = Some(parse_f64(v)?),
                "solver.cfl" => cfg.solver.cfl = parse_f64(v)?,
                "solver.sponge_width" => cfg.solver.sponge_width = parse_usize(v)?,
                "solver.sponge_strength" => cfg.solver.sponge_strength = parse_f64(v)?,
                "solver.boundary" => {
                    cfg.solver.boundary = match v {
                        "multipole" => BoundaryKind::Multipole,
                        "frozen" => BoundaryKind::Frozen,
                        _ => return Err(format!("expected `multipole` or `frozen`, got `{v}`")),
                    }
                }
                "solver.init" => {
                    cfg.solver.init = match v {
                        "zero" => InitPolicy::Zero,
                        "static" => InitPolicy::Static,
                        _ => return Err(format!("expected `zero` or `static`, got `{v}`")),
                    }
                }
                "solver.ramp_time" => cfg.solver.ramp_time = parse_f64(v)?,
                "solver.static_tolerance" => cfg.solver.static_tolerance = parse_f64(v)?,
                "solver.max_iterations" => cfg.solver.max_iterations = parse_usize(v)?,
                "run.duration" => cfg.duration = parse_f64(v)?,
                "run.seed" => cfg.seed = parse_u64(v)?,
                "output.dir" => cfg.output.dir = PathBuf::from(v),
                "output.snapshot_stride" => cfg.output.snapshot_stride = parse_u64(v)?,
                "force.lambda" => cfg.force.lambda = parse_f64(v)?,
                "force.mu" => cfg.force.mu = parse_f64(v)?,
                "force.nu" => cfg.force.nu = parse_f64(v)?,
                "diagnostics.boxes" => cfg.diagnostics.boxes = parse_list(v, parse_f64)?,
                "diagnostics.period" => cfg.diagnostics.period = Some(parse_f64(v)?),
                "diagnostics.transient_periods" => cfg.diagnostics.transient_periods = parse_u64(v)?,
                "diagnostics.probes" => cfg.diagnostics.probes = parse_points(v)?,
                "diagnostics.retarded_resolution" => cfg.diagnostics.retarded_resolution = parse_usize(v)?,
                "wave.nx" => cfg.wave.nx = parse_usize(v)?,
                "wave.length" => cfg.wave.length = parse_f64(v)?,
                "wave.distance" => cfg.wave.distance = parse_f64(v)?,
                "wave.amplitude" => cfg.wave.amplitude = parse_f64(v)?,
                "wave.width" => cfg.wave.width = parse_f64(v)?,
                "wave.center" => cfg.wave.center = parse_f64(v)?,
                "wave.cfl" => cfg.wave.cfl = parse_f64(v)?,
                "convergence.resolutions" => cfg.convergence.resolutions = parse_list(v, parse_usize)?,
                "convergence.time" => cfg.convergence.time = parse_f64(v)?,
                "convergence.box" => cfg.convergence.box_half_width = parse_f64(v)?,
                "identities.samples" => cfg.identity_samples = parse_usize(v)?,
                k if k.starts_with("scenario.") => {}
                _ => unreachable!("key table and match disagree"),
            }
            Ok(())
        })();
        if let Err(msg) = r {
            errors.push(format!("line {}: `{key}`: {msg}", e.line));
        }
    }

    match (grid_n, grid_dx) {
        (Some(n), Some(dx)) => cfg.grid = Some(GridSpec { n, dx }),
        (None, None) => {}
        (Some(_), None) => errors.push(format!("line {}: `grid.n` needs `grid.dx`", entries["grid.n"].line)),
        (None, Some(_)) => errors.push(format!("line {}: `grid.dx` needs `grid.n`", entries["grid.dx"].line)),
    }

    match build_scenario(&entries) {
        Ok(s) => cfg.scenario = s,
        Err(mut e) => errors.append(&mut e),
    }

    if errors.is_empty() {
        validate(&cfg, &entries, &mut errors);
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(ConfigErrors(errors)))
    }
}

fn build_scenario(entries: &BTreeMap<String, Entry>) -> std::result::Result<Option<SourceScenario>, Vec<String>> {
    let present: Vec<(&str, &Entry)> = entries
        .iter()
        .filter_map(|(k, e)| k.strip_prefix("scenario.").map(|s| (s, e)))
        .filter(|(k, _)| *k != "kind")
        .collect();
    let Some(kind) = entries.get("scenario.kind") else {
        if present.is_empty() {
            return Ok(None);
        }
        return Err(present
            .iter()
            .map(|(k, e)| format!("line {}: `scenario.{k}` set without `scenario.kind`", e.line))
            .collect());
    };
    let Some(allowed) = scenario_keys(&kind.value) else {
        return Err(vec![format!(
            "line {}: unknown scenario kind `{}` (expected static_ball, oscillating_blob, rotating_ring, two_balls or growing_ball)",
            kind.line, kind.value
        )]);
    };
    let mut errors: Vec<String> = present
        .iter()
        .filter(|(k, _)| !allowed.contains(k))
        .map(|(k, e)| format!("line {}: `scenario.{k}` is not used by kind `{}`", e.line, kind.value))
        .collect();
    let get = |k: &str| entries.get(&format!("scenario.{k}"));
    let num = |k: &str, default: Option<f64>, errors: &mut Vec<String>| -> f64 {
        match get(k) {
            Some(e) => parse_f64(&e.value).unwrap_or_else(|m| {
                errors.push(format!("line {}: `scenario.{k}`: {m}", e.line));
                f64::NAN
            }),
            None => default.unwrap_or_else(|| {
                errors.push(format!("line {}: kind `{}` needs `scenario.{k}`", kind.line, kind.value));
                f64::NAN
            }),
        }
    };
    let vec3 = |k: &str, default: [f64; 3], errors: &mut Vec<String>| -> [f64; 3] {
        match get(k) {
            Some(e) => parse_vec3(&e.value).unwrap_or_else(|m| {
                errors.push(format!("line {}: `scenario.{k}`: {m}", e.line));
                [f64::NAN; 3]
            }),
            None => default,
        }
    };
    let ball = |suffix: &str, errors: &mut Vec<String>| Ball {
        center: vec3(&format!("center{suffix}"), [0.0; 3], errors),
        radius: num(&format!("radius{suffix}"), Some(0.0), errors),
        mass: num(&format!("mass{suffix}"), Some(1.0), errors),
        width: num(&format!("width{suffix}"), None, errors),
    };
    let s = match kind.value.as_str() {
        "static_ball" => SourceScenario::StaticBall(ball("", &mut errors)),
        "oscillating_blob" => SourceScenario::OscillatingBlob {
            center: vec3("center", [0.0; 3], &mut errors),
            width: num("width", None, &mut errors),
            mass: num("mass", Some(1.0), &mut errors),
            axis: vec3("axis", [0.0, 0.0, 1.0], &mut errors),
            amplitude: num("amplitude", None, &mut errors),
            omega: num("omega", None, &mut errors),
        },
        "rotating_ring" => SourceScenario::RotatingRing {
            center: vec3("center", [0.0; 3], &mut errors),
            radius: num("radius", None, &mut errors),
            linear_density: num("linear_density", None, &mut errors),
            omega: num("omega", None, &mut errors),
            width: num("width", None, &mut errors),
        },
        "two_balls" => {
            let a = ball("", &mut errors);
            let b = ball("2", &mut errors);
            if get("center2").is_none() {
                errors.push(format!("line {}: kind `two_balls` needs `scenario.center2`", kind.line));
            }
            SourceScenario::TwoStaticBalls(a, b)
        }
        "growing_ball" => SourceScenario::GrowingBall {
            ball: ball("", &mut errors),
            rate: num("rate", None, &mut errors),
        },
        _ => unreachable!("kind checked above"),
    };
    if errors.is_empty() {
        Ok(Some(s))
    } else {
        Err(errors)
    }
}

fn validate(cfg: &RunConfig, entries: &BTreeMap<String, Entry>, errors: &mut Vec<String>) {
    // Attributes a validation failure to the first listed key present.
    let mut report = |keys: &[&str], r: Result<()>| {
        if let Err(e) = r {
            let line = keys.iter().find_map(|k| entries.get(*k)).map(|e| e.line);
            match line {
                Some(l) => errors.push(format!("line {l}: {e}")),
                None => errors.push(e.to_string()),
            }
        }
    };
    report(&["units.c", "units.kappa"], cfg.units.validate());
    report(
        &[
            "solver.cfl",
            "solver.sponge_strength",
            "solver.ramp_time",
            "solver.static_tolerance",
            "solver.max_iterations",
        ],
        cfg.solver.validate(),
    );
    if let Some(g) = &cfg.grid {
        report(&["grid.n", "grid.dx"], g.grid().map(|_| ()));
        if g.n < 8 {
            report(&["grid.n"], Err(Error::param("grid.n", "must be >= 8")));
        }
    }
    if let Some(s) = &cfg.scenario {
        report(&["scenario.kind"], s.validate(&cfg.units));
        if let Some(g) = &cfg.grid {
            if let Ok(grid) = g.grid() {
                let sampler = crate::sources::SourceSampler::immediate(s.clone());
                report(&["scenario.kind", "grid.n"], sampler.check_fits(&grid));
            }
        }
    }
    report(&["force.lambda", "force.mu", "force.nu"], cfg.force.validate());
    if !(cfg.duration >= 0.0 && cfg.duration.is_finite()) {
        report(&["run.duration"], Err(Error::param("run.duration", "must be >= 0")));
    }
    if let Some(p) = cfg.diagnostics.period {
        if !(p > 0.0 && p.is_finite()) {
            report(&["diagnostics.period"], Err(Error::param("diagnostics.period", "must be > 0")));
        }
    }
    if cfg.diagnostics.boxes.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        report(&["diagnostics.boxes"], Err(Error::param("diagnostics.boxes", "half-widths must be > 0")));
    }
    if cfg.diagnostics.retarded_resolution < 4 {
        report(
            &["diagnostics.retarded_resolution"],
            Err(Error::param("diagnostics.retarded_resolution", "must be >= 4")),
        );
    }
    let w = &cfg.wave;
    if w.nx < 8 || !(w.length > 0.0) || !(w.distance >= 0.0) || !(w.width > 0.0) || !w.amplitude.is_finite() || !w.center.is_finite() {
        report(
            &["wave.nx", "wave.length", "wave.distance", "wave.width", "wave.amplitude", "wave.center"],
            Err(Error::param("wave", "needs nx >= 8, length > 0, distance >= 0, width > 0")),
        );
    }
    if !(w.cfl > 0.0 && w.cfl <= crate::potentials::CFL_LIMIT * (1.0 + 1e-12)) {
        report(&["wave.cfl"], Err(Error::Stability { cfl: w.cfl, bound: crate::potentials::CFL_LIMIT }));
    }
    let c = &cfg.convergence;
    if c.resolutions.len() < 2 || c.resolutions.iter().any(|&n| n < 8) || !c.resolutions.windows(2).all(|p| p[0] < p[1]) {
        report(
            &["convergence.resolutions"],
            Err(Error::param("convergence.resolutions", "need at least two increasing values >= 8")),
        );
    }
    if !(c.time > 0.0 && c.time.is_finite()) || !(c.box_half_width > 0.0) {
        report(
            &["convergence.time", "convergence.box"],
            Err(Error::param("convergence", "time and box must be > 0")),
        );
    }
    if cfg.identity_samples == 0 {
        report(&["identities.samples"], Err(Error::param("identities.samples", "must be > 0")));
    }
}

fn fmt_list<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn fmt_vec3(v: [f64; 3]) -> String {
    fmt_list(&v)
}

impl RunConfig {
    /// Serializes every setting; `parse_config(&cfg.to_text())` returns
    /// an equal config (floats print in shortest round-trip form).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("units.c", self.units.c.to_string());
        kv("units.kappa", self.units.kappa.to_string());
        if let Some(g) = &self.grid {
            kv("grid.n", g.n.to_string());
            kv("grid.dx", g.dx.to_string());
        }
        let s = &self.solver;
        kv("solver.cfl", s.cfl.to_string());
        kv("solver.sponge_width", s.sponge_width.to_string());
        kv("solver.sponge_strength", s.sponge_strength.to_string());
        kv(
            "solver.boundary",
            match s.boundary {
                BoundaryKind::Multipole => "multipole",
                BoundaryKind::Frozen => "frozen",
            }
            .into(),
        );
        kv(
            "solver.init",
            match s.init {
                InitPolicy::Zero => "zero",
                InitPolicy::Static => "static",
            }
            .into(),
        );
        kv("solver.ramp_time", s.ramp_time.to_string());
        kv("solver.static_tolerance", s.static_tolerance.to_string());
        kv("solver.max_iterations", s.max_iterations.to_string());
        if let Some(sc) = &self.scenario {
            let ball = |b: &Ball, suffix: &str, kv: &mut dyn FnMut(&str, String)| {
                kv(&format!("scenario.center{suffix}"), fmt_vec3(b.center));
                kv(&format!("scenario.mass{suffix}"), b.mass.to_string());
                kv(&format!("scenario.width{suffix}"), b.width.to_string());
                kv(&format!("scenario.radius{suffix}"), b.radius.to_string());
            };
            match sc {
                SourceScenario::StaticBall(b) => {
                    kv("scenario.kind", "static_ball".into());
                    ball(b, "", &mut kv);
                }
                SourceScenario::OscillatingBlob {
                    center,
                    width,
                    mass,
                    axis,
                    amplitude,
                    omega,
                } => {
                    kv("scenario.kind", "oscillating_blob".into());
                    kv("scenario.center", fmt_vec3(*center));
                    kv("scenario.width", width.to_string());
                    kv("scenario.mass", mass.to_string());
                    kv("scenario.axis", fmt_vec3(*axis));
                    kv("scenario.amplitude", amplitude.to_string());
                    kv("scenario.omega", omega.to_string());
                }
                SourceScenario::RotatingRing {
                    center,
                    radius,
                    linear_density,
                    omega,
                    width,
                } => {
                    kv("scenario.kind", "rotating_ring".into());
                    kv("scenario.center", fmt_vec3(*center));
                    kv("scenario.radius", radius.to_string());
                    kv("scenario.linear_density", linear_density.to_string());
                    kv("scenario.omega", omega.to_string());
                    kv("scenario.width", width.to_string());
                }
                SourceScenario::TwoStaticBalls(a, b) => {
                    kv("scenario.kind", "two_balls".into());
                    ball(a, "", &mut kv);
                    ball(b, "2", &mut kv);
                }
                SourceScenario::GrowingBall { ball: b, rate } => {
                    kv("scenario.kind", "growing_ball".into());
                    ball(b, "", &mut kv);
                    kv("scenario.rate", rate.to_string());
                }
            }
        }
        kv("run.duration", self.duration.to_string());
        kv("run.seed", self.seed.to_string());
        kv("output.dir", self.output.dir.display().to_string());
        kv("output.snapshot_stride", self.output.snapshot_stride.to_string());
        kv("force.lambda", self.force.lambda.to_string());
        kv("force.mu", self.force.mu.to_string());
        kv("force.nu", self.force.nu.to_string());
        let d = &self.diagnostics;
        kv("diagnostics.boxes", fmt_list(&d.boxes));
        if let Some(p) = d.period {
            kv("diagnostics.period", p.to_string());
        }
        kv("diagnostics.transient_periods", d.transient_periods.to_string());
        kv(
            "diagnostics.probes",
            d.probes.iter().map(|p| fmt_vec3(*p)).collect::<Vec<_>>().join("; "),
        );
        kv("diagnostics.retarded_resolution", d.retarded_resolution.to_string());
        let w = &self.wave;
        kv("wave.nx", w.nx.to_string());
        kv("wave.length", w.length.to_string());
        kv("wave.distance", w.distance.to_string());
        kv("wave.amplitude", w.amplitude.to_string());
        kv("wave.width", w.width.to_string());
        kv("wave.center", w.center.to_string());
        kv("wave.cfl", w.cfl.to_string());
        let c = &self.convergence;
        kv("convergence.resolutions", fmt_list(&c.resolutions));
        kv("convergence.time", c.time.to_string());
        kv("convergence.box", c.box_half_width.to_string());
        kv("identities.samples", self.identity_samples.to_string());
        out
    }

    pub fn require_grid(&self) -> Result<GridSpec> {
        self.grid.ok_or_else(|| Error::Usage("this subcommand needs `grid.n` and `grid.dx`".into()))
    }

    pub fn require_scenario(&self) -> Result<&SourceScenario> {
        self.scenario
            .as_ref()
            .ok_or_else(|| Error::Usage("this subcommand needs a `scenario.kind`".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# static ball
grid.n = 32
grid.dx = 0.1
scenario.kind = static_ball
scenario.width = 0.2
";

    fn messages(r: Result<RunConfig>) -> Vec<String> {
        match r {
            Err(Error::Config(ConfigErrors(m))) => m,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.units, SimulationUnits { c: 1.0, kappa: 1.0 });
        assert_eq!(c.solver.cfl, 0.5);
        assert_eq!(c.force, ForceLawParams { lambda: 1.0, mu: 0.0, nu: 0.0 });
        assert_eq!(c.grid, Some(GridSpec { n: 32, dx: 0.1 }));
        assert_eq!(c.scenario, Some(SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 1.0, 0.2))));
    }

    #[test]
    fn cfl_above_bound_is_rejected() {
        let m = messages(parse_config(&format!("{MINIMAL}solver.cfl = 0.9\n")));
        assert_eq!(m.len(), 1);
        assert!(m[0].starts_with("line 6:") && m[0].contains("0.9"), "{m:?}");
    }

    #[test]
    fn duplicate_key_names_both_lines() {
        let m = messages(parse_config(&format!("{MINIMAL}grid.n = 40\n")));
        assert_eq!(m, vec!["line 6: duplicate key `grid.n` (first set on line 2)".to_string()]);
    }

    #[test]
    fn unknown_keys_and_syntax_errors_are_all_reported() {
        let m = messages(parse_config("grid.size = 3\nnonsense\nsolver.cfl = fast\n"));
        assert_eq!(m.len(), 3, "{m:?}");
        assert!(m[0].contains("line 1") && m[0].contains("unknown key"));
        assert!(m[1].contains("line 2"));
        assert!(m[2].contains("line 3") && m[2].contains("expected a number"));
    }

    #[test]
    fn keys_foreign_to_the_kind_are_rejected() {
        let m = messages(parse_config(&format!("{MINIMAL}scenario.omega = 2\n")));
        assert!(m[0].contains("not used by kind `static_ball`"), "{m:?}");
    }

    #[test]
    fn missing_required_scenario_key_is_reported() {
        let m = messages(parse_config("scenario.kind = oscillating_blob\nscenario.width = 0.2\n"));
        assert!(m.iter().any(|x| x.contains("needs `scenario.amplitude`")));
        assert!(m.iter().any(|x| x.contains("needs `scenario.omega`")));
    }

    #[test]
    fn superluminal_scenario_is_rejected_at_load() {
        let text = "scenario.kind = rotating_ring\nscenario.radius = 1\nscenario.linear_density = 1\nscenario.omega = 2\nscenario.width = 0.1\n";
        let m = messages(parse_config(text));
        assert!(m[0].starts_with("line 1:") && m[0].contains("superluminal"), "{m:?}");
    }

    #[test]
    fn round_trip_is_exact() {
        let text = "\
units.c = 1.5
grid.n = 40
grid.dx = 0.1
solver.init = static
solver.boundary = frozen
scenario.kind = two_balls
scenario.width = 0.2
scenario.center = -0.5, 0, 0
scenario.center2 = 0.5, 0.1, 0
scenario.width2 = 0.2
scenario.mass2 = 0.3
diagnostics.boxes = 0.6, 1.0
diagnostics.period = 2
diagnostics.probes = 1, 0, 0; 0, 0, 1.1
convergence.resolutions = 24, 32
force.nu = 0.1
output.dir = some/where
";
        let a = parse_config(text).unwrap();
        let b = parse_config(&a.to_text()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn every_scenario_kind_round_trips() {
        for body in [
            "scenario.kind = oscillating_blob\nscenario.width = 0.2\nscenario.amplitude = 0.1\nscenario.omega = 3.14\n",
            "scenario.kind = rotating_ring\nscenario.radius = 0.6\nscenario.linear_density = 1\nscenario.omega = 0.4\nscenario.width = 0.2\n",
            "scenario.kind = growing_ball\nscenario.width = 0.2\nscenario.rate = 1\n",
        ] {
            let a = parse_config(body).unwrap();
            assert_eq!(parse_config(&a.to_text()).unwrap(), a);
        }
    }
}
