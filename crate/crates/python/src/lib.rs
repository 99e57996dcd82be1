//! Python bindings: units, pointwise kinematics, the identity and tensor
//! suites, the field-stress sample, the retarded integral, a steppable
//! simulation and the command runner.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use vecgrav::config::{parse_config, RunConfig};
use vecgrav::energy::{energy_density, tensor_suite, StressSample};
use vecgrav::force_laws::{identity_suite, ForceLawParams, IdentityCheck};
use vecgrav::pipeline::Pipeline;
use vecgrav::potentials::retarded_potential;
use vecgrav::runner::{execute, Command, Overrides};
use vecgrav::{Error, SimulationUnits};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn units(c: f64, kappa: f64) -> PyResult<SimulationUnits> {
    SimulationUnits::new(c, kappa).map_err(py_err)
}

fn config(text: &str) -> PyResult<RunConfig> {
    parse_config(text).map_err(py_err)
}

/// `(name, observed, tolerance, passed)` per row.
fn rows(checks: Vec<IdentityCheck>) -> Vec<(String, f64, f64, bool)> {
    checks
        .into_iter()
        .map(|c| {
            let passed = c.passed();
            (c.name, c.observed, c.tolerance, passed)
        })
        .collect()
}

/// Physical constants of a run.
#[pyclass(name = "Units", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyUnits {
    inner: SimulationUnits,
}

#[pymethods]
impl PyUnits {
    #[new]
    #[pyo3(signature = (c = 1.0, kappa = 1.0))]
    fn new(c: f64, kappa: f64) -> PyResult<Self> {
        Ok(Self { inner: units(c, kappa)? })
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    fn four_pi_kappa(&self) -> f64 {
        self.inner.four_pi_kappa()
    }

    fn __repr__(&self) -> String {
        format!("Units(c={}, kappa={})", self.inner.c, self.inner.kappa)
    }
}

#[pyfunction]
#[pyo3(signature = (v, c = 1.0))]
fn lorentz_factor(v: [f64; 3], c: f64) -> PyResult<f64> {
    vecgrav::spacetime::lorentz_factor(v, &units(c, 1.0)?).map_err(py_err)
}

/// Four-velocity as `(re, im)` pairs; the time component is imaginary.
#[pyfunction]
#[pyo3(signature = (v, c = 1.0))]
fn four_velocity(v: [f64; 3], c: f64) -> PyResult<Vec<(f64, f64)>> {
    let four = vecgrav::spacetime::four_velocity(v, &units(c, 1.0)?).map_err(py_err)?;
    Ok(four.iter().map(|z| (z.re, z.im)).collect())
}

#[pyfunction]
#[pyo3(signature = (count, seed = 0, lam = 1.0, mu = 0.0, nu = 0.0, c = 1.0, kappa = 1.0))]
fn identity_checks(
    count: usize,
    seed: u64,
    lam: f64,
    mu: f64,
    nu: f64,
    c: f64,
    kappa: f64,
) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let params = ForceLawParams { lambda: lam, mu, nu };
    Ok(rows(identity_suite(count, seed, &params, &units(c, kappa)?).map_err(py_err)?))
}

#[pyfunction]
#[pyo3(signature = (count, seed = 0, c = 1.0, kappa = 1.0))]
fn tensor_checks(count: usize, seed: u64, c: f64, kappa: f64) -> PyResult<Vec<(String, f64, f64, bool)>> {
    Ok(rows(tensor_suite(count, seed, &units(c, kappa)?).map_err(py_err)?))
}

/// `(W, S, p)` at a point with fields `f` and `g`.
#[pyfunction]
#[pyo3(signature = (f, g, c = 1.0, kappa = 1.0))]
fn field_stress(f: [f64; 3], g: [f64; 3], c: f64, kappa: f64) -> PyResult<(f64, [f64; 3], [f64; 3])> {
    let s = StressSample::from_fields(f, g, &units(c, kappa)?);
    Ok((s.w, s.s, s.p))
}

/// `(phi, A)` of the configured scenario by direct retarded integration.
#[pyfunction]
#[pyo3(signature = (config_text, point, t, resolution = 32))]
fn retarded(config_text: &str, point: [f64; 3], t: f64, resolution: usize) -> PyResult<(f64, [f64; 3])> {
    let cfg = config(config_text)?;
    let scenario = cfg.require_scenario().map_err(py_err)?;
    let p = retarded_potential(scenario, point, t, resolution, &cfg.units).map_err(py_err)?;
    Ok((p.phi, p.a))
}

/// Runs a subcommand on config text; returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (command, config_text, out = None))]
fn run(py: Python<'_>, command: &str, config_text: &str, out: Option<PathBuf>) -> PyResult<(bool, String)> {
    let command = Command::parse(command).map_err(py_err)?;
    let cfg = Overrides { out, ..Default::default() }.apply(&config(config_text)?).map_err(py_err)?;
    let report = py.detach(|| execute(command, &cfg)).map_err(py_err)?;
    Ok((report.passed(), report.to_text()))
}

/// Canonical text of a config, as the parser reads it back.
#[pyfunction]
fn normalize_config(config_text: &str) -> PyResult<String> {
    Ok(config(config_text)?.to_text())
}

/// Leapfrog run of a configured scenario, advanced from Python.
#[pyclass(name = "Simulation", unsendable)]
struct PySimulation {
    pipeline: Pipeline,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(config_text: &str) -> PyResult<Self> {
        let cfg = config(config_text)?;
        let grid = cfg.require_grid().and_then(|g| g.grid()).map_err(py_err)?;
        let scenario = cfg.require_scenario().map_err(py_err)?.clone();
        let pipeline = Pipeline::for_scenario(grid, scenario, cfg.solver, cfg.units).map_err(py_err)?;
        Ok(Self { pipeline })
    }

    #[pyo3(signature = (steps = 1))]
    fn step(&mut self, steps: u64) -> PyResult<()> {
        self.pipeline.run(steps, |_| Ok(())).map_err(py_err)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.pipeline.time()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.pipeline.dt()
    }

    #[getter]
    fn step_count(&self) -> u64 {
        self.pipeline.step_count()
    }

    /// Nodes per axis.
    #[getter]
    fn shape(&self) -> [usize; 3] {
        self.pipeline.grid().counts
    }

    /// Current `phi`, flattened with z fastest.
    fn phi(&self) -> Vec<f64> {
        self.pipeline.state().current.phi.data().to_vec()
    }

    /// `(time, F, G)` one step behind the state, flattened with z fastest
    /// and components interleaved.
    fn fields(&self) -> PyResult<Option<(f64, Vec<f64>, Vec<f64>)>> {
        let Some(f) = self.pipeline.latest_fields() else {
            return Ok(None);
        };
        let f = f.map_err(py_err)?;
        let flat = |v: &vecgrav::VectorField| {
            let g = v.grid();
            let mut out = Vec::with_capacity(3 * g.len());
            for i in 0..g.counts[0] {
                for j in 0..g.counts[1] {
                    for k in 0..g.counts[2] {
                        out.extend_from_slice(&v.at(i, j, k));
                    }
                }
            }
            out
        };
        Ok(Some((f.time, flat(&f.f), flat(&f.g))))
    }

    /// Largest energy density on the grid; never positive.
    fn max_energy_density(&self) -> PyResult<Option<f64>> {
        let Some(f) = self.pipeline.latest_fields() else {
            return Ok(None);
        };
        let w = energy_density(&f.map_err(py_err)?, self.pipeline.units());
        Ok(Some(w.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max)))
    }
}

#[pymodule]
fn vecgrav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnits>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(lorentz_factor, m)?)?;
    m.add_function(wrap_pyfunction!(four_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(identity_checks, m)?)?;
    m.add_function(wrap_pyfunction!(tensor_checks, m)?)?;
    m.add_function(wrap_pyfunction!(field_stress, m)?)?;
    m.add_function(wrap_pyfunction!(retarded, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_config, m)?)?;
    Ok(())
}
