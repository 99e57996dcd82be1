//! Refinement studies over a fixed physical domain.

use crate::energy::{budget_residual, budget_sample, energy_density, BoxSurface, BudgetSample};
use crate::error::{Error, Result};
use crate::fields::diagnostic_region;
use crate::pipeline::{Pipeline, Window};
use crate::potentials::SolverConfig;
use crate::sources::{MassFluxState, SourceScenario};
use crate::spacetime::{Grid3, SimulationUnits};
use crate::waves::{plane_wave_level, run_translation, wave_grid, PlaneWaveSpec, TranslationPlan};

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fitted_order(h: &[f64], err: &[f64]) -> Result<f64> {
    if h.len() != err.len() || h.len() < 2 {
        return Err(Error::Usage(format!(
            "need at least two (h, err) pairs, got {} and {}",
            h.len(),
            err.len()
        )));
    }
    if h.iter().chain(err).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Usage(format!(
            "order fit needs positive finite values: h={h:?}, err={err:?}"
        )));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Largest `cfl <= max_cfl` that puts `time` on the step lattice.
pub fn cfl_for_time(dx: f64, time: f64, max_cfl: f64, c: f64) -> (f64, u64) {
    let steps = (time * c / (max_cfl * dx)).ceil().max(1.0);
    (time * c / (steps * dx), steps as u64)
}

/// Residual norms of one resolution of a sourced run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourcedRow {
    pub n: usize,
    pub dx: f64,
    pub sponge_width: usize,
    /// L2 norms of the four field relations.
    pub maxwell: [f64; 4],
    /// Max norms of `r1`, `r2` (identically zero up to roundoff).
    pub maxwell_max: [f64; 2],
    /// L2 norm of the gauge scalar.
    pub gauge: f64,
    /// L2 norms of the energy and momentum conservation residuals.
    pub conservation: [f64; 2],
    /// Continuity residual of the sampled source (max norm).
    pub continuity: f64,
    /// Largest box-budget residual over the run, and largest `|work|`.
    pub budget: f64,
    pub work_scale: f64,
    /// Largest energy density seen anywhere during the run.
    pub max_w: f64,
}

/// Runs `scenario` at each resolution over the cube of edge `length`,
/// keeping the sponge thickness `sponge_length` fixed in physical units.
/// Residuals are taken at `time`; the box budget is checked every step.
pub fn sourced_study(
    scenario: &SourceScenario,
    base: &SolverConfig,
    units: &SimulationUnits,
    length: f64,
    sponge_length: f64,
    resolutions: &[usize],
    time: f64,
    box_half_width: f64,
) -> Result<Vec<SourcedRow>> {
    resolutions
        .iter()
        .map(|&n| {
            let dx = length / (n - 1) as f64;
            let grid = Grid3::centered(n, dx)?;
            let sponge_width = (sponge_length / dx).round() as usize;
            let (cfl, steps) = cfl_for_time(dx, time, base.cfl, units.c);
            let cfg = SolverConfig {
                cfl,
                sponge_width,
                ..*base
            };
            let surface = BoxSurface::new(&grid, grid.center(), box_half_width, sponge_width + 1)?;
            surface.check_clear_of(&grid, scenario)?;
            let mut p = Pipeline::for_scenario(grid, scenario.clone(), cfg, *units)?;
            let mut hist: Vec<BudgetSample> = Vec::new();
            let (mut budget, mut work_scale, mut max_w) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
            p.run(steps + 2, |p| {
                if let Some(f) = p.latest_fields() {
                    let f = f?;
                    max_w = energy_density(&f, units).data().iter().fold(max_w, |m, &w| m.max(w));
                    hist.push(budget_sample(&f, p.latest_fields_source(), &surface, units)?);
                    if hist.len() > 3 {
                        hist.remove(0);
                    }
                    if hist.len() == 3 {
                        budget = budget.max(budget_residual([&hist[0], &hist[1], &hist[2]])?.abs());
                        work_scale = work_scale.max(hist[1].work_on_source.abs());
                    }
                }
                Ok(())
            })?;
            let win = p.window().ok_or_else(|| Error::Scheduling("run too short for diagnostics".into()))?;
            let region = diagnostic_region(&grid, sponge_width);
            let m = win.maxwell_residuals(&region)?;
            let c = win.conservation(&region)?;
            let chi = win.gauge()?[1].chi.norms(&region);
            Ok(SourcedRow {
                n,
                dx,
                sponge_width,
                maxwell: m.norms.map(|x| x.l2),
                maxwell_max: [m.norms[0].max, m.norms[1].max],
                gauge: chi.l2,
                conservation: [c.norms[0].l2, c.norms[1].l2],
                continuity: c.continuity.max,
                budget,
                work_scale,
                max_w,
            })
        })
        .collect()
}

/// One resolution of the plane-wave study.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveRow {
    pub nx: usize,
    pub dx: f64,
    /// RMS error of the translated potential and field.
    pub potential_error: f64,
    pub field_error: f64,
    /// RMS conservation residuals on the translated wave.
    pub conservation: [f64; 2],
    /// RMS field-relation residuals of the sampled analytic wave.
    pub sampled_maxwell: [f64; 4],
    /// Largest `W` over the translated grid and largest `|S + |W| c|`
    /// along the line.
    pub max_w: f64,
    pub flux_defect: f64,
}

/// Translation runs at `nx`, `2 nx - 1`, `4 nx - 3` (spacings `dx`,
/// `dx/2`, `dx/4`), plus the analytic wave sampled at the same spacings.
pub fn wave_study(spec: &PlaneWaveSpec, plan: &TranslationPlan, units: &SimulationUnits, levels: usize) -> Result<Vec<WaveRow>> {
    let mut nx = plan.nx;
    let mut rows = Vec::new();
    for _ in 0..levels {
        let d = run_translation(spec, &TranslationPlan { nx, ..*plan }, units)?;
        let flux_defect = d
            .profile
            .iter()
            .map(|[_, w, s]| (s + w.abs() * units.c).abs())
            .fold(0.0, f64::max);
        rows.push(WaveRow {
            nx,
            dx: d.dx,
            potential_error: d.potential_error,
            field_error: d.field_error,
            conservation: d.conservation_rms,
            sampled_maxwell: sampled_wave_residuals(spec, nx, plan.length, plan.cfl, plan.distance, units)?,
            max_w: d.max_w,
            flux_defect,
        });
        nx = 2 * nx - 1;
    }
    Ok(rows)
}

/// Field-relation residuals of the analytic wave sampled on a line grid at
/// five consecutive times centred on `time`, with no source.
pub fn sampled_wave_residuals(
    spec: &PlaneWaveSpec,
    nx: usize,
    length: f64,
    cfl: f64,
    time: f64,
    units: &SimulationUnits,
) -> Result<[f64; 4]> {
    let grid = wave_grid(nx, length)?;
    let dt = cfl * grid.dx / units.c;
    let levels: Vec<_> = (0..5)
        .map(|i| plane_wave_level(spec, &grid, time + (i as f64 - 2.0) * dt, units))
        .collect();
    let sources: Vec<_> = (0..5)
        .map(|i| MassFluxState::zeros(&grid, time + (i as f64 - 2.0) * dt))
        .collect();
    let win = Window {
        levels: std::array::from_fn(|i| &levels[i]),
        sources: std::array::from_fn(|i| &sources[i]),
        time,
        dt,
        units: *units,
    };
    let region = diagnostic_region(&grid, 0);
    let r = win.maxwell_residuals(&region)?;
    Ok(r.norms.map(|x| x.rms(&grid, &region)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::WaveProfile;

    #[test]
    fn recovers_exact_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((fitted_order(&h, &e).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_errors() {
        assert!(fitted_order(&[0.1, 0.05], &[0.0, 0.0]).is_err());
        assert!(fitted_order(&[0.1], &[1.0]).is_err());
    }

    #[test]
    fn time_lands_on_the_lattice() {
        let (cfl, steps) = cfl_for_time(4.0 / 31.0, 2.0, 0.5, 1.0);
        assert!(cfl <= 0.5);
        assert!(((steps as f64) * cfl * 4.0 / 31.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_wave_has_second_order_residuals() {
        let spec = PlaneWaveSpec {
            a1: WaveProfile::GaussianPulse { amplitude: 1.0, center: 0.0, width: 0.4 },
            a2: WaveProfile::Sinusoid { amplitude: 0.3, wavenumber: 2.0, phase: 0.0 },
        };
        let u = SimulationUnits::default();
        let a = sampled_wave_residuals(&spec, 65, 6.4, 0.5, 0.3, &u).unwrap();
        let b = sampled_wave_residuals(&spec, 129, 6.4, 0.5, 0.3, &u).unwrap();
        // div G, dG/dt + curl F and div F + dchi/dt vanish identically for a
        // wave depending on x - ct only.
        for r in 0..3 {
            assert!(a[r] < 1e-12 && b[r] < 1e-12, "{a:?} {b:?}");
        }
        let order = (a[3] / b[3]).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }
}
