//! The field pair `F = grad(phi) - dA/dt`, `G = curl(A)`, the default force
//! density `g = -sigma F - s x G`, the gauge scalar
//! `chi = div(A) - c^-2 dphi/dt`, and the residuals of the four relations
//! the fields satisfy for any solution of the potential equations:
//!
//! ```text
//! r1 = div G
//! r2 = dG/dt + curl F
//! r3 = div F - 4 pi kappa sigma + dchi/dt
//! r4 = curl G - c^-2 dF/dt - 4 pi kappa c^-2 s - grad chi
//! ```
//!
//! All time derivatives are centred. With central stencils `r1` and `r2`
//! cancel to roundoff; `r3` and `r4` are second order in `dx` and `dt`.

use crate::error::{Error, Result};
use crate::potentials::{PotentialLevel, PotentialState};
use crate::sources::MassFluxState;
use crate::spacetime::{cross3, ops, Grid3, Region, ResidualNorms, ScalarField, SimulationUnits, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub f: VectorField,
    pub g: VectorField,
    pub time: f64,
}

impl FieldPair {
    pub fn zeros(grid: &Grid3, time: f64) -> Self {
        Self {
            f: VectorField::zeros(grid),
            g: VectorField::zeros(grid),
            time,
        }
    }

    pub fn new(f: VectorField, g: VectorField, time: f64) -> Result<Self> {
        f.grid().check_same(g.grid(), "field pair")?;
        Ok(Self { f, g, time })
    }

    pub fn grid(&self) -> &Grid3 {
        self.f.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.f.is_finite() && self.g.is_finite()
    }
}

fn check_spacing(times: &[f64], dt: f64, what: &str) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::Scheduling(format!("{what}: time step must be > 0")));
    }
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs() * 1e-6) {
            return Err(Error::Scheduling(format!(
                "{what}: levels at {:?} are not spaced by dt = {dt}",
                times
            )));
        }
    }
    Ok(())
}

/// Fields at the time of `state.current`, using `next.current` for the
/// centred `dA/dt`. `next` must be the state one step after `state`.
pub fn derive_fields(state: &PotentialState, next: &PotentialState) -> Result<FieldPair> {
    state.grid().check_same(next.grid(), "derive_fields")?;
    if (state.dt - next.dt).abs() > 1e-12 * state.dt {
        return Err(Error::Scheduling("states use different time steps".into()));
    }
    check_spacing(&[state.time - state.dt, state.time, next.time], state.dt, "derive_fields")?;
    fields_from_levels([&state.previous, &state.current, &next.current], state.time, state.dt)
}

/// Fields at the middle of three consecutive potential levels.
pub fn fields_from_levels(levels: [&PotentialLevel; 3], time: f64, dt: f64) -> Result<FieldPair> {
    let g = *levels[1].grid();
    for l in [levels[0], levels[2]] {
        g.check_same(l.grid(), "field levels")?;
    }
    if !(dt > 0.0) {
        return Err(Error::Scheduling("time step must be > 0".into()));
    }
    let phi = levels[1].phi.data();
    let (before, after) = (&levels[0].a, &levels[2].a);
    let inv = 1.0 / (2.0 * dt);
    let f = g.fill3(|i, j, k| {
        let idx = g.index(i, j, k);
        let gp = ops::grad_at(phi, &g, i, j, k);
        let mut out = [0.0; 3];
        for a in 0..3 {
            out[a] = gp[a] - (after.component(a)[idx] - before.component(a)[idx]) * inv;
        }
        out
    });
    let curl = g.fill3(|i, j, k| ops::curl_at(&levels[1].a, i, j, k));
    FieldPair::new(VectorField::from_components(&g, f)?, VectorField::from_components(&g, curl)?, time)
}

/// Default force density `g = -sigma F - s x G`.
pub fn force_density(fields: &FieldPair, source: &MassFluxState) -> Result<VectorField> {
    let g = *fields.grid();
    g.check_same(source.grid(), "force density")?;
    if (fields.time - source.time).abs() > 1e-9 * (1.0 + fields.time.abs()) {
        return Err(Error::Scheduling(format!(
            "fields at t = {}, source at t = {}",
            fields.time, source.time
        )));
    }
    let out = g.fill3(|i, j, k| {
        let sigma = source.sigma.at(i, j, k);
        let f = fields.f.at(i, j, k);
        let sxg = cross3(source.flux.at(i, j, k), fields.g.at(i, j, k));
        [-sigma * f[0] - sxg[0], -sigma * f[1] - sxg[1], -sigma * f[2] - sxg[2]]
    });
    VectorField::from_components(&g, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeScalar {
    pub chi: ScalarField,
    pub time: f64,
}

/// `chi = div(A) - c^-2 dphi/dt` at the middle of three consecutive levels.
pub fn gauge_scalar(levels: [&PotentialLevel; 3], time: f64, dt: f64, units: &SimulationUnits) -> Result<GaugeScalar> {
    let g = *levels[1].grid();
    for l in [levels[0], levels[2]] {
        g.check_same(l.grid(), "gauge levels")?;
    }
    if !(dt > 0.0) {
        return Err(Error::Scheduling("time step must be > 0".into()));
    }
    let (pb, pa) = (levels[0].phi.data(), levels[2].phi.data());
    let scale = 1.0 / (2.0 * dt * units.c * units.c);
    let data = g.fill(|i, j, k| {
        let idx = g.index(i, j, k);
        ops::div_at(&levels[1].a, i, j, k) - (pa[idx] - pb[idx]) * scale
    });
    Ok(GaugeScalar {
        chi: ScalarField::from_vec(&g, data)?,
        time,
    })
}

/// Gauge scalar at the time of `state.current`.
pub fn gauge_scalar_of(state: &PotentialState, next: &PotentialState, units: &SimulationUnits) -> Result<GaugeScalar> {
    check_spacing(&[state.time - state.dt, state.time, next.time], state.dt, "gauge_scalar")?;
    gauge_scalar([&state.previous, &state.current, &next.current], state.time, state.dt, units)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellResiduals {
    pub r1: ScalarField,
    pub r2: VectorField,
    pub r3: ScalarField,
    pub r4: VectorField,
    /// Norms of `r1..r4` over `region`.
    pub norms: [ResidualNorms; 4],
    pub region: Region,
    pub time: f64,
}

/// Residuals at the middle of three consecutive field and gauge samples.
/// `source` must be sampled at the middle time. Norms are taken over
/// `region`, which callers set to exclude the sponge.
pub fn eq5_residuals(
    fields: [&FieldPair; 3],
    gauge: [&GaugeScalar; 3],
    source: &MassFluxState,
    units: &SimulationUnits,
    region: &Region,
) -> Result<MaxwellResiduals> {
    let grid = *fields[1].grid();
    for f in &fields {
        grid.check_same(f.grid(), "residual fields")?;
    }
    for x in &gauge {
        grid.check_same(x.chi.grid(), "residual gauge")?;
    }
    grid.check_same(source.grid(), "residual source")?;
    let dt = fields[1].time - fields[0].time;
    check_spacing(&[fields[0].time, fields[1].time, fields[2].time], dt, "eq5 fields")?;
    check_spacing(&[gauge[0].time, gauge[1].time, gauge[2].time], dt, "eq5 gauge")?;
    if (gauge[1].time - fields[1].time).abs() > 1e-9 * dt || (source.time - fields[1].time).abs() > 1e-9 * dt {
        return Err(Error::Scheduling("fields, gauge and source must share the middle time".into()));
    }
    let mid = fields[1];
    let inv = 1.0 / (2.0 * dt);
    let c2 = units.c * units.c;
    let fpk = units.four_pi_kappa();
    let (chi_b, chi, chi_a) = (gauge[0].chi.data(), &gauge[1].chi, gauge[2].chi.data());

    let r1 = ScalarField::from_vec(&grid, grid.fill(|i, j, k| ops::div_at(&mid.g, i, j, k)))?;
    let r2 = grid.fill3(|i, j, k| {
        let idx = grid.index(i, j, k);
        let cf = ops::curl_at(&mid.f, i, j, k);
        std::array::from_fn(|a| (fields[2].g.component(a)[idx] - fields[0].g.component(a)[idx]) * inv + cf[a])
    });
    let r3 = grid.fill(|i, j, k| {
        let idx = grid.index(i, j, k);
        ops::div_at(&mid.f, i, j, k) - fpk * source.sigma.data()[idx] + (chi_a[idx] - chi_b[idx]) * inv
    });
    let r4 = grid.fill3(|i, j, k| {
        let idx = grid.index(i, j, k);
        let cg = ops::curl_at(&mid.g, i, j, k);
        let gc = ops::grad_at(chi.data(), &grid, i, j, k);
        std::array::from_fn(|a| {
            let fdot = (fields[2].f.component(a)[idx] - fields[0].f.component(a)[idx]) * inv;
            cg[a] - fdot / c2 - fpk / c2 * source.flux.component(a)[idx] - gc[a]
        })
    });
    let r2 = VectorField::from_components(&grid, r2)?;
    let r3 = ScalarField::from_vec(&grid, r3)?;
    let r4 = VectorField::from_components(&grid, r4)?;
    let norms = [r1.norms(region), r2.norms(region), r3.norms(region), r4.norms(region)];
    Ok(MaxwellResiduals {
        r1,
        r2,
        r3,
        r4,
        norms,
        region: *region,
        time: mid.time,
    })
}

/// Region excluding the sponge (and the boundary node) on open axes.
pub fn diagnostic_region(grid: &Grid3, sponge_width: usize) -> Region {
    Region::interior(grid, sponge_width.max(1) + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{solve_static, SolverConfig};
    use crate::sources::{sample_scenario, Ball, SourceScenario};

    fn units() -> SimulationUnits {
        SimulationUnits::default()
    }

    fn level(g: &Grid3, t: f64, f: impl Fn([f64; 3], f64) -> [f64; 4] + Sync) -> PotentialLevel {
        let phi = ScalarField::from_fn(g, |p| f(p, t)[0]);
        let a = VectorField::from_fn(g, |p| {
            let v = f(p, t);
            [v[1], v[2], v[3]]
        });
        PotentialLevel::new(phi, a).unwrap()
    }

    #[test]
    fn zero_potential_gives_zero_fields() {
        let g = Grid3::centered(8, 0.1).unwrap();
        let s = PotentialState::zeros(&g, 0.0, 0.05).unwrap();
        let mut n = PotentialState::zeros(&g, 0.05, 0.05).unwrap();
        n.previous = s.current.clone();
        let fp = derive_fields(&s, &n).unwrap();
        assert_eq!(fp.f.norms(&Region::full(&g)).max, 0.0);
        assert_eq!(fp.g.norms(&Region::full(&g)).max, 0.0);
    }

    #[test]
    fn static_force_is_minus_sigma_grad_phi_exactly() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 1.0, 0.2));
        let src = sample_scenario(&sc, 0.0, &g, &units()).unwrap();
        let phi = solve_static(&src.sigma, &SolverConfig::default(), &units()).unwrap();
        let lvl = PotentialLevel::new(phi.clone(), VectorField::zeros(&g)).unwrap();
        let fp = fields_from_levels([&lvl, &lvl, &lvl], 0.0, 0.05).unwrap();
        assert_eq!(fp.g.norms(&Region::full(&g)).max, 0.0);
        let force = force_density(&fp, &src).unwrap();
        let sigma0 = src.comoving_density(&units()).unwrap();
        let grad = ops::grad(&phi);
        for idx in 0..g.len() {
            for a in 0..3 {
                assert_eq!(force.component(a)[idx], -sigma0.data()[idx] * grad.component(a)[idx]);
            }
        }
        // attractive: the radial component points inward
        let (i, j, k) = (16, 12, 12);
        assert!(force.at(i, j, k)[0] < 0.0);
    }

    #[test]
    fn pure_g_force_is_orthogonal_to_flux() {
        let g = Grid3::centered(10, 0.1).unwrap();
        let gf = VectorField::from_fn(&g, |p| [p[1], -p[0] + 0.3, 1.0 + p[2]]);
        let fp = FieldPair::new(VectorField::zeros(&g), gf, 0.0).unwrap();
        let mut src = MassFluxState::zeros(&g, 0.0);
        src.sigma = ScalarField::from_fn(&g, |_| 1.0);
        src.flux = VectorField::from_fn(&g, |p| [0.3 * p[2], 0.2, -0.1 * p[0]]);
        let force = force_density(&fp, &src).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let f = force.at(i, j, k);
                    let s = src.flux.at(i, j, k);
                    let dot = f[0] * s[0] + f[1] * s[1] + f[2] * s[2];
                    let scale = crate::spacetime::norm3(f) * crate::spacetime::norm3(s);
                    assert!(dot.abs() <= 1e-12 * scale.max(1e-300));
                }
            }
        }
    }

    #[test]
    fn analytic_potential_gives_second_order_fields() {
        // phi = sin(x) cos(t), A = (0, sin(x - t), 0): F and G in closed form
        let pot = |p: [f64; 3], t: f64| [p[0].sin() * t.cos(), 0.0, (p[0] - t).sin(), 0.0];
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [16usize, 32, 64] {
            let dx = 2.0 / (n as f64 - 1.0);
            let g = Grid3::centered(n, dx).unwrap();
            let dt = 0.5 * dx;
            let t = 0.7;
            let lv: Vec<_> = (0..3).map(|m| level(&g, t + (m as f64 - 1.0) * dt, pot)).collect();
            let fp = fields_from_levels([&lv[0], &lv[1], &lv[2]], t, dt).unwrap();
            let exact_f = VectorField::from_fn(&g, |p| [p[0].cos() * t.cos(), (p[0] - t).cos(), 0.0]);
            let exact_g = VectorField::from_fn(&g, |p| [0.0, 0.0, (p[0] - t).cos()]);
            let mut e = 0.0f64;
            for a in 0..3 {
                for idx in 0..g.len() {
                    e = e.max((fp.f.component(a)[idx] - exact_f.component(a)[idx]).abs());
                    e = e.max((fp.g.component(a)[idx] - exact_g.component(a)[idx]).abs());
                }
            }
            errs.push(e);
            hs.push(dx);
        }
        let order = crate::convergence::fitted_order(&hs, &errs).unwrap();
        assert!((order - 2.0).abs() < 0.2, "order {order} {errs:?}");
    }

    #[test]
    fn uneven_levels_are_rejected() {
        let g = Grid3::centered(8, 0.1).unwrap();
        let s = PotentialState::zeros(&g, 0.0, 0.05).unwrap();
        let n = PotentialState::zeros(&g, 0.2, 0.05).unwrap();
        assert!(matches!(derive_fields(&s, &n), Err(Error::Scheduling(_))));
    }

    #[test]
    fn zero_fields_give_zero_residuals() {
        let g = Grid3::centered(8, 0.1).unwrap();
        let f: Vec<_> = (0..3).map(|n| FieldPair::zeros(&g, 0.1 * n as f64)).collect();
        let x: Vec<_> = (0..3)
            .map(|n| GaugeScalar {
                chi: ScalarField::zeros(&g),
                time: 0.1 * n as f64,
            })
            .collect();
        let src = MassFluxState::zeros(&g, 0.1);
        let r = eq5_residuals([&f[0], &f[1], &f[2]], [&x[0], &x[1], &x[2]], &src, &units(), &Region::full(&g)).unwrap();
        for n in r.norms {
            assert_eq!(n.max, 0.0);
        }
    }
}
