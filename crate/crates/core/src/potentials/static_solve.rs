//! Red-black successive over-relaxation for `lap(phi) = 4 pi kappa sigma0`
//! with far-field Dirichlet data on the outer faces.

use rayon::prelude::*;

use super::multipole::{static_boundary, SourceMoments};
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::spacetime::{Grid3, ScalarField, SimulationUnits};

#[derive(Debug, Clone, PartialEq)]
pub struct StaticSolution {
    pub phi: ScalarField,
    pub iterations: usize,
    /// Final `max|lap(phi) - rhs|` over interior nodes.
    pub residual: f64,
}

/// Static potential of `sigma0`. See [`solve_static_report`].
pub fn solve_static(sigma0: &ScalarField, cfg: &SolverConfig, units: &SimulationUnits) -> Result<ScalarField> {
    solve_static_report(sigma0, cfg, units).map(|s| s.phi)
}

/// Solves the discrete Poisson problem with the seven-point Laplacian.
///
/// Boundary nodes take the multipole far field (through second moments) of
/// `sigma0` about the grid centre, so the solve is linear in `sigma0`. The
/// interior starts from the same far field. Each colour pass computes its
/// updates from the other colour only, so the iterates do not depend on the
/// thread count.
pub fn solve_static_report(
    sigma0: &ScalarField,
    cfg: &SolverConfig,
    units: &SimulationUnits,
) -> Result<StaticSolution> {
    cfg.validate()?;
    units.validate()?;
    let g = *sigma0.grid();
    if g.periodic.iter().any(|&p| p) {
        return Err(Error::Geometry("static solve needs open boundaries on every axis".into()));
    }
    if !sigma0.is_finite() {
        return Err(Error::param("sigma0", "must be finite"));
    }
    if sigma0.data().iter().any(|&v| v < 0.0) {
        return Err(Error::param("sigma0", "must be >= 0"));
    }
    let fpk = units.four_pi_kappa();
    let rhs: Vec<f64> = sigma0.data().iter().map(|s| fpk * s).collect();
    let rhs_max = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let moments = SourceMoments::from_density(sigma0, g.center());
    let far = static_boundary(g, moments, units);
    let mut phi = g.fill(|i, j, k| far(i, j, k));

    let n_min = *g.counts.iter().min().unwrap() as f64;
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / (n_min - 1.0)).sin());
    let target = cfg.static_tolerance * rhs_max;

    let mut residual = interior_residual(&phi, &rhs, &g);
    let mut iterations = 0;
    while residual > target {
        if iterations >= cfg.max_iterations {
            return Err(Error::IterationLimit {
                iterations,
                residual,
            });
        }
        for colour in 0..2 {
            sweep(&mut phi, &rhs, &g, colour, omega);
        }
        iterations += 1;
        if iterations % 10 == 0 || iterations == cfg.max_iterations {
            residual = interior_residual(&phi, &rhs, &g);
        }
    }
    Ok(StaticSolution {
        phi: ScalarField::from_vec(&g, phi)?,
        iterations,
        residual,
    })
}

/// One over-relaxed pass over interior nodes with `(i + j + k) % 2 == colour`.
fn sweep(phi: &mut [f64], rhs: &[f64], g: &Grid3, colour: usize, omega: f64) {
    let [nx, ny, nz] = g.counts;
    let h2 = g.dx * g.dx;
    let (sx, sy) = (g.slab(), nz);
    let updates: Vec<Vec<f64>> = {
        let phi = &*phi;
        (1..nx - 1)
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::with_capacity((ny - 2) * (nz - 2) / 2 + 1);
                for j in 1..ny - 1 {
                    let k0 = 1 + (i + j + 1 + colour) % 2;
                    for k in (k0..nz - 1).step_by(2) {
                        let c = g.index(i, j, k);
                        let nb = phi[c + sx] + phi[c - sx] + phi[c + sy] + phi[c - sy] + phi[c + 1] + phi[c - 1];
                        let gs = (nb - h2 * rhs[c]) / 6.0;
                        out.push(phi[c] + omega * (gs - phi[c]));
                    }
                }
                out
            })
            .collect()
    };
    for (i, vals) in (1..nx - 1).zip(updates) {
        let mut it = vals.into_iter();
        for j in 1..ny - 1 {
            let k0 = 1 + (i + j + 1 + colour) % 2;
            for k in (k0..nz - 1).step_by(2) {
                phi[g.index(i, j, k)] = it.next().expect("one update per node");
            }
        }
    }
}

fn interior_residual(phi: &[f64], rhs: &[f64], g: &Grid3) -> f64 {
    let [nx, ny, nz] = g.counts;
    let h2 = g.dx * g.dx;
    let (sx, sy) = (g.slab(), nz);
    (1..nx - 1)
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in 1..ny - 1 {
                for k in 1..nz - 1 {
                    let c = g.index(i, j, k);
                    let l = (phi[c + sx] + phi[c - sx] + phi[c + sy] + phi[c - sy] + phi[c + 1] + phi[c - 1]
                        - 6.0 * phi[c])
                        / h2;
                    m = m.max((l - rhs[c]).abs());
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{sample_scenario, Ball, SourceScenario};
    use crate::spacetime::{ops, Region};

    fn units() -> SimulationUnits {
        SimulationUnits::default()
    }

    #[test]
    fn zero_density_gives_zero_potential() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let phi = solve_static(&ScalarField::zeros(&g), &SolverConfig::default(), &units()).unwrap();
        assert!(phi.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn solution_satisfies_discrete_poisson() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.1, 0.0, -0.05], 1.0, 0.2));
        let st = sample_scenario(&sc, 0.0, &g, &units()).unwrap();
        let cfg = SolverConfig::default();
        let sol = solve_static_report(&st.sigma, &cfg, &units()).unwrap();
        let lap = ops::laplacian(&sol.phi);
        let res = lap.zip_map(&st.sigma, |l, s| l - units().four_pi_kappa() * s).unwrap();
        let scale = units().four_pi_kappa() * st.sigma.norms(&Region::full(&g)).max;
        assert!(res.norms(&Region::interior(&g, 1)).max <= cfg.static_tolerance * scale);
        assert!(sol.iterations > 0);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 1.0, 0.2));
        let st = sample_scenario(&sc, 0.0, &g, &units()).unwrap();
        let cfg = SolverConfig {
            max_iterations: 3,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_static(&st.sigma, &cfg, &units()),
            Err(Error::IterationLimit { iterations: 3, .. })
        ));
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let g = Grid3::centered(24, 0.1).unwrap();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.05, 0.0, 0.0], 1.0, 0.2));
        let st = sample_scenario(&sc, 0.0, &g, &units()).unwrap();
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| solve_static(&st.sigma, &SolverConfig::default(), &units()).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn negative_density_is_rejected() {
        let g = Grid3::centered(8, 0.1).unwrap();
        let mut s = ScalarField::zeros(&g);
        s.set(3, 3, 3, -1.0);
        assert!(solve_static(&s, &SolverConfig::default(), &units()).is_err());
    }
}
