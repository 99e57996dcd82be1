//! Far-field expansion of the retarded integrals.
//!
//! For a density `f` with moments `m = int f`, `d_a = int f x_a` and
//! `q_ab = int f x_a x_b` about an origin, expanding
//! `int f(x', t - |x - x'|/c) / |x - x'|` to second order in `x'` gives
//!
//! ```text
//!   m/r + n.d/r^2 + (3 n.q.n - tr q)/(2 r^3)
//! + n.d'/(c r) + (3 n.q'.n - tr q')/(2 c r^2)
//! + n.q''.n/(2 c^2 r)
//! ```
//!
//! with every moment taken at the retarded time `t - r/c`. Both `phi` and
//! every component of `A` use the same expansion. It is linear in the source.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sources::MassFluxState;
use crate::spacetime::{Grid3, SimulationUnits};

/// Moments per density: `m`, `d` (3), `q` (xx, xy, xz, yy, yz, zz).
const PER: usize = 10;
/// Densities: `sigma`, `s_x`, `s_y`, `s_z`.
const N: usize = 4 * PER;

/// Zeroth, first and second moments of `sigma` and each flux component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceMoments {
    values: [f64; N],
}

impl SourceMoments {
    pub fn zero() -> Self {
        Self { values: [0.0; N] }
    }

    /// Moments of a sampled source about `origin`.
    pub fn from_state(state: &MassFluxState, origin: [f64; 3]) -> Self {
        let g = *state.grid();
        let dv = g.cell_volume();
        let sigma = state.sigma.data();
        let comps = [
            state.flux.component(0),
            state.flux.component(1),
            state.flux.component(2),
        ];
        let [_, ny, nz] = g.counts;
        let partials: Vec<[f64; N]> = (0..g.counts[0])
            .into_par_iter()
            .map(|i| {
                let mut acc = [0.0; N];
                for j in 0..ny {
                    for k in 0..nz {
                        let idx = g.index(i, j, k);
                        let p = g.position(i, j, k);
                        let x = [p[0] - origin[0], p[1] - origin[1], p[2] - origin[2]];
                        let basis = [
                            1.0,
                            x[0],
                            x[1],
                            x[2],
                            x[0] * x[0],
                            x[0] * x[1],
                            x[0] * x[2],
                            x[1] * x[1],
                            x[1] * x[2],
                            x[2] * x[2],
                        ];
                        let dens = [sigma[idx], comps[0][idx], comps[1][idx], comps[2][idx]];
                        for (d, f) in dens.iter().enumerate() {
                            if *f != 0.0 {
                                for (b, e) in basis.iter().enumerate() {
                                    acc[d * PER + b] += f * e;
                                }
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut values = [0.0; N];
        for p in &partials {
            for (v, x) in values.iter_mut().zip(p) {
                *v += x;
            }
        }
        for v in values.iter_mut() {
            *v *= dv;
        }
        Self { values }
    }

    /// Moments of a scalar density only (flux moments zero).
    pub fn from_density(sigma: &crate::spacetime::ScalarField, origin: [f64; 3]) -> Self {
        let state = MassFluxState {
            sigma: sigma.clone(),
            flux: crate::spacetime::VectorField::zeros(sigma.grid()),
            time: 0.0,
        };
        Self::from_state(&state, origin)
    }

    /// Total lab-frame mass.
    pub fn mass(&self) -> f64 {
        self.values[0]
    }

    /// `int s dV`, the rate of change of the mass dipole.
    pub fn total_flux(&self) -> [f64; 3] {
        [self.values[PER], self.values[2 * PER], self.values[3 * PER]]
    }

    /// Mass dipole about the origin.
    pub fn dipole(&self) -> [f64; 3] {
        [self.values[1], self.values[2], self.values[3]]
    }
}

/// Moment records at uniformly spaced times `t0 + n dt`. The source is
/// taken to have been static before `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentHistory {
    pub origin: [f64; 3],
    t0: f64,
    dt: f64,
    records: Vec<SourceMoments>,
}

/// Value, first and second time derivative weights for three records.
struct Stencil {
    base: isize,
    w: [[f64; 3]; 3],
}

impl MomentHistory {
    pub fn new(origin: [f64; 3], t0: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param("dt", "history spacing must be > 0"));
        }
        Ok(Self {
            origin,
            t0,
            dt,
            records: Vec::new(),
        })
    }

    /// History of a source that never changes.
    pub fn constant(origin: [f64; 3], moments: SourceMoments) -> Self {
        Self {
            origin,
            t0: 0.0,
            dt: 1.0,
            records: vec![moments],
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Time of the next record to be pushed.
    pub fn next_time(&self) -> f64 {
        self.t0 + self.records.len() as f64 * self.dt
    }

    pub fn last_time(&self) -> Option<f64> {
        if self.records.is_empty() {
            None
        } else {
            Some(self.t0 + (self.records.len() - 1) as f64 * self.dt)
        }
    }

    pub fn push(&mut self, time: f64, moments: SourceMoments) -> Result<()> {
        let expected = self.next_time();
        if (time - expected).abs() > 1e-6 * self.dt {
            return Err(Error::Scheduling(format!(
                "moment record at t = {time}, expected t = {expected}"
            )));
        }
        self.records.push(moments);
        Ok(())
    }

    /// Records the source if its time is the next expected one; a repeat of
    /// the latest time is ignored.
    pub fn observe(&mut self, state: &MassFluxState) -> Result<()> {
        if let Some(last) = self.last_time() {
            if (state.time - last).abs() <= 1e-6 * self.dt {
                return Ok(());
            }
        }
        let m = SourceMoments::from_state(state, self.origin);
        self.push(state.time, m)
    }

    fn record(&self, n: isize) -> &[f64; N] {
        let last = self.records.len() as isize - 1;
        &self.records[n.clamp(0, last) as usize].values
    }

    /// Quadratic Lagrange weights around time `t`. Before `t0` the source
    /// is static; past the last record the latest three are extrapolated.
    fn stencil(&self, t: f64) -> Stencil {
        if self.records.len() < 3 || t <= self.t0 {
            let n = if t <= self.t0 {
                0
            } else {
                ((t - self.t0) / self.dt).round() as isize
            };
            return Stencil {
                base: n,
                w: [[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]],
            };
        }
        let x = (t - self.t0) / self.dt;
        let last = self.records.len() as isize - 1;
        let k = (x.round() as isize).min(last - 1);
        let s = x - k as f64;
        let h = self.dt;
        Stencil {
            base: k,
            w: [
                [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)],
                [(s - 0.5) / h, -2.0 * s / h, (s + 0.5) / h],
                [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)],
            ],
        }
    }
}

/// Coefficients of the expansion for one observation point, for the value,
/// first and second time derivative of the ten moments.
fn geometry(n: [f64; 3], r: f64, c: f64) -> [[f64; PER]; 3] {
    let inv = 1.0 / r;
    let mut out = [[0.0; PER]; 3];
    // value
    out[0][0] = inv;
    let inv2 = inv * inv;
    for a in 0..3 {
        out[0][1 + a] = n[a] * inv2;
    }
    // (3 n.q.n - tr q) / 2 with q packed xx, xy, xz, yy, yz, zz
    let quad = |scale: f64| -> [f64; 6] {
        [
            scale * (1.5 * n[0] * n[0] - 0.5),
            scale * 3.0 * n[0] * n[1],
            scale * 3.0 * n[0] * n[2],
            scale * (1.5 * n[1] * n[1] - 0.5),
            scale * 3.0 * n[1] * n[2],
            scale * (1.5 * n[2] * n[2] - 0.5),
        ]
    };
    out[0][4..].copy_from_slice(&quad(inv2 * inv));
    // first derivative
    for a in 0..3 {
        out[1][1 + a] = n[a] * inv / c;
    }
    out[1][4..].copy_from_slice(&quad(inv2 / c));
    // second derivative: n.q''.n / (2 c^2 r)
    let s = 0.5 * inv / (c * c);
    out[2][4..].copy_from_slice(&[
        s * n[0] * n[0],
        s * 2.0 * n[0] * n[1],
        s * 2.0 * n[0] * n[2],
        s * n[1] * n[1],
        s * 2.0 * n[1] * n[2],
        s * n[2] * n[2],
    ]);
    out
}

/// Far-field `(phi, A)` at point `p` and time `t` from the moment history.
pub fn far_field(history: &MomentHistory, p: [f64; 3], t: f64, units: &SimulationUnits) -> [f64; 4] {
    if history.records.is_empty() {
        return [0.0; 4];
    }
    let o = history.origin;
    let x = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if r == 0.0 {
        return [0.0; 4];
    }
    let n = [x[0] / r, x[1] / r, x[2] / r];
    let geo = geometry(n, r, units.c);
    let st = history.stencil(t - r / units.c);
    // fold the three derivative orders into one weight per record and moment
    let mut out = [0.0; 4];
    for (rec, col) in (0..3).map(|m| (st.base - 1 + m as isize, m)) {
        let vals = history.record(rec);
        let mut coef = [0.0; PER];
        for (b, cf) in coef.iter_mut().enumerate() {
            *cf = st.w[0][col] * geo[0][b] + st.w[1][col] * geo[1][b] + st.w[2][col] * geo[2][b];
        }
        for (d, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for b in 0..PER {
                acc += coef[b] * vals[d * PER + b];
            }
            *o += acc;
        }
    }
    let k = units.kappa;
    let kc2 = k / (units.c * units.c);
    [-k * out[0], kc2 * out[1], kc2 * out[2], kc2 * out[3]]
}

/// Dirichlet values of the static far field on every boundary node.
pub(crate) fn static_boundary(
    grid: Grid3,
    moments: SourceMoments,
    units: &SimulationUnits,
) -> impl Fn(usize, usize, usize) -> f64 + Sync {
    let history = MomentHistory::constant(grid.center(), moments);
    let units = *units;
    move |i, j, k| far_field(&history, grid.position(i, j, k), 0.0, &units)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::{sample_scenario, Ball, SourceScenario};

    #[test]
    fn monopole_of_a_centered_ball() {
        let g = Grid3::centered(32, 0.1).unwrap();
        let units = SimulationUnits::default();
        let sc = SourceScenario::StaticBall(Ball::gaussian([0.0; 3], 2.0, 0.2));
        let st = sample_scenario(&sc, 0.0, &g, &units).unwrap();
        let m = SourceMoments::from_state(&st, g.center());
        assert!((m.mass() - 2.0).abs() < 1e-10);
        let h = MomentHistory::constant(g.center(), m);
        let p = [3.0, 1.0, -2.0];
        let r = (14.0f64).sqrt();
        let v = far_field(&h, p, 5.0, &units);
        // Gaussian second moment is isotropic, so the quadrupole term cancels
        assert!((v[0] + 2.0 / r).abs() < 1e-10, "{v:?}");
        assert_eq!(&v[1..], &[0.0; 3]);
    }

    #[test]
    fn offset_point_mass_matches_exact_potential_to_third_order() {
        // A narrow ball displaced by b: exact exterior potential -M/|x - b|.
        let g = Grid3::centered(40, 0.05).unwrap();
        let units = SimulationUnits::default();
        let b = [0.1, -0.05, 0.08];
        let sc = SourceScenario::StaticBall(Ball::gaussian(b, 1.0, 0.1));
        let st = sample_scenario(&sc, 0.0, &g, &units).unwrap();
        let h = MomentHistory::constant(g.center(), SourceMoments::from_state(&st, g.center()));
        let mut prev = f64::INFINITY;
        for r in [2.0, 4.0, 8.0] {
            let p = [r * 0.6, r * 0.8, 0.0];
            let exact = -1.0 / ((p[0] - b[0]).powi(2) + (p[1] - b[1]).powi(2) + (p[2] - b[2]).powi(2)).sqrt();
            // the Gaussian's own isotropic second moment drops out of the
            // traceless combination, so the error is the octupole of b
            let err = (far_field(&h, p, 0.0, &units)[0] - exact).abs();
            assert!(err < prev / 12.0 || err < 1e-12, "r={r}: {err} vs {prev}");
            prev = err;
        }
    }

    #[test]
    fn retarded_time_uses_history() {
        let units = SimulationUnits::default();
        let origin = [0.0; 3];
        let mut h = MomentHistory::new(origin, 0.0, 0.1).unwrap();
        for n in 0..50 {
            let mut m = SourceMoments::zero();
            m.values[0] = 1.0 + 0.01 * n as f64;
            h.push(0.1 * n as f64, m).unwrap();
        }
        // mass linear in time: value at retarded time t - r/c
        let v = far_field(&h, [2.0, 0.0, 0.0], 4.0, &units);
        assert!((v[0] + (1.0 + 0.1 * 2.0) / 2.0).abs() < 1e-12);
        // before the first record the source is static
        let early = far_field(&h, [2.0, 0.0, 0.0], 1.0, &units);
        assert!((early[0] + 0.5).abs() < 1e-12);
        assert!(h.push(7.0, SourceMoments::zero()).is_err());
    }
}
