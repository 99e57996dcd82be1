//! Energy-momentum tensor of the field and its conservation law.
//!
//! With `L_km = d_m Phi_k - d_k Phi_m` the tensor is
//! `tau_ks = (c^2/4 pi kappa) L_km L_sm - (c^2/16 pi kappa) L_nm L_nm delta_ks`.
//! Its real-form components are
//!
//! ```text
//! W    = tau_44       = -(F^2 + c^2 G^2) / (8 pi kappa)         (never positive)
//! S    = i c tau_4a   = -(c^2 / 4 pi kappa) F x G
//! p    = (i/c) tau_a4 = -(1 / 4 pi kappa) F x G = S / c^2
//! T_ab = tau_ab       = -(F_a F_b - F^2 d_ab / 2) / (4 pi kappa)
//!                       - c^2 (G_a G_b - G^2 d_ab / 2) / (4 pi kappa)
//! ```
//!
//! and `d_s tau_ks = g_k` becomes, for the default force law,
//!
//! ```text
//! dW/dt + div S - s.F = 0                (energy)
//! d_b T_ab - dp_a/dt - g_a = 0           (momentum)
//! ```
//!
//! when the gauge scalar vanishes. Integrated over a box this is
//! `d/dt sum(W dV) + (outward flux of S) + work_on_source = 0` with
//! `work_on_source = -sum(s.F dV)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fields::{force_density, FieldPair};
use crate::force_laws::IdentityCheck;
use crate::sources::{continuity_residual, MassFluxState, SourceScenario};
use crate::spacetime::four::{c64, FourMatrix, I, ZERO};
use crate::spacetime::{cross3, dot3, ops, Grid3, Region, ResidualNorms, ScalarField, SimulationUnits, VectorField};

/// `L_km = d_m Phi_k - d_k Phi_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LSample {
    pub l: FourMatrix,
}

impl LSample {
    /// From `dphi[j][n] = d_j Phi_n`.
    pub fn from_gradient(dphi: &FourMatrix) -> Self {
        let mut l = [[ZERO; 4]; 4];
        for k in 0..4 {
            for m in 0..4 {
                l[k][m] = dphi[m][k] - dphi[k][m];
            }
        }
        Self { l }
    }

    /// The real-field form: `L_ab = -e_abc G_c`, `L_a4 = (i/c) F_a`.
    pub fn from_fields(f: [f64; 3], g: [f64; 3], c: f64) -> Self {
        let mut l = [[ZERO; 4]; 4];
        l[0][1] = c64(-g[2], 0.0);
        l[1][0] = c64(g[2], 0.0);
        l[0][2] = c64(g[1], 0.0);
        l[2][0] = c64(-g[1], 0.0);
        l[1][2] = c64(-g[0], 0.0);
        l[2][1] = c64(g[0], 0.0);
        for a in 0..3 {
            l[a][3] = c64(0.0, f[a] / c);
            l[3][a] = c64(0.0, -f[a] / c);
        }
        Self { l }
    }

    /// Largest `|L + L^T|` entry.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for k in 0..4 {
            for s in 0..4 {
                m = m.max((self.l[k][s] + self.l[s][k]).norm());
            }
        }
        m
    }
}

/// `tau_ks` evaluated from its defining formula.
pub fn stress_from_l(l: &LSample, units: &SimulationUnits) -> FourMatrix {
    let fpk = units.four_pi_kappa();
    let c2 = units.c * units.c;
    let mut l2 = ZERO;
    for n in 0..4 {
        for m in 0..4 {
            l2 += l.l[n][m] * l.l[n][m];
        }
    }
    let mut tau = [[ZERO; 4]; 4];
    for k in 0..4 {
        for s in 0..4 {
            let mut acc = ZERO;
            for m in 0..4 {
                acc += l.l[k][m] * l.l[s][m];
            }
            tau[k][s] = acc * (c2 / fpk);
            if k == s {
                tau[k][s] -= l2 * (c2 / (4.0 * fpk));
            }
        }
    }
    tau
}

/// Real-form components of `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressSample {
    pub w: f64,
    pub s: [f64; 3],
    pub p: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl StressSample {
    /// Reads `W = tau_44`, `S = ic tau_4a`, `p = (i/c) tau_a4`, `T = tau_ab`
    /// (real parts; the imaginary parts vanish for real fields).
    pub fn from_tau(tau: &FourMatrix, c: f64) -> Self {
        let mut out = Self {
            w: tau[3][3].re,
            ..Self::default()
        };
        for a in 0..3 {
            out.s[a] = (I * c * tau[3][a]).re;
            out.p[a] = (I / c * tau[a][3]).re;
            for b in 0..3 {
                out.t[a][b] = tau[a][b].re;
            }
        }
        out
    }

    /// The closed forms in `F` and `G`.
    pub fn from_fields(f: [f64; 3], g: [f64; 3], units: &SimulationUnits) -> Self {
        let fpk = units.four_pi_kappa();
        let c2 = units.c * units.c;
        let f2 = dot3(f, f);
        let g2 = dot3(g, g);
        let fxg = cross3(f, g);
        let mut t = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let d = if a == b { 0.5 } else { 0.0 };
                t[a][b] = -(f[a] * f[b] - d * f2) / fpk - c2 * (g[a] * g[b] - d * g2) / fpk;
            }
        }
        Self {
            w: -(f2 + c2 * g2) / (2.0 * fpk),
            s: [-c2 / fpk * fxg[0], -c2 / fpk * fxg[1], -c2 / fpk * fxg[2]],
            p: [-fxg[0] / fpk, -fxg[1] / fpk, -fxg[2] / fpk],
            t,
        }
    }
}

/// Field strengths `(F, G)` encoded in a real-form `L`.
pub fn fields_of_l(l: &LSample, c: f64) -> ([f64; 3], [f64; 3]) {
    let f = std::array::from_fn(|a| c * l.l[a][3].im);
    (f, [l.l[2][1].re, l.l[0][2].re, l.l[1][0].re])
}

/// Random real-form potential gradient: real where no index or both
/// indices are 4, imaginary where exactly one is.
fn random_gradient(rng: &mut ChaCha8Rng) -> FourMatrix {
    let mut d = [[ZERO; 4]; 4];
    for j in 0..4 {
        for n in 0..4 {
            let v: f64 = rng.gen_range(-2.0..2.0);
            d[j][n] = if (j == 3) != (n == 3) { c64(0.0, v) } else { c64(v, 0.0) };
        }
    }
    d
}

/// Pointwise tensor identities over `count` seeded samples of `L` built from
/// random potential gradients: symmetry, zero trace, the two evaluations of
/// `W` and `S`, `S = c^2 p`, and `W <= 0`. Deviations are relative to the
/// size of `tau` (for `S` and `p`, to `c |W|`, which bounds `|S|`).
pub fn tensor_suite(count: usize, seed: u64, units: &SimulationUnits) -> Result<Vec<IdentityCheck>> {
    units.validate()?;
    if count == 0 {
        return Err(Error::param("identities.samples", "must be > 0"));
    }
    let c = units.c;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 6];
    let mut max_w = f64::NEG_INFINITY;
    for _ in 0..count {
        let l = LSample::from_gradient(&random_gradient(&mut rng));
        let tau = stress_from_l(&l, units);
        let scale = crate::spacetime::four::matrix_norm(&tau).max(f64::MIN_POSITIVE);
        let mut trace = ZERO;
        for k in 0..4 {
            trace += tau[k][k];
            for s in 0..4 {
                worst[0] = worst[0].max((tau[k][s] - tau[s][k]).norm() / scale);
            }
        }
        worst[1] = worst[1].max(trace.norm() / scale);
        let (f, g) = fields_of_l(&l, c);
        let a = StressSample::from_tau(&tau, c);
        let b = StressSample::from_fields(f, g, units);
        let sw = (c * a.w.abs()).max(f64::MIN_POSITIVE);
        worst[2] = worst[2].max((a.w - b.w).abs() / a.w.abs().max(f64::MIN_POSITIVE));
        for i in 0..3 {
            worst[3] = worst[3].max((a.s[i] - b.s[i]).abs() / sw);
            worst[4] = worst[4].max((a.s[i] - c * c * a.p[i]).abs() / sw);
            for j in 0..3 {
                worst[5] = worst[5].max((a.t[i][j] - b.t[i][j]).abs() / scale);
            }
        }
        worst[1] = worst[1].max(l.antisymmetry_defect() / scale);
        max_w = max_w.max(a.w);
    }
    Ok(vec![
        IdentityCheck::at_most("tau symmetric", worst[0], 1e-12),
        IdentityCheck::at_most("tau traceless, L antisymmetric", worst[1], 1e-12),
        IdentityCheck::at_most("W = tau_44 = -(F^2 + c^2 G^2)/(8 pi kappa)", worst[2], 1e-12),
        IdentityCheck::at_most("S = i c tau_4a = -(c^2/4 pi kappa) F x G", worst[3], 1e-12),
        IdentityCheck::at_most("S = c^2 p", worst[4], 1e-12),
        IdentityCheck::at_most("stress block matches closed form", worst[5], 1e-12),
        IdentityCheck::at_most("max W (never positive)", max_w, 0.0),
    ])
}

/// `W = -(F^2 + c^2 G^2) / (8 pi kappa)` per node.
pub fn energy_density(fields: &FieldPair, units: &SimulationUnits) -> ScalarField {
    let g = *fields.grid();
    let scale = -1.0 / (2.0 * units.four_pi_kappa());
    let c2 = units.c * units.c;
    let data = g.fill(|i, j, k| {
        let f = fields.f.at(i, j, k);
        let gg = fields.g.at(i, j, k);
        scale * (dot3(f, f) + c2 * dot3(gg, gg))
    });
    ScalarField::from_vec(&g, data).expect("same grid")
}

/// `S = -(c^2 / 4 pi kappa) F x G` per node.
pub fn energy_flux(fields: &FieldPair, units: &SimulationUnits) -> VectorField {
    let g = *fields.grid();
    let scale = -units.c * units.c / units.four_pi_kappa();
    let data = g.fill3(|i, j, k| {
        let x = cross3(fields.f.at(i, j, k), fields.g.at(i, j, k));
        [scale * x[0], scale * x[1], scale * x[2]]
    });
    VectorField::from_components(&g, data).expect("same grid")
}

/// `p = -(1 / 4 pi kappa) F x G` per node.
pub fn momentum_density(fields: &FieldPair, units: &SimulationUnits) -> VectorField {
    let g = *fields.grid();
    let scale = -1.0 / units.four_pi_kappa();
    let data = g.fill3(|i, j, k| {
        let x = cross3(fields.f.at(i, j, k), fields.g.at(i, j, k));
        [scale * x[0], scale * x[1], scale * x[2]]
    });
    VectorField::from_components(&g, data).expect("same grid")
}

/// Residuals of the energy and momentum channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub energy: ScalarField,
    pub momentum: VectorField,
    /// Norms of the energy and momentum residuals over the region.
    pub norms: [ResidualNorms; 2],
    /// Continuity residual of the source over the same region; the
    /// conservation law only holds when this vanishes.
    pub continuity: ResidualNorms,
    pub time: f64,
}

impl ConservationReport {
    pub fn continuity_holds(&self, tolerance: f64) -> bool {
        self.continuity.max <= tolerance
    }
}

/// Conservation residuals at the middle of three consecutive field samples,
/// with the sources sampled at the same three times.
pub fn conservation_residual(
    fields: [&FieldPair; 3],
    sources: [&MassFluxState; 3],
    units: &SimulationUnits,
    region: &Region,
) -> Result<ConservationReport> {
    let grid = *fields[1].grid();
    for f in &fields {
        grid.check_same(f.grid(), "conservation fields")?;
    }
    let dt = fields[1].time - fields[0].time;
    let dt2 = fields[2].time - fields[1].time;
    if !(dt > 0.0) || (dt2 - dt).abs() > 1e-9 * dt {
        return Err(Error::Scheduling(format!(
            "conservation needs three equally spaced field samples, got {:?}",
            [fields[0].time, fields[1].time, fields[2].time]
        )));
    }
    for (s, f) in sources.iter().zip(&fields) {
        if (s.time - f.time).abs() > 1e-9 * dt {
            return Err(Error::Scheduling("sources must be sampled at the field times".into()));
        }
    }
    let cont = continuity_residual(sources[0], sources[1], sources[2], dt)?;
    let mid = fields[1];
    let w_before = energy_density(fields[0], units);
    let w_after = energy_density(fields[2], units);
    let p_before = momentum_density(fields[0], units);
    let p_after = momentum_density(fields[2], units);
    let s = energy_flux(mid, units);
    let force = force_density(mid, sources[1])?;
    let stress = stress_field(mid, units);
    let inv = 1.0 / (2.0 * dt);
    let src = sources[1];

    let energy = grid.fill(|i, j, k| {
        let idx = grid.index(i, j, k);
        (w_after.data()[idx] - w_before.data()[idx]) * inv + ops::div_at(&s, i, j, k)
            - dot3(src.flux.at(i, j, k), mid.f.at(i, j, k))
    });
    let momentum = grid.fill3(|i, j, k| {
        let idx = grid.index(i, j, k);
        std::array::from_fn(|a| {
            let div_t = ops::div_at(&stress[a], i, j, k);
            let pdot = (p_after.component(a)[idx] - p_before.component(a)[idx]) * inv;
            div_t - pdot - force.component(a)[idx]
        })
    });
    let energy = ScalarField::from_vec(&grid, energy)?;
    let momentum = VectorField::from_components(&grid, momentum)?;
    let norms = [energy.norms(region), momentum.norms(region)];
    Ok(ConservationReport {
        energy,
        momentum,
        norms,
        continuity: cont.residual.norms(region),
        time: mid.time,
    })
}

/// Rows of the spatial stress `T_ab` as vector fields (row `a`, column `b`).
fn stress_field(fields: &FieldPair, units: &SimulationUnits) -> [VectorField; 3] {
    let g = *fields.grid();
    std::array::from_fn(|a| {
        let data = g.fill3(|i, j, k| {
            StressSample::from_fields(fields.f.at(i, j, k), fields.g.at(i, j, k), units).t[a]
        });
        VectorField::from_components(&g, data).expect("same grid")
    })
}

/// Axis-aligned box of nodes. Its faces sit half a cell outside the
/// outermost nodes, so the box sum of central-difference `div S` equals
/// the outward flux through the faces with `S` averaged across each face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSurface {
    pub region: Region,
}

impl BoxSurface {
    /// Box of nodes within `half_width` of `center`. It must leave at least
    /// one node between its faces and the `margin` nodes nearest each open
    /// face (sponge plus boundary).
    pub fn new(grid: &Grid3, center: [f64; 3], half_width: f64, margin: usize) -> Result<Self> {
        let region = Region::cube(grid, center, half_width);
        if region.is_empty() {
            return Err(Error::Geometry(format!("box of half-width {half_width} contains no nodes")));
        }
        for a in 0..3 {
            if grid.periodic[a] {
                return Err(Error::Geometry("energy boxes need open axes".into()));
            }
            if region.lo[a] < margin + 1 || region.hi[a] + margin + 1 > grid.counts[a] {
                return Err(Error::Geometry(format!(
                    "box {:?}..{:?} intersects the {margin}-node sponge/boundary layer",
                    region.lo, region.hi
                )));
            }
        }
        Ok(Self { region })
    }

    /// Fails when the box faces cut through the body of `scenario`.
    pub fn check_clear_of(&self, grid: &Grid3, scenario: &SourceScenario) -> Result<()> {
        let (center, extent) = scenario.body_extent();
        let lo = grid.position(self.region.lo[0], self.region.lo[1], self.region.lo[2]);
        let hi = grid.position(self.region.hi[0] - 1, self.region.hi[1] - 1, self.region.hi[2] - 1);
        for a in 0..3 {
            let face_lo = lo[a] - 0.5 * grid.dx;
            let face_hi = hi[a] + 0.5 * grid.dx;
            if center[a] - extent <= face_lo || center[a] + extent >= face_hi {
                return Err(Error::Geometry(format!(
                    "box faces [{face_lo}, {face_hi}] on axis {a} cut the source (extent {extent})"
                )));
            }
        }
        Ok(())
    }

    /// Total surface area of the faces.
    pub fn area(&self, grid: &Grid3) -> f64 {
        let l: Vec<f64> = (0..3).map(|a| (self.region.hi[a] - self.region.lo[a]) as f64 * grid.dx).collect();
        2.0 * (l[0] * l[1] + l[1] * l[2] + l[0] * l[2])
    }
}

/// Outward flux of `s` through the box faces (midpoint rule with `s`
/// averaged across each face).
pub fn surface_flux(s: &VectorField, surface: &BoxSurface) -> Result<f64> {
    let g = *s.grid();
    let r = surface.region;
    for a in 0..3 {
        if r.lo[a] == 0 || r.hi[a] >= g.counts[a] {
            return Err(Error::Geometry("box faces need a node on each side".into()));
        }
    }
    let da = g.dx * g.dx;
    let mut total = 0.0;
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let comp = s.component(axis);
        for (inside, outside, sign) in [(r.hi[axis] - 1, r.hi[axis], 1.0), (r.lo[axis], r.lo[axis] - 1, -1.0)] {
            let mut acc = 0.0;
            for p in r.lo[u]..r.hi[u] {
                for q in r.lo[v]..r.hi[v] {
                    let mut a = [0usize; 3];
                    a[u] = p;
                    a[v] = q;
                    a[axis] = inside;
                    let ii = g.index(a[0], a[1], a[2]);
                    a[axis] = outside;
                    let oo = g.index(a[0], a[1], a[2]);
                    acc += 0.5 * (comp[ii] + comp[oo]);
                }
            }
            total += sign * acc;
        }
    }
    Ok(total * da)
}

/// Outward flux of `S` through the box.
pub fn surface_energy_flux(fields: &FieldPair, surface: &BoxSurface, units: &SimulationUnits) -> Result<f64> {
    surface_flux(&energy_flux(fields, units), surface)
}

/// One row of the energy budget of a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetSample {
    pub t: f64,
    /// `sum(W dV)` over the box.
    pub total_w: f64,
    /// Outward flux of `S` through the box faces.
    pub surface_flux: f64,
    /// `-sum(s.F dV)` over the box: power delivered by the field to the
    /// source is its negative.
    pub work_on_source: f64,
}

pub fn budget_sample(
    fields: &FieldPair,
    source: &MassFluxState,
    surface: &BoxSurface,
    units: &SimulationUnits,
) -> Result<BudgetSample> {
    let g = *fields.grid();
    g.check_same(source.grid(), "budget source")?;
    let w = energy_density(fields, units);
    let dv = g.cell_volume();
    let work = -g.sum_over(&surface.region, |i, j, k| dot3(source.flux.at(i, j, k), fields.f.at(i, j, k))) * dv;
    Ok(BudgetSample {
        t: fields.time,
        total_w: w.integral(&surface.region),
        surface_flux: surface_energy_flux(fields, surface, units)?,
        work_on_source: work,
    })
}

/// Residual of `d/dt sum(W dV) + flux + work = 0` at the middle of three
/// consecutive budget samples.
pub fn budget_residual(samples: [&BudgetSample; 3]) -> Result<f64> {
    let dt = samples[1].t - samples[0].t;
    if !(dt > 0.0) || ((samples[2].t - samples[1].t) - dt).abs() > 1e-9 * dt {
        return Err(Error::Scheduling("budget samples must be equally spaced".into()));
    }
    Ok((samples[2].total_w - samples[0].total_w) / (2.0 * dt) + samples[1].surface_flux + samples[1].work_on_source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::four::matrix_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn units() -> SimulationUnits {
        SimulationUnits::new(1.7, 0.6).unwrap()
    }

    fn random_l(rng: &mut ChaCha8Rng, c: f64) -> (LSample, [f64; 3], [f64; 3]) {
        let f: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let g: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        (LSample::from_fields(f, g, c), f, g)
    }

    #[test]
    fn tensor_suite_passes() {
        let checks = tensor_suite(10_000, 3, &units()).unwrap();
        assert_eq!(checks.len(), 7);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn fields_survive_the_l_round_trip() {
        let l = LSample::from_fields([1.0, -2.0, 0.5], [0.3, 0.1, -0.7], 1.7);
        let (f, g) = fields_of_l(&l, 1.7);
        for a in 0..3 {
            assert!((f[a] - [1.0, -2.0, 0.5][a]).abs() < 1e-15);
            assert_eq!(g[a], [0.3, 0.1, -0.7][a]);
        }
    }

    #[test]
    fn zero_l_gives_zero_tau() {
        let tau = stress_from_l(&LSample { l: [[ZERO; 4]; 4] }, &units());
        assert_eq!(matrix_norm(&tau), 0.0);
    }

    #[test]
    fn tau_is_symmetric_and_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = units();
        for _ in 0..2000 {
            let (l, _, _) = random_l(&mut rng, u.c);
            let tau = stress_from_l(&l, &u);
            let scale = matrix_norm(&tau);
            let mut trace = ZERO;
            for k in 0..4 {
                trace += tau[k][k];
                for s in 0..4 {
                    assert!((tau[k][s] - tau[s][k]).norm() <= 1e-12 * scale);
                }
            }
            assert!(trace.norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn real_form_extraction_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = units();
        for _ in 0..500 {
            let (l, f, g) = random_l(&mut rng, u.c);
            let a = StressSample::from_tau(&stress_from_l(&l, &u), u.c);
            let b = StressSample::from_fields(f, g, &u);
            let scale = a.w.abs();
            assert!((a.w - b.w).abs() <= 1e-12 * scale);
            assert!(a.w <= 0.0);
            for x in 0..3 {
                assert!((a.s[x] - b.s[x]).abs() <= 1e-12 * scale * u.c);
                assert!((a.s[x] - u.c * u.c * a.p[x]).abs() <= 1e-12 * scale * u.c);
                for y in 0..3 {
                    assert!((a.t[x][y] - b.t[x][y]).abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn l_from_gradient_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d: FourMatrix = std::array::from_fn(|_| std::array::from_fn(|_| c64(rng.gen(), rng.gen())));
        assert_eq!(LSample::from_gradient(&d).antisymmetry_defect(), 0.0);
    }

    #[test]
    fn static_field_has_no_flux_and_negative_energy() {
        let g = Grid3::centered(12, 0.1).unwrap();
        let f = VectorField::from_fn(&g, |p| [p[0], 2.0 * p[1], -p[2]]);
        let fp = FieldPair::new(f, VectorField::zeros(&g), 0.0).unwrap();
        let u = SimulationUnits::default();
        assert_eq!(energy_flux(&fp, &u).norms(&Region::full(&g)).max, 0.0);
        let w = energy_density(&fp, &u);
        assert!(w.data().iter().all(|&v| v <= 0.0));
        let b = BoxSurface::new(&g, [0.0; 3], 0.25, 2).unwrap();
        assert_eq!(surface_energy_flux(&fp, &b, &u).unwrap(), 0.0);
    }

    #[test]
    fn box_sum_of_divergence_equals_face_flux() {
        let g = Grid3::centered(20, 0.1).unwrap();
        let s = VectorField::from_fn(&g, |p| [p[0].sin() * p[1], p[2] * p[2], (p[0] + p[1]).cos()]);
        let b = BoxSurface::new(&g, [0.05, -0.1, 0.0], 0.45, 3).unwrap();
        let div = ops::div(&s).integral(&b.region);
        let flux = surface_flux(&s, &b).unwrap();
        assert!((div - flux).abs() < 1e-13 * flux.abs().max(1.0), "{div} vs {flux}");
    }

    #[test]
    fn boxes_in_the_sponge_are_rejected() {
        let g = Grid3::centered(20, 0.1).unwrap();
        assert!(matches!(BoxSurface::new(&g, [0.0; 3], 0.8, 4), Err(Error::Geometry(_))));
    }
}
