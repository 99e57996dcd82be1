//! Heavy-mass 4-flux configurations on the grid.
//!
//! A scenario prescribes the lab-frame density `sigma = sigma0 * gamma` and
//! the spatial flux `s = sigma * v` kinematically; there is no dynamics. The
//! comoving density `sigma0` is whatever smooth profile the scenario uses,
//! divided by the local Lorentz factor.
//!
//! Moving bodies are rigid translations or rotations of a fixed lab-frame
//! profile, so `d sigma/dt + div s = 0` holds exactly in the continuum and
//! the lab-frame mass `sum(sigma dV)` is constant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spacetime::{
    cross3, dot3, lorentz_factor, norm3, ops, Grid3, Region, ResidualNorms, ScalarField,
    SimulationUnits, VectorField,
};

/// Ring densities are truncated at this many widths from the centre line.
const RING_CUTOFF_WIDTHS: f64 = 6.0;
/// A body (for containment checks) extends this many widths past its radius.
const BODY_WIDTHS: f64 = 3.0;
/// Support radius used by quadratures and proximity checks.
const SUPPORT_WIDTHS: f64 = 7.0;

/// A uniform ball of radius `radius` smoothed with a Gaussian of standard
/// deviation `width`; `radius = 0` gives a pure Gaussian (point mass).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 3],
    pub radius: f64,
    pub mass: f64,
    pub width: f64,
}

impl Ball {
    pub fn gaussian(center: [f64; 3], mass: f64, width: f64) -> Self {
        Self {
            center,
            radius: 0.0,
            mass,
            width,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::param("scenario.mass", format!("must be > 0, got {}", self.mass)));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::param("scenario.width", format!("must be > 0, got {}", self.width)));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::param(
                "scenario.radius",
                format!("must be >= 0, got {}", self.radius),
            ));
        }
        Ok(())
    }

    /// Density at distance `r` from the centre.
    pub fn profile(&self, r: f64) -> f64 {
        smoothed_ball(r, self.radius, self.width, self.mass)
    }

    pub fn density_at(&self, p: [f64; 3]) -> f64 {
        let d = [p[0] - self.center[0], p[1] - self.center[1], p[2] - self.center[2]];
        self.profile(norm3(d))
    }
}

fn gaussian3(r: f64, width: f64, mass: f64) -> f64 {
    let norm = mass / (2.0 * PI * width * width).powf(1.5);
    norm * (-0.5 * r * r / (width * width)).exp()
}

/// Uniform ball of radius `big_r` convolved with an isotropic Gaussian.
fn smoothed_ball(r: f64, big_r: f64, w: f64, mass: f64) -> f64 {
    if big_r == 0.0 {
        return gaussian3(r, w, mass);
    }
    let rho0 = 3.0 * mass / (4.0 * PI * big_r.powi(3));
    let s2w = std::f64::consts::SQRT_2 * w;
    let plateau = 0.5 * (libm::erf((big_r - r) / s2w) + libm::erf((big_r + r) / s2w));
    let x = r * big_r / (w * w);
    let edge = if x < 1e-6 {
        // limit r -> 0
        (2.0 * big_r / w) * (-0.5 * big_r * big_r / (w * w)).exp()
    } else {
        let a = (-(r - big_r).powi(2) / (2.0 * w * w)).exp();
        let b = (-(r + big_r).powi(2) / (2.0 * w * w)).exp();
        (w / r) * (a - b)
    };
    rho0 * (plateau - edge / (2.0 * PI).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceScenario {
    StaticBall(Ball),
    /// Gaussian blob oscillating along `axis`: `center + axis * A sin(wt)`.
    OscillatingBlob {
        center: [f64; 3],
        width: f64,
        mass: f64,
        axis: [f64; 3],
        amplitude: f64,
        omega: f64,
    },
    /// Gaussian-tube ring of radius `radius` in the plane normal to z,
    /// rotating rigidly about the z axis through `center`.
    RotatingRing {
        center: [f64; 3],
        radius: f64,
        linear_density: f64,
        omega: f64,
        width: f64,
    },
    TwoStaticBalls(Ball, Ball),
    /// Static ball whose density grows as `(1 + rate t)` with no flux.
    /// Violates continuity on purpose; used to exercise the detectors.
    GrowingBall { ball: Ball, rate: f64 },
}

/// How the source is switched on at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SwitchOn {
    /// Fully present for all `t`.
    #[default]
    Immediate,
    /// Density and flux scaled by a smooth ramp from 0 to 1 over the given
    /// time. Breaks continuity while ramping.
    MassRamp(f64),
    /// Mass present from the start; motion amplitudes ramp from 0 to 1.
    /// Continuity holds throughout and the source is static for `t <= 0`.
    MotionRamp(f64),
}

/// `6x^5 - 15x^4 + 10x^3` on `[0, 1]`, clamped outside; returns (value, d/dt).
fn ramp(t: f64, duration: f64) -> (f64, f64) {
    if duration <= 0.0 {
        return if t < 0.0 { (0.0, 0.0) } else { (1.0, 0.0) };
    }
    let x = t / duration;
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let v = x * x * x * (x * (6.0 * x - 15.0) + 10.0);
        let d = 30.0 * x * x * (x - 1.0) * (x - 1.0) / duration;
        (v, d)
    }
}

/// Peak of the ramp derivative times the ramp duration.
const RAMP_PEAK_SLOPE: f64 = 1.875;

impl SourceScenario {
    pub fn validate(&self, units: &SimulationUnits) -> Result<()> {
        match self {
            SourceScenario::StaticBall(b) => b.validate(),
            SourceScenario::TwoStaticBalls(a, b) => {
                a.validate()?;
                b.validate()
            }
            SourceScenario::GrowingBall { ball, rate } => {
                ball.validate()?;
                if !rate.is_finite() {
                    return Err(Error::param("scenario.rate", "must be finite"));
                }
                Ok(())
            }
            SourceScenario::OscillatingBlob {
                width,
                mass,
                axis,
                amplitude,
                omega,
                ..
            } => {
                Ball::gaussian([0.0; 3], *mass, *width).validate()?;
                if (norm3(*axis) - 1.0).abs() > 1e-9 {
                    return Err(Error::param("scenario.axis", "must be a unit vector"));
                }
                if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::param("scenario.amplitude", "must be >= 0"));
                }
                if !(*omega >= 0.0 && omega.is_finite()) {
                    return Err(Error::param("scenario.omega", "must be >= 0"));
                }
                let speed = amplitude * omega;
                if speed >= units.c {
                    return Err(Error::Superluminal { speed, c: units.c });
                }
                Ok(())
            }
            SourceScenario::RotatingRing {
                radius,
                linear_density,
                omega,
                width,
                ..
            } => {
                if !(*radius > 0.0) {
                    return Err(Error::param("scenario.radius", "ring radius must be > 0"));
                }
                if !(*linear_density > 0.0) {
                    return Err(Error::param("scenario.linear_density", "must be > 0"));
                }
                if !(*width > 0.0) {
                    return Err(Error::param("scenario.width", "must be > 0"));
                }
                let speed = omega.abs() * (radius + RING_CUTOFF_WIDTHS * width);
                if speed >= units.c {
                    return Err(Error::Superluminal { speed, c: units.c });
                }
                Ok(())
            }
        }
    }

    /// Total lab-frame heavy mass.
    pub fn total_mass(&self) -> f64 {
        match self {
            SourceScenario::StaticBall(b) => b.mass,
            SourceScenario::TwoStaticBalls(a, b) => a.mass + b.mass,
            SourceScenario::GrowingBall { ball, .. } => ball.mass,
            SourceScenario::OscillatingBlob { mass, .. } => *mass,
            // exact up to the (negligible) part of the tube crossing the axis
            SourceScenario::RotatingRing {
                radius,
                linear_density,
                ..
            } => 2.0 * PI * radius * linear_density,
        }
    }

    /// Sphere containing every point where the density is non-negligible.
    pub fn support(&self) -> ([f64; 3], f64) {
        match self {
            SourceScenario::StaticBall(b) | SourceScenario::GrowingBall { ball: b, .. } => {
                (b.center, b.radius + SUPPORT_WIDTHS * b.width)
            }
            SourceScenario::TwoStaticBalls(a, b) => {
                let mid = [
                    0.5 * (a.center[0] + b.center[0]),
                    0.5 * (a.center[1] + b.center[1]),
                    0.5 * (a.center[2] + b.center[2]),
                ];
                let half = 0.5 * norm3(sub(a.center, b.center));
                let ra = a.radius + SUPPORT_WIDTHS * a.width;
                let rb = b.radius + SUPPORT_WIDTHS * b.width;
                (mid, half + ra.max(rb))
            }
            SourceScenario::OscillatingBlob {
                center,
                width,
                amplitude,
                ..
            } => (*center, amplitude + SUPPORT_WIDTHS * width),
            SourceScenario::RotatingRing {
                center,
                radius,
                width,
                ..
            } => (*center, radius + RING_CUTOFF_WIDTHS * width),
        }
    }

    /// Centre and radius of the region where the body carries appreciable
    /// mass; grids and diagnostic boxes must stay clear of it.
    pub fn body_extent(&self) -> ([f64; 3], f64) {
        match self {
            SourceScenario::StaticBall(b) | SourceScenario::GrowingBall { ball: b, .. } => {
                (b.center, b.radius + BODY_WIDTHS * b.width)
            }
            SourceScenario::TwoStaticBalls(a, b) => {
                let (c, _) = self.support();
                let ra = norm3(sub(a.center, c)) + a.radius + BODY_WIDTHS * a.width;
                let rb = norm3(sub(b.center, c)) + b.radius + BODY_WIDTHS * b.width;
                (c, ra.max(rb))
            }
            SourceScenario::OscillatingBlob {
                center,
                width,
                amplitude,
                ..
            } => (*center, amplitude + BODY_WIDTHS * width),
            SourceScenario::RotatingRing {
                center,
                radius,
                width,
                ..
            } => (*center, radius + BODY_WIDTHS * width),
        }
    }

    /// Smallest mollification width in the scenario.
    pub fn min_width(&self) -> f64 {
        match self {
            SourceScenario::StaticBall(b) | SourceScenario::GrowingBall { ball: b, .. } => b.width,
            SourceScenario::TwoStaticBalls(a, b) => a.width.min(b.width),
            SourceScenario::OscillatingBlob { width, .. }
            | SourceScenario::RotatingRing { width, .. } => *width,
        }
    }

    pub fn is_static(&self) -> bool {
        match self {
            SourceScenario::StaticBall(_) | SourceScenario::TwoStaticBalls(..) => true,
            SourceScenario::OscillatingBlob {
                amplitude, omega, ..
            } => *amplitude == 0.0 || *omega == 0.0,
            SourceScenario::RotatingRing { omega, .. } => *omega == 0.0,
            SourceScenario::GrowingBall { rate, .. } => *rate == 0.0,
        }
    }

    /// Pointwise density and flux at `(p, t)`.
    pub fn evaluate(&self, p: [f64; 3], t: f64, switch: SwitchOn) -> (f64, [f64; 3]) {
        let (mass_scale, motion) = match switch {
            SwitchOn::Immediate => (1.0, (1.0, 0.0)),
            SwitchOn::MassRamp(d) => (ramp(t, d).0, (1.0, 0.0)),
            SwitchOn::MotionRamp(d) => (1.0, ramp(t, d)),
        };
        let (sigma, s) = match self {
            SourceScenario::StaticBall(b) => (b.density_at(p), [0.0; 3]),
            SourceScenario::TwoStaticBalls(a, b) => (a.density_at(p) + b.density_at(p), [0.0; 3]),
            SourceScenario::GrowingBall { ball, rate } => {
                (ball.density_at(p) * (1.0 + rate * t), [0.0; 3])
            }
            SourceScenario::OscillatingBlob {
                center,
                width,
                mass,
                axis,
                amplitude,
                omega,
            } => {
                let (r, dr) = motion;
                let (sn, cs) = (omega * t).sin_cos();
                let disp = amplitude * r * sn;
                let speed = amplitude * (dr * sn + r * omega * cs);
                let pos = [
                    center[0] + axis[0] * disp,
                    center[1] + axis[1] * disp,
                    center[2] + axis[2] * disp,
                ];
                let sigma = gaussian3(norm3(sub(p, pos)), *width, *mass);
                (sigma, scale(*axis, sigma * speed))
            }
            SourceScenario::RotatingRing {
                center,
                radius,
                linear_density,
                omega,
                width,
            } => {
                let d = sub(p, *center);
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                let dist2 = (rho - radius).powi(2) + d[2] * d[2];
                let cutoff = RING_CUTOFF_WIDTHS * width;
                if dist2 > cutoff * cutoff {
                    (0.0, [0.0; 3])
                } else {
                    let sigma = linear_density / (2.0 * PI * width * width)
                        * (-0.5 * dist2 / (width * width)).exp();
                    let w = omega * motion.0;
                    (sigma, [-w * d[1] * sigma, w * d[0] * sigma, 0.0])
                }
            }
        };
        (sigma * mass_scale, scale(s, mass_scale))
    }

    pub fn density_at(&self, p: [f64; 3], t: f64, switch: SwitchOn) -> f64 {
        self.evaluate(p, t, switch).0
    }
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Lab-frame density `sigma` and spatial flux `s` on a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFluxState {
    pub sigma: ScalarField,
    pub flux: VectorField,
    pub time: f64,
}

impl MassFluxState {
    pub fn zeros(grid: &Grid3, time: f64) -> Self {
        Self {
            sigma: ScalarField::zeros(grid),
            flux: VectorField::zeros(grid),
            time,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        self.sigma.grid()
    }

    /// `v = s / sigma`, zero where there is no mass.
    pub fn velocity_at(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let sigma = self.sigma.at(i, j, k);
        if sigma > 0.0 {
            scale(self.flux.at(i, j, k), 1.0 / sigma)
        } else {
            [0.0; 3]
        }
    }

    /// Comoving density `sigma0 = sigma / gamma`.
    pub fn comoving_density(&self, units: &SimulationUnits) -> Result<ScalarField> {
        let g = *self.grid();
        let mut out = ScalarField::zeros(&g);
        for i in 0..g.counts[0] {
            for j in 0..g.counts[1] {
                for k in 0..g.counts[2] {
                    let gamma = lorentz_factor(self.velocity_at(i, j, k), units)?;
                    out.set(i, j, k, self.sigma.at(i, j, k) / gamma);
                }
            }
        }
        Ok(out)
    }

    /// Lab-frame mass `sum(sigma dV)`.
    pub fn total_mass(&self) -> f64 {
        self.sigma.integral(&Region::full(self.grid()))
    }

    /// Checks `sigma >= 0`, finiteness and `|s| < c sigma` where `sigma > 0`.
    pub fn validate(&self, units: &SimulationUnits) -> Result<()> {
        let g = *self.grid();
        g.check_same(self.flux.grid(), "flux vs density")?;
        for idx in 0..g.len() {
            let sigma = self.sigma.data()[idx];
            let s = [
                self.flux.component(0)[idx],
                self.flux.component(1)[idx],
                self.flux.component(2)[idx],
            ];
            if !(sigma.is_finite() && s.iter().all(|v| v.is_finite())) {
                return Err(Error::Shape(format!("non-finite source value at cell {idx}")));
            }
            if sigma < 0.0 {
                return Err(Error::param("sigma", format!("negative density {sigma} at cell {idx}")));
            }
            let speed_sigma = norm3(s);
            if speed_sigma > 0.0 && speed_sigma >= units.c * sigma {
                return Err(Error::Superluminal {
                    speed: speed_sigma / sigma,
                    c: units.c,
                });
            }
        }
        Ok(())
    }
}

/// A scenario together with its switch-on policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSampler {
    pub scenario: SourceScenario,
    pub switch: SwitchOn,
}

impl SourceSampler {
    pub fn new(scenario: SourceScenario, switch: SwitchOn) -> Self {
        Self { scenario, switch }
    }

    pub fn immediate(scenario: SourceScenario) -> Self {
        Self::new(scenario, SwitchOn::Immediate)
    }

    pub fn validate(&self, units: &SimulationUnits) -> Result<()> {
        self.scenario.validate(units)?;
        if let (
            SwitchOn::MotionRamp(d),
            SourceScenario::OscillatingBlob {
                amplitude, omega, ..
            },
        ) = (self.switch, &self.scenario)
        {
            if d > 0.0 {
                let speed = amplitude * (omega + RAMP_PEAK_SLOPE / d);
                if speed >= units.c {
                    return Err(Error::Superluminal { speed, c: units.c });
                }
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, p: [f64; 3], t: f64) -> (f64, [f64; 3]) {
        self.scenario.evaluate(p, t, self.switch)
    }

    /// The source must be resolved (width >= 2 dx) and its body must keep a
    /// 4-cell margin from every open face.
    pub fn check_fits(&self, grid: &Grid3) -> Result<()> {
        check_fits(&self.scenario, grid)
    }

    /// Samples `sigma` and `s` at every node.
    pub fn sample(&self, t: f64, grid: &Grid3, units: &SimulationUnits) -> Result<MassFluxState> {
        self.validate(units)?;
        self.check_fits(grid)?;
        let [sigma, sx, sy, sz] = grid.fill_many::<4, _>(|i, j, k| {
            let (sigma, s) = self.evaluate(grid.position(i, j, k), t);
            [sigma, s[0], s[1], s[2]]
        });
        Ok(MassFluxState {
            sigma: ScalarField::from_vec(grid, sigma)?,
            flux: VectorField::from_components(grid, [sx, sy, sz])?,
            time: t,
        })
    }
}

fn check_fits(scenario: &SourceScenario, grid: &Grid3) -> Result<()> {
    let w = scenario.min_width();
    if w < 2.0 * grid.dx {
        return Err(Error::param(
            "scenario.width",
            format!("mollification width {w} must be at least 2 dx = {}", 2.0 * grid.dx),
        ));
    }
    let (center, extent) = scenario.body_extent();
    let (lo, hi) = grid.bounds();
    let margin = 4.0 * grid.dx;
    for a in 0..3 {
        if grid.periodic[a] {
            continue;
        }
        if center[a] - extent < lo[a] + margin || center[a] + extent > hi[a] - margin {
            return Err(Error::OutOfBounds(format!(
                "body of extent {extent} at {center:?} needs a 4-cell margin inside [{:?}, {:?}]",
                lo, hi
            )));
        }
    }
    Ok(())
}

/// Samples a scenario with no switch-on ramp.
pub fn sample_scenario(
    scenario: &SourceScenario,
    t: f64,
    grid: &Grid3,
    units: &SimulationUnits,
) -> Result<MassFluxState> {
    SourceSampler::immediate(scenario.clone()).sample(t, grid, units)
}

/// Discrete `d sigma/dt + div s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    pub residual: ScalarField,
    pub norms: ResidualNorms,
}

/// Centred continuity residual `(sigma(t+dt) - sigma(t-dt)) / 2dt + div s(t)`,
/// with norms over nodes one cell away from the outer faces.
pub fn continuity_residual(
    before: &MassFluxState,
    at: &MassFluxState,
    after: &MassFluxState,
    dt: f64,
) -> Result<ContinuityReport> {
    let g = *at.grid();
    g.check_same(before.grid(), "continuity: before")?;
    g.check_same(after.grid(), "continuity: after")?;
    if !(dt > 0.0) {
        return Err(Error::Scheduling(format!("time step must be > 0, got {dt}")));
    }
    let tol = 1e-9 * dt.max(at.time.abs() * 1e-6);
    if ((at.time - before.time) - dt).abs() > tol || ((after.time - at.time) - dt).abs() > tol {
        return Err(Error::Scheduling(format!(
            "states at {}, {}, {} are not spaced by dt = {dt}",
            before.time, at.time, after.time
        )));
    }
    let sb = before.sigma.data();
    let sa = after.sigma.data();
    let data = g.fill(|i, j, k| {
        let idx = g.index(i, j, k);
        (sa[idx] - sb[idx]) / (2.0 * dt) + ops::div_at(&at.flux, i, j, k)
    });
    let residual = ScalarField::from_vec(&g, data)?;
    let norms = residual.norms(&Region::interior(&g, 1));
    Ok(ContinuityReport { residual, norms })
}

/// Centre of mass of the lab-frame density.
pub fn center_of_mass(state: &MassFluxState) -> [f64; 3] {
    let g = *state.grid();
    let region = Region::full(&g);
    let m = state.sigma.grid().sum_over(&region, |i, j, k| state.sigma.at(i, j, k));
    let mut out = [0.0; 3];
    for (a, o) in out.iter_mut().enumerate() {
        *o = g.sum_over(&region, |i, j, k| state.sigma.at(i, j, k) * g.position(i, j, k)[a]) / m;
    }
    out
}

/// Angular momentum-like check for rigid rotation: `s . (omega x r) >= 0`.
#[doc(hidden)]
pub fn flux_alignment(state: &MassFluxState, axis: [f64; 3], center: [f64; 3]) -> f64 {
    let g = *state.grid();
    g.sum_over(&Region::full(&g), |i, j, k| {
        let r = sub(g.position(i, j, k), center);
        dot3(state.flux.at(i, j, k), cross3(axis, r))
    })
}
