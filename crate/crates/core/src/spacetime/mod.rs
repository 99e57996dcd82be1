//! Units, the imaginary-time conventions, grid geometry and the discrete
//! differential operators shared by every field module.
//!
//! Coordinates follow `(x1, x2, x3, x4) = (x, y, z, ict)`, so a 4-vector
//! carries its time component as an imaginary number. Grid data is always
//! stored in real variables; [`conventions`] converts between the real form
//! and the complex 4-form for pointwise work.

pub mod conventions;
pub mod four;
mod grid;
pub mod ops;

pub use grid::{Grid3, Region, ResidualNorms, ScalarField, VectorField};

use crate::error::{Error, Result};
use four::{c64, FourVector};

/// Physical constants of a run. Natural units (`c = kappa = 1`) by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationUnits {
    /// Speed of light.
    pub c: f64,
    /// Gravitational constant.
    pub kappa: f64,
}

impl Default for SimulationUnits {
    fn default() -> Self {
        Self { c: 1.0, kappa: 1.0 }
    }
}

impl SimulationUnits {
    pub fn new(c: f64, kappa: f64) -> Result<Self> {
        let units = Self { c, kappa };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::param("units.c", format!("must be > 0, got {}", self.c)));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::param(
                "units.kappa",
                format!("must be > 0, got {}", self.kappa),
            ));
        }
        Ok(())
    }

    /// `4 pi kappa`, the coupling that appears in every source term.
    #[inline]
    pub fn four_pi_kappa(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.kappa
    }
}

#[inline]
pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `gamma = 1 / sqrt(1 - |v|^2 / c^2)`.
pub fn lorentz_factor(v: [f64; 3], units: &SimulationUnits) -> Result<f64> {
    let speed = norm3(v);
    if !(speed < units.c) {
        return Err(Error::Superluminal { speed, c: units.c });
    }
    let beta2 = dot3(v, v) / (units.c * units.c);
    Ok(1.0 / (1.0 - beta2).sqrt())
}

/// `V = (gamma v, i c gamma)`.
pub fn four_velocity(v: [f64; 3], units: &SimulationUnits) -> Result<FourVector> {
    let gamma = lorentz_factor(v, units)?;
    Ok([
        c64(gamma * v[0], 0.0),
        c64(gamma * v[1], 0.0),
        c64(gamma * v[2], 0.0),
        c64(0.0, units.c * gamma),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use four::minkowski_dot;
    use proptest::prelude::*;

    #[test]
    fn gamma_at_rest_is_one() {
        let u = SimulationUnits::default();
        assert_eq!(lorentz_factor([0.0; 3], &u).unwrap(), 1.0);
    }

    #[test]
    fn gamma_at_six_tenths_c() {
        let u = SimulationUnits::new(3.0, 1.0).unwrap();
        let g = lorentz_factor([0.0, 1.8, 0.0], &u).unwrap();
        assert!((g - 1.25).abs() < 1e-15);
    }

    #[test]
    fn gamma_rejects_light_speed() {
        let u = SimulationUnits::default();
        assert!(matches!(
            lorentz_factor([1.0, 0.0, 0.0], &u),
            Err(Error::Superluminal { .. })
        ));
        assert!(four_velocity([0.0, 0.0, 2.0], &u).is_err());
    }

    #[test]
    fn four_velocity_examples() {
        let u = SimulationUnits::default();
        let v0 = four_velocity([0.0; 3], &u).unwrap();
        assert_eq!(v0, [c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0)]);

        let v = four_velocity([0.6, 0.0, 0.0], &u).unwrap();
        assert!((v[0].re - 0.75).abs() < 1e-15);
        assert!((v[3].im - 1.25).abs() < 1e-15);
        assert_eq!(v[1], c64(0.0, 0.0));
    }

    #[test]
    fn units_reject_nonpositive() {
        assert!(SimulationUnits::new(0.0, 1.0).is_err());
        assert!(SimulationUnits::new(1.0, -1.0).is_err());
        assert!(SimulationUnits::new(f64::NAN, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn minkowski_square_is_minus_c2(
            c in 0.1f64..10.0,
            r in 0.0f64..0.999,
            theta in 0.0f64..std::f64::consts::PI,
            phi in 0.0f64..(2.0 * std::f64::consts::PI),
        ) {
            let u = SimulationUnits::new(c, 1.0).unwrap();
            let s = r * c;
            let v = [s * theta.sin() * phi.cos(), s * theta.sin() * phi.sin(), s * theta.cos()];
            let four = four_velocity(v, &u).unwrap();
            let sq = minkowski_dot(&four, &four);
            prop_assert!((sq.re + c * c).abs() <= 1e-12 * c * c);
            prop_assert!(sq.im.abs() <= 1e-12 * c * c);
        }
    }
}
