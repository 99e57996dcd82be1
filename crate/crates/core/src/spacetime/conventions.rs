//! The fixed real-form mapping:
//!
//! | 4-form            | real form                      |
//! |-------------------|--------------------------------|
//! | `x4 = ict`        | time `t`                       |
//! | `V4 = ic gamma`   | Lorentz factor                 |
//! | `Phi4 = -i phi/c` | scalar potential `phi`         |
//! | `s4 = ic sigma`   | lab-frame density `sigma`      |
//! | `d4 = -(i/c) dt`  | time derivative                |
//!
//! Spatial components are unchanged.

use super::four::{c64, FourMatrix, FourVector};

/// Scalar and vector potential at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealPotential {
    pub phi: f64,
    pub a: [f64; 3],
}

/// Lab-frame density and spatial flux at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealFlux {
    pub sigma: f64,
    pub s: [f64; 3],
}

/// First derivatives of the real potentials at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealPotentialGradient {
    pub grad_phi: [f64; 3],
    pub phi_dot: f64,
    /// `grad_a[alpha][beta] = d_alpha A_beta`.
    pub grad_a: [[f64; 3]; 3],
    pub a_dot: [f64; 3],
}

impl RealPotential {
    pub fn to_four(&self, c: f64) -> FourVector {
        [
            c64(self.a[0], 0.0),
            c64(self.a[1], 0.0),
            c64(self.a[2], 0.0),
            c64(0.0, -self.phi / c),
        ]
    }

    /// Inverse of [`RealPotential::to_four`]; imaginary parts of the spatial
    /// entries and the real part of `Phi4` are discarded.
    pub fn from_four(p: &FourVector, c: f64) -> Self {
        Self {
            phi: -p[3].im * c,
            a: [p[0].re, p[1].re, p[2].re],
        }
    }
}

impl RealFlux {
    pub fn to_four(&self, c: f64) -> FourVector {
        [
            c64(self.s[0], 0.0),
            c64(self.s[1], 0.0),
            c64(self.s[2], 0.0),
            c64(0.0, c * self.sigma),
        ]
    }

    pub fn from_four(s: &FourVector, c: f64) -> Self {
        Self {
            sigma: s[3].im / c,
            s: [s[0].re, s[1].re, s[2].re],
        }
    }
}

impl RealPotentialGradient {
    /// `out[j][n] = d_j Phi_n`.
    pub fn to_four(&self, c: f64) -> FourMatrix {
        let mut m = [[c64(0.0, 0.0); 4]; 4];
        for al in 0..3 {
            for be in 0..3 {
                m[al][be] = c64(self.grad_a[al][be], 0.0);
            }
            // d_alpha Phi4 = -(i/c) d_alpha phi
            m[al][3] = c64(0.0, -self.grad_phi[al] / c);
            // d4 A_beta = -(i/c) dA_beta/dt
            m[3][al] = c64(0.0, -self.a_dot[al] / c);
        }
        // d4 Phi4 = -(i/c)(-(i/c)) dphi/dt = -phi_dot / c^2
        m[3][3] = c64(-self.phi_dot / (c * c), 0.0);
        m
    }

    pub fn from_four(m: &FourMatrix, c: f64) -> Self {
        let mut out = Self::default();
        for al in 0..3 {
            for be in 0..3 {
                out.grad_a[al][be] = m[al][be].re;
            }
            out.grad_phi[al] = -m[al][3].im * c;
            out.a_dot[al] = -m[3][al].im * c;
        }
        out.phi_dot = -m[3][3].re * (c * c);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb3() -> impl Strategy<Value = [f64; 3]> {
        prop::array::uniform3(-1e3f64..1e3)
    }

    proptest! {
        // Natural units and powers of two make the scaling by c exact.
        #[test]
        fn potential_round_trip_is_bitwise(phi in -1e3f64..1e3, a in arb3(), e in -4i32..5) {
            let c = 2f64.powi(e);
            let p = RealPotential { phi, a };
            prop_assert_eq!(RealPotential::from_four(&p.to_four(c), c), p);
        }

        #[test]
        fn flux_round_trip_is_bitwise(sigma in 0f64..1e3, s in arb3(), e in -4i32..5) {
            let c = 2f64.powi(e);
            let f = RealFlux { sigma, s };
            prop_assert_eq!(RealFlux::from_four(&f.to_four(c), c), f);
        }

        #[test]
        fn gradient_round_trip_is_bitwise(
            gp in arb3(), pd in -1e3f64..1e3, r0 in arb3(), r1 in arb3(), r2 in arb3(), ad in arb3(),
            e in -4i32..5,
        ) {
            let c = 2f64.powi(e);
            let g = RealPotentialGradient { grad_phi: gp, phi_dot: pd, grad_a: [r0, r1, r2], a_dot: ad };
            prop_assert_eq!(RealPotentialGradient::from_four(&g.to_four(c), c), g);
        }

        #[test]
        fn round_trip_general_c_within_one_ulp(phi in -1e3f64..1e3, c in 0.1f64..10.0) {
            let p = RealPotential { phi, a: [0.0; 3] };
            let back = RealPotential::from_four(&p.to_four(c), c);
            prop_assert!((back.phi - phi).abs() <= 2.0 * f64::EPSILON * phi.abs());
        }
    }
}
