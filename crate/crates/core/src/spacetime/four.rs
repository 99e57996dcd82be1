//! Complex 4-vectors and 4x4 matrices with Euclidean index placement
//! (`x4 = ict`), so contractions never need a metric.

use num_complex::Complex64;

pub type FourVector = [Complex64; 4];
pub type FourMatrix = [[Complex64; 4]; 4];

#[inline]
pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub const ZERO: Complex64 = c64(0.0, 0.0);
pub const I: Complex64 = c64(0.0, 1.0);

pub fn zero_vector() -> FourVector {
    [ZERO; 4]
}

pub fn zero_matrix() -> FourMatrix {
    [[ZERO; 4]; 4]
}

/// `a_k b_k` without conjugation; `V_k V_k = -c^2` for a 4-velocity.
pub fn minkowski_dot(a: &FourVector, b: &FourVector) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hermitian length, used only to scale tolerances.
pub fn hermitian_norm(a: &FourVector) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matrix_norm(m: &FourMatrix) -> f64 {
    m.iter()
        .flat_map(|row| row.iter())
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `(M V)_k = M_ks V_s`.
pub fn mat_vec(m: &FourMatrix, v: &FourVector) -> FourVector {
    let mut out = zero_vector();
    for k in 0..4 {
        out[k] = (0..4).map(|s| m[k][s] * v[s]).sum();
    }
    out
}

pub fn transpose(m: &FourMatrix) -> FourMatrix {
    let mut t = zero_matrix();
    for k in 0..4 {
        for s in 0..4 {
            t[k][s] = m[s][k];
        }
    }
    t
}

/// Largest modulus of the componentwise difference.
pub fn max_deviation(a: &FourVector, b: &FourVector) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Totally antisymmetric symbol on 0-based indices with `e[0][1][2][3] = +1`
/// (the `e_1234 = +1` convention).
pub fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
        }
    }
    let mut inversions = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] > idx[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(*M)_ks = e_ksnm M_nm`.
pub fn dual(m: &FourMatrix) -> FourMatrix {
    let mut out = zero_matrix();
    for k in 0..4 {
        for s in 0..4 {
            let mut acc = ZERO;
            for n in 0..4 {
                for l in 0..4 {
                    let e = levi_civita(k, s, n, l);
                    if e != 0.0 {
                        acc += m[n][l] * e;
                    }
                }
            }
            out[k][s] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_basics() {
        assert_eq!(levi_civita(0, 1, 2, 3), 1.0);
        assert_eq!(levi_civita(1, 0, 2, 3), -1.0);
        assert_eq!(levi_civita(3, 0, 1, 2), -1.0);
        assert_eq!(levi_civita(0, 0, 2, 3), 0.0);
        let total: f64 = (0..256)
            .map(|n| levi_civita(n & 3, (n >> 2) & 3, (n >> 4) & 3, (n >> 6) & 3).abs())
            .sum();
        assert_eq!(total, 24.0);
    }

    #[test]
    fn double_dual_of_antisymmetric_is_four_times() {
        // e_ksnm e_nmab = 2 (d_ka d_sb - d_kb d_sa), so **M = 4 M for antisymmetric M.
        let mut m = zero_matrix();
        let vals = [1.0, -2.0, 0.5, 3.0, 0.25, -1.5];
        let mut it = vals.iter();
        for k in 0..4 {
            for s in (k + 1)..4 {
                let v = *it.next().unwrap();
                m[k][s] = c64(v, 0.5 * v);
                m[s][k] = -m[k][s];
            }
        }
        let dd = dual(&dual(&m));
        for k in 0..4 {
            for s in 0..4 {
                assert!((dd[k][s] - m[k][s] * 4.0).norm() < 1e-14);
            }
        }
    }
}
