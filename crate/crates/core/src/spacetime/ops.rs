//! Second-order finite-difference operators.
//!
//! Interior nodes use central differences; nodes on a non-periodic face use
//! one-sided second-order stencils, and periodic axes wrap around. Every
//! output node reads only input data, so results are independent of the
//! parallel schedule.

use super::grid::{Grid3, ScalarField, VectorField};

#[inline]
fn stride(g: &Grid3, axis: usize) -> usize {
    match axis {
        0 => g.slab(),
        1 => g.counts[2],
        _ => 1,
    }
}

// Stencils are written in differences so constants give exactly zero.

/// First derivative of raw grid data along `axis` at node `(i, j, k)`.
#[inline]
pub(crate) fn d1(f: &[f64], g: &Grid3, axis: usize, i: usize, j: usize, k: usize) -> f64 {
    let pos = [i, j, k][axis];
    let n = g.counts[axis];
    let st = stride(g, axis);
    let c = g.index(i, j, k);
    let h2 = 2.0 * g.dx;
    if g.periodic[axis] {
        let m = if pos == 0 { c + (n - 1) * st } else { c - st };
        let p = if pos + 1 == n { c - (n - 1) * st } else { c + st };
        (f[p] - f[m]) / h2
    } else if pos == 0 {
        (4.0 * (f[c + st] - f[c]) - (f[c + 2 * st] - f[c])) / h2
    } else if pos + 1 == n {
        (4.0 * (f[c] - f[c - st]) - (f[c] - f[c - 2 * st])) / h2
    } else {
        (f[c + st] - f[c - st]) / h2
    }
}

/// Second derivative along `axis`.
#[inline]
pub(crate) fn d2(f: &[f64], g: &Grid3, axis: usize, i: usize, j: usize, k: usize) -> f64 {
    let pos = [i, j, k][axis];
    let n = g.counts[axis];
    let st = stride(g, axis);
    let c = g.index(i, j, k);
    let h2 = g.dx * g.dx;
    if g.periodic[axis] {
        let m = if pos == 0 { c + (n - 1) * st } else { c - st };
        let p = if pos + 1 == n { c - (n - 1) * st } else { c + st };
        (f[p] - 2.0 * f[c] + f[m]) / h2
    } else if pos == 0 {
        if n >= 4 {
            (-5.0 * (f[c + st] - f[c]) + 4.0 * (f[c + 2 * st] - f[c]) - (f[c + 3 * st] - f[c])) / h2
        } else {
            ((f[c + 2 * st] - f[c + st]) - (f[c + st] - f[c])) / h2
        }
    } else if pos + 1 == n {
        if n >= 4 {
            (-5.0 * (f[c - st] - f[c]) + 4.0 * (f[c - 2 * st] - f[c]) - (f[c - 3 * st] - f[c])) / h2
        } else {
            ((f[c - 2 * st] - f[c - st]) - (f[c - st] - f[c])) / h2
        }
    } else {
        (f[c + st] - 2.0 * f[c] + f[c - st]) / h2
    }
}

#[inline]
pub(crate) fn lap(f: &[f64], g: &Grid3, i: usize, j: usize, k: usize) -> f64 {
    d2(f, g, 0, i, j, k) + d2(f, g, 1, i, j, k) + d2(f, g, 2, i, j, k)
}

#[inline]
pub(crate) fn div_at(a: &VectorField, i: usize, j: usize, k: usize) -> f64 {
    let g = a.grid();
    d1(a.component(0), g, 0, i, j, k) + d1(a.component(1), g, 1, i, j, k) + d1(a.component(2), g, 2, i, j, k)
}

#[inline]
pub(crate) fn curl_at(a: &VectorField, i: usize, j: usize, k: usize) -> [f64; 3] {
    let g = a.grid();
    let (ax, ay, az) = (a.component(0), a.component(1), a.component(2));
    [
        d1(az, g, 1, i, j, k) - d1(ay, g, 2, i, j, k),
        d1(ax, g, 2, i, j, k) - d1(az, g, 0, i, j, k),
        d1(ay, g, 0, i, j, k) - d1(ax, g, 1, i, j, k),
    ]
}

#[inline]
pub(crate) fn grad_at(f: &[f64], g: &Grid3, i: usize, j: usize, k: usize) -> [f64; 3] {
    [d1(f, g, 0, i, j, k), d1(f, g, 1, i, j, k), d1(f, g, 2, i, j, k)]
}

pub fn grad(phi: &ScalarField) -> VectorField {
    let g = *phi.grid();
    let f = phi.data();
    VectorField::from_index_fn(&g, |i, j, k| grad_at(f, &g, i, j, k))
}

pub fn div(a: &VectorField) -> ScalarField {
    let g = *a.grid();
    ScalarField::from_vec(&g, g.fill(|i, j, k| div_at(a, i, j, k))).expect("same grid")
}

pub fn curl(a: &VectorField) -> VectorField {
    let g = *a.grid();
    VectorField::from_index_fn(&g, |i, j, k| curl_at(a, i, j, k))
}

pub fn laplacian(phi: &ScalarField) -> ScalarField {
    let g = *phi.grid();
    let f = phi.data();
    ScalarField::from_vec(&g, g.fill(|i, j, k| lap(f, &g, i, j, k))).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::Region;

    fn smooth_vector(g: &Grid3) -> VectorField {
        VectorField::from_fn(g, |p| {
            [
                (1.3 * p[1]).sin() * (0.7 * p[2]).cos() + p[0] * p[0],
                (0.9 * p[0] + 0.4 * p[2]).sin(),
                (p[0] * p[1]).cos() + (1.1 * p[2]).sin(),
            ]
        })
    }

    #[test]
    fn constant_has_zero_gradient() {
        let g = Grid3::centered(6, 0.3).unwrap();
        let f = ScalarField::from_fn(&g, |_| 4.2);
        let gr = grad(&f);
        assert!(gr.norms(&Region::full(&g)).max == 0.0);
        assert!(laplacian(&f).norms(&Region::full(&g)).max == 0.0);
    }

    #[test]
    fn quadratics_are_differentiated_exactly() {
        let g = Grid3::new([7, 5, 6], 0.2, [-0.5, 0.1, 0.3]).unwrap();
        let f = ScalarField::from_fn(&g, |p| p[0] * p[0] + 3.0 * p[1] * p[2] - p[2] * p[2]);
        let gr = grad(&f);
        let l = laplacian(&f);
        // one-sided second-order stencils are exact for quadratics too
        for i in 0..7 {
            for j in 0..5 {
                for k in 0..6 {
                    let p = g.position(i, j, k);
                    let v = gr.at(i, j, k);
                    assert!((v[0] - 2.0 * p[0]).abs() < 1e-12);
                    assert!((v[1] - 3.0 * p[2]).abs() < 1e-12);
                    assert!((v[2] - (3.0 * p[1] - 2.0 * p[2])).abs() < 1e-12);
                    assert!((l.at(i, j, k) - 0.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn div_curl_and_curl_grad_vanish_to_roundoff() {
        // Per-axis stencils commute even where they are one-sided, so both
        // identities hold at every node, boundaries included.
        for n in [11usize, 21, 41] {
            let dx = 2.0 / (n as f64 - 1.0);
            let g = Grid3::centered(n, dx).unwrap();
            let a = smooth_vector(&g);
            let full = Region::full(&g);
            let scale = curl(&a).norms(&full).max / dx;
            let dc = div(&curl(&a)).norms(&full).max;
            assert!(dc <= 1e-13 * scale, "n={n}: div curl = {dc}");
            let phi = a.component_field(1);
            let cg = curl(&grad(&phi)).norms(&full).max;
            assert!(cg <= 1e-13 * scale, "n={n}: curl grad = {cg}");
        }
    }

    #[test]
    fn wide_and_compact_laplacians_agree_at_second_order() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [17usize, 33, 65] {
            let dx = 2.0 / (n as f64 - 1.0);
            let g = Grid3::centered(n, dx).unwrap();
            let f = ScalarField::from_fn(&g, |p| (1.3 * p[0]).sin() * (0.8 * p[1]).cos() * (0.5 * p[2]).exp());
            let wide = div(&grad(&f));
            let diff = wide.zip_map(&laplacian(&f), |a, b| a - b).unwrap();
            errs.push(diff.norms(&Region::interior(&g, 2)).max);
            hs.push(dx);
        }
        let order = crate::convergence::fitted_order(&hs, &errs).unwrap();
        assert!((order - 2.0).abs() < 0.25, "order {order}, errs {errs:?}");
    }

    #[test]
    fn periodic_axis_wraps() {
        let n = 16;
        let l = 2.0 * std::f64::consts::PI;
        let dx = l / n as f64;
        let g = Grid3::with_periodic([n, 3, 3], dx, [0.0; 3], [true, false, false]).unwrap();
        let f = ScalarField::from_fn(&g, |p| p[0].sin());
        let gr = grad(&f);
        let expected = (dx).sin() / dx;
        for i in 0..n {
            let x = g.position(i, 0, 0)[0];
            assert!((gr.at(i, 1, 1)[0] - expected * x.cos()).abs() < 1e-12);
        }
    }
}
