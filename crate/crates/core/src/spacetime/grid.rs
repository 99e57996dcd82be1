use rayon::prelude::*;

use crate::error::{Error, Result};

/// Uniform isotropic Cartesian grid. Node `(i, j, k)` sits at
/// `origin + (i, j, k) * dx`; storage is z-fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3 {
    pub counts: [usize; 3],
    pub dx: f64,
    pub origin: [f64; 3],
    /// Axes with periodic wrap-around (used by plane-wave runs).
    pub periodic: [bool; 3],
}

impl Grid3 {
    pub fn new(counts: [usize; 3], dx: f64, origin: [f64; 3]) -> Result<Self> {
        Self::with_periodic(counts, dx, origin, [false; 3])
    }

    pub fn with_periodic(
        counts: [usize; 3],
        dx: f64,
        origin: [f64; 3],
        periodic: [bool; 3],
    ) -> Result<Self> {
        let g = Self {
            counts,
            dx,
            origin,
            periodic,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n^3` grid centred on the origin.
    pub fn centered(n: usize, dx: f64) -> Result<Self> {
        let half = 0.5 * (n as f64 - 1.0) * dx;
        Self::new([n; 3], dx, [-half; 3])
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.iter().any(|&n| n < 3) {
            return Err(Error::param(
                "grid.counts",
                format!("need at least 3 cells per axis, got {:?}", self.counts),
            ));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::param("grid.dx", format!("must be > 0, got {}", self.dx)));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::param("grid.origin", "must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts[0] * self.counts[1] * self.counts[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of cells in one x-slab.
    #[inline]
    pub fn slab(&self) -> usize {
        self.counts[1] * self.counts[2]
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.counts[1] + j) * self.counts[2] + k
    }

    #[inline]
    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            self.origin[0] + i as f64 * self.dx,
            self.origin[1] + j as f64 * self.dx,
            self.origin[2] + k as f64 * self.dx,
        ]
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dx * self.dx
    }

    /// Geometric centre of the node lattice.
    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = self.origin[a] + 0.5 * (self.counts[a] as f64 - 1.0) * self.dx;
        }
        c
    }

    /// Lower and upper node coordinates per axis.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let mut hi = [0.0; 3];
        for a in 0..3 {
            hi[a] = self.origin[a] + (self.counts[a] as f64 - 1.0) * self.dx;
        }
        (self.origin, hi)
    }

    /// True when the node lies on a non-periodic outer face.
    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        let idx = [i, j, k];
        (0..3).any(|a| !self.periodic[a] && (idx[a] == 0 || idx[a] + 1 == self.counts[a]))
    }

    /// Distance in cells from the nearest non-periodic face.
    #[inline]
    pub fn depth(&self, i: usize, j: usize, k: usize) -> usize {
        let idx = [i, j, k];
        let mut d = usize::MAX;
        for a in 0..3 {
            if !self.periodic[a] {
                d = d.min(idx[a]).min(self.counts[a] - 1 - idx[a]);
            }
        }
        d
    }

    pub fn same_shape(&self, other: &Grid3) -> bool {
        self == other
    }

    pub(crate) fn check_same(&self, other: &Grid3, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{what}: grid {:?} (dx {}) vs {:?} (dx {})",
                self.counts, self.dx, other.counts, other.dx
            )))
        }
    }

    /// Fill a field by evaluating `f(i, j, k)` at every node, in parallel
    /// over x-slabs. Each output depends only on its own index.
    pub fn fill<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        let [_, ny, nz] = self.counts;
        let mut out = vec![0.0; self.len()];
        out.par_chunks_mut(self.slab())
            .enumerate()
            .for_each(|(i, slab)| {
                for j in 0..ny {
                    for k in 0..nz {
                        slab[j * nz + k] = f(i, j, k);
                    }
                }
            });
        out
    }

    /// Like [`Grid3::fill`] for three components at once.
    pub fn fill3<F>(&self, f: F) -> [Vec<f64>; 3]
    where
        F: Fn(usize, usize, usize) -> [f64; 3] + Sync,
    {
        let [_, ny, nz] = self.counts;
        let mut x = vec![0.0; self.len()];
        let mut y = vec![0.0; self.len()];
        let mut z = vec![0.0; self.len()];
        let s = self.slab();
        x.par_chunks_mut(s)
            .zip(y.par_chunks_mut(s))
            .zip(z.par_chunks_mut(s))
            .enumerate()
            .for_each(|(i, ((xs, ys), zs))| {
                for j in 0..ny {
                    for k in 0..nz {
                        let v = f(i, j, k);
                        xs[j * nz + k] = v[0];
                        ys[j * nz + k] = v[1];
                        zs[j * nz + k] = v[2];
                    }
                }
            });
        [x, y, z]
    }

    /// Like [`Grid3::fill`] for `N` outputs per node.
    pub(crate) fn fill_many<const N: usize, F>(&self, f: F) -> [Vec<f64>; N]
    where
        F: Fn(usize, usize, usize) -> [f64; N] + Sync,
    {
        let [_, ny, nz] = self.counts;
        let mut packed = vec![[0.0; N]; self.len()];
        packed
            .par_chunks_mut(self.slab())
            .enumerate()
            .for_each(|(i, slab)| {
                for j in 0..ny {
                    for k in 0..nz {
                        slab[j * nz + k] = f(i, j, k);
                    }
                }
            });
        std::array::from_fn(|c| packed.iter().map(|v| v[c]).collect())
    }

    /// Sum of `f(i, j, k)` over `region`. Partial sums are formed per x-slab
    /// and combined in slab order, so the result does not depend on the
    /// thread count.
    pub fn sum_over<F>(&self, region: &Region, f: F) -> f64
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        let partials: Vec<f64> = (region.lo[0]..region.hi[0])
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in region.lo[1]..region.hi[1] {
                    for k in region.lo[2]..region.hi[2] {
                        acc += f(i, j, k);
                    }
                }
                acc
            })
            .collect();
        partials.iter().sum()
    }

    /// Maximum of `f` over `region` (0 for an empty region).
    pub fn max_over<F>(&self, region: &Region, f: F) -> f64
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        (region.lo[0]..region.hi[0])
            .into_par_iter()
            .map(|i| {
                let mut m = 0.0f64;
                for j in region.lo[1]..region.hi[1] {
                    for k in region.lo[2]..region.hi[2] {
                        m = m.max(f(i, j, k));
                    }
                }
                m
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Half-open index box `lo..hi` per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl Region {
    pub fn full(grid: &Grid3) -> Self {
        Self {
            lo: [0; 3],
            hi: grid.counts,
        }
    }

    /// Nodes at least `margin` cells away from every non-periodic face.
    pub fn interior(grid: &Grid3, margin: usize) -> Self {
        let mut lo = [0; 3];
        let mut hi = grid.counts;
        for a in 0..3 {
            if !grid.periodic[a] {
                lo[a] = margin.min(grid.counts[a]);
                hi[a] = grid.counts[a].saturating_sub(margin).max(lo[a]);
            }
        }
        Self { lo, hi }
    }

    /// Nodes whose coordinates lie within `half_width` of `center` in every
    /// axis (a cube), clipped to the grid.
    pub fn cube(grid: &Grid3, center: [f64; 3], half_width: f64) -> Self {
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            // nodes within 1e-9 cells of a face count as inside
            let l = ((center[a] - half_width - grid.origin[a]) / grid.dx - 1e-9).ceil().max(0.0) as usize;
            let h = ((center[a] + half_width - grid.origin[a]) / grid.dx + 1e-9).floor();
            let h = if h < 0.0 { 0 } else { (h as usize + 1).min(grid.counts[a]) };
            lo[a] = l.min(h);
            hi[a] = h;
        }
        Self { lo, hi }
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            lo[a] = self.lo[a].max(other.lo[a]);
            hi[a] = self.hi[a].min(other.hi[a]).max(lo[a]);
        }
        Region { lo, hi }
    }

    pub fn count(&self) -> usize {
        (0..3).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        let idx = [i, j, k];
        (0..3).all(|a| idx[a] >= self.lo[a] && idx[a] < self.hi[a])
    }
}

/// Max and discrete L2 (`sqrt(sum f^2 dV)`) norms over a region.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualNorms {
    pub max: f64,
    pub l2: f64,
}

impl ResidualNorms {
    /// Root-mean-square value over `region`, i.e. the L2 norm divided by
    /// the square root of the region volume. Use this on grids whose
    /// volume shrinks under refinement (line and slab grids).
    pub fn rms(&self, grid: &Grid3, region: &Region) -> f64 {
        let volume = region.count() as f64 * grid.cell_volume();
        if volume > 0.0 {
            self.l2 / volume.sqrt()
        } else {
            0.0
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Componentwise maximum, for accumulating over time.
    pub fn max_with(self, other: ResidualNorms) -> Self {
        Self {
            max: self.max.max(other.max),
            l2: self.l2.max(other.l2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid3) -> Self {
        Self {
            grid: *grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_vec(grid: &Grid3, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::Shape(format!(
                "scalar field has {} values, grid needs {}",
                data.len(),
                grid.len()
            )));
        }
        Ok(Self { grid: *grid, data })
    }

    pub fn from_fn<F>(grid: &Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync,
    {
        Self {
            grid: *grid,
            data: grid.fill(|i, j, k| f(grid.position(i, j, k))),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.grid.index(i, j, k);
        self.data[idx] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norms(&self, region: &Region) -> ResidualNorms {
        let g = &self.grid;
        let max = g.max_over(region, |i, j, k| self.at(i, j, k).abs());
        let sq = g.sum_over(region, |i, j, k| {
            let v = self.at(i, j, k);
            v * v
        });
        ResidualNorms {
            max,
            l2: (sq * g.cell_volume()).sqrt(),
        }
    }

    /// `sum f dV` over the region.
    pub fn integral(&self, region: &Region) -> f64 {
        self.grid.sum_over(region, |i, j, k| self.at(i, j, k)) * self.grid.cell_volume()
    }

    /// Trilinear interpolation at a physical point inside the grid.
    pub fn interpolate(&self, p: [f64; 3]) -> Result<f64> {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let u = (p[a] - g.origin[a]) / g.dx;
            if !(u >= 0.0 && u <= (g.counts[a] - 1) as f64) {
                return Err(Error::Geometry(format!("point {p:?} outside the grid")));
            }
            let b = (u.floor() as usize).min(g.counts[a] - 2);
            base[a] = b;
            frac[a] = u - b as f64;
        }
        let mut acc = 0.0;
        for di in 0..2 {
            for dj in 0..2 {
                for dk in 0..2 {
                    let w = (if di == 0 { 1.0 - frac[0] } else { frac[0] })
                        * (if dj == 0 { 1.0 - frac[1] } else { frac[1] })
                        * (if dk == 0 { 1.0 - frac[2] } else { frac[2] });
                    acc += w * self.at(base[0] + di, base[1] + dj, base[2] + dk);
                }
            }
        }
        Ok(acc)
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        self.grid.check_same(&other.grid, "zip_map")?;
        let data = self
            .data
            .par_iter()
            .zip(other.data.par_iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Self {
        Self {
            grid: self.grid,
            data: self.data.par_iter().map(|&a| f(a)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid3,
    comps: [Vec<f64>; 3],
}

impl VectorField {
    pub fn zeros(grid: &Grid3) -> Self {
        let n = grid.len();
        Self {
            grid: *grid,
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }

    pub fn from_components(grid: &Grid3, comps: [Vec<f64>; 3]) -> Result<Self> {
        if comps.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Shape("vector component length mismatch".into()));
        }
        Ok(Self { grid: *grid, comps })
    }

    pub fn from_scalars(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self> {
        let grid = *x.grid();
        grid.check_same(y.grid(), "vector component y")?;
        grid.check_same(z.grid(), "vector component z")?;
        Ok(Self {
            grid,
            comps: [x.into_vec(), y.into_vec(), z.into_vec()],
        })
    }

    pub fn from_fn<F>(grid: &Grid3, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3] + Sync,
    {
        Self {
            grid: *grid,
            comps: grid.fill3(|i, j, k| f(grid.position(i, j, k))),
        }
    }

    pub(crate) fn from_index_fn<F>(grid: &Grid3, f: F) -> Self
    where
        F: Fn(usize, usize, usize) -> [f64; 3] + Sync,
    {
        Self {
            grid: *grid,
            comps: grid.fill3(f),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    #[inline]
    pub fn component(&self, a: usize) -> &[f64] {
        &self.comps[a]
    }

    #[inline]
    pub fn component_mut(&mut self, a: usize) -> &mut [f64] {
        &mut self.comps[a]
    }

    pub fn component_field(&self, a: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.comps[a].clone(),
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let idx = self.grid.index(i, j, k);
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: [f64; 3]) {
        let idx = self.grid.index(i, j, k);
        for a in 0..3 {
            self.comps[a][idx] = v[a];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Norms of the pointwise Euclidean length.
    pub fn norms(&self, region: &Region) -> ResidualNorms {
        let g = &self.grid;
        let len2 = |i, j, k| {
            let v = self.at(i, j, k);
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        };
        let max = g.max_over(region, |i, j, k| len2(i, j, k).sqrt());
        let sq = g.sum_over(region, len2);
        ResidualNorms {
            max,
            l2: (sq * g.cell_volume()).sqrt(),
        }
    }

    pub fn interpolate(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        Ok([
            self.component_field(0).interpolate(p)?,
            self.component_field(1).interpolate(p)?,
            self.component_field(2).interpolate(p)?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_degenerate_shapes() {
        assert!(Grid3::new([2, 3, 3], 0.1, [0.0; 3]).is_err());
        assert!(Grid3::new([3, 3, 3], 0.0, [0.0; 3]).is_err());
        assert!(Grid3::new([3, 3, 3], 0.1, [f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn z_fastest_layout() {
        let g = Grid3::new([3, 4, 5], 1.0, [0.0; 3]).unwrap();
        assert_eq!(g.index(0, 0, 1), 1);
        assert_eq!(g.index(0, 1, 0), 5);
        assert_eq!(g.index(1, 0, 0), 20);
        assert_eq!(g.len(), 60);
    }

    #[test]
    fn centered_grid_is_symmetric() {
        let g = Grid3::centered(8, 0.5).unwrap();
        let (lo, hi) = g.bounds();
        assert_eq!(lo[0], -hi[0]);
        assert_eq!(g.center(), [0.0; 3]);
    }

    #[test]
    fn cube_region_snaps_to_nodes() {
        let g = Grid3::centered(11, 0.1).unwrap();
        let r = Region::cube(&g, [0.0; 3], 0.2);
        assert_eq!(r.lo, [3; 3]);
        assert_eq!(r.hi, [8; 3]);
        assert_eq!(r.count(), 125);
    }

    #[test]
    fn interpolation_is_exact_for_trilinear() {
        let g = Grid3::centered(6, 0.25).unwrap();
        let f = ScalarField::from_fn(&g, |p| 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2] + p[0] * p[1]);
        let p = [0.1, -0.2, 0.33];
        let v = f.interpolate(p).unwrap();
        let exact = 1.0 + 0.2 + 0.2 + 0.165 - 0.02;
        assert!((v - exact).abs() < 1e-13);
        assert!(f.interpolate([5.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn ordered_sum_is_thread_count_independent() {
        let g = Grid3::centered(17, 0.1).unwrap();
        let f = ScalarField::from_fn(&g, |p| (p[0] * 3.1).sin() * (p[1] + 0.3).exp() + p[2]);
        let region = Region::full(&g);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| f.integral(&region));
        let b = four.install(|| f.integral(&region));
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
