//! Regular-grid scalar and vector fields and the discrete vector calculus the
//! rest of the pipeline is built on.
//!
//! Storage is row-major: cell `(i, j)` (i along x, j along y) lives at index
//! `j * nx + i` and its center sits at `origin + (i, j) * spacing`.
//!
//! Derivatives use second-order central differences in the interior and
//! first-order one-sided differences on the boundary rows and columns.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Shape and placement of a regular grid. Units are millimeters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: [f64; 2],
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, spacing: f64, origin: [f64; 2]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells per axis, got {nx}x{ny}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { nx, ny, spacing, origin })
    }

    /// A grid whose geometric center is the physical origin `(0, 0)`.
    pub fn centered(nx: usize, ny: usize, spacing: f64) -> Result<Self> {
        let ox = -0.5 * (nx as f64 - 1.0) * spacing;
        let oy = -0.5 * (ny as f64 - 1.0) * spacing;
        Self::new(nx, ny, spacing, [ox, oy])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Inverse of [`GridSpec::index`].
    #[inline]
    pub fn cell(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    /// Physical position of a cell center.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.spacing,
            self.origin[1] + j as f64 * self.spacing,
        ]
    }

    /// Geometric center of the grid.
    pub fn center(&self) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * (self.nx as f64 - 1.0) * self.spacing,
            self.origin[1] + 0.5 * (self.ny as f64 - 1.0) * self.spacing,
        ]
    }

    /// True when the cell is at least `margin` cells away from every edge.
    #[inline]
    pub fn is_interior(&self, i: usize, j: usize, margin: usize) -> bool {
        i >= margin && j >= margin && i + margin < self.nx && j + margin < self.ny
    }

    /// Cell indices iterated in scan order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
    }
}

fn check_values(grid: &GridSpec, name: &str, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::InvalidField(format!(
            "{name} has {} entries, grid needs {}",
            values.len(),
            grid.len()
        )));
    }
    if let Some(k) = values.iter().position(|x| !x.is_finite()) {
        let (i, j) = grid.cell(k);
        return Err(Error::InvalidField(format!("{name} is not finite at cell ({i}, {j})")));
    }
    Ok(())
}

/// Scalar field sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_values(&grid, "values", &values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: alloc::vec![0.0; grid.len()] }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut([f64; 2]) -> f64) -> Result<Self> {
        let values = grid.cells().map(|(i, j)| f(grid.position(i, j))).collect();
        Self::new(grid, values)
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Root mean square over cells at least `margin` cells from the boundary.
    pub fn interior_rms(&self, margin: usize) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for (i, j) in self.grid.cells() {
            if self.grid.is_interior(i, j, margin) {
                let x = self.at(i, j);
                sum += x * x;
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            math::sqrt(sum / n as f64)
        }
    }
}

/// Displacement field: per-cell `(u, v)` vectors in millimeters.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    grid: GridSpec,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl VectorField2D {
    pub fn new(grid: GridSpec, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_values(&grid, "u", &u)?;
        check_values(&grid, "v", &v)?;
        Ok(Self { grid, u, v })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, u: alloc::vec![0.0; grid.len()], v: alloc::vec![0.0; grid.len()] }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Result<Self> {
        let mut u = Vec::with_capacity(grid.len());
        let mut v = Vec::with_capacity(grid.len());
        for (i, j) in grid.cells() {
            let [a, b] = f(grid.position(i, j));
            u.push(a);
            v.push(b);
        }
        Self::new(grid, u, v)
    }

    pub(crate) fn from_raw(grid: GridSpec, u: Vec<f64>, v: Vec<f64>) -> Self {
        debug_assert!(u.len() == grid.len() && v.len() == grid.len());
        Self { grid, u, v }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.grid.index(i, j);
        [self.u[k], self.v[k]]
    }

    /// Flattened `[u..., v...]` values, the raw-field regression input.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.grid.len());
        out.extend_from_slice(&self.u);
        out.extend_from_slice(&self.v);
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_raw(
            self.grid,
            self.u.iter().map(|x| a * x).collect(),
            self.v.iter().map(|x| a * x).collect(),
        )
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid,
            self.u.iter().zip(&other.u).map(|(x, y)| a * x + b * y).collect(),
            self.v.iter().zip(&other.v).map(|(x, y)| a * x + b * y).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Largest per-cell vector norm.
    pub fn max_norm(&self) -> f64 {
        self.u.iter().zip(&self.v).fold(0.0, |m, (a, b)| m.max(math::hypot(*a, *b)))
    }

    /// Sum of squared vector norms over all cells.
    pub fn energy(&self) -> f64 {
        self.u.iter().zip(&self.v).map(|(a, b)| a * a + b * b).sum()
    }

    /// Sum of squared vector norms over cells at least `margin` from the edge.
    pub fn interior_energy(&self, margin: usize) -> f64 {
        self.grid
            .cells()
            .filter(|&(i, j)| self.grid.is_interior(i, j, margin))
            .map(|(i, j)| {
                let [a, b] = self.at(i, j);
                a * a + b * b
            })
            .sum()
    }
}

fn d_dx(grid: &GridSpec, a: &[f64]) -> Vec<f64> {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.spacing);
    let mut out = alloc::vec![0.0; a.len()];
    for j in 0..ny {
        let row = &a[j * nx..(j + 1) * nx];
        let dst = &mut out[j * nx..(j + 1) * nx];
        dst[0] = (row[1] - row[0]) / h;
        dst[nx - 1] = (row[nx - 1] - row[nx - 2]) / h;
        for i in 1..nx - 1 {
            dst[i] = (row[i + 1] - row[i - 1]) / (2.0 * h);
        }
    }
    out
}

fn d_dy(grid: &GridSpec, a: &[f64]) -> Vec<f64> {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.spacing);
    let mut out = alloc::vec![0.0; a.len()];
    for i in 0..nx {
        out[i] = (a[nx + i] - a[i]) / h;
        out[(ny - 1) * nx + i] = (a[(ny - 1) * nx + i] - a[(ny - 2) * nx + i]) / h;
    }
    for j in 1..ny - 1 {
        for i in 0..nx {
            out[j * nx + i] = (a[(j + 1) * nx + i] - a[(j - 1) * nx + i]) / (2.0 * h);
        }
    }
    out
}

/// `du/dx + dv/dy`.
pub fn divergence(f: &VectorField2D) -> ScalarField2D {
    let dudx = d_dx(&f.grid, &f.u);
    let dvdy = d_dy(&f.grid, &f.v);
    let values = dudx.iter().zip(&dvdy).map(|(a, b)| a + b).collect();
    ScalarField2D::from_raw(f.grid, values)
}

/// Out-of-plane curl component `dv/dx - du/dy`.
pub fn curl_z(f: &VectorField2D) -> ScalarField2D {
    let dvdx = d_dx(&f.grid, &f.v);
    let dudy = d_dy(&f.grid, &f.u);
    let values = dvdx.iter().zip(&dudy).map(|(a, b)| a - b).collect();
    ScalarField2D::from_raw(f.grid, values)
}

pub fn gradient(s: &ScalarField2D) -> VectorField2D {
    VectorField2D::from_raw(s.grid, d_dx(&s.grid, &s.values), d_dy(&s.grid, &s.values))
}

/// Per-cell quarter turn `(u, v) -> (-v, u)`.
pub fn rotate_quarter(f: &VectorField2D) -> VectorField2D {
    VectorField2D::from_raw(f.grid, f.v.iter().map(|x| -x).collect(), f.u.clone())
}

/// Sum of per-cell vector norms.
pub fn sum_norms(f: &VectorField2D) -> f64 {
    f.u.iter().zip(&f.v).map(|(a, b)| math::hypot(*a, *b)).sum()
}

/// Result of summing every vector of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VectorSum {
    pub magnitude: f64,
    /// Unit direction of the sum; `None` when the sum vanishes.
    pub direction: Option<[f64; 2]>,
}

/// Norm and direction of the vector sum over all cells.
pub fn norm_of_sum(f: &VectorField2D) -> VectorSum {
    let sx: f64 = f.u.iter().sum();
    let sy: f64 = f.v.iter().sum();
    let magnitude = math::hypot(sx, sy);
    let direction = if magnitude > 0.0 { Some([sx / magnitude, sy / magnitude]) } else { None };
    VectorSum { magnitude, direction }
}

/// Sum over cells of `(p - center) x v`, z-component. Counter-clockwise
/// motion about `center` is positive.
pub fn moment_sum(f: &VectorField2D, center: [f64; 2]) -> f64 {
    let g = &f.grid;
    let mut total = 0.0;
    for (k, (a, b)) in f.u.iter().zip(&f.v).enumerate() {
        let (i, j) = g.cell(k);
        let p = g.position(i, j);
        let rx = p[0] - center[0];
        let ry = p[1] - center[1];
        total += rx * b - ry * a;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, 0.5, [-1.0, 2.0]).unwrap()
    }

    fn random_field(g: GridSpec, seed: u64) -> VectorField2D {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        VectorField2D::from_fn(g, |_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .unwrap()
    }

    // Independent stencil oracle: explicit per-cell loop with neighbor lookups.
    fn stencil_x(g: &GridSpec, a: &dyn Fn(usize, usize) -> f64, i: usize, j: usize) -> f64 {
        let h = g.spacing();
        if i == 0 {
            (a(1, j) - a(0, j)) / h
        } else if i == g.nx() - 1 {
            (a(i, j) - a(i - 1, j)) / h
        } else {
            (a(i + 1, j) - a(i - 1, j)) / (2.0 * h)
        }
    }

    fn stencil_y(g: &GridSpec, a: &dyn Fn(usize, usize) -> f64, i: usize, j: usize) -> f64 {
        let h = g.spacing();
        if j == 0 {
            (a(i, 1) - a(i, 0)) / h
        } else if j == g.ny() - 1 {
            (a(i, j) - a(i, j - 1)) / h
        } else {
            (a(i, j + 1) - a(i, j - 1)) / (2.0 * h)
        }
    }

    #[test]
    fn grid_rejects_degenerate_shapes() {
        assert!(GridSpec::new(1, 4, 1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(4, 4, 0.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(4, 4, f64::NAN, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(2, 2, 1.0, [0.0, 0.0]).is_ok());
    }

    #[test]
    fn field_rejects_bad_lengths_and_nan() {
        let g = grid(3);
        assert!(VectorField2D::new(g, alloc::vec![0.0; 8], alloc::vec![0.0; 9]).is_err());
        let mut u = alloc::vec![0.0; 9];
        u[4] = f64::INFINITY;
        assert!(VectorField2D::new(g, u, alloc::vec![0.0; 9]).is_err());
    }

    #[test]
    fn divergence_of_constant_and_linear_fields() {
        let g = grid(7);
        let c = VectorField2D::from_fn(g, |_| [1.0, 1.0]).unwrap();
        assert!(divergence(&c).values().iter().all(|x| x.abs() < 1e-12));
        let lin = VectorField2D::from_fn(g, |p| p).unwrap();
        let d = divergence(&lin);
        // one-sided differences are exact for linear data too
        assert!(d.values().iter().all(|x| (x - 2.0).abs() < 1e-12));
    }

    #[test]
    fn curl_of_rigid_rotation_is_two() {
        let g = grid(7);
        let rot = VectorField2D::from_fn(g, |p| [-p[1], p[0]]).unwrap();
        assert!(curl_z(&rot).values().iter().all(|x| (x - 2.0).abs() < 1e-12));
        let c = VectorField2D::from_fn(g, |_| [3.0, -2.0]).unwrap();
        assert!(curl_z(&c).values().iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn divergence_and_curl_match_stencil_oracle() {
        let g = GridSpec::new(8, 8, 0.7, [0.3, -1.0]).unwrap();
        let f = random_field(g, 11);
        let u = |i: usize, j: usize| f.at(i, j)[0];
        let v = |i: usize, j: usize| f.at(i, j)[1];
        let div = divergence(&f);
        let curl = curl_z(&f);
        for (i, j) in g.cells() {
            let want_div = stencil_x(&g, &u, i, j) + stencil_y(&g, &v, i, j);
            let want_curl = stencil_x(&g, &v, i, j) - stencil_y(&g, &u, i, j);
            assert!((div.at(i, j) - want_div).abs() < 1e-12);
            assert!((curl.at(i, j) - want_curl).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_simple_potentials() {
        let g = grid(6);
        let s = ScalarField2D::from_fn(g, |p| p[0]).unwrap();
        let gr = gradient(&s);
        assert!(gr.u().iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(gr.v().iter().all(|x| x.abs() < 1e-12));
        let c = ScalarField2D::from_fn(g, |_| 4.2).unwrap();
        assert_eq!(gradient(&c).max_norm(), 0.0);
    }

    #[test]
    fn gradient_of_square_is_second_order_accurate() {
        // central differences are exact on quadratics in the interior
        let g = GridSpec::new(41, 5, 0.05, [-1.0, 0.0]).unwrap();
        let s = ScalarField2D::from_fn(g, |p| p[0] * p[0]).unwrap();
        let gr = gradient(&s);
        for (i, j) in g.cells() {
            if g.is_interior(i, j, 1) {
                let x = g.position(i, j)[0];
                assert!((gr.at(i, j)[0] - 2.0 * x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotate_quarter_properties() {
        let g = grid(5);
        let ex = VectorField2D::from_fn(g, |_| [1.0, 0.0]).unwrap();
        let r = rotate_quarter(&ex);
        assert!(r.u().iter().all(|&x| x == 0.0) && r.v().iter().all(|&x| x == 1.0));
        let f = random_field(g, 3);
        let twice = rotate_quarter(&rotate_quarter(&f));
        assert_eq!(twice, f.scaled(-1.0));
        let once = rotate_quarter(&f);
        for (i, j) in g.cells() {
            let [a, b] = f.at(i, j);
            let [c, d] = once.at(i, j);
            assert_eq!(a * a + b * b, c * c + d * d);
        }
    }

    #[test]
    fn sum_norms_examples() {
        let g = grid(4);
        assert_eq!(sum_norms(&VectorField2D::zeros(g)), 0.0);
        let mut u = alloc::vec![0.0; 16];
        let mut v = alloc::vec![0.0; 16];
        u[5] = 3.0;
        v[5] = 4.0;
        let f = VectorField2D::new(g, u, v).unwrap();
        assert_eq!(sum_norms(&f), 5.0);

        let f = random_field(grid(9), 5);
        let mut naive = 0.0;
        for k in 0..f.u().len() {
            naive += (f.u()[k] * f.u()[k] + f.v()[k] * f.v()[k]).sqrt();
        }
        assert!((sum_norms(&f) - naive).abs() < 1e-12 * naive);
    }

    #[test]
    fn norm_of_sum_examples() {
        let g = GridSpec::new(2, 2, 1.0, [0.0, 0.0]).unwrap();
        let f = VectorField2D::new(g, alloc::vec![1.0, -1.0, 0.0, 0.0], alloc::vec![0.0; 4]).unwrap();
        let s = norm_of_sum(&f);
        assert_eq!(s.magnitude, 0.0);
        assert!(s.direction.is_none());

        let g = grid(5);
        let up = VectorField2D::from_fn(g, |_| [0.0, 2.0]).unwrap();
        let s = norm_of_sum(&up);
        assert_eq!(s.magnitude, 50.0);
        assert_eq!(s.direction, Some([0.0, 1.0]));

        let f = random_field(g, 8);
        let (mut sx, mut sy) = (0.0, 0.0);
        for (i, j) in g.cells() {
            sx += f.at(i, j)[0];
            sy += f.at(i, j)[1];
        }
        let s = norm_of_sum(&f);
        assert!((s.magnitude - (sx * sx + sy * sy).sqrt()).abs() < 1e-12);
        let d = s.direction.unwrap();
        assert!((d[0] - sx / s.magnitude).abs() < 1e-12);
    }

    #[test]
    fn moment_sum_examples() {
        let g = grid(9);
        let c = [0.7, 3.1];
        let rot = VectorField2D::from_fn(g, |p| [-(p[1] - c[1]), p[0] - c[0]]).unwrap();
        let want: f64 = g
            .cells()
            .map(|(i, j)| {
                let p = g.position(i, j);
                (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)
            })
            .sum();
        assert!((moment_sum(&rot, c) - want).abs() < 1e-10 * want);

        let uni = VectorField2D::from_fn(g, |_| [0.3, -1.2]).unwrap();
        assert!(moment_sum(&uni, g.center()).abs() < 1e-12);

        let f = random_field(g, 21);
        let c = [0.13, 2.9];
        let mut naive = 0.0;
        for (i, j) in g.cells() {
            let p = g.position(i, j);
            let [a, b] = f.at(i, j);
            naive += (p[0] - c[0]) * b - (p[1] - c[1]) * a;
        }
        assert!((moment_sum(&f, c) - naive).abs() < 1e-10);
    }

    #[test]
    fn curl_of_gradient_vanishes_in_the_interior() {
        let coarse = GridSpec::centered(16, 16, 0.25).unwrap();
        let fine = GridSpec::centered(32, 32, 0.125).unwrap();
        for g in [coarse, fine] {
            let s = ScalarField2D::from_fn(g, |p| (p[0] * 1.3).sin() * (p[1] * 0.7).cos() + p[0] * p[1] * p[1])
                .unwrap();
            let c = curl_z(&gradient(&s));
            assert!(c.interior_rms(1) < 1e-12);
        }
    }

    #[test]
    fn radial_gradient_carries_no_moment() {
        let g = GridSpec::centered(21, 21, 0.5).unwrap();
        let s = ScalarField2D::from_fn(g, |p| (-(p[0] * p[0] + p[1] * p[1]) / 4.0).exp()).unwrap();
        let d = gradient(&s);
        assert!(moment_sum(&d, g.center()).abs() < 1e-12 * sum_norms(&d));
    }

    #[test]
    fn operators_are_linear() {
        let g = grid(8);
        let f = random_field(g, 1);
        let h = random_field(g, 2);
        let (a, b) = (1.7, -0.4);
        let mix = f.combine(a, &h, b).unwrap();
        let lhs = divergence(&mix);
        let (df, dh) = (divergence(&f), divergence(&h));
        let lc = curl_z(&mix);
        let (cf, ch) = (curl_z(&f), curl_z(&h));
        for k in 0..g.len() {
            assert!((lhs.values()[k] - (a * df.values()[k] + b * dh.values()[k])).abs() < 1e-12);
            assert!((lc.values()[k] - (a * cf.values()[k] + b * ch.values()[k])).abs() < 1e-12);
        }
    }
}
