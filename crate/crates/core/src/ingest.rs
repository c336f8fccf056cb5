//! Marker tracking and scattered-data interpolation onto the field grid.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{GridSpec, VectorField2D};
use crate::math;

/// Marker centroids detected in one frame (mm).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkerSet {
    positions: Vec<[f64; 2]>,
}

impl MarkerSet {
    /// Rejects non-finite points and pairs closer than `min_separation`.
    pub fn new(positions: Vec<[f64; 2]>, min_separation: f64) -> Result<Self> {
        if positions.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidInput("marker positions must be finite".into()));
        }
        let close = close_pairs(&positions, min_separation);
        if !close.is_empty() {
            return Err(Error::DuplicateSamples(close));
        }
        Ok(Self { positions })
    }

    /// Regular `nx` by `ny` lattice with the given pitch, first marker at `origin`.
    pub fn lattice(nx: usize, ny: usize, pitch: f64, origin: [f64; 2]) -> Result<Self> {
        let positions =
            (0..ny).flat_map(|j| (0..nx).map(move |i| [origin[0] + i as f64 * pitch, origin[1] + j as f64 * pitch]));
        Self::new(positions.collect(), 0.0)
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Index pairs whose points lie within `min_distance` of each other
/// (exact duplicates always count).
fn close_pairs(points: &[[f64; 2]], min_distance: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = math::hypot(points[a][0] - points[b][0], points[a][1] - points[b][1]);
            if d == 0.0 || d < min_distance {
                out.push((a, b));
            }
        }
    }
    out
}

/// Anchored marker tracks.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackState {
    pub init_positions: Vec<[f64; 2]>,
    pub current_positions: Vec<[f64; 2]>,
    pub alive: Vec<bool>,
    /// Consecutive frames in which the gate rejected every detection.
    pub misses: Vec<usize>,
}

impl TrackState {
    /// One live track per marker of the first frame.
    pub fn init(first: &MarkerSet) -> Self {
        let n = first.len();
        Self {
            init_positions: first.positions.clone(),
            current_positions: first.positions.clone(),
            alive: alloc::vec![true; n],
            misses: alloc::vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.init_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.init_positions.is_empty()
    }

    /// Tracks that were not updated by the last frame.
    pub fn frozen(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.alive[k] && self.misses[k] > 0).collect()
    }

    /// Marks tracks dead after more than `max_misses` consecutive misses.
    pub fn retire_stale(&mut self, max_misses: usize) {
        for (alive, &m) in self.alive.iter_mut().zip(&self.misses) {
            if m > max_misses {
                *alive = false;
            }
        }
    }

    /// Moves each live track to its nearest detection if that lies within `max_step`.
    ///
    /// Matching is per track against its current position with no global
    /// assignment. Distance ties go to the lexicographically smallest point,
    /// so the result does not depend on detection order.
    pub fn update(&mut self, detections: &MarkerSet, max_step: f64) {
        if detections.is_empty() {
            return;
        }
        for k in 0..self.len() {
            if !self.alive[k] {
                continue;
            }
            let cur = self.current_positions[k];
            let mut best: Option<(f64, [f64; 2])> = None;
            for &p in &detections.positions {
                let d = math::hypot(p[0] - cur[0], p[1] - cur[1]);
                let better = match best {
                    None => true,
                    Some((bd, bp)) => d < bd || (d == bd && (p[0], p[1]) < (bp[0], bp[1])),
                };
                if better {
                    best = Some((d, p));
                }
            }
            match best {
                Some((d, p)) if d <= max_step => {
                    self.current_positions[k] = p;
                    self.misses[k] = 0;
                }
                _ => self.misses[k] += 1,
            }
        }
    }
}

/// Functional form of [`TrackState::update`].
pub fn track_update(state: &TrackState, detections: &MarkerSet, max_step: f64) -> TrackState {
    let mut next = state.clone();
    next.update(detections, max_step);
    next
}

/// `(anchor, current - anchor)` for every live track.
pub fn displacements(state: &TrackState) -> Vec<([f64; 2], [f64; 2])> {
    (0..state.len())
        .filter(|&k| state.alive[k])
        .map(|k| {
            let (a, c) = (state.init_positions[k], state.current_positions[k]);
            (a, [c[0] - a[0], c[1] - a[1]])
        })
        .collect()
}

/// Gaussian RBF interpolant `s(p) = sum_k w_k exp(-(|p - x_k| / epsilon)^2)`
/// per vector component.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfInterpolant {
    centers: Vec<[f64; 2]>,
    weights_u: Vec<f64>,
    weights_v: Vec<f64>,
    epsilon: f64,
}

impl RbfInterpolant {
    /// Solves `(K + ridge I) w = values`. `ridge: None` uses `1e-8 * n`.
    pub fn fit(samples: &[([f64; 2], [f64; 2])], epsilon: f64, ridge: Option<f64>) -> Result<Self> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::InvalidInput(alloc::format!("RBF needs at least 3 samples, got {n}")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidInput("kernel epsilon must be > 0".into()));
        }
        let ridge = ridge.unwrap_or(1e-8 * n as f64);
        if !(ridge.is_finite() && ridge >= 0.0) {
            return Err(Error::InvalidInput("ridge must be >= 0".into()));
        }
        if samples.iter().any(|(p, v)| !(p[0].is_finite() && p[1].is_finite() && v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::InvalidInput("RBF samples must be finite".into()));
        }
        let centers: Vec<[f64; 2]> = samples.iter().map(|s| s.0).collect();
        let dups = close_pairs(&centers, 0.0);
        if !dups.is_empty() {
            return Err(Error::DuplicateSamples(dups));
        }
        if collinear(&centers) {
            return Err(Error::InvalidInput("RBF sample positions are collinear".into()));
        }
        let mut k = alloc::vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                k[a * n + b] = kernel(centers[a], centers[b], epsilon);
            }
            k[a * n + a] += ridge;
        }
        let l = cholesky(&mut k, n).ok_or_else(|| Error::InvalidInput("RBF system is singular".into()))?;
        let weights_u = cholesky_solve(l, n, samples.iter().map(|s| s.1[0]).collect());
        let weights_v = cholesky_solve(l, n, samples.iter().map(|s| s.1[1]).collect());
        Ok(Self { centers, weights_u, weights_v, epsilon })
    }

    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for ((c, wu), wv) in self.centers.iter().zip(&self.weights_u).zip(&self.weights_v) {
            let phi = kernel(p, *c, self.epsilon);
            out[0] += wu * phi;
            out[1] += wv * phi;
        }
        out
    }

    /// Interpolant evaluated at every cell center.
    pub fn to_field(&self, grid: GridSpec) -> Result<VectorField2D> {
        VectorField2D::from_fn(grid, |p| self.eval(p))
    }
}

/// Interpolates scattered displacement samples onto `grid`.
pub fn rbf_interpolate(
    samples: &[([f64; 2], [f64; 2])],
    grid: GridSpec,
    kernel_epsilon: f64,
    ridge: Option<f64>,
) -> Result<VectorField2D> {
    RbfInterpolant::fit(samples, kernel_epsilon, ridge)?.to_field(grid)
}

#[inline]
fn kernel(a: [f64; 2], b: [f64; 2], epsilon: f64) -> f64 {
    let dx = (a[0] - b[0]) / epsilon;
    let dy = (a[1] - b[1]) / epsilon;
    math::exp(-(dx * dx + dy * dy))
}

fn collinear(points: &[[f64; 2]]) -> bool {
    let p0 = points[0];
    let Some(p1) = points.iter().copied().max_by(|a, b| {
        let da = math::hypot(a[0] - p0[0], a[1] - p0[1]);
        let db = math::hypot(b[0] - p0[0], b[1] - p0[1]);
        da.total_cmp(&db)
    }) else {
        return true;
    };
    let (ex, ey) = (p1[0] - p0[0], p1[1] - p0[1]);
    let len2 = ex * ex + ey * ey;
    points.iter().all(|p| {
        let cross = ex * (p[1] - p0[1]) - ey * (p[0] - p0[0]);
        cross * cross <= 1e-24 * len2 * len2
    })
}

/// In-place lower Cholesky factor of a row-major SPD matrix.
fn cholesky(a: &mut [f64], n: usize) -> Option<&[f64]> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        let d = math::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Some(a)
}

fn cholesky_solve(l: &[f64], n: usize, mut b: Vec<f64>) -> Vec<f64> {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    b
}
