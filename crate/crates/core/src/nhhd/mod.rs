//! Natural Helmholtz-Hodge decomposition on a regular grid.
//!
//! A field `V` is split as `V = d + r + h` with `d = grad D` curl-free,
//! `r = J grad R` divergence-free and `h` the harmonic remainder. The two
//! potentials solve
//!
//! ```text
//! ΔD =  div V
//! ΔR = -div (J V)
//! ```
//!
//! in free space: each right-hand side is convolved with the 2D Green's
//! function `ln|x| / 2π` over the grid, so no boundary condition is imposed
//! and whatever the domain cannot explain ends up in `h`.

mod fft;
mod poisson;

use alloc::vec::Vec;

use crate::error::Result;
use crate::field::{self, ScalarField2D, VectorField2D};

pub use poisson::{green_self_term_constant, solve_poisson_freespace, PoissonSolver, SolverConfig, SolverMethod};

/// Default fraction of `max |R|` an extremum must reach to count as a
/// rotation center.
pub const DEFAULT_SIGNIFICANCE: f64 = 0.1;

/// Output of [`decompose`]. All fields share the input grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Curl-free component `grad D` (mm).
    pub d: VectorField2D,
    /// Divergence-free component `J grad R` (mm).
    pub r: VectorField2D,
    /// Harmonic remainder `V - d - r` (mm).
    pub h: VectorField2D,
    /// Curl-free potential `D` (mm²).
    pub potential_d: ScalarField2D,
    /// Rotational potential `R` (mm²).
    pub potential_r: ScalarField2D,
}

/// Decomposes `f` with the default solver configuration.
pub fn decompose(f: &VectorField2D) -> Result<Decomposition> {
    decompose_with(f, &SolverConfig::default())
}

pub fn decompose_with(f: &VectorField2D, config: &SolverConfig) -> Result<Decomposition> {
    let solver = PoissonSolver::new(*f.grid(), config)?;
    decompose_using(f, &solver)
}

/// Decomposes `f` reusing a prepared solver (the kernel depends only on the grid).
pub fn decompose_using(f: &VectorField2D, solver: &PoissonSolver) -> Result<Decomposition> {
    let div = field::divergence(f);
    let jf = field::rotate_quarter(f);
    let curl_rhs = field::divergence(&jf);
    let curl_rhs = ScalarField2D::from_raw(*f.grid(), curl_rhs.values().iter().map(|x| -x).collect());

    let potential_d = solver.solve(&div)?;
    let potential_r = solver.solve(&curl_rhs)?;
    let d = field::gradient(&potential_d);
    let r = field::rotate_quarter(&field::gradient(&potential_r));
    let h = f.sub(&d)?.sub(&r)?;
    Ok(Decomposition { d, r, h, potential_d, potential_r })
}

/// Which extremum of `R` a rotation center came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Polarity {
    /// Global maximum of `R`.
    Positive,
    /// Global minimum of `R`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RotationCenter {
    /// Cell-center position (mm).
    pub position: [f64; 2],
    pub polarity: Polarity,
    /// Value of `R` at the center (mm²).
    pub potential_value: f64,
}

/// Locates the rotation centers at the global maximum and minimum of `R`.
///
/// An extremum is kept only when `|R| >= significance * max |R|`. Ties go to
/// the lowest scan-order index. A vanishing potential yields no centers, and
/// a constant potential yields a single center.
pub fn locate_rotation_centers(potential_r: &ScalarField2D, significance: f64) -> Vec<RotationCenter> {
    let values = potential_r.values();
    let grid = potential_r.grid();
    let max_abs = potential_r.max_abs();
    let mut centers = Vec::new();
    if max_abs == 0.0 {
        return centers;
    }
    let (mut imax, mut imin) = (0usize, 0usize);
    for (k, &x) in values.iter().enumerate() {
        if x > values[imax] {
            imax = k;
        }
        if x < values[imin] {
            imin = k;
        }
    }
    let threshold = significance.clamp(0.0, 1.0) * max_abs;
    let mut push = |k: usize, polarity: Polarity| {
        let value = values[k];
        if value.abs() >= threshold {
            let (i, j) = grid.cell(k);
            centers.push(RotationCenter { position: grid.position(i, j), polarity, potential_value: value });
        }
    };
    if values[imax] == values[imin] {
        push(imax, if values[imax] > 0.0 { Polarity::Positive } else { Polarity::Negative });
    } else {
        push(imax, Polarity::Positive);
        push(imin, Polarity::Negative);
    }
    centers
}

#[cfg(test)]
mod tests;
