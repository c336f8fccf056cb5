//! Free-space Poisson solve by direct summation against the 2D Green's
//! function, with an FFT-accelerated equivalent.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fft::{self, Complex};
use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField2D};
use crate::math;

/// Mean of `ln|x|` over the square `[-1/2, 1/2]²` centered on the origin.
///
/// Closed form: `π/4 - 3/2 - (ln 2)/2`. The cell-averaged Green's function of
/// a cell of side `h` is `(ln h + C₀) / 2π`.
pub fn green_self_term_constant() -> f64 {
    PI / 4.0 - 1.5 - 0.5 * core::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SolverMethod {
    /// O(N²) summation, always available.
    Direct,
    /// Zero-padded linear convolution through FFTs.
    Fft,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Largest cell count the direct path accepts.
    pub direct_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { method: SolverMethod::Direct, direct_limit: 128 * 128 }
    }
}

/// Green's-function convolution prepared for one grid.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: GridSpec,
    method: SolverMethod,
    /// `G(di, dj) * h²` for `|di| < nx`, `|dj| < ny`, indexed `dj * nx + di`.
    kernel: Vec<f64>,
    padded: Option<PaddedKernel>,
}

#[derive(Debug, Clone)]
struct PaddedKernel {
    width: usize,
    height: usize,
    spectrum: Vec<Complex>,
}

impl PoissonSolver {
    pub fn new(grid: GridSpec, config: &SolverConfig) -> Result<Self> {
        if config.method == SolverMethod::Direct && grid.len() > config.direct_limit {
            return Err(Error::DirectSolveTooLarge { cells: grid.len(), limit: config.direct_limit });
        }
        let (nx, ny, h) = (grid.nx(), grid.ny(), grid.spacing());
        let scale = h * h / (2.0 * PI);
        let self_term = scale * (math::ln(h) + green_self_term_constant());
        let mut kernel = alloc::vec![0.0; nx * ny];
        for dj in 0..ny {
            for di in 0..nx {
                kernel[dj * nx + di] = if di == 0 && dj == 0 {
                    self_term
                } else {
                    let dist = h * math::hypot(di as f64, dj as f64);
                    scale * math::ln(dist)
                };
            }
        }
        let padded = match config.method {
            SolverMethod::Direct => None,
            SolverMethod::Fft => Some(Self::pad_kernel(&grid, &kernel)),
        };
        Ok(Self { grid, method: config.method, kernel, padded })
    }

    fn pad_kernel(grid: &GridSpec, kernel: &[f64]) -> PaddedKernel {
        let (nx, ny) = (grid.nx(), grid.ny());
        let width = (2 * nx - 1).next_power_of_two();
        let height = (2 * ny - 1).next_power_of_two();
        let mut spectrum = alloc::vec![Complex::default(); width * height];
        for dj in -(ny as isize - 1)..=(ny as isize - 1) {
            for di in -(nx as isize - 1)..=(nx as isize - 1) {
                let x = di.rem_euclid(width as isize) as usize;
                let y = dj.rem_euclid(height as isize) as usize;
                let k = kernel[dj.unsigned_abs() * nx + di.unsigned_abs()];
                spectrum[y * width + x] = Complex::new(k, 0.0);
            }
        }
        fft::fft2(&mut spectrum, width, height, false);
        PaddedKernel { width, height, spectrum }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn method(&self) -> SolverMethod {
        self.method
    }

    /// Returns `φ = G * rhs` sampled on the grid.
    pub fn solve(&self, rhs: &ScalarField2D) -> Result<ScalarField2D> {
        if *rhs.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let values = match &self.padded {
            None => self.solve_direct(rhs.values()),
            Some(p) => self.solve_fft(p, rhs.values()),
        };
        Ok(ScalarField2D::from_raw(self.grid, values))
    }

    fn solve_direct(&self, rhs: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let sources: Vec<(usize, usize, f64)> = rhs
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(k, &x)| (k % nx, k / nx, x))
            .collect();
        let mut out = alloc::vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let mut acc = 0.0;
                for &(qi, qj, x) in &sources {
                    let di = i.abs_diff(qi);
                    let dj = j.abs_diff(qj);
                    acc += self.kernel[dj * nx + di] * x;
                }
                out[j * nx + i] = acc;
            }
        }
        out
    }

    fn solve_fft(&self, p: &PaddedKernel, rhs: &[f64]) -> Vec<f64> {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut buf = alloc::vec![Complex::default(); p.width * p.height];
        for j in 0..ny {
            for i in 0..nx {
                buf[j * p.width + i] = Complex::new(rhs[j * nx + i], 0.0);
            }
        }
        fft::fft2(&mut buf, p.width, p.height, false);
        fft::multiply(&mut buf, &p.spectrum);
        fft::fft2(&mut buf, p.width, p.height, true);
        let mut out = alloc::vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = buf[j * p.width + i].re;
            }
        }
        out
    }
}

/// One-shot free-space solve of `Δφ = rhs`.
pub fn solve_poisson_freespace(rhs: &ScalarField2D, config: &SolverConfig) -> Result<ScalarField2D> {
    PoissonSolver::new(*rhs.grid(), config)?.solve(rhs)
}
