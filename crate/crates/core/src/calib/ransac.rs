//! Two-point RANSAC line fit with a least-squares refit on the consensus set.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RansacConfig {
    pub iters: usize,
    /// Residual bound for inliers (y units). `None`: 1.5 × MAD of the
    /// residuals of a preliminary least-squares line.
    pub inlier_tol: Option<f64>,
    /// Minimum consensus size. `None`: half the samples, rounded up.
    pub min_inliers: Option<usize>,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self { iters: 200, inlier_tol: None, min_inliers: None, seed: 0 }
    }
}

/// `y = slope * x + intercept`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
    /// Consensus membership of each training pair.
    #[cfg_attr(feature = "serde", serde(default))]
    pub inlier_mask: Vec<bool>,
}

impl LinearModel {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Self { slope, intercept, inlier_mask: Vec::new() }
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&b| b).count()
    }
}

/// Ordinary least squares over the selected pairs. `None` if every selected x is equal.
pub fn least_squares<'a>(pairs: impl Iterator<Item = &'a (f64, f64)> + Clone) -> Option<(f64, f64)> {
    let mut n = 0.0;
    let (mut sx, mut sy) = (0.0, 0.0);
    for (x, y) in pairs.clone() {
        n += 1.0;
        sx += x;
        sy += y;
    }
    if n < 2.0 {
        return None;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn default_tolerance(pairs: &[(f64, f64)]) -> f64 {
    let (slope, intercept) = least_squares(pairs.iter()).unwrap_or((0.0, math::mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>())));
    let residuals: Vec<f64> = pairs.iter().map(|(x, y)| y - (slope * x + intercept)).collect();
    let med = math::median(&residuals);
    let deviations: Vec<f64> = residuals.iter().map(|r| (r - med).abs()).collect();
    let mad = math::median(&deviations);
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.1.abs())).max(1.0);
    (1.5 * mad).max(1e-12 * scale)
}

pub fn ransac_fit(pairs: &[(f64, f64)], cfg: &RansacConfig) -> Result<LinearModel> {
    let n = pairs.len();
    if n < 2 {
        return Err(Error::InvalidInput(alloc::format!("RANSAC needs at least 2 pairs, got {n}")));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("RANSAC pairs must be finite".into()));
    }
    let x0 = pairs[0].0;
    if pairs.iter().all(|p| p.0 == x0) {
        return Err(Error::InvalidInput("RANSAC needs at least two distinct x values".into()));
    }
    let tol = cfg.inlier_tol.unwrap_or_else(|| default_tolerance(pairs));
    let required = cfg.min_inliers.unwrap_or(n.div_ceil(2));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(usize, f64, f64, f64)> = None; // (count, residual sum, slope, intercept)
    for _ in 0..cfg.iters.max(1) {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let (p, q) = (pairs[a], pairs[b]);
        if p.0 == q.0 {
            continue;
        }
        let slope = (q.1 - p.1) / (q.0 - p.0);
        let intercept = p.1 - slope * p.0;
        let mut count = 0;
        let mut resid = 0.0;
        for (x, y) in pairs {
            let r = (y - (slope * x + intercept)).abs();
            if r <= tol {
                count += 1;
                resid += r;
            }
        }
        let better = match best {
            None => true,
            Some((c, s, _, _)) => count > c || (count == c && resid < s),
        };
        if better {
            best = Some((count, resid, slope, intercept));
        }
    }
    let Some((count, _, slope, intercept)) = best else {
        return Err(Error::FitFailed { best_inliers: 0, required });
    };
    if count < required {
        return Err(Error::FitFailed { best_inliers: count, required });
    }
    let inlier_mask: Vec<bool> = pairs.iter().map(|(x, y)| (y - (slope * x + intercept)).abs() <= tol).collect();
    let (slope, intercept) = least_squares(pairs.iter().zip(&inlier_mask).filter(|(_, &m)| m).map(|(p, _)| p))
        .unwrap_or((slope, intercept));
    Ok(LinearModel { slope, intercept, inlier_mask })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn exact_line_is_recovered() {
        let pairs: Vec<(f64, f64)> = (0..30).map(|k| (k as f64 * 0.3, 2.0 * k as f64 * 0.3 + 1.0)).collect();
        let m = ransac_fit(&pairs, &RansacConfig::default()).unwrap();
        assert!((m.slope - 2.0).abs() < 1e-9 * 2.0);
        assert!((m.intercept - 1.0).abs() < 1e-9);
        assert_eq!(m.inlier_count(), 30);
    }

    #[test]
    fn two_points_give_interpolating_line() {
        let m = ransac_fit(&[(1.0, 3.0), (3.0, -1.0)], &RansacConfig::default()).unwrap();
        assert!((m.slope + 2.0).abs() < 1e-12);
        assert!((m.intercept - 5.0).abs() < 1e-12);
        assert!((m.predict(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outliers_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut pairs = Vec::new();
        for _ in 0..80 {
            let x = rng.random_range(0.0..10.0);
            pairs.push((x, 3.0 * x + noise.sample(&mut rng)));
        }
        for _ in 0..20 {
            let x = rng.random_range(0.0..10.0);
            pairs.push((x, rng.random_range(40.0..100.0)));
        }
        let m = ransac_fit(&pairs, &RansacConfig { seed: 1, ..Default::default() }).unwrap();
        assert!((m.slope - 3.0).abs() <= 0.02 * 3.0);
        assert!(m.inlier_mask[80..].iter().all(|&b| !b));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(ransac_fit(&[(1.0, 2.0)], &RansacConfig::default()).is_err());
        assert!(ransac_fit(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)], &RansacConfig::default()).is_err());
    }

    #[test]
    fn too_small_consensus_fails() {
        let pairs = [(0.0, 0.0), (1.0, 10.0), (2.0, -7.0), (3.0, 30.0), (4.0, 1.0)];
        let cfg = RansacConfig { inlier_tol: Some(0.01), min_inliers: Some(4), ..Default::default() };
        assert!(matches!(ransac_fit(&pairs, &cfg), Err(Error::FitFailed { required: 4, .. })));
    }

    #[test]
    fn same_seed_same_model() {
        let pairs: Vec<(f64, f64)> = (0..40).map(|k| (k as f64, (k as f64 * 0.7).sin() + k as f64)).collect();
        let cfg = RansacConfig { seed: 9, ..Default::default() };
        assert_eq!(ransac_fit(&pairs, &cfg).unwrap(), ransac_fit(&pairs, &cfg).unwrap());
    }
}
