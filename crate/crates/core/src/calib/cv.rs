//! Leave-objects-out cross validation.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{rmse, ModelSpec, WrenchModel};
use crate::error::{Error, Result};
use crate::features::compute_features_using;
use crate::math;
use crate::nhhd::{PoissonSolver, SolverConfig};
use crate::surrogate::Sample;

/// A sample reduced to everything the regressors and the scorer need.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSample {
    /// `[s_n, s_t, s_tau]`.
    pub features: [f64; 3],
    pub direction: Option<[f64; 2]>,
    /// Flattened `(u, v)` field values.
    pub raw: Vec<f64>,
    /// Training target `[f_n, |f_t|, f_tau]`, possibly corrupted.
    pub label: [f64; 3],
    /// Scoring target.
    pub truth: [f64; 3],
    pub object_id: usize,
}

/// Computes features for every sample. All fields must share one grid.
pub fn prepare_samples(samples: &[Sample], significance: f64) -> Result<Vec<CvSample>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let solver = PoissonSolver::new(*first.field.grid(), &SolverConfig::default())?;
    samples
        .iter()
        .map(|s| {
            let t = compute_features_using(&s.field, significance, &solver)?.features;
            Ok(CvSample {
                features: t.as_array(),
                direction: t.s_t_direction,
                raw: s.field.flatten(),
                label: s.label,
                truth: s.truth(),
                object_id: s.object_id,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    /// Objects held out in this fold.
    pub objects: Vec<usize>,
    /// Indices of the test samples.
    pub test_indices: Vec<usize>,
    pub rmse: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub model: &'static str,
    pub folds: Vec<FoldResult>,
    /// Per-axis mean of the fold RMSEs.
    pub mean: [f64; 3],
    /// Per-axis sample standard deviation of the fold RMSEs (0 for one fold).
    pub std: [f64; 3],
    /// Trainable parameters of the last fitted model.
    pub complexity: usize,
}

/// Splits distinct object ids, in ascending order, round-robin over `k` folds.
pub fn object_folds(samples: &[CvSample], k: usize) -> Result<Vec<Vec<usize>>> {
    let ids: BTreeSet<usize> = samples.iter().map(|s| s.object_id).collect();
    if k < 2 {
        return Err(Error::InvalidInput(alloc::format!("need at least 2 folds, got {k}")));
    }
    if ids.len() < k {
        return Err(Error::InvalidInput(alloc::format!("{k} folds need {k} objects, found {}", ids.len())));
    }
    let mut folds = alloc::vec![Vec::new(); k];
    for (n, id) in ids.into_iter().enumerate() {
        folds[n % k].push(id);
    }
    Ok(folds)
}

/// Fits on all objects but one fold's, scores against the held-out truth.
///
/// Predicted forces are clamped at 0 before scoring.
pub fn cross_validate(samples: &[CvSample], spec: &ModelSpec, k: usize) -> Result<CvReport> {
    let folds = object_folds(samples, k)?;
    let mut results = Vec::with_capacity(k);
    let mut complexity = 0;
    for objects in folds {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..samples.len()).partition(|&i| objects.contains(&samples[i].object_id));
        let train: Vec<CvSample> = train.iter().map(|&i| samples[i].clone()).collect();
        let model = WrenchModel::fit(spec, &train)?;
        complexity = model.complexity();
        let mut pred: [Vec<f64>; 3] = Default::default();
        let mut truth: [Vec<f64>; 3] = Default::default();
        for &i in &test {
            let w = model.predict_sample(&samples[i])?.axes();
            for a in 0..3 {
                pred[a].push(w[a]);
                truth[a].push(samples[i].truth[a]);
            }
        }
        let rmse = [rmse(&pred[0], &truth[0])?, rmse(&pred[1], &truth[1])?, rmse(&pred[2], &truth[2])?];
        results.push(FoldResult { objects, test_indices: test, rmse });
    }
    let n = results.len() as f64;
    let mut mean = [0.0; 3];
    let mut std = [0.0; 3];
    for a in 0..3 {
        mean[a] = results.iter().map(|f| f.rmse[a]).sum::<f64>() / n;
        if results.len() > 1 {
            let ss: f64 = results.iter().map(|f| (f.rmse[a] - mean[a]) * (f.rmse[a] - mean[a])).sum();
            std[a] = math::sqrt(ss / (n - 1.0));
        }
    }
    Ok(CvReport { model: spec.name(), folds: results, mean, std, complexity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::RansacConfig;

    fn linear_samples(objects: usize, per: usize) -> Vec<CvSample> {
        let mut out = Vec::new();
        for o in 0..objects {
            for k in 0..per {
                let x = 1.0 + k as f64 * 0.5;
                let y = [2.0 * x + 1.0, 0.5 * x, -3.0 * x];
                out.push(CvSample {
                    features: [x, x, x],
                    direction: None,
                    raw: Vec::new(),
                    label: y,
                    truth: y,
                    object_id: 10 + o,
                });
            }
        }
        out
    }

    #[test]
    fn folds_partition_samples_by_object() {
        let samples = linear_samples(7, 4);
        let report = cross_validate(&samples, &ModelSpec::Ransac(RansacConfig::default()), 3).unwrap();
        let mut seen = alloc::vec![0; samples.len()];
        for fold in &report.folds {
            for &i in &fold.test_indices {
                seen[i] += 1;
                assert!(fold.objects.contains(&samples[i].object_id));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(report.folds.iter().map(|f| f.objects.len()).collect::<Vec<_>>(), [3, 2, 2]);
    }

    #[test]
    fn perfect_linear_map_gives_zero_error() {
        let samples = linear_samples(6, 5);
        let report = cross_validate(&samples, &ModelSpec::Ransac(RansacConfig::default()), 6).unwrap();
        for a in 0..3 {
            assert!(report.mean[a] < 1e-12 && report.std[a] < 1e-12);
        }
        assert_eq!(report.complexity, 2);
    }

    #[test]
    fn too_few_objects_is_an_error() {
        let samples = linear_samples(2, 5);
        assert!(cross_validate(&samples, &ModelSpec::Ransac(RansacConfig::default()), 3).is_err());
    }
}
