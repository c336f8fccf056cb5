//! Feature-to-wrench regressors and the cross-validation harness.

pub mod cv;
pub mod lbfgs;
pub mod mlp;
pub mod ransac;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::FeatureTriple;
use crate::math;

pub use cv::{cross_validate, prepare_samples, CvReport, CvSample, FoldResult};
pub use lbfgs::{LbfgsConfig, LbfgsReport};
pub use mlp::{mlp_fit, Activation, Mlp, MlpTrainConfig, ScaledMlp, Standardizer};
pub use ransac::{ransac_fit, LinearModel, RansacConfig};

/// Axis order used by every `[f64; 3]` wrench array.
pub const AXIS_NAMES: [&str; 3] = ["normal", "tangential", "torsion"];

/// Contact wrench estimated at one fingertip.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WrenchEstimate {
    /// Normal force (N), never negative.
    pub f_n: f64,
    /// Tangential force magnitude (N), never negative.
    pub f_t: f64,
    /// Unit direction of the tangential force, `None` when unknown.
    pub direction: Option<[f64; 2]>,
    /// Signed torsion about the contact normal (N·mm).
    pub f_tau: f64,
}

impl WrenchEstimate {
    /// Builds an estimate from `[f_n, f_t, f_tau]`, clamping both forces at 0.
    pub fn from_axes(axes: [f64; 3], direction: Option<[f64; 2]>) -> Self {
        Self { f_n: axes[0].max(0.0), f_t: axes[1].max(0.0), direction, f_tau: axes[2] }
    }

    pub fn axes(&self) -> [f64; 3] {
        [self.f_n, self.f_t, self.f_tau]
    }

    /// Tangential-to-normal ratio; infinite for tangential load without normal load.
    pub fn friction_ratio(&self) -> f64 {
        if self.f_n > 0.0 {
            self.f_t / self.f_n
        } else if self.f_t > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

/// One fitted scalar-to-scalar mapping.
#[derive(Debug, Clone, PartialEq)]
pub enum AxisModel {
    Linear(LinearModel),
    Mlp(ScaledMlp),
}

impl AxisModel {
    pub fn predict(&self, x: f64) -> Result<f64> {
        match self {
            AxisModel::Linear(m) => Ok(m.predict(x)),
            AxisModel::Mlp(m) => Ok(m.predict(&[x])?[0]),
        }
    }

    /// Number of trainable parameters.
    pub fn complexity(&self) -> usize {
        match self {
            AxisModel::Linear(_) => 2,
            AxisModel::Mlp(m) => m.mlp.params().len(),
        }
    }
}

/// Hidden layer sizes and training options for an MLP regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    pub hidden: Vec<usize>,
    pub train: MlpTrainConfig,
}

impl MlpSpec {
    /// One hidden layer of 10 units, fitted per axis on features.
    pub fn small() -> Self {
        Self { hidden: alloc::vec![10], train: MlpTrainConfig::default() }
    }

    /// Hidden layers 512, 128, 10 on the flattened raw field.
    pub fn raw_baseline() -> Self {
        Self { hidden: alloc::vec![512, 128, 10], train: MlpTrainConfig { max_iter: 300, ..MlpTrainConfig::default() } }
    }
}

/// Regressor family to fit.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Independent RANSAC lines, one feature per axis.
    Ransac(RansacConfig),
    /// Independent MLPs, one feature per axis.
    MlpFeatures(MlpSpec),
    /// One MLP from the flattened raw field to all three axes.
    MlpRaw(MlpSpec),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ransac(_) => "ransac",
            ModelSpec::MlpFeatures(_) => "mlp",
            ModelSpec::MlpRaw(_) => "mlp-raw",
        }
    }
}

/// Fitted mapping from a sample to its wrench.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum WrenchModel {
    /// `[g_n(s_n), g_t(s_t), g_tau(s_tau)]`.
    Features { axes: [AxisModel; 3] },
    /// Flattened `(u, v)` field values to all three axes.
    Raw { mlp: ScaledMlp },
}

impl WrenchModel {
    /// Fits on the training labels of `samples`.
    pub fn fit(spec: &ModelSpec, samples: &[CvSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("cannot fit a model on zero samples".into()));
        }
        match spec {
            ModelSpec::Ransac(cfg) => {
                let fit_axis = |k: usize| -> Result<AxisModel> {
                    let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.features[k], s.label[k])).collect();
                    Ok(AxisModel::Linear(ransac_fit(&pairs, cfg)?))
                };
                Ok(WrenchModel::Features { axes: [fit_axis(0)?, fit_axis(1)?, fit_axis(2)?] })
            }
            ModelSpec::MlpFeatures(spec) => {
                let fit_axis = |k: usize| -> Result<AxisModel> {
                    let xs: Vec<Vec<f64>> = samples.iter().map(|s| alloc::vec![s.features[k]]).collect();
                    let ys: Vec<Vec<f64>> = samples.iter().map(|s| alloc::vec![s.label[k]]).collect();
                    Ok(AxisModel::Mlp(ScaledMlp::fit(&xs, &ys, &spec.hidden, &spec.train)?.0))
                };
                Ok(WrenchModel::Features { axes: [fit_axis(0)?, fit_axis(1)?, fit_axis(2)?] })
            }
            ModelSpec::MlpRaw(spec) => {
                let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.raw.clone()).collect();
                let ys: Vec<Vec<f64>> = samples.iter().map(|s| s.label.to_vec()).collect();
                Ok(WrenchModel::Raw { mlp: ScaledMlp::fit(&xs, &ys, &spec.hidden, &spec.train)?.0 })
            }
        }
    }

    /// Unclamped `[f_n, f_t, f_tau]`.
    pub fn predict_axes(&self, features: &[f64; 3], raw: &[f64]) -> Result<[f64; 3]> {
        match self {
            WrenchModel::Features { axes } => {
                Ok([axes[0].predict(features[0])?, axes[1].predict(features[1])?, axes[2].predict(features[2])?])
            }
            WrenchModel::Raw { mlp } => {
                let y = mlp.predict(raw)?;
                Ok([y[0], y[1], y[2]])
            }
        }
    }

    /// Wrench for a feature triple. Feature models only.
    pub fn predict(&self, features: &FeatureTriple) -> Result<WrenchEstimate> {
        if let WrenchModel::Raw { mlp } = self {
            return Err(Error::DimensionMismatch { expected: mlp.mlp.input_dim(), found: 3 });
        }
        let axes = self.predict_axes(&features.as_array(), &[])?;
        Ok(WrenchEstimate::from_axes(axes, features.s_t_direction))
    }

    /// Wrench for a prepared sample, with forces clamped at 0.
    pub fn predict_sample(&self, sample: &CvSample) -> Result<WrenchEstimate> {
        let axes = self.predict_axes(&sample.features, &sample.raw)?;
        Ok(WrenchEstimate::from_axes(axes, sample.direction))
    }

    /// Trainable parameters per axis model, or of the single raw network.
    pub fn complexity(&self) -> usize {
        match self {
            WrenchModel::Features { axes } => axes[0].complexity(),
            WrenchModel::Raw { mlp } => mlp.mlp.params().len(),
        }
    }
}

/// Root mean squared difference.
pub fn rmse(predictions: &[f64], truths: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidInput("rmse of empty input".into()));
    }
    if predictions.len() != truths.len() {
        return Err(Error::DimensionMismatch { expected: truths.len(), found: predictions.len() });
    }
    let sum: f64 = predictions.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(math::sqrt(sum / predictions.len() as f64))
}
