//! JSON persistence for fitted wrench models.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_core::calib::{Activation, AxisModel, LinearModel, Mlp, ScaledMlp, Standardizer, WrenchModel};
use tactile_core::field::GridSpec;

use crate::error::{CliError, Result};
use crate::fieldio;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    /// `out x in` weight matrix, one row per output unit.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpDoc {
    pub layer_sizes: Vec<usize>,
    pub activation: String,
    pub layers: Vec<LayerDoc>,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub output_mean: Vec<f64>,
    pub output_std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AxisDoc {
    Linear { slope: f64, intercept: f64 },
    Mlp(MlpDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "lowercase")]
pub enum ModelBody {
    /// Axes in the order normal, tangential, torsion.
    Features { axes: Vec<AxisDoc> },
    /// Network over the flattened field of `grid`.
    Raw { grid: GridSpec, network: MlpDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub method: String,
    #[serde(flatten)]
    pub body: ModelBody,
}

fn mlp_doc(m: &ScaledMlp) -> MlpDoc {
    MlpDoc {
        layer_sizes: m.mlp.layer_sizes().to_vec(),
        activation: m.mlp.activation().name().to_string(),
        layers: m.mlp.layers().into_iter().map(|(weights, biases)| LayerDoc { weights, biases }).collect(),
        input_mean: m.input_scaling.mean.clone(),
        input_std: m.input_scaling.std.clone(),
        output_mean: m.output_scaling.mean.clone(),
        output_std: m.output_scaling.std.clone(),
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(format!("invalid model file: {}", msg.into()))
}

fn scaling(mean: &[f64], std: &[f64], dim: usize, what: &str) -> Result<Standardizer> {
    if mean.len() != dim || std.len() != dim {
        return Err(invalid(format!("{what} scaling must have {dim} entries")));
    }
    if mean.iter().any(|x| !x.is_finite()) || std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(invalid(format!("{what} scaling must be finite with positive deviations")));
    }
    Ok(Standardizer { mean: mean.to_vec(), std: std.to_vec() })
}

fn mlp_from_doc(d: &MlpDoc) -> Result<ScaledMlp> {
    let activation =
        Activation::from_name(&d.activation).ok_or_else(|| invalid(format!("unknown activation {:?}", d.activation)))?;
    if d.layers.len() + 1 != d.layer_sizes.len() {
        return Err(invalid("layer count does not match layer_sizes"));
    }
    let mut params = Vec::new();
    for (k, layer) in d.layers.iter().enumerate() {
        let (n_in, n_out) = (d.layer_sizes[k], d.layer_sizes[k + 1]);
        if layer.weights.len() != n_out || layer.weights.iter().any(|r| r.len() != n_in) || layer.biases.len() != n_out {
            return Err(invalid(format!("layer {k} must be {n_out}x{n_in} with {n_out} biases")));
        }
        params.extend(layer.weights.iter().flatten());
        params.extend(&layer.biases);
    }
    let mlp = Mlp::from_parts(d.layer_sizes.clone(), activation, params)?;
    let input_scaling = scaling(&d.input_mean, &d.input_std, mlp.input_dim(), "input")?;
    let output_scaling = scaling(&d.output_mean, &d.output_std, mlp.output_dim(), "output")?;
    Ok(ScaledMlp { mlp, input_scaling, output_scaling })
}

impl ModelFile {
    pub fn from_model(method: &str, model: &WrenchModel, grid: GridSpec) -> Self {
        let body = match model {
            WrenchModel::Features { axes } => ModelBody::Features {
                axes: axes
                    .iter()
                    .map(|a| match a {
                        AxisModel::Linear(l) => AxisDoc::Linear { slope: l.slope, intercept: l.intercept },
                        AxisModel::Mlp(m) => AxisDoc::Mlp(mlp_doc(m)),
                    })
                    .collect(),
            },
            WrenchModel::Raw { mlp } => ModelBody::Raw { grid, network: mlp_doc(mlp) },
        };
        Self { method: method.to_string(), body }
    }

    /// Validated model plus the grid a raw model expects.
    pub fn to_model(&self) -> Result<(WrenchModel, Option<GridSpec>)> {
        match &self.body {
            ModelBody::Features { axes } => {
                if axes.len() != 3 {
                    return Err(invalid(format!("expected 3 axes, found {}", axes.len())));
                }
                let conv = |a: &AxisDoc| -> Result<AxisModel> {
                    match a {
                        AxisDoc::Linear { slope, intercept } => {
                            if !(slope.is_finite() && intercept.is_finite()) {
                                return Err(invalid("linear parameters must be finite"));
                            }
                            Ok(AxisModel::Linear(LinearModel::new(*slope, *intercept)))
                        }
                        AxisDoc::Mlp(d) => {
                            let m = mlp_from_doc(d)?;
                            if m.mlp.input_dim() != 1 || m.mlp.output_dim() != 1 {
                                return Err(invalid("per-axis networks map one feature to one output"));
                            }
                            Ok(AxisModel::Mlp(m))
                        }
                    }
                };
                Ok((WrenchModel::Features { axes: [conv(&axes[0])?, conv(&axes[1])?, conv(&axes[2])?] }, None))
            }
            ModelBody::Raw { grid, network } => {
                let grid = GridSpec::new(grid.nx(), grid.ny(), grid.spacing(), grid.origin())?;
                let mlp = mlp_from_doc(network)?;
                if mlp.mlp.input_dim() != 2 * grid.len() || mlp.mlp.output_dim() != 3 {
                    return Err(invalid("raw network must map the flattened grid to 3 outputs"));
                }
                Ok((WrenchModel::Raw { mlp }, Some(grid)))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::json(path, e))?;
        fieldio::write_text(path, &(text + "\n"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&fieldio::read_text(path)?).map_err(|e| CliError::json(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tactile_core::calib::{CvSample, MlpSpec, ModelSpec};

    fn samples() -> Vec<CvSample> {
        (0..12)
            .map(|k| {
                let x = k as f64 * 0.25;
                CvSample {
                    features: [x, 2.0 * x, -x],
                    direction: None,
                    raw: vec![x, -x, 0.5 * x, 1.0, x * x, 0.0, 0.0, 1.0],
                    label: [3.0 * x, x, 2.0 - x],
                    truth: [3.0 * x, x, 2.0 - x],
                    object_id: k % 3,
                }
            })
            .collect()
    }

    #[test]
    fn models_survive_a_round_trip() {
        let grid = GridSpec::centered(2, 2, 1.0).unwrap();
        let mut small = MlpSpec::small();
        small.train.max_iter = 20;
        let mut raw = MlpSpec::raw_baseline();
        raw.hidden = vec![4, 3];
        raw.train.max_iter = 20;
        let s = samples();
        for spec in [ModelSpec::Ransac(Default::default()), ModelSpec::MlpFeatures(small), ModelSpec::MlpRaw(raw)] {
            let model = WrenchModel::fit(&spec, &s).unwrap();
            let file = ModelFile::from_model(spec.name(), &model, grid);
            let text = serde_json::to_string(&file).unwrap();
            let back: ModelFile = serde_json::from_str(&text).unwrap();
            let (restored, g) = back.to_model().unwrap();
            for sample in &s {
                assert_eq!(model.predict_sample(sample).unwrap(), restored.predict_sample(sample).unwrap());
            }
            assert_eq!(g.is_some(), matches!(model, WrenchModel::Raw { .. }));
        }
    }

    #[test]
    fn malformed_networks_are_rejected() {
        let text = r#"{"method":"mlp","input":"features","axes":[
            {"type":"linear","slope":1,"intercept":0},
            {"type":"linear","slope":1,"intercept":0},
            {"type":"mlp","layer_sizes":[1,2,1],"activation":"tanh",
             "layers":[{"weights":[[1]],"biases":[0,0]},{"weights":[[1,1]],"biases":[0]}],
             "input_mean":[0],"input_std":[1],"output_mean":[0],"output_std":[1]}]}"#;
        let file: ModelFile = serde_json::from_str(text).unwrap();
        assert!(file.to_model().is_err());
    }
}
