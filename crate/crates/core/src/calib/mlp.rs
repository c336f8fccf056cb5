//! Fully connected regressor trained full-batch with L-BFGS on mean squared error.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lbfgs::{self, LbfgsConfig, LbfgsReport};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => math::tanh(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "tanh" => Some(Activation::Tanh),
            "identity" | "linear" => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// Multi-layer perceptron with `activation` on hidden layers and a linear output.
///
/// Parameters are stored flat, layer by layer: the `out x in` weight matrix
/// (row-major) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    activation: Activation,
    params: Vec<f64>,
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(layer_sizes: &[usize], activation: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::InvalidInput(alloc::format!("bad layer sizes {layer_sizes:?}")));
        }
        Ok(Self { layer_sizes: layer_sizes.to_vec(), activation, params: alloc::vec![0.0; param_count(layer_sizes)] })
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let mut m = Self::zeros(layer_sizes, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = 0;
        for w in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
            for p in &mut m.params[offset..offset + fan_in * fan_out] {
                *p = rng.random_range(-limit..limit);
            }
            offset += fan_in * fan_out + fan_out;
        }
        Ok(m)
    }

    /// Rebuilds a model from stored parameters.
    pub fn from_parts(layer_sizes: Vec<usize>, activation: Activation, params: Vec<f64>) -> Result<Self> {
        let m = Self::zeros(&layer_sizes, activation)?;
        if params.len() != m.params.len() {
            return Err(Error::DimensionMismatch { expected: m.params.len(), found: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("MLP parameters must be finite".into()));
        }
        Ok(Self { params, ..m })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch { expected: self.params.len(), found: params.len() });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Weight matrices and bias vectors per layer.
    pub fn layers(&self) -> Vec<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut out = Vec::new();
        let mut offset = 0;
        for w in self.layer_sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = (0..n_out).map(|o| self.params[offset + o * n_in..offset + (o + 1) * n_in].to_vec()).collect();
            offset += n_in * n_out;
            let biases = self.params[offset..offset + n_out].to_vec();
            offset += n_out;
            out.push((weights, biases));
        }
        out
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), found: input.len() });
        }
        let acts = forward_batch(&self.layer_sizes, self.activation, &self.params, input, 1);
        Ok(acts.into_iter().last().unwrap())
    }

    /// Mean squared error over all samples and outputs, and its gradient.
    pub fn loss_and_gradient(&self, params: &[f64], inputs: &[f64], targets: &[f64], grad: &mut [f64]) -> f64 {
        loss_and_gradient(&self.layer_sizes, self.activation, params, inputs, targets, grad)
    }
}

/// Row-major activations of every layer for `n` samples, input included.
fn forward_batch(sizes: &[usize], act: Activation, params: &[f64], inputs: &[f64], n: usize) -> Vec<Vec<f64>> {
    let mut acts: Vec<Vec<f64>> = Vec::with_capacity(sizes.len());
    acts.push(inputs.to_vec());
    let mut offset = 0;
    let last = sizes.len() - 2;
    for (layer, w) in sizes.windows(2).enumerate() {
        let (n_in, n_out) = (w[0], w[1]);
        let weights = &params[offset..offset + n_in * n_out];
        let biases = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        offset += n_in * n_out + n_out;
        let prev = &acts[layer];
        let mut out = alloc::vec![0.0; n * n_out];
        for s in 0..n {
            let x = &prev[s * n_in..(s + 1) * n_in];
            let row = &mut out[s * n_out..(s + 1) * n_out];
            for o in 0..n_out {
                let wrow = &weights[o * n_in..(o + 1) * n_in];
                let z = biases[o] + wrow.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                row[o] = if layer == last { z } else { act.apply(z) };
            }
        }
        acts.push(out);
    }
    acts
}

fn loss_and_gradient(
    sizes: &[usize],
    act: Activation,
    params: &[f64],
    inputs: &[f64],
    targets: &[f64],
    grad: &mut [f64],
) -> f64 {
    let n_out_final = *sizes.last().unwrap();
    let n = targets.len() / n_out_final;
    let acts = forward_batch(sizes, act, params, inputs, n);
    let out = acts.last().unwrap();
    let scale = 1.0 / (n * n_out_final) as f64;
    let mut loss = 0.0;
    let mut delta: Vec<f64> = out
        .iter()
        .zip(targets)
        .map(|(p, t)| {
            let e = p - t;
            loss += e * e;
            2.0 * e * scale
        })
        .collect();
    loss *= scale;

    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut offsets = Vec::with_capacity(sizes.len() - 1);
    let mut offset = 0;
    for w in sizes.windows(2) {
        offsets.push(offset);
        offset += w[0] * w[1] + w[1];
    }
    for layer in (0..sizes.len() - 1).rev() {
        let (n_in, n_out) = (sizes[layer], sizes[layer + 1]);
        let off = offsets[layer];
        let prev = &acts[layer];
        {
            let (gw, gb) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for s in 0..n {
                let x = &prev[s * n_in..(s + 1) * n_in];
                let d = &delta[s * n_out..(s + 1) * n_out];
                for o in 0..n_out {
                    let dv = d[o];
                    if dv == 0.0 {
                        continue;
                    }
                    gb[o] += dv;
                    for (g, xi) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
                        *g += dv * xi;
                    }
                }
            }
        }
        if layer == 0 {
            break;
        }
        let weights = &params[off..off + n_in * n_out];
        let mut next = alloc::vec![0.0; n * n_in];
        for s in 0..n {
            let d = &delta[s * n_out..(s + 1) * n_out];
            let dst = &mut next[s * n_in..(s + 1) * n_in];
            for o in 0..n_out {
                let dv = d[o];
                if dv == 0.0 {
                    continue;
                }
                for (t, w) in dst.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                    *t += dv * w;
                }
            }
            let y = &prev[s * n_in..(s + 1) * n_in];
            for (t, yi) in dst.iter_mut().zip(y) {
                *t *= act.derivative_from_output(*yi);
            }
        }
        delta = next;
    }
    loss
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpTrainConfig {
    pub max_iter: usize,
    /// Gradient-norm stopping tolerance.
    pub tol: f64,
    pub seed: u64,
}

impl Default for MlpTrainConfig {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-8, seed: 0 }
    }
}

/// Trains a fresh network on `(input, target)` pairs.
pub fn mlp_fit(
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    layer_sizes: &[usize],
    activation: Activation,
    cfg: &MlpTrainConfig,
) -> Result<(Mlp, LbfgsReport)> {
    if inputs.is_empty() || inputs.len() != targets.len() {
        return Err(Error::InvalidInput(alloc::format!(
            "need matching non-empty inputs and targets, got {} and {}",
            inputs.len(),
            targets.len()
        )));
    }
    let mut model = Mlp::init(layer_sizes, activation, cfg.seed)?;
    let (n_in, n_out) = (model.input_dim(), model.output_dim());
    for x in inputs {
        if x.len() != n_in {
            return Err(Error::DimensionMismatch { expected: n_in, found: x.len() });
        }
    }
    for y in targets {
        if y.len() != n_out {
            return Err(Error::DimensionMismatch { expected: n_out, found: y.len() });
        }
    }
    let flat_x: Vec<f64> = inputs.iter().flatten().copied().collect();
    let flat_y: Vec<f64> = targets.iter().flatten().copied().collect();
    let mut params = model.params.clone();
    let sizes = model.layer_sizes.clone();
    let lcfg = LbfgsConfig { max_iter: cfg.max_iter, grad_tol: cfg.tol, memory: 10 };
    let report = lbfgs::minimize(&mut params, &lcfg, |p, g| loss_and_gradient(&sizes, activation, p, &flat_x, &flat_y, g))?;
    model.params = params;
    Ok((model, report))
}

/// Per-column mean and standard deviation; zero deviations become 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len().max(1) as f64;
        let mut mean = alloc::vec![0.0; d];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x / n;
            }
        }
        let mut std = alloc::vec![0.0; d];
        for r in rows {
            for ((s, x), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (x - m) * (x - m) / n;
            }
        }
        for s in std.iter_mut() {
            *s = math::sqrt(*s);
            if *s < 1e-12 {
                *s = 1.0;
            }
        }
        Self { mean, std }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| (x - m) / s).collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.std).map(|((x, m), s)| x * s + m).collect()
    }
}

/// MLP wrapped with input and output standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMlp {
    pub mlp: Mlp,
    pub input_scaling: Standardizer,
    pub output_scaling: Standardizer,
}

impl ScaledMlp {
    pub fn fit(
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        hidden: &[usize],
        cfg: &MlpTrainConfig,
    ) -> Result<(Self, LbfgsReport)> {
        let d_in = inputs.first().map_or(0, |r| r.len());
        let d_out = targets.first().map_or(0, |r| r.len());
        let mut sizes = alloc::vec![d_in];
        sizes.extend_from_slice(hidden);
        sizes.push(d_out);
        let input_scaling = Standardizer::fit(inputs);
        let output_scaling = Standardizer::fit(targets);
        let xs: Vec<Vec<f64>> = inputs.iter().map(|r| input_scaling.apply(r)).collect();
        let ys: Vec<Vec<f64>> = targets.iter().map(|r| output_scaling.apply(r)).collect();
        let (mlp, report) = mlp_fit(&xs, &ys, &sizes, Activation::Tanh, cfg)?;
        Ok((Self { mlp, input_scaling, output_scaling }, report))
    }

    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        let out = self.mlp.forward(&self.input_scaling.apply(input))?;
        Ok(self.output_scaling.invert(&out))
    }

    pub fn describe(&self) -> String {
        alloc::format!("mlp{:?}", self.mlp.layer_sizes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn numeric_gradient(m: &Mlp, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let mut p = m.params().to_vec();
        let mut scratch = alloc::vec![0.0; p.len()];
        let mut out = alloc::vec![0.0; p.len()];
        for k in 0..p.len() {
            let orig = p[k];
            let h = 1e-6 * orig.abs().max(1.0);
            p[k] = orig + h;
            let up = m.loss_and_gradient(&p, xs, ys, &mut scratch);
            p[k] = orig - h;
            let down = m.loss_and_gradient(&p, xs, ys, &mut scratch);
            p[k] = orig;
            out[k] = (up - down) / (2.0 * h);
        }
        out
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = Mlp::init(&[3, 5, 4, 2], Activation::Tanh, 17).unwrap();
        let xs: Vec<f64> = (0..6 * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..6 * 2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut g = alloc::vec![0.0; m.params().len()];
        m.loss_and_gradient(m.params(), &xs, &ys, &mut g);
        let num = numeric_gradient(&m, &xs, &ys);
        for (a, b) in g.iter().zip(&num) {
            assert!((a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_network_outputs_zero() {
        let m = Mlp::zeros(&[4, 7, 2], Activation::Tanh).unwrap();
        assert_eq!(m.forward(&[1.0, -2.0, 3.0, 0.5]).unwrap(), alloc::vec![0.0, 0.0]);
        assert!(matches!(m.forward(&[1.0]), Err(Error::DimensionMismatch { expected: 4, found: 1 })));
    }

    #[test]
    fn memorizes_a_single_pair() {
        let (m, report) = mlp_fit(
            &[alloc::vec![0.3, -0.7]],
            &[alloc::vec![1.5]],
            &[2, 4, 1],
            Activation::Tanh,
            &MlpTrainConfig { max_iter: 200, tol: 1e-12, seed: 1 },
        )
        .unwrap();
        assert!(*report.loss_history.last().unwrap() < 1e-8);
        assert!((m.forward(&[0.3, -0.7]).unwrap()[0] - 1.5).abs() < 1e-4);
    }

    #[test]
    fn learns_a_noisy_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sigma = 0.05;
        let noise = Normal::new(0.0, sigma).unwrap();
        let xs: Vec<Vec<f64>> = (0..60).map(|_| alloc::vec![rng.random_range(-1.0..1.0)]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| alloc::vec![2.0 * x[0] + noise.sample(&mut rng)]).collect();
        let (m, report) =
            ScaledMlp::fit(&xs, &ys, &[10], &MlpTrainConfig { max_iter: 300, tol: 1e-8, seed: 2 }).unwrap();
        assert!(report.loss_history.windows(2).all(|w| w[1] <= w[0]));
        let mut se = 0.0;
        let n = 50;
        for k in 0..n {
            let x = -0.95 + 1.9 * k as f64 / (n - 1) as f64;
            let y = m.predict(&[x]).unwrap()[0];
            se += (y - 2.0 * x).powi(2);
        }
        // held-out points scored against noisy targets: RMSE within 2 sigma
        let mut noisy_se = se;
        let mut rng2 = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..n {
            noisy_se += noise.sample(&mut rng2).powi(2);
        }
        let rmse = math::sqrt(noisy_se / n as f64);
        assert!(rmse <= 2.0 * sigma, "rmse {rmse}");
    }

    #[test]
    fn training_is_deterministic() {
        let xs: Vec<Vec<f64>> = (0..10).map(|k| alloc::vec![k as f64 / 10.0]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| alloc::vec![x[0] * x[0]]).collect();
        let cfg = MlpTrainConfig { max_iter: 50, tol: 1e-10, seed: 4 };
        let a = mlp_fit(&xs, &ys, &[1, 5, 1], Activation::Tanh, &cfg).unwrap().0;
        let b = mlp_fit(&xs, &ys, &[1, 5, 1], Activation::Tanh, &cfg).unwrap().0;
        assert_eq!(a, b);
        assert_eq!(a.forward(&[0.3]).unwrap(), a.forward(&[0.3]).unwrap());
    }
}
