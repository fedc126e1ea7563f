//! Feed-forward binary classifier with hand-derived backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::losses::sigmoid;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative at pre-activation `z`; relu uses 0 at `z = 0`.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
        }
    }
}

/// Layer widths from the input to a single output logit. No hidden layers
/// makes the model logistic regression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
}

impl Architecture {
    pub fn new(
        input_dim: usize,
        hidden_layers: Vec<usize>,
        activation: Activation,
    ) -> Result<Self> {
        let arch = Self {
            input_dim,
            hidden_layers,
            activation,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn logistic(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_layers: Vec::new(),
            activation: Activation::Relu,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_layers.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "layer widths must be positive: input {} hidden {:?}",
                self.input_dim, self.hidden_layers
            )));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every layer.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dim];
        widths.extend(&self.hidden_layers);
        widths.push(1);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One affine layer; `weights` is row-major `fan_in × fan_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
        }
    }

    /// `x·W + b` for row-major `x` with `rows` rows.
    fn affine(&self, x: &[f64], rows: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows * self.fan_out);
        for r in 0..rows {
            let xr = &x[r * self.fan_in..(r + 1) * self.fan_in];
            out.extend_from_slice(&self.bias);
            let or = &mut out[r * self.fan_out..];
            for (i, &xi) in xr.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let wi = &self.weights[i * self.fan_out..(i + 1) * self.fan_out];
                for (o, &w) in or.iter_mut().zip(wi) {
                    *o += xi * w;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub architecture: Architecture,
    pub layers: Vec<Layer>,
    pub seed: u64,
}

/// Glorot-uniform weights `U(−a, a)`, `a = √(6 / (fan_in + fan_out))`, zero biases.
pub fn init(arch: &Architecture, seed: u64) -> Result<ModelParams> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = arch
        .layer_shapes()
        .into_iter()
        .map(|(fan_in, fan_out)| {
            let a = glorot_bound(fan_in, fan_out);
            let mut layer = Layer::zeros(fan_in, fan_out);
            for w in &mut layer.weights {
                *w = rng.random_range(-a..a);
            }
            layer
        })
        .collect();
    Ok(ModelParams {
        architecture: arch.clone(),
        layers,
        seed,
    })
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Activations kept by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    rows: usize,
    /// Input of every layer; `inputs[0]` is the batch itself.
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of the hidden layers.
    pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn rows(&self) -> usize {
        self.rows
    }
}

#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub cache: ForwardCache,
}

/// Runs the network on row-major `x` of `rows × input_dim`.
pub fn forward(params: &ModelParams, x: &[f64], rows: usize) -> Result<ForwardPass> {
    let dim = params.architecture.input_dim;
    if x.len() != rows * dim {
        return Err(Error::Dimension(format!(
            "input has {} values, expected {rows} rows × {dim} columns",
            x.len()
        )));
    }
    let activation = params.architecture.activation;
    let last = params.layers.len() - 1;
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut pre_activations = Vec::with_capacity(last);
    let mut current = x.to_vec();
    for (l, layer) in params.layers.iter().enumerate() {
        let z = layer.affine(&current, rows);
        inputs.push(current);
        if l == last {
            current = z;
        } else {
            current = z.iter().map(|&v| activation.apply(v)).collect();
            pre_activations.push(z);
        }
    }
    let logits = current;
    let probabilities = logits.iter().map(|&z| sigmoid(z)).collect();
    Ok(ForwardPass {
        logits,
        probabilities,
        cache: ForwardCache {
            rows,
            inputs,
            pre_activations,
        },
    })
}

/// Parameter gradients, shaped like [`ModelParams::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|&g| g == 0.0))
    }
}

impl ModelParams {
    /// Weight and bias slices, layer by layer.
    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    /// All parameters flattened in layer order, weights before biases.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::Dimension(format!(
                "{} values for {} parameters",
                values.len(),
                self.parameter_count()
            )));
        }
        let mut it = values.iter().copied();
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v = it.next().expect("length checked");
            }
        }
        Ok(())
    }
}

impl Gradients {
    pub fn tensors(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias])
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}

/// Chain rule from `∂loss/∂logit` (one entry per row) to every parameter.
pub fn backward(params: &ModelParams, cache: &ForwardCache, dlogits: &[f64]) -> Result<Gradients> {
    let rows = cache.rows;
    let n_layers = params.layers.len();
    let shapes_ok = cache.inputs.len() == n_layers
        && cache.pre_activations.len() + 1 == n_layers
        && params
            .layers
            .iter()
            .zip(&cache.inputs)
            .all(|(l, x)| x.len() == rows * l.fan_in);
    if !shapes_ok {
        return Err(Error::Dimension(
            "forward cache does not match the model parameters".into(),
        ));
    }
    if dlogits.len() != rows {
        return Err(Error::Dimension(format!(
            "{} logit gradients for {rows} rows",
            dlogits.len()
        )));
    }
    let activation = params.architecture.activation;
    let mut grads: Vec<Layer> = params
        .layers
        .iter()
        .map(|l| Layer::zeros(l.fan_in, l.fan_out))
        .collect();
    // δ = ∂loss/∂(pre-activation of the current layer), row-major rows × fan_out
    let mut delta = dlogits.to_vec();
    for l in (0..n_layers).rev() {
        let layer = &params.layers[l];
        let input = &cache.inputs[l];
        let g = &mut grads[l];
        for r in 0..rows {
            let dr = &delta[r * layer.fan_out..(r + 1) * layer.fan_out];
            let xr = &input[r * layer.fan_in..(r + 1) * layer.fan_in];
            for (b, &d) in g.bias.iter_mut().zip(dr) {
                *b += d;
            }
            for (i, &xi) in xr.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let gw = &mut g.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                for (w, &d) in gw.iter_mut().zip(dr) {
                    *w += xi * d;
                }
            }
        }
        if l == 0 {
            break;
        }
        let z = &cache.pre_activations[l - 1];
        let mut next = vec![0.0; rows * layer.fan_in];
        for r in 0..rows {
            let dr = &delta[r * layer.fan_out..(r + 1) * layer.fan_out];
            for i in 0..layer.fan_in {
                let wi = &layer.weights[i * layer.fan_out..(i + 1) * layer.fan_out];
                let s: f64 = wi.iter().zip(dr).map(|(w, d)| w * d).sum();
                let k = r * layer.fan_in + i;
                next[k] = s * activation.derivative(z[k]);
            }
        }
        delta = next;
    }
    Ok(Gradients { layers: grads })
}

/// 1 where `probability ≥ threshold`, else 0.
pub fn predict(probabilities: &[f64], threshold: f64) -> Vec<u8> {
    probabilities
        .iter()
        .map(|&p| u8::from(p >= threshold))
        .collect()
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

const MODEL_FORMAT: &str = "gapfair-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    #[serde(flatten)]
    params: ModelParams,
}

impl ModelParams {
    /// Versioned JSON document; layer weights are row-major.
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            params: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        let params = doc.params;
        params.architecture.validate()?;
        let shapes = params.architecture.layer_shapes();
        let consistent = shapes.len() == params.layers.len()
            && shapes.iter().zip(&params.layers).all(|(&(i, o), l)| {
                l.fan_in == i && l.fan_out == o && l.weights.len() == i * o && l.bias.len() == o
            });
        if !consistent {
            return Err(Error::Format(
                "layer shapes do not chain from input_dim to 1".into(),
            ));
        }
        Ok(params)
    }
}
