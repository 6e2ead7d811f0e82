//! Fully connected networks `x → h` with exact per-parameter first and
//! diagonal second derivatives.
//!
//! Parameter layout: layers are stored in order; within layer `l` the weight
//! matrix `W_l` (shape `d_l × d_{l−1}`, row-major) comes first, then the bias
//! `b_l`. Each layer is one parameter group named `layer{l}` (1-based).
//! Hidden layers apply the activation; the output layer is always linear.

use std::ops::Range;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    SoftPlus,
    LogSigmoid,
    Tanh,
    Identity,
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl Activation {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(t),
            Activation::SoftPlus => softplus(t),
            Activation::LogSigmoid => -softplus(-t),
            Activation::Tanh => t.tanh(),
            Activation::Identity => t,
        }
    }

    pub fn d1(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            Activation::SoftPlus => sigmoid(t),
            Activation::LogSigmoid => sigmoid(-t),
            Activation::Tanh => 1.0 - t.tanh().powi(2),
            Activation::Identity => 1.0,
        }
    }

    pub fn d2(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(t);
                s * (1.0 - s) * (1.0 - 2.0 * s)
            }
            Activation::SoftPlus => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            Activation::LogSigmoid => {
                let s = sigmoid(t);
                -s * (1.0 - s)
            }
            Activation::Tanh => {
                let th = t.tanh();
                -2.0 * th * (1.0 - th * th)
            }
            Activation::Identity => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layer_dims: Vec<usize>,
    activation: Activation,
    theta: Vec<f64>,
}

/// `h(x)` together with `jac[i][a] = ∂h^a/∂θ_i` and `dhess[i][a] = ∂²h^a/∂θ_i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeBundle {
    pub h: Vec<f64>,
    pub jac: Matrix,
    pub dhess: Matrix,
}

struct ForwardTrace {
    /// Pre-activations per layer `1..=L` (index 0 is layer 1).
    pre: Vec<Vec<f64>>,
    /// Layer inputs: `acts[0] = x`, `acts[l] = φ(pre[l−1])` for hidden layers.
    acts: Vec<Vec<f64>>,
}

pub fn param_count(layer_dims: &[usize]) -> usize {
    layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl MlpNetwork {
    pub fn new(layer_dims: Vec<usize>, activation: Activation, theta: Vec<f64>) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::InvalidArgument(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if layer_dims.contains(&0) {
            return Err(Error::InvalidArgument("layer widths must be positive".into()));
        }
        ensure_len(&theta, param_count(&layer_dims), "parameter vector")?;
        ensure_finite(&theta, "parameter vector")?;
        Ok(Self {
            layer_dims,
            activation,
            theta,
        })
    }

    /// Weights and biases drawn from `U(−1/√fan_in, 1/√fan_in)`.
    pub fn init(layer_dims: Vec<usize>, activation: Activation, seed: u64) -> Result<Self> {
        let mut rng = rng_from_seed(seed);
        let mut theta = Vec::with_capacity(param_count(&layer_dims));
        for w in layer_dims.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] * w[1] + w[1]) {
                theta.push(rng.random_range(-bound..=bound));
            }
        }
        Self::new(layer_dims, activation, theta)
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.theta.len()
    }

    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.layer_dims.clone(), self.activation, theta)
    }

    /// Offset of layer `l` (1-based) in `theta`.
    fn layer_offset(&self, l: usize) -> usize {
        param_count(&self.layer_dims[..l])
    }

    pub fn param_groups(&self) -> Vec<ParamGroup> {
        (1..=self.num_layers())
            .map(|l| {
                let start = self.layer_offset(l);
                let len = self.layer_dims[l - 1] * self.layer_dims[l] + self.layer_dims[l];
                ParamGroup {
                    name: format!("layer{l}"),
                    range: start..start + len,
                }
            })
            .collect()
    }

    /// `(W_l, b_l)` as slices; `W_l` is `d_l × d_{l−1}` row-major.
    fn layer_params(&self, l: usize) -> (&[f64], &[f64]) {
        let start = self.layer_offset(l);
        let (fan_in, fan_out) = (self.layer_dims[l - 1], self.layer_dims[l]);
        let w = &self.theta[start..start + fan_in * fan_out];
        let b = &self.theta[start + fan_in * fan_out..start + fan_in * fan_out + fan_out];
        (w, b)
    }

    fn affine(&self, l: usize, input: &[f64]) -> Vec<f64> {
        let (w, b) = self.layer_params(l);
        let fan_in = self.layer_dims[l - 1];
        b.iter()
            .enumerate()
            .map(|(j, bj)| bj + crate::linalg::dot(&w[j * fan_in..(j + 1) * fan_in], input))
            .collect()
    }

    fn trace(&self, x: &[f64]) -> Result<ForwardTrace> {
        ensure_len(x, self.input_dim(), "network input")?;
        ensure_finite(x, "network input")?;
        let depth = self.num_layers();
        let mut pre = Vec::with_capacity(depth);
        let mut acts = Vec::with_capacity(depth);
        acts.push(x.to_vec());
        for l in 1..=depth {
            let z = self.affine(l, &acts[l - 1]);
            if l < depth {
                acts.push(z.iter().map(|&v| self.activation.eval(v)).collect());
            }
            pre.push(z);
        }
        Ok(ForwardTrace { pre, acts })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut t = self.trace(x)?;
        Ok(t.pre.pop().unwrap())
    }

    /// Exact `∂_i h` and `∂²_ii h` for every parameter.
    ///
    /// Every parameter feeding neuron `j` of layer `l` moves `h` only through
    /// the scalar pre-activation `z_{l,j}`: for `W_l[j,k]` we have
    /// `∂z/∂θ = a_{l−1,k}` and `∂²z/∂θ² = 0`, so
    /// `∂h/∂θ = a_k · u_j` and `∂²h/∂θ² = a_k² · v_j` with
    /// `u_j = ∂h/∂z_{l,j}` and `v_j = ∂²h/∂z_{l,j}²`. Those two vectors are
    /// obtained by carrying a first- and second-order perturbation of
    /// `z_{l,j}` forward through the remaining layers.
    pub fn derivatives(&self, x: &[f64]) -> Result<DerivativeBundle> {
        let tr = self.trace(x)?;
        let depth = self.num_layers();
        let t = self.output_dim();
        let p = self.num_params();
        let mut jac = Matrix::zeros(p, t);
        let mut dhess = Matrix::zeros(p, t);

        for l in 1..=depth {
            let fan_in = self.layer_dims[l - 1];
            let fan_out = self.layer_dims[l];
            let start = self.layer_offset(l);
            let input = &tr.acts[l - 1];
            for j in 0..fan_out {
                let (u, v) = self.neuron_sensitivity(&tr, l, j);
                for (k, &a) in input.iter().enumerate() {
                    let i = start + j * fan_in + k;
                    for (dst, &uv) in jac.row_mut(i).iter_mut().zip(&u) {
                        *dst = a * uv;
                    }
                    for (dst, &vv) in dhess.row_mut(i).iter_mut().zip(&v) {
                        *dst = a * a * vv;
                    }
                }
                let bias = start + fan_in * fan_out + j;
                jac.row_mut(bias).copy_from_slice(&u);
                dhess.row_mut(bias).copy_from_slice(&v);
            }
        }

        Ok(DerivativeBundle {
            h: tr.pre[depth - 1].clone(),
            jac,
            dhess,
        })
    }

    /// `(∂h/∂z_{l,j}, ∂²h/∂z_{l,j}²)`.
    fn neuron_sensitivity(&self, tr: &ForwardTrace, l: usize, j: usize) -> (Vec<f64>, Vec<f64>) {
        let depth = self.num_layers();
        let width = self.layer_dims[l];
        let mut dz = vec![0.0; width];
        let mut d2z = vec![0.0; width];
        dz[j] = 1.0;
        for m in l..depth {
            let z = &tr.pre[m - 1];
            let act = self.activation;
            let da: Vec<f64> = z.iter().zip(&dz).map(|(&zz, &d)| act.d1(zz) * d).collect();
            let d2a: Vec<f64> = z
                .iter()
                .zip(dz.iter().zip(&d2z))
                .map(|(&zz, (&d, &d2))| act.d2(zz) * d * d + act.d1(zz) * d2)
                .collect();
            let (w, _) = self.layer_params(m + 1);
            let fan_in = self.layer_dims[m];
            let fan_out = self.layer_dims[m + 1];
            dz = (0..fan_out)
                .map(|r| crate::linalg::dot(&w[r * fan_in..(r + 1) * fan_in], &da))
                .collect();
            d2z = (0..fan_out)
                .map(|r| crate::linalg::dot(&w[r * fan_in..(r + 1) * fan_in], &d2a))
                .collect();
        }
        (dz, d2z)
    }

    /// `(∂h/∂θ)ᵀ · upstream`: the parameter gradient of `upstreamᵀ h(x)`.
    pub fn vjp(&self, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        ensure_len(upstream, self.output_dim(), "output cotangent")?;
        let tr = self.trace(x)?;
        let depth = self.num_layers();
        let mut grad = vec![0.0; self.num_params()];
        let mut delta = upstream.to_vec();
        for l in (1..=depth).rev() {
            let fan_in = self.layer_dims[l - 1];
            let fan_out = self.layer_dims[l];
            let start = self.layer_offset(l);
            let input = &tr.acts[l - 1];
            for j in 0..fan_out {
                let row = &mut grad[start + j * fan_in..start + (j + 1) * fan_in];
                for (g, &a) in row.iter_mut().zip(input) {
                    *g = delta[j] * a;
                }
                grad[start + fan_in * fan_out + j] = delta[j];
            }
            if l > 1 {
                let (w, _) = self.layer_params(l);
                let z = &tr.pre[l - 2];
                delta = (0..fan_in)
                    .map(|k| {
                        let back: f64 = (0..fan_out).map(|j| w[j * fan_in + k] * delta[j]).sum();
                        back * self.activation.d1(z[k])
                    })
                    .collect();
            }
        }
        Ok(grad)
    }
}

/// JSON checkpoint `{layer_dims, activation, theta, seed, head?}`.
///
/// `theta` is written with shortest round-trip decimals, so reloading is
/// bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub theta: Vec<f64>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<crate::expfam::Family>,
}

impl Checkpoint {
    pub fn from_network(net: &MlpNetwork, seed: u64, head: Option<crate::expfam::Family>) -> Self {
        Self {
            layer_dims: net.layer_dims.clone(),
            activation: net.activation,
            theta: net.theta.clone(),
            seed,
            head,
        }
    }

    pub fn to_network(&self) -> Result<MlpNetwork> {
        MlpNetwork::new(self.layer_dims.clone(), self.activation, self.theta.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("checkpoint: {e}")))
    }
}
