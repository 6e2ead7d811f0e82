//! Random small networks and inputs for the oracle suites.

use diagfim::rng::{rng_from_seed, Rng};
use diagfim::{Activation, MlpNetwork, NaturalParamHead};
use rand::Rng as _;
use rand_distr::StandardNormal;

pub const ACTIVATIONS: [Activation; 5] = [
    Activation::Sigmoid,
    Activation::SoftPlus,
    Activation::LogSigmoid,
    Activation::Tanh,
    Activation::Identity,
];

#[derive(Debug, Clone)]
pub struct Instance {
    pub net: MlpNetwork,
    pub head: NaturalParamHead,
    pub x: Vec<f64>,
}

/// 2–4 weight layers, input width 1–5, hidden widths 1–16, default init
/// scaled by a gain in `[0.5, 2)`.
pub fn random_net(rng: &mut Rng, activation: Activation, out: usize) -> MlpNetwork {
    let depth = rng.random_range(2..=4);
    let mut dims = vec![rng.random_range(1..=5)];
    for _ in 1..depth {
        dims.push(rng.random_range(1..=16));
    }
    dims.push(out);
    let gain: f64 = rng.random_range(0.5..2.0);
    let net = MlpNetwork::init(dims, activation, rng.random()).expect("valid dims");
    let theta = net.theta().iter().map(|v| v * gain).collect();
    net.with_theta(theta).expect("finite parameters")
}

pub fn random_input(rng: &mut Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// `activation = None` picks one of [`ACTIVATIONS`] at random.
pub fn random_instance(seed: u64, head: NaturalParamHead, activation: Option<Activation>) -> Instance {
    let mut rng = rng_from_seed(seed);
    let act = activation.unwrap_or_else(|| ACTIVATIONS[rng.random_range(0..ACTIVATIONS.len())]);
    let net = random_net(&mut rng, act, head.dim_t());
    let x = random_input(&mut rng, net.input_dim());
    Instance { net, head, x }
}

/// Uniform point on the probability simplex, bounded away from the faces.
pub fn random_simplex(rng: &mut Rng, dim: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..dim).map(|_| -rng.random_range(1e-3f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// `|a − b| ≤ abs + rel·|b|`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * b.abs()
}
