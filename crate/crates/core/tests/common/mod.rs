#![allow(dead_code)]

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

pub struct Instance {
    pub net: MlpNetwork,
    pub head: NaturalParamHead,
    pub x: Vec<f64>,
}

/// Random MLP with 2–4 weight layers, hidden widths ≤ 16 and the given output size.
pub fn random_net(rng: &mut Rng, activation: Activation, out: usize) -> MlpNetwork {
    let depth = rng.random_range(2..=4);
    let mut dims = vec![rng.random_range(1..=5)];
    for _ in 1..depth {
        dims.push(rng.random_range(1..=16));
    }
    dims.push(out);
    let gain: f64 = rng.random_range(0.5..2.0);
    let net = MlpNetwork::init(dims, activation, rng.random()).unwrap();
    let theta = net.theta().iter().map(|v| v * gain).collect();
    net.with_theta(theta).unwrap()
}

pub fn random_input(rng: &mut Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_instance(seed: u64, categorical: bool, classes: usize) -> Instance {
    let mut rng = rng_from_seed(seed);
    let act = ACTIVATIONS[rng.random_range(0..ACTIVATIONS.len())];
    let head = if categorical {
        NaturalParamHead::categorical(classes).unwrap()
    } else {
        NaturalParamHead::gaussian(classes).unwrap()
    };
    let net = random_net(&mut rng, act, classes);
    let x = random_input(&mut rng, net.input_dim());
    Instance { net, head, x }
}

/// `|a − b| ≤ abs + rel·|b|`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * b.abs()
}
