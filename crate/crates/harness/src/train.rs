//! Minibatch SGD on the negative log-likelihood of the network's head.

use diagfim::rng::Rng;
use diagfim::{Family, MlpNetwork, NaturalParamHead};
use rand::seq::SliceRandom;

use crate::data::Dataset;
use crate::error::HarnessError;

/// `F(h) − t·h`, plus `½‖t‖²` for the Gaussian so the loss is `½‖t − h‖²`.
pub fn nll(head: &NaturalParamHead, h: &[f64], t: &[f64]) -> Result<f64, HarnessError> {
    let f = head.log_partition(h)?;
    let th: f64 = t.iter().zip(h).map(|(a, b)| a * b).sum();
    let base = match head.family() {
        Family::IsotropicGaussian => 0.5 * t.iter().map(|v| v * v).sum::<f64>(),
        Family::Categorical => 0.0,
    };
    Ok(f - th + base)
}

pub fn mean_loss(net: &MlpNetwork, head: &NaturalParamHead, data: &Dataset) -> Result<f64, HarnessError> {
    if data.is_empty() {
        return Err(HarnessError::Config("training set is empty".into()));
    }
    let mut total = 0.0;
    for (x, t) in data.inputs.iter().zip(&data.targets) {
        total += nll(head, &net.forward(x)?, t)?;
    }
    Ok(total / data.len() as f64)
}

/// One shuffled pass of minibatch SGD. Returns the updated network and the
/// mean loss over the examples visited, each evaluated before its step.
pub fn train_epoch(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    data: &Dataset,
    lr: f64,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<(MlpNetwork, f64), HarnessError> {
    if data.is_empty() {
        return Err(HarnessError::Config("training set is empty".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(rng);
    let mut theta = net.theta().to_vec();
    let mut current = net.clone();
    let mut loss_sum = 0.0;
    for batch in order.chunks(batch_size.max(1)) {
        let mut grad = vec![0.0; theta.len()];
        for &k in batch {
            let (x, t) = (&data.inputs[k], &data.targets[k]);
            let h = current.forward(x)?;
            loss_sum += nll(head, &h, t)?;
            // ∂/∂h of the NLL is η(h) − t.
            let eta = head.mean(&h)?;
            let upstream: Vec<f64> = eta.iter().zip(t).map(|(e, v)| e - v).collect();
            for (g, v) in grad.iter_mut().zip(current.vjp(x, &upstream)?) {
                *g += v;
            }
        }
        let scale = lr / batch.len() as f64;
        for (p, g) in theta.iter_mut().zip(&grad) {
            *p -= scale * g;
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Numerical("parameters diverged during training".into()));
        }
        current = current.with_theta(theta.clone())?;
    }
    let mean = loss_sum / data.len() as f64;
    if !mean.is_finite() {
        return Err(HarnessError::Numerical("training loss is not finite".into()));
    }
    Ok((current, mean))
}
