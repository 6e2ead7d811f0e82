//! Brute-force references for tests: finite-difference derivatives, exact
//! outcome enumeration for categorical heads, and Monte Carlo summaries.
//!
//! Nothing here reuses the analytic derivative recursion or the moment
//! tensors it is meant to check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{empirical_fisher_diag, ConditionalContext, ExactConditionalReport};
use crate::expfam::{Family, NaturalParamHead};
use crate::linalg::Matrix;
use crate::network::MlpNetwork;
use crate::rng::{derive_seed, rng_from_seed};

fn check_step(step: f64) -> Result<()> {
    if !(1e-6..=1e-3).contains(&step) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {step} outside [1e-6, 1e-3]"
        )));
    }
    Ok(())
}

fn shifted(net: &MlpNetwork, i: usize, delta: f64) -> Result<MlpNetwork> {
    let mut theta = net.theta().to_vec();
    theta[i] += delta;
    net.with_theta(theta)
}

/// Central differences `(h(θ + s e_i) − h(θ − s e_i)) / 2s`, one row per parameter.
pub fn fd_jacobian(net: &MlpNetwork, x: &[f64], step: f64) -> Result<Matrix> {
    check_step(step)?;
    let p = net.num_params();
    let mut out = Matrix::zeros(p, net.output_dim());
    for i in 0..p {
        let plus = shifted(net, i, step)?.forward(x)?;
        let minus = shifted(net, i, -step)?.forward(x)?;
        for (a, dst) in out.row_mut(i).iter_mut().enumerate() {
            *dst = (plus[a] - minus[a]) / (2.0 * step);
        }
    }
    Ok(out)
}

/// `(h(θ + s e_i) − 2h(θ) + h(θ − s e_i)) / s²`, one row per parameter.
pub fn fd_diag_hessian(net: &MlpNetwork, x: &[f64], step: f64) -> Result<Matrix> {
    check_step(step)?;
    let p = net.num_params();
    let center = net.forward(x)?;
    let mut out = Matrix::zeros(p, net.output_dim());
    for i in 0..p {
        let plus = shifted(net, i, step)?.forward(x)?;
        let minus = shifted(net, i, -step)?.forward(x)?;
        for (a, dst) in out.row_mut(i).iter_mut().enumerate() {
            *dst = (plus[a] - 2.0 * center[a] + minus[a]) / (step * step);
        }
    }
    Ok(out)
}

/// Exact mean and `1/N`-scaled variance of both single-sample integrands by
/// summing over every class.
pub fn enumerate_categorical_statistics(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
) -> Result<ExactConditionalReport> {
    if head.family() != Family::Categorical {
        return Err(Error::WrongFamily {
            expected: Family::Categorical.name(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let bundle = net.derivatives(x)?;
    let c = head.dim_t();
    if bundle.h.len() != c {
        return Err(Error::DimensionMismatch {
            what: "network output vs class count",
            expected: c,
            got: bundle.h.len(),
        });
    }
    // Plain softmax, independent of the head's stabilized routine.
    let shift = bundle.h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = bundle.h.iter().map(|v| (v - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    let sigma: Vec<f64> = w.iter().map(|v| v / z).collect();

    let p = net.num_params();
    let inv_n = 1.0 / n as f64;
    let mut report = ExactConditionalReport {
        fim_diag: Vec::with_capacity(p),
        var1: Vec::with_capacity(p),
        var2: Vec::with_capacity(p),
        n_samples: n,
    };
    for i in 0..p {
        let g = bundle.jac.row(i);
        let d = bundle.dhess.row(i);
        let m1: f64 = (0..c).map(|y| sigma[y] * g[y]).sum();
        let m2: f64 = (0..c).map(|y| sigma[y] * g[y] * g[y]).sum();
        let dd: f64 = (0..c).map(|y| sigma[y] * d[y]).sum();
        let quad = m2 - m1 * m1;
        // Outcome y: estimator one gives (g_y − m1)², estimator two dd − d_y + quad.
        let one: Vec<f64> = (0..c).map(|y| (g[y] - m1).powi(2)).collect();
        let two: Vec<f64> = (0..c).map(|y| dd - d[y] + quad).collect();
        let (mean1, var1) = weighted_moments(&sigma, &one);
        let (_, var2) = weighted_moments(&sigma, &two);
        report.fim_diag.push(mean1);
        report.var1.push(inv_n * var1);
        report.var2.push(inv_n * var2);
    }
    Ok(report)
}

fn weighted_moments(weights: &[f64], values: &[f64]) -> (f64, f64) {
    let mean: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum();
    let var = weights
        .iter()
        .zip(values)
        .map(|(w, v)| w * (v - mean).powi(2))
        .sum();
    (mean, var)
}

/// Per-coordinate mean, unbiased variance and standard error over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub std_error_mean: Vec<f64>,
    pub runs: usize,
    pub seed: u64,
}

impl McSummary {
    /// Summarizes `runs[r][i]` in run order.
    pub fn from_runs(runs: &[Vec<f64>], seed: u64) -> Result<Self> {
        if runs.len() < 2 {
            return Err(Error::InvalidArgument("at least two runs are required".into()));
        }
        let r = runs.len() as f64;
        let dim = runs[0].len();
        let mut mean = vec![0.0; dim];
        for run in runs {
            for (m, v) in mean.iter_mut().zip(run) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= r);
        let mut variance = vec![0.0; dim];
        for run in runs {
            for ((s, v), m) in variance.iter_mut().zip(run).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        variance.iter_mut().for_each(|s| *s /= r - 1.0);
        let std_error_mean = variance.iter().map(|v| (v / r).sqrt()).collect();
        Ok(Self {
            mean,
            variance,
            std_error_mean,
            runs: runs.len(),
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimatorStats {
    pub one: McSummary,
    pub two: McSummary,
}

/// Repeats both conditional estimators with `n_per_run` fresh samples per run.
/// Run `r` draws from stream `derive_seed(seed, r)`; both estimators see the
/// same samples.
pub fn mc_estimator_stats(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n_per_run: usize,
    runs: usize,
    seed: u64,
) -> Result<McEstimatorStats> {
    if runs < 2 {
        return Err(Error::InvalidArgument("at least two runs are required".into()));
    }
    let ctx = ConditionalContext::new(net, head, x)?;
    let per_run: Vec<(Vec<f64>, Vec<f64>)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let samples = ctx.sample(n_per_run, &mut rng)?;
            Ok((ctx.estimate_one(&samples), ctx.estimate_two(&samples)))
        })
        .collect::<Result<_>>()?;
    let (ones, twos): (Vec<_>, Vec<_>) = per_run.into_iter().unzip();
    Ok(McEstimatorStats {
        one: McSummary::from_runs(&ones, seed)?,
        two: McSummary::from_runs(&twos, seed)?,
    })
}

/// Joint estimators: each of the `n_y` pairs draws `x` uniformly from the
/// dataset and then `t(y)` from `p(y | x)`. Returns the summary over `reps`
/// repetitions for estimator one and two.
pub fn mc_joint_estimator_stats(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    dataset: &[Vec<f64>],
    n_y: usize,
    reps: usize,
    seed: u64,
) -> Result<McEstimatorStats> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n_y == 0 || reps < 2 {
        return Err(Error::InvalidArgument("need n_y ≥ 1 and at least two repetitions".into()));
    }
    let contexts = dataset
        .iter()
        .map(|x| ConditionalContext::new(net, head, x))
        .collect::<Result<Vec<_>>>()?;
    let p = net.num_params();
    let per_rep: Vec<(Vec<f64>, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            use rand::Rng as _;
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let mut one = vec![0.0; p];
            let mut two = vec![0.0; p];
            for _ in 0..n_y {
                let ctx = &contexts[rng.random_range(0..contexts.len())];
                let sample = ctx.sample(1, &mut rng)?;
                for (acc, v) in one.iter_mut().zip(ctx.estimate_one(&sample)) {
                    *acc += v;
                }
                for (acc, v) in two.iter_mut().zip(ctx.estimate_two(&sample)) {
                    *acc += v;
                }
            }
            let scale = 1.0 / n_y as f64;
            one.iter_mut().for_each(|v| *v *= scale);
            two.iter_mut().for_each(|v| *v *= scale);
            Ok((one, two))
        })
        .collect::<Result<_>>()?;
    let (ones, twos): (Vec<_>, Vec<_>) = per_rep.into_iter().unzip();
    Ok(McEstimatorStats {
        one: McSummary::from_runs(&ones, seed)?,
        two: McSummary::from_runs(&twos, seed)?,
    })
}

/// Empirical Fisher over `dataset` with every label redrawn from the model
/// `p(y | x)`, repeated `draws` times.
pub fn mc_empirical_fisher_model_labels(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    dataset: &[Vec<f64>],
    draws: usize,
    seed: u64,
) -> Result<McSummary> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let outputs = dataset
        .iter()
        .map(|x| net.forward(x))
        .collect::<Result<Vec<_>>>()?;
    let runs: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let labeled = dataset
                .iter()
                .zip(&outputs)
                .map(|(x, h)| Ok((x.clone(), head.sample_with(h, 1, &mut rng)?.remove(0))))
                .collect::<Result<Vec<_>>>()?;
            empirical_fisher_diag(net, head, &labeled)
        })
        .collect::<Result<_>>()?;
    McSummary::from_runs(&runs, seed)
}
