//! The two diagonal FIM estimators, their exact conditional means and
//! variances, the joint (input-averaged) variance decomposition, and the
//! empirical Fisher.
//!
//! With `g = ∂_i h(x)` and `d = ∂²_i h(x)` the single-sample integrands are
//!
//! * estimator one: `(g · (η − t(y)))²`
//! * estimator two: `(η − t(y)) · d + gᵀ I(h) g`
//!
//! Both have mean `gᵀ I g`; their variances are `(gᵀ)⁴ (K − I⊗I) / N` and
//! `dᵀ I d / N` respectively.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::expfam::{Family, MomentSet, NaturalParamHead};
use crate::linalg::{dot, Matrix};
use crate::network::{DerivativeBundle, MlpNetwork};
use crate::rng::{rng_from_seed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    One,
    Two,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Conditional(Vec<f64>),
    Joint { points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagFimSample {
    pub estimator: EstimatorKind,
    pub values: Vec<f64>,
    pub n_samples: usize,
    pub input_mode: InputMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactConditionalReport {
    pub fim_diag: Vec<f64>,
    pub var1: Vec<f64>,
    pub var2: Vec<f64>,
    pub n_samples: usize,
}

/// Derivatives and head moments at one input, shared by every estimator.
#[derive(Debug, Clone)]
pub struct ConditionalContext {
    pub head: NaturalParamHead,
    pub bundle: DerivativeBundle,
    pub moments: MomentSet,
}

impl ConditionalContext {
    pub fn new(net: &MlpNetwork, head: &NaturalParamHead, x: &[f64]) -> Result<Self> {
        check_head(net, head)?;
        let bundle = net.derivatives(x)?;
        ensure_finite(&bundle.h, "network output")?;
        let moments = head.moments(&bundle.h)?;
        Ok(Self {
            head: *head,
            bundle,
            moments,
        })
    }

    pub fn num_params(&self) -> usize {
        self.bundle.jac.rows()
    }

    /// Draws `n` statistics `t(y_k)` from `p(y | x)`.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        self.head.sample_with(&self.bundle.h, n, rng)
    }

    /// Estimator one averaged over the given statistics.
    pub fn estimate_one(&self, samples: &[Vec<f64>]) -> Vec<f64> {
        let eta = &self.moments.eta;
        let residuals: Vec<Vec<f64>> = samples
            .iter()
            .map(|t| eta.iter().zip(t).map(|(e, v)| e - v).collect())
            .collect();
        let n = samples.len() as f64;
        (0..self.num_params())
            .map(|i| {
                let g = self.bundle.jac.row(i);
                residuals.iter().map(|r| dot(g, r).powi(2)).sum::<f64>() / n
            })
            .collect()
    }

    /// Estimator two averaged over the given statistics.
    pub fn estimate_two(&self, samples: &[Vec<f64>]) -> Vec<f64> {
        let eta = &self.moments.eta;
        let n = samples.len() as f64;
        let mean_residual: Vec<f64> = (0..eta.len())
            .map(|a| samples.iter().map(|t| eta[a] - t[a]).sum::<f64>() / n)
            .collect();
        (0..self.num_params())
            .map(|i| {
                let g = self.bundle.jac.row(i);
                let d = self.bundle.dhess.row(i);
                dot(&mean_residual, d) + self.head.squared_score_moments(&self.moments.eta, g).0
            })
            .collect()
    }

    fn centered(&self, v: &[f64]) -> Vec<f64> {
        self.head.center_direction(&self.moments.eta, v)
    }

    pub fn exact(&self, n: usize) -> Result<ExactConditionalReport> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        let inv_n = 1.0 / n as f64;
        let fisher = &self.moments.fisher_h;
        let p = self.num_params();
        let mut fim_diag = Vec::with_capacity(p);
        let mut var1 = Vec::with_capacity(p);
        let mut var2 = Vec::with_capacity(p);
        for i in 0..p {
            let (fim, v1) = self.head.squared_score_moments(&self.moments.eta, self.bundle.jac.row(i));
            fim_diag.push(fim);
            var1.push(inv_n * v1);
            var2.push(inv_n * fisher.quadratic_form(&self.centered(self.bundle.dhess.row(i))));
        }
        Ok(ExactConditionalReport {
            fim_diag,
            var1,
            var2,
            n_samples: n,
        })
    }
}

fn check_head(net: &MlpNetwork, head: &NaturalParamHead) -> Result<()> {
    if net.output_dim() != head.dim_t() {
        return Err(Error::DimensionMismatch {
            what: "network output vs head dimension",
            expected: head.dim_t(),
            got: net.output_dim(),
        });
    }
    Ok(())
}

pub fn estimate_one_conditional(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<DiagFimSample> {
    let ctx = ConditionalContext::new(net, head, x)?;
    let samples = ctx.sample(n, &mut rng_from_seed(seed))?;
    Ok(DiagFimSample {
        estimator: EstimatorKind::One,
        values: ctx.estimate_one(&samples),
        n_samples: n,
        input_mode: InputMode::Conditional(x.to_vec()),
    })
}

pub fn estimate_two_conditional(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<DiagFimSample> {
    let ctx = ConditionalContext::new(net, head, x)?;
    let samples = ctx.sample(n, &mut rng_from_seed(seed))?;
    Ok(DiagFimSample {
        estimator: EstimatorKind::Two,
        values: ctx.estimate_two(&samples),
        n_samples: n,
        input_mode: InputMode::Conditional(x.to_vec()),
    })
}

pub fn exact_conditional(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
) -> Result<ExactConditionalReport> {
    ConditionalContext::new(net, head, x)?.exact(n)
}

/// Per-parameter joint variances under `q(x)` uniform over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct JointVariance {
    /// `Var_q(I(θ_i|x)) / N`.
    pub first_term: Vec<f64>,
    pub mean_var1: Vec<f64>,
    pub mean_var2: Vec<f64>,
    pub var1: Vec<f64>,
    pub var2: Vec<f64>,
    pub n_y: usize,
}

pub fn joint_variance(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    dataset: &[Vec<f64>],
    n_y: usize,
) -> Result<JointVariance> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let reports = dataset
        .iter()
        .map(|x| exact_conditional(net, head, x, n_y))
        .collect::<Result<Vec<_>>>()?;
    let m = reports.len() as f64;
    let p = net.num_params();
    let inv_n = 1.0 / n_y as f64;
    let mut out = JointVariance {
        first_term: vec![0.0; p],
        mean_var1: vec![0.0; p],
        mean_var2: vec![0.0; p],
        var1: vec![0.0; p],
        var2: vec![0.0; p],
        n_y,
    };
    for i in 0..p {
        let mean_fim = reports.iter().map(|r| r.fim_diag[i]).sum::<f64>() / m;
        let var_fim = reports
            .iter()
            .map(|r| (r.fim_diag[i] - mean_fim).powi(2))
            .sum::<f64>()
            / m;
        out.first_term[i] = inv_n * var_fim;
        out.mean_var1[i] = reports.iter().map(|r| r.var1[i]).sum::<f64>() / m;
        out.mean_var2[i] = reports.iter().map(|r| r.var2[i]).sum::<f64>() / m;
        out.var1[i] = out.first_term[i] + out.mean_var1[i];
        out.var2[i] = out.first_term[i] + out.mean_var2[i];
    }
    Ok(out)
}

/// `(1/N) Σ_k (∂_i h(x_k) · (t(ŷ_k) − η(x_k)))²` over labelled pairs `(x_k, t(ŷ_k))`.
pub fn empirical_fisher_diag(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    labeled: &[(Vec<f64>, Vec<f64>)],
) -> Result<Vec<f64>> {
    check_head(net, head)?;
    if labeled.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let p = net.num_params();
    let mut acc = vec![0.0; p];
    for (x, t_hat) in labeled {
        ensure_len(t_hat, head.dim_t(), "label statistic")?;
        ensure_finite(t_hat, "label statistic")?;
        let bundle = net.derivatives(x)?;
        let eta = head.mean(&bundle.h)?;
        let r: Vec<f64> = t_hat.iter().zip(&eta).map(|(t, e)| t - e).collect();
        for (i, a) in acc.iter_mut().enumerate() {
            *a += dot(bundle.jac.row(i), &r).powi(2);
        }
    }
    let n = labeled.len() as f64;
    Ok(acc.into_iter().map(|v| v / n).collect())
}

/// Second central moments of `t` about the model mean `η` when `t` is drawn
/// from a data distribution `q` with mean `η̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceGap {
    /// `E_q[(t − η)(t − η)ᵀ]`.
    pub i_data: Matrix,
    /// `Cov_q(t)`.
    pub cov_q: Matrix,
    /// `(η − η̂)(η − η̂)ᵀ`.
    pub delta_h: Matrix,
}

/// `q` is taken from the head's own family with mean `η̂`: a categorical
/// distribution `η̂` on the simplex, or a unit-variance Gaussian centred at
/// `η̂`. `i_data` is computed directly (by outcome enumeration for
/// categorical) and the identity `Cov_q = I_data − ΔH` is checked.
pub fn empfim_covariance_gap(
    head: &NaturalParamHead,
    h: &[f64],
    eta_hat: &[f64],
) -> Result<CovarianceGap> {
    let eta = head.mean(h)?;
    ensure_len(eta_hat, head.dim_t(), "data mean")?;
    ensure_finite(eta_hat, "data mean")?;
    let t = head.dim_t();
    let diff: Vec<f64> = eta.iter().zip(eta_hat).map(|(a, b)| a - b).collect();
    let delta_h = Matrix::outer(&diff);
    let (i_data, cov_q) = match head.family() {
        Family::Categorical => {
            check_simplex(eta_hat)?;
            let mut i_data = Matrix::zeros(t, t);
            for (y, &q) in eta_hat.iter().enumerate() {
                let v: Vec<f64> = (0..t)
                    .map(|a| if a == y { 1.0 } else { 0.0 } - eta[a])
                    .collect();
                for a in 0..t {
                    for b in 0..t {
                        i_data[(a, b)] += q * v[a] * v[b];
                    }
                }
            }
            let cov_q = Matrix::from_fn(t, t, |a, b| {
                let diag = if a == b { eta_hat[a] } else { 0.0 };
                diag - eta_hat[a] * eta_hat[b]
            });
            (i_data, cov_q)
        }
        Family::IsotropicGaussian => {
            // t − η = (t − η̂) + (η̂ − η) with t − η̂ ~ N(0, I).
            let cov_q = Matrix::identity(t);
            let i_data = Matrix::from_fn(t, t, |a, b| {
                cov_q[(a, b)] + (eta_hat[a] - eta[a]) * (eta_hat[b] - eta[b])
            });
            (i_data, cov_q)
        }
    };
    let residual = i_data.sub(&delta_h)?.sub(&cov_q)?.max_abs();
    let scale = 1.0_f64.max(i_data.max_abs());
    if residual > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!(
            "covariance identity violated by {residual:e}"
        )));
    }
    Ok(CovarianceGap {
        i_data,
        cov_q,
        delta_h,
    })
}

pub(crate) fn check_simplex(p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| !(-1e-12..=1.0 + 1e-12).contains(&v)) {
        return Err(Error::NotSimplex("entries must lie in [0, 1]".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotSimplex(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Mean and variance of the empirical Fisher at a single input when `N`
/// labels are drawn from `q` (same family as the head, mean `η̂`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalFisherMoments {
    /// `gᵀ I_data g`.
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub n_samples: usize,
}

pub fn empirical_fisher_conditional(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    eta_hat: &[f64],
    n: usize,
) -> Result<EmpiricalFisherMoments> {
    check_head(net, head)?;
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let bundle = net.derivatives(x)?;
    let gap = empfim_covariance_gap(head, &bundle.h, eta_hat)?;
    let eta = head.mean(&bundle.h)?;
    let p = net.num_params();
    let mut mean = Vec::with_capacity(p);
    let mut variance = Vec::with_capacity(p);
    for i in 0..p {
        let g = bundle.jac.row(i);
        let m2 = gap.i_data.quadratic_form(g);
        // Fourth moment of s = g · (t − η) under q.
        let m4 = match head.family() {
            Family::Categorical => eta_hat
                .iter()
                .enumerate()
                .map(|(y, &q)| {
                    let s: f64 = g
                        .iter()
                        .enumerate()
                        .map(|(a, ga)| ga * (if a == y { 1.0 } else { 0.0 } - eta[a]))
                        .sum();
                    q * s.powi(4)
                })
                .sum::<f64>(),
            Family::IsotropicGaussian => {
                // s ~ N(μ, σ²) with μ = g·(η̂ − η), σ² = ‖g‖².
                let mu: f64 = g
                    .iter()
                    .zip(eta_hat.iter().zip(&eta))
                    .map(|(ga, (e_hat, e))| ga * (e_hat - e))
                    .sum();
                let s2 = dot(g, g);
                mu.powi(4) + 6.0 * mu * mu * s2 + 3.0 * s2 * s2
            }
        };
        mean.push(m2);
        variance.push((m4 - m2 * m2) / n as f64);
    }
    Ok(EmpiricalFisherMoments {
        mean,
        variance,
        n_samples: n,
    })
}
