//! Exponential-family output heads `p(y | h) = π(y) exp(t(y)ᵀh − F(h))`.
//!
//! Two families are supported:
//!
//! * isotropic unit-variance Gaussian, `t(y) = y`, `F(h) = ½‖h‖²`;
//! * categorical over `C` classes, `t(y)` one-hot, `F(h) = log Σ exp(h)`.
//!
//! The cumulants of `t(y)` are the derivatives of `F`: the mean `η`, the
//! covariance `I(h)` and (for the variance of the score estimator) the
//! fourth central moment tensor `K`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg::Matrix;
use crate::rng::{rng_from_seed, Rng};
use crate::tensor::Tensor4;

/// Categorical fourth moments are built by outcome enumeration in `O(C⁵)`.
pub const MAX_CATEGORICAL_CLASSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    IsotropicGaussian,
    Categorical,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::IsotropicGaussian => "isotropic gaussian",
            Family::Categorical => "categorical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NaturalParamHead {
    family: Family,
    dim_t: usize,
}

/// Mean, covariance and fourth central moment of `t(y)` at a fixed `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub eta: Vec<f64>,
    pub fisher_h: Matrix,
    pub k4: Tensor4,
}

impl MomentSet {
    /// `M = K − I ⊗ I`, the kernel of the score estimator's variance.
    pub fn variance_kernel(&self) -> Tensor4 {
        let ii = Tensor4::outer_product(&self.fisher_h, &self.fisher_h).expect("square fisher_h");
        self.k4.sub(&ii).expect("matching dims")
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }
}

impl NaturalParamHead {
    pub fn new(family: Family, dim_t: usize) -> Result<Self> {
        if dim_t == 0 {
            return Err(Error::InvalidArgument("dim_t must be at least 1".into()));
        }
        if family == Family::Categorical && dim_t > MAX_CATEGORICAL_CLASSES {
            return Err(Error::TooLarge {
                what: "categorical class count",
                got: dim_t,
                limit: MAX_CATEGORICAL_CLASSES,
            });
        }
        Ok(Self { family, dim_t })
    }

    pub fn gaussian(dim_t: usize) -> Result<Self> {
        Self::new(Family::IsotropicGaussian, dim_t)
    }

    pub fn categorical(classes: usize) -> Result<Self> {
        Self::new(Family::Categorical, classes)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim_t(&self) -> usize {
        self.dim_t
    }

    fn check(&self, h: &[f64]) -> Result<()> {
        ensure_len(h, self.dim_t, "natural parameter")?;
        ensure_finite(h, "natural parameter")
    }

    pub fn log_partition(&self, h: &[f64]) -> Result<f64> {
        self.check(h)?;
        Ok(match self.family {
            Family::IsotropicGaussian => 0.5 * h.iter().map(|v| v * v).sum::<f64>(),
            Family::Categorical => log_sum_exp(h),
        })
    }

    /// Mean parameters `η = ∇F(h)`.
    pub fn mean(&self, h: &[f64]) -> Result<Vec<f64>> {
        self.check(h)?;
        Ok(match self.family {
            Family::IsotropicGaussian => h.to_vec(),
            Family::Categorical => softmax(h),
        })
    }

    /// Contractions of categorical moments are blind to shifts of `v` along
    /// the all-ones direction; this returns the shift with `η·v = 0`, which
    /// keeps the terms of those contractions at the scale of their sum.
    /// Identity for the Gaussian.
    pub fn center_direction(&self, eta: &[f64], v: &[f64]) -> Vec<f64> {
        match self.family {
            Family::IsotropicGaussian => v.to_vec(),
            Family::Categorical => {
                let m: f64 = eta.iter().zip(v).map(|(e, x)| e * x).sum();
                v.iter().map(|x| x - m).collect()
            }
        }
    }

    /// Mean and variance of `(g·(t − η))²` for `t` drawn from the head with
    /// mean `η`, i.e. `gᵀIg` and `K·g⁴ − (gᵀIg)²`, evaluated in central form.
    pub fn squared_score_moments(&self, eta: &[f64], g: &[f64]) -> (f64, f64) {
        match self.family {
            Family::IsotropicGaussian => {
                let s: f64 = g.iter().map(|v| v * v).sum();
                (s, 2.0 * s * s)
            }
            Family::Categorical => {
                let c = self.center_direction(eta, g);
                let mean: f64 = eta.iter().zip(&c).map(|(p, v)| p * v * v).sum();
                let var = eta.iter().zip(&c).map(|(p, v)| p * (v * v - mean).powi(2)).sum();
                (mean, var)
            }
        }
    }

    pub fn moments(&self, h: &[f64]) -> Result<MomentSet> {
        self.check(h)?;
        let t = self.dim_t;
        Ok(match self.family {
            Family::IsotropicGaussian => {
                let fisher_h = Matrix::identity(t);
                let k4 = Tensor4::from_fn(t, |a, b, c, d| {
                    let k = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
                    k(a, b) * k(c, d) + k(a, c) * k(b, d) + k(a, d) * k(b, c)
                });
                MomentSet {
                    eta: h.to_vec(),
                    fisher_h,
                    k4,
                }
            }
            Family::Categorical => {
                let sigma = softmax(h);
                let fisher_h = Matrix::from_fn(t, t, |a, b| {
                    let diag = if a == b { sigma[a] } else { 0.0 };
                    diag - sigma[a] * sigma[b]
                });
                // K_abcd = Σ_y σ_y v_a v_b v_c v_d with v = e_y − σ.
                let mut k4 = Tensor4::zeros(t);
                let mut v = vec![0.0; t];
                for (y, &p) in sigma.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for (i, vi) in v.iter_mut().enumerate() {
                        *vi = if i == y { 1.0 } else { 0.0 } - sigma[i];
                    }
                    for a in 0..t {
                        for b in a..t {
                            for c in b..t {
                                for d in c..t {
                                    let w = p * v[a] * v[b] * v[c] * v[d];
                                    k4.set(a, b, c, d, k4.get(a, b, c, d) + w);
                                }
                            }
                        }
                    }
                }
                fill_symmetric(&mut k4);
                MomentSet {
                    eta: sigma,
                    fisher_h,
                    k4,
                }
            }
        })
    }

    /// Draws `n` sufficient-statistic vectors `t(y)` with a fresh seeded stream.
    pub fn sample(&self, h: &[f64], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        self.sample_with(h, n, &mut rng)
    }

    pub fn sample_with(&self, h: &[f64], n: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        self.check(h)?;
        Ok(match self.family {
            Family::IsotropicGaussian => (0..n)
                .map(|_| {
                    h.iter()
                        .map(|m| m + rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect(),
            Family::Categorical => {
                let sigma = softmax(h);
                (0..n)
                    .map(|_| one_hot(sample_index(&sigma, rng), self.dim_t))
                    .collect()
            }
        })
    }
}

// Only the a ≤ b ≤ c ≤ d wedge is accumulated; copy it to every permutation.
fn fill_symmetric(k: &mut Tensor4) {
    let t = k.dim();
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                for d in 0..t {
                    let mut s = [a, b, c, d];
                    s.sort_unstable();
                    let v = k.get(s[0], s[1], s[2], s[3]);
                    k.set(a, b, c, d, v);
                }
            }
        }
    }
}

pub fn log_sum_exp(h: &[f64]) -> f64 {
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + h.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn softmax(h: &[f64]) -> Vec<f64> {
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = h.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

pub fn one_hot(index: usize, dim: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[index] = 1.0;
    v
}

/// Inverse-CDF draw from a probability vector.
pub(crate) fn sample_index(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the total just below 1; fall back to the last class with mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}
