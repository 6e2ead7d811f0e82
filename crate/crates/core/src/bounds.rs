//! Eigenvalue-based lower and upper bounds for the diagonal FIM, the two
//! estimator variances, their traces, and the input-randomness term of the
//! joint variance.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{check_simplex, ConditionalContext, ExactConditionalReport};
use crate::expfam::{Family, MomentSet, NaturalParamHead};
use crate::linalg::{dot, gram_spectrum, norm_sq, solve, sym_eigenvalues, Matrix};
use crate::network::MlpNetwork;
use crate::rng::{derive_seed, rng_from_seed};
use crate::tensor::Tensor4;

pub const MAX_TENSOR_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    FimDiag,
    Var1,
    Var2,
    TraceFim,
    TraceVar1,
    TraceVar2,
    JointFirstTerm,
    /// Pair on the Z-eigenvalue extremes of `K − I⊗I`.
    VarianceKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundKind,
}

impl BoundPair {
    pub fn new(kind: BoundKind, lower: f64, upper: f64) -> Self {
        Self { lower, upper, kind }
    }

    /// `lower − tol·s ≤ value ≤ upper + tol·s` with `s = max(1, |value|, |upper|)`.
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        let scale = 1.0_f64.max(value.abs()).max(self.upper.abs());
        value >= self.lower - tol * scale && value <= self.upper + tol * scale
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.kind, self.lower * factor, self.upper * factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZEigResult {
    pub value: f64,
    pub unit_vector: Vec<f64>,
    pub restarts_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZEigOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ZEigOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            tol: 1e-10,
            max_iter: 5000,
            seed: 0x5EED_2E16,
        }
    }
}

/// Stationarity threshold `‖A u³ − λ u‖` for a restart to count as converged.
const RESIDUAL_TOL: f64 = 1e-9;
const NEWTON_STEPS: usize = 200;

pub use crate::linalg::sym_eig_extremes;

/// `(λ̃_min, λ̃_max)` of the quartic form `u ↦ T u⁴` on the unit sphere.
pub fn z_eig_extremes(t: &Tensor4, restarts: usize, tol: f64) -> Result<(ZEigResult, ZEigResult)> {
    z_eig_extremes_with(
        t,
        &ZEigOptions {
            restarts,
            tol,
            ..ZEigOptions::default()
        },
    )
}

pub fn z_eig_extremes_with(t: &Tensor4, opts: &ZEigOptions) -> Result<(ZEigResult, ZEigResult)> {
    let n = t.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("tensor dimension must be positive".into()));
    }
    if n > MAX_TENSOR_DIM {
        return Err(Error::TooLarge {
            what: "tensor dimension",
            got: n,
            limit: MAX_TENSOR_DIM,
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("tensor entries"));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let sym = if t.is_supersymmetric(0.0) {
        t.clone()
    } else {
        t.symmetrized()
    };
    let max = best_of(&sym, opts, derive_seed(opts.seed, 0));
    let neg = sym.scaled(-1.0);
    let mut min = best_of(&neg, opts, derive_seed(opts.seed, 1));
    min.value = -min.value;
    Ok((min, max))
}

fn best_of(a: &Tensor4, opts: &ZEigOptions, seed: u64) -> ZEigResult {
    let scale = a.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let n = a.dim();
    if scale == 0.0 {
        let mut u = vec![0.0; n];
        u[0] = 1.0;
        return ZEigResult {
            value: 0.0,
            unit_vector: u,
            restarts_used: opts.restarts,
            converged: true,
        };
    }
    let runs: Vec<(f64, Vec<f64>, bool)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let x0: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            maximize_from(a, normalized(x0), opts, scale)
        })
        .collect();
    // Lowest restart index wins ties.
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.0 > runs[best].0 {
            best = r;
        }
    }
    let (value, unit_vector, converged) = runs.into_iter().nth(best).unwrap();
    ZEigResult {
        value,
        unit_vector,
        restarts_used: opts.restarts,
        converged,
    }
}

fn normalized(mut x: Vec<f64>) -> Vec<f64> {
    let norm = norm_sq(&x).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[0] = 1.0;
        return x;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    x
}

fn residual(a: &Tensor4, u: &[f64]) -> (f64, Vec<f64>, f64) {
    let g = a.contract3(u);
    let lambda = dot(&g, u);
    let r = g
        .iter()
        .zip(u)
        .map(|(gi, ui)| (gi - lambda * ui).powi(2))
        .sum::<f64>()
        .sqrt();
    (lambda, g, r)
}

/// Shifted power iteration `x ← normalize(A x³ + α x)`, with the shift chosen
/// each step so that `x ↦ A x⁴ + α ‖x‖⁴` is locally convex, followed by
/// Newton refinement on the sphere once the power steps stop gaining.
fn maximize_from(a: &Tensor4, mut x: Vec<f64>, opts: &ZEigOptions, scale: f64) -> (f64, Vec<f64>, bool) {
    let tau = 1e-6 * scale;
    let res_tol = RESIDUAL_TOL * scale;
    let (mut lambda, mut g, mut res) = residual(a, &x);
    for _ in 0..opts.max_iter {
        if res <= res_tol {
            return (lambda, x, true);
        }
        let (lmin, _) = sym_eig_extremes(&a.contract2(&x)).unwrap_or((-scale, scale));
        let alpha = (tau - 3.0 * lmin).max(0.0);
        let next = normalized(g.iter().zip(&x).map(|(gi, xi)| gi + alpha * xi).collect());
        let (l2, g2, r2) = residual(a, &next);
        let stalled = (l2 - lambda).abs() <= opts.tol * scale;
        x = next;
        lambda = l2;
        g = g2;
        res = r2;
        if stalled {
            break;
        }
    }
    newton_refine(a, x, lambda, res, res_tol)
}

/// Riemannian Newton steps for `A x⁴` on the unit sphere: solve
/// `[H x; xᵀ 0] [s; μ] = [λx − A x³; 0]` with `H = 3 A x² − λ I`, and keep a
/// step only if it does not lower the objective.
fn newton_refine(a: &Tensor4, mut x: Vec<f64>, mut lambda: f64, mut res: f64, res_tol: f64) -> (f64, Vec<f64>, bool) {
    let n = x.len();
    for _ in 0..NEWTON_STEPS {
        if res <= res_tol {
            break;
        }
        let h = a.contract2(&x);
        let g = a.contract3(&x);
        let mut k = Matrix::zeros(n + 1, n + 1);
        let mut rhs = vec![0.0; n + 1];
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] = 3.0 * h[(i, j)];
            }
            k[(i, i)] -= lambda;
            k[(i, n)] = x[i];
            k[(n, i)] = x[i];
            rhs[i] = lambda * x[i] - g[i];
        }
        let Some(sol) = solve(&k, &rhs) else { break };
        let cand = normalized(x.iter().zip(&sol).map(|(xi, si)| xi + si).collect());
        let (lc, _, rc) = residual(a, &cand);
        if lc < lambda - 1e-14 * a_scale(lambda) || rc >= res {
            break;
        }
        x = cand;
        lambda = lc;
        res = rc;
    }
    (lambda, x, res <= res_tol)
}

fn a_scale(v: f64) -> f64 {
    v.abs().max(f64::MIN_POSITIVE)
}

/// Spectral constants of the head at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadSpectrum {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub z_min_m: ZEigResult,
    pub z_max_m: ZEigResult,
}

impl HeadSpectrum {
    pub fn new(moments: &MomentSet) -> Result<Self> {
        let (lambda_min, lambda_max) = sym_eig_extremes(&moments.fisher_h)?;
        let (z_min_m, z_max_m) = z_eig_extremes_with(&moments.variance_kernel(), &ZEigOptions::default())?;
        Ok(Self {
            lambda_min,
            lambda_max,
            z_min_m,
            z_max_m,
        })
    }
}

/// Bounds for one parameter from its gradient row `g`, curvature row `d`,
/// the head spectrum and the sample count.
pub fn parameter_bounds(g: &[f64], d: &[f64], spec: &HeadSpectrum, n: usize) -> [BoundPair; 3] {
    let inv_n = 1.0 / n as f64;
    let g2 = norm_sq(g);
    let d2 = norm_sq(d);
    [
        BoundPair::new(BoundKind::FimDiag, g2 * spec.lambda_min, g2 * spec.lambda_max),
        BoundPair::new(
            BoundKind::Var1,
            inv_n * g2 * g2 * spec.z_min_m.value,
            inv_n * g2 * g2 * spec.z_max_m.value,
        ),
        BoundPair::new(BoundKind::Var2, inv_n * d2 * spec.lambda_min, inv_n * d2 * spec.lambda_max),
    ]
}

pub fn conditional_bounds(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
    i: usize,
) -> Result<(BoundPair, BoundPair, BoundPair)> {
    if i >= net.num_params() {
        return Err(Error::InvalidArgument(format!(
            "parameter index {i} out of range for {} parameters",
            net.num_params()
        )));
    }
    check_n(n)?;
    let ctx = ConditionalContext::new(net, head, x)?;
    let spec = HeadSpectrum::new(&ctx.moments)?;
    let [f, v1, v2] = parameter_bounds(ctx.bundle.jac.row(i), ctx.bundle.dhess.row(i), &spec, n);
    Ok((f, v1, v2))
}

/// Bounds for every parameter at one input, sharing the spectral work.
pub fn conditional_bounds_all(ctx: &ConditionalContext, n: usize) -> Result<Vec<[BoundPair; 3]>> {
    check_n(n)?;
    let spec = HeadSpectrum::new(&ctx.moments)?;
    Ok((0..ctx.num_params())
        .map(|i| parameter_bounds(ctx.bundle.jac.row(i), ctx.bundle.dhess.row(i), &spec, n))
        .collect())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    Ok(())
}

/// `[max{0, λ̃_min(K) − λ_max(I)²}, λ̃_max(K) − λ_min(I)²]`.
pub fn z_eig_relaxed_bounds(k4: &Tensor4, fisher_h: &Matrix) -> Result<BoundPair> {
    if fisher_h.rows() != k4.dim() || fisher_h.cols() != k4.dim() {
        return Err(Error::DimensionMismatch {
            what: "fisher matrix vs tensor",
            expected: k4.dim(),
            got: fisher_h.rows(),
        });
    }
    let (lmin, lmax) = sym_eig_extremes(fisher_h)?;
    let (kmin, kmax) = z_eig_extremes_with(k4, &ZEigOptions::default())?;
    Ok(BoundPair::new(
        BoundKind::VarianceKernel,
        (kmin.value - lmax * lmax).max(0.0),
        kmax.value - lmin * lmin,
    ))
}

/// Sup of `‖t(y) − η‖²` for heads with bounded statistics.
pub fn statistic_radius(head: &NaturalParamHead) -> Result<f64> {
    match head.family() {
        Family::Categorical => Ok(2.0),
        Family::IsotropicGaussian => Err(Error::UnboundedFamily(head.family().name())),
    }
}

/// `B · λ_max(I(h))`, an upper bound on `λ̃_max(K)`.
pub fn bounded_statistic_bound(head: &NaturalParamHead, h: &[f64]) -> Result<f64> {
    let b = statistic_radius(head)?;
    let m = head.moments(h)?;
    let (_, lmax) = sym_eig_extremes(&m.fisher_h)?;
    Ok(b * lmax)
}

/// `m(σ) = min(σ_max, 1 − ‖σ‖²)`, an upper bound on `λ_max(diag σ − σσᵀ)`.
pub fn classification_spectrum_bound(sigma: &[f64]) -> Result<f64> {
    if sigma.is_empty() {
        return Err(Error::NotSimplex("empty probability vector".into()));
    }
    check_simplex(sigma)?;
    let smax = sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(smax.min(1.0 - norm_sq(sigma)))
}

/// `2 m(σ)`, the corresponding bound on `λ̃_max(K)`.
pub fn classification_kurtosis_bound(sigma: &[f64]) -> Result<f64> {
    Ok(2.0 * classification_spectrum_bound(sigma)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceBounds {
    pub fim: BoundPair,
    pub var1: BoundPair,
    pub var2: BoundPair,
}

/// The two arguments of each min in the Frobenius trace bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusComponents {
    pub fim: [f64; 2],
    pub var1: [f64; 2],
    pub var2: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusTraceBounds {
    pub bounds: TraceBounds,
    pub components: FrobeniusComponents,
}

/// Upper bounds on `Σ_i I(θ_i|x)`, `Σ_i V₁`, `Σ_i V₂` from Frobenius norms:
///
/// * `‖J‖²_F · min{tr I, λ_max(I)}`
/// * `‖J‖⁴_F · min{Σ K_ttuu − ‖I‖²_F, λ̃_max(M)} / N`
/// * `‖D‖²_F · min{tr I, λ_max(I)} / N`
///
/// with `J`, `D` the `P×T` Jacobian and diagonal-Hessian matrices.
pub fn trace_variance_bounds_frobenius(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
) -> Result<FrobeniusTraceBounds> {
    check_n(n)?;
    let ctx = ConditionalContext::new(net, head, x)?;
    let spec = HeadSpectrum::new(&ctx.moments)?;
    Ok(frobenius_from(&ctx, &spec, n))
}

pub fn frobenius_from(ctx: &ConditionalContext, spec: &HeadSpectrum, n: usize) -> FrobeniusTraceBounds {
    let inv_n = 1.0 / n as f64;
    let fisher = &ctx.moments.fisher_h;
    let j2 = ctx.bundle.jac.frobenius_norm_sq();
    let d2 = ctx.bundle.dhess.frobenius_norm_sq();
    let tr_i = fisher.trace();
    let tr_m = ctx.moments.k4.pair_trace() - fisher.frobenius_norm_sq();
    let components = FrobeniusComponents {
        fim: [j2 * tr_i, j2 * spec.lambda_max],
        var1: [inv_n * j2 * j2 * tr_m, inv_n * j2 * j2 * spec.z_max_m.value],
        var2: [inv_n * d2 * tr_i, inv_n * d2 * spec.lambda_max],
    };
    let min = |c: [f64; 2]| c[0].min(c[1]);
    FrobeniusTraceBounds {
        bounds: TraceBounds {
            fim: BoundPair::new(BoundKind::TraceFim, 0.0, min(components.fim)),
            var1: BoundPair::new(BoundKind::TraceVar1, 0.0, min(components.var1)),
            var2: BoundPair::new(BoundKind::TraceVar2, 0.0, min(components.var2)),
        },
        components,
    }
}

/// Trace bounds from pairing spectra: for PSD `A` and symmetric `B` with
/// eigenvalues in descending order, `Σ α_t β_{n−t+1} ≤ tr(AB) ≤ Σ α_t β_t`.
///
/// Here `A` is `JᵀJ`, `VᵀV` (with `V` the `P×T²` matrix whose rows are
/// `vec(g_i g_iᵀ)`) or `DᵀD`, and `B` is `I`, the `T²×T²` reshape of
/// `K − I⊗I`, or `I`.
pub fn trace_variance_bounds_spectrum(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
) -> Result<TraceBounds> {
    check_n(n)?;
    let ctx = ConditionalContext::new(net, head, x)?;
    spectrum_from(&ctx, n)
}

pub fn spectrum_from(ctx: &ConditionalContext, n: usize) -> Result<TraceBounds> {
    let t = ctx.moments.dim();
    if t > MAX_TENSOR_DIM {
        return Err(Error::TooLarge {
            what: "output dimension for pair reshape",
            got: t,
            limit: MAX_TENSOR_DIM,
        });
    }
    let inv_n = 1.0 / n as f64;
    let fisher_spec = sym_eigenvalues(&ctx.moments.fisher_h)?;
    let m_bar = ctx.moments.variance_kernel().to_pair_matrix();
    let m_spec = sym_eigenvalues(&m_bar)?;

    let jac_spec = gram_spectrum(&ctx.bundle.jac)?;
    let dhes_spec = gram_spectrum(&ctx.bundle.dhess)?;
    let vjac = Matrix::from_fn(ctx.num_params(), t * t, |i, ab| {
        let g = ctx.bundle.jac.row(i);
        g[ab / t] * g[ab % t]
    });
    let vjac_spec = gram_spectrum(&vjac)?;

    let (fl, fu) = ruhe(&jac_spec, &fisher_spec);
    let (v1l, v1u) = ruhe(&vjac_spec, &m_spec);
    let (v2l, v2u) = ruhe(&dhes_spec, &fisher_spec);
    Ok(TraceBounds {
        fim: BoundPair::new(BoundKind::TraceFim, fl, fu),
        var1: BoundPair::new(BoundKind::TraceVar1, inv_n * v1l, inv_n * v1u),
        var2: BoundPair::new(BoundKind::TraceVar2, inv_n * v2l, inv_n * v2u),
    })
}

/// Both inputs sorted descending and of equal length.
fn ruhe(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    debug_assert_eq!(alpha.len(), beta.len());
    let upper = alpha.iter().zip(beta).map(|(a, b)| a * b).sum();
    let lower = alpha.iter().zip(beta.iter().rev()).map(|(a, b)| a * b).sum();
    (lower, upper)
}

/// Per-parameter `E_q[‖∂_i h‖⁴ λ_max(I)²]` with `q` uniform over the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct JointFirstTermBound {
    pub per_param: Vec<f64>,
    pub total: f64,
}

pub fn joint_first_term_bound(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    dataset: &[Vec<f64>],
) -> Result<JointFirstTermBound> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut per_param = vec![0.0; net.num_params()];
    for x in dataset {
        let ctx = ConditionalContext::new(net, head, x)?;
        let (_, lmax) = sym_eig_extremes(&ctx.moments.fisher_h)?;
        for (i, acc) in per_param.iter_mut().enumerate() {
            let g2 = norm_sq(ctx.bundle.jac.row(i));
            *acc += g2 * g2 * lmax * lmax;
        }
    }
    let m = dataset.len() as f64;
    per_param.iter_mut().for_each(|v| *v /= m);
    let total = per_param.iter().sum();
    Ok(JointFirstTermBound { per_param, total })
}

/// Exact quantities and bounds for every parameter at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagFimReport {
    pub exact: ExactConditionalReport,
    pub estimate_one: Vec<f64>,
    pub estimate_two: Vec<f64>,
    pub bounds: Vec<[BoundPair; 3]>,
}

impl DiagFimReport {
    /// Index of the first parameter whose exact value escapes a bound pair.
    pub fn first_violation(&self, tol: f64) -> Option<(usize, BoundKind)> {
        for (i, b) in self.bounds.iter().enumerate() {
            let values = [self.exact.fim_diag[i], self.exact.var1[i], self.exact.var2[i]];
            for (pair, v) in b.iter().zip(values) {
                if !pair.contains(v, tol) {
                    return Some((i, pair.kind));
                }
            }
        }
        None
    }
}

pub fn diag_fim_report(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<DiagFimReport> {
    let ctx = ConditionalContext::new(net, head, x)?;
    let exact = ctx.exact(n)?;
    let bounds = conditional_bounds_all(&ctx, n)?;
    let mut rng = rng_from_seed(seed);
    let samples = ctx.sample(n, &mut rng)?;
    Ok(DiagFimReport {
        exact,
        estimate_one: ctx.estimate_one(&samples),
        estimate_two: ctx.estimate_two(&samples),
        bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_constants() {
        let head = NaturalParamHead::gaussian(3).unwrap();
        let m = head.moments(&[0.1, 0.2, 0.3]).unwrap();
        let (kmin, kmax) = z_eig_extremes(&m.k4, 16, 1e-10).unwrap();
        assert_relative_eq!(kmax.value, 3.0, epsilon = 1e-9);
        // The quartic form of the Gaussian K is 3‖u‖⁴, constant on the sphere.
        assert_relative_eq!(kmin.value, 3.0, epsilon = 1e-9);
        let (mmin, mmax) = z_eig_extremes(&m.variance_kernel(), 16, 1e-10).unwrap();
        assert_relative_eq!(mmin.value, 2.0, epsilon = 1e-9);
        assert_relative_eq!(mmax.value, 2.0, epsilon = 1e-9);
        let relaxed = z_eig_relaxed_bounds(&m.k4, &m.fisher_h).unwrap();
        assert_relative_eq!(relaxed.lower, 2.0, epsilon = 1e-9);
        assert_relative_eq!(relaxed.upper, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn rank_one_tensor() {
        let u0 = normalized(vec![1.0, -2.0, 0.5, 0.3]);
        let t = Tensor4::rank_one(&u0);
        let (min, max) = z_eig_extremes(&t, 16, 1e-10).unwrap();
        assert_relative_eq!(max.value, 1.0, epsilon = 1e-9);
        assert!(min.value.abs() < 1e-9);
        let align = dot(&max.unit_vector, &u0).abs();
        assert_relative_eq!(align, 1.0, epsilon = 1e-6);
        assert!(max.converged);
    }

    #[test]
    fn z_eig_rejects_bad_input() {
        let t = Tensor4::from_fn(2, |_, _, _, _| f64::NAN);
        assert_eq!(z_eig_extremes(&t, 4, 1e-10).unwrap_err(), Error::NonFinite("tensor entries"));
        let big = Tensor4::zeros(33);
        assert!(matches!(z_eig_extremes(&big, 4, 1e-10), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn z_eig_reports_stationary_points() {
        let head = NaturalParamHead::categorical(4).unwrap();
        let m = head.moments(&[0.3, -0.5, 1.2, 0.0]).unwrap();
        let sym = m.variance_kernel().symmetrized();
        let (min, max) = z_eig_extremes(&m.variance_kernel(), 16, 1e-10).unwrap();
        for r in [&min, &max] {
            assert_relative_eq!(norm_sq(&r.unit_vector), 1.0, epsilon = 1e-10);
            assert_relative_eq!(sym.quartic_form(&r.unit_vector), r.value, epsilon = 1e-8);
            let (_, _, res) = residual(&sym, &r.unit_vector);
            assert!(res <= 1e-6, "residual {res}");
        }
        assert!(min.value <= max.value);
    }

    #[test]
    fn zero_tensor_is_trivial() {
        let (min, max) = z_eig_extremes(&Tensor4::zeros(3), 4, 1e-10).unwrap();
        assert_eq!((min.value, max.value), (0.0, 0.0));
    }

    #[test]
    fn saturated_relaxed_pair() {
        let head = NaturalParamHead::categorical(3).unwrap();
        let m = head.moments(&[80.0, 0.0, 0.0]).unwrap();
        let p = z_eig_relaxed_bounds(&m.k4, &m.fisher_h).unwrap();
        assert!(p.lower.abs() < 1e-12);
        assert!(p.upper.abs() < 1e-12);
    }

    #[test]
    fn bounded_statistic() {
        let cat = NaturalParamHead::categorical(2).unwrap();
        assert_relative_eq!(bounded_statistic_bound(&cat, &[0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-14);
        assert!(bounded_statistic_bound(&cat, &[60.0, 0.0]).unwrap() < 1e-20);
        let g = NaturalParamHead::gaussian(2).unwrap();
        assert!(matches!(bounded_statistic_bound(&g, &[0.0, 0.0]), Err(Error::UnboundedFamily(_))));
    }

    #[test]
    fn classification_bound_examples() {
        assert_relative_eq!(classification_spectrum_bound(&[0.1; 10]).unwrap(), 0.1, epsilon = 1e-15);
        assert_eq!(classification_spectrum_bound(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(classification_spectrum_bound(&[0.5, 0.5]).unwrap(), 0.5);
        assert_eq!(classification_kurtosis_bound(&[0.5, 0.5]).unwrap(), 1.0);
        assert!(classification_spectrum_bound(&[0.5, 0.6]).is_err());
        assert!(classification_spectrum_bound(&[1.5, -0.5]).is_err());
    }

    #[test]
    fn ruhe_pairs() {
        let (l, u) = ruhe(&[3.0, 1.0], &[2.0, 0.5]);
        assert_eq!(u, 6.5);
        assert_eq!(l, 3.5);
    }

    #[test]
    fn bound_pair_contains() {
        let p = BoundPair::new(BoundKind::Var1, 1.0, 2.0);
        assert!(p.contains(1.5, 0.0));
        assert!(p.contains(2.0 + 1e-12, 1e-9));
        assert!(!p.contains(2.1, 1e-9));
    }
}
