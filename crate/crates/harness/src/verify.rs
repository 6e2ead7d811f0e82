//! Fast oracle consistency suite behind `diagfim verify`.

use std::fmt;
use std::time::Instant;

use diagfim::bounds::{
    classification_spectrum_bound, conditional_bounds_all, frobenius_from, parameter_bounds, spectrum_from,
    sym_eig_extremes, z_eig_extremes, HeadSpectrum,
};
use diagfim::estimators::{empfim_covariance_gap, ConditionalContext};
use diagfim::oracle::{enumerate_categorical_statistics, fd_diag_hessian, fd_jacobian};
use diagfim::rng::{derive_seed, rng_from_seed};
use diagfim::{Matrix, NaturalParamHead};
use rand::Rng as _;
use rayon::prelude::*;

use crate::instances::{close, random_input, random_instance, random_simplex, ACTIVATIONS};

const SEED: u64 = 0x7E57;
const N: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub detail: Option<String>,
    pub millis: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<6} {:<28} {:>5} cases {:>5} failed {:>7} ms",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.millis
        )?;
        if let Some(d) = &self.detail {
            write!(f, "  [{d}]")?;
        }
        Ok(())
    }
}

type Case = Result<(), String>;

fn suite(name: &'static str, cases: usize, check: impl Fn(u64) -> Case + Sync) -> SuiteResult {
    let start = Instant::now();
    let outcomes: Vec<Case> = (0..cases as u64)
        .into_par_iter()
        .map(|k| check(derive_seed(SEED, k)))
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_err()).count();
    let detail = outcomes.into_iter().find_map(Result::err);
    SuiteResult {
        name,
        cases,
        failures,
        detail,
        millis: start.elapsed().as_millis(),
    }
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

fn derivatives(seed: u64) -> Case {
    let act = ACTIVATIONS[(seed % ACTIVATIONS.len() as u64) as usize];
    let inst = random_instance(seed, NaturalParamHead::gaussian(2).map_err(err)?, Some(act));
    let b = inst.net.derivatives(&inst.x).map_err(err)?;
    let jac = fd_jacobian(&inst.net, &inst.x, 1e-6).map_err(err)?;
    let dh = fd_diag_hessian(&inst.net, &inst.x, 1e-4).map_err(err)?;
    for (k, (a, f)) in b.jac.as_slice().iter().zip(jac.as_slice()).enumerate() {
        if !close(*a, *f, 1e-5, 1e-7) {
            return Err(format!("seed {seed:#x}: jac[{k}] = {a:e} vs fd {f:e}"));
        }
    }
    for (k, (a, f)) in b.dhess.as_slice().iter().zip(dh.as_slice()).enumerate() {
        if !close(*a, *f, 1e-4, 1e-6) {
            return Err(format!("seed {seed:#x}: dhess[{k}] = {a:e} vs fd {f:e}"));
        }
    }
    Ok(())
}

fn enumeration(seed: u64) -> Case {
    let classes = 2 + (seed % 4) as usize;
    let inst = random_instance(seed, NaturalParamHead::categorical(classes).map_err(err)?, None);
    let ctx = ConditionalContext::new(&inst.net, &inst.head, &inst.x).map_err(err)?;
    let exact = ctx.exact(7).map_err(err)?;
    let oracle = enumerate_categorical_statistics(&inst.net, &inst.head, &inst.x, 7).map_err(err)?;
    for (name, a, b) in [
        ("fim", &exact.fim_diag, &oracle.fim_diag),
        ("var1", &exact.var1, &oracle.var1),
        ("var2", &exact.var2, &oracle.var2),
    ] {
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            if !close(*x, *y, 1e-10, 1e-13 * scale + 1e-30) {
                return Err(format!("seed {seed:#x}: {name}[{i}] = {x:e} vs enumeration {y:e}"));
            }
        }
    }
    Ok(())
}

fn gaussian_equality(seed: u64) -> Case {
    let t = 1 + (seed % 3) as usize;
    let inst = random_instance(seed, NaturalParamHead::gaussian(t).map_err(err)?, None);
    let ctx = ConditionalContext::new(&inst.net, &inst.head, &inst.x).map_err(err)?;
    let exact = ctx.exact(5).map_err(err)?;
    let bounds = conditional_bounds_all(&ctx, 5).map_err(err)?;
    for (i, b) in bounds.iter().enumerate() {
        let values = [exact.fim_diag[i], exact.var1[i], exact.var2[i]];
        for (pair, v) in b.iter().zip(values) {
            if !close(pair.lower, v, 1e-9, 1e-300) || !close(pair.upper, v, 1e-9, 1e-300) {
                return Err(format!(
                    "seed {seed:#x}: {:?}[{i}] = {v:e}, bounds [{:e}, {:e}]",
                    pair.kind, pair.lower, pair.upper
                ));
            }
        }
    }
    Ok(())
}

fn sandwich(seed: u64) -> Case {
    let classes = 2 + (seed % 5) as usize;
    let inst = random_instance(seed, NaturalParamHead::categorical(classes).map_err(err)?, None);
    let n = 1 + (seed % 50) as usize;
    let ctx = ConditionalContext::new(&inst.net, &inst.head, &inst.x).map_err(err)?;
    let exact = ctx.exact(n).map_err(err)?;
    let spec = HeadSpectrum::new(&ctx.moments).map_err(err)?;
    for i in 0..ctx.num_params() {
        let b = parameter_bounds(ctx.bundle.jac.row(i), ctx.bundle.dhess.row(i), &spec, n);
        let values = [exact.fim_diag[i], exact.var1[i], exact.var2[i]];
        for (pair, v) in b.iter().zip(values) {
            if !pair.contains(v, 1e-9) {
                return Err(format!(
                    "seed {seed:#x}: {:?}[{i}] = {v:e} outside [{:e}, {:e}]",
                    pair.kind, pair.lower, pair.upper
                ));
            }
        }
    }
    let traces = [
        exact.fim_diag.iter().sum::<f64>(),
        exact.var1.iter().sum(),
        exact.var2.iter().sum(),
    ];
    let frob = frobenius_from(&ctx, &spec, n).bounds;
    let spectral = spectrum_from(&ctx, n).map_err(err)?;
    for tb in [&frob, &spectral] {
        for (pair, v) in [&tb.fim, &tb.var1, &tb.var2].into_iter().zip(traces) {
            if !pair.contains(v, 1e-9) {
                return Err(format!(
                    "seed {seed:#x}: {:?} = {v:e} outside [{:e}, {:e}]",
                    pair.kind, pair.lower, pair.upper
                ));
            }
        }
    }
    Ok(())
}

fn gaussian_constants(seed: u64) -> Case {
    let t = 1 + (seed % 4) as usize;
    let head = NaturalParamHead::gaussian(t).map_err(err)?;
    let h = random_input(&mut rng_from_seed(seed), t);
    let m = head.moments(&h).map_err(err)?;
    let (lo, hi) = sym_eig_extremes(&m.fisher_h).map_err(err)?;
    if lo != 1.0 || hi != 1.0 {
        return Err(format!("T={t}: eig(I) = ({lo}, {hi})"));
    }
    let (_, kmax) = z_eig_extremes(&m.k4, 16, 1e-12).map_err(err)?;
    let (mmin, mmax) = z_eig_extremes(&m.variance_kernel(), 16, 1e-12).map_err(err)?;
    if (kmax.value - 3.0).abs() > 1e-6 || (mmin.value - 2.0).abs() > 1e-6 || (mmax.value - 2.0).abs() > 1e-6 {
        return Err(format!(
            "T={t}: zmax(K) = {}, z(M) = ({}, {})",
            kmax.value, mmin.value, mmax.value
        ));
    }
    Ok(())
}

fn classification_spectrum(seed: u64) -> Case {
    let mut rng = rng_from_seed(seed);
    let t = rng.random_range(2..=10);
    let sigma = random_simplex(&mut rng, t);
    let fisher = Matrix::from_fn(t, t, |a, b| if a == b { sigma[a] } else { 0.0 } - sigma[a] * sigma[b]);
    let (_, lmax) = sym_eig_extremes(&fisher).map_err(err)?;
    let m = classification_spectrum_bound(&sigma).map_err(err)?;
    if lmax > m + 1e-10 {
        return Err(format!("T={t}: λmax(I) = {lmax:e} > m = {m:e}"));
    }
    Ok(())
}

fn covariance_gap(seed: u64) -> Case {
    let mut rng = rng_from_seed(seed);
    let t = rng.random_range(2..=6);
    let head = NaturalParamHead::categorical(t).map_err(err)?;
    let h = random_input(&mut rng, t);
    let q = random_simplex(&mut rng, t);
    let gap = empfim_covariance_gap(&head, &h, &q).map_err(err)?;
    for a in 0..t {
        for b in 0..t {
            let direct = if a == b { q[a] } else { 0.0 } - q[a] * q[b];
            let via = gap.i_data.row(a)[b] - gap.delta_h.row(a)[b];
            if (direct - via).abs() > 1e-12 || (direct - gap.cov_q.row(a)[b]).abs() > 1e-12 {
                return Err(format!("seed {seed:#x}: Cov_q[{a},{b}] = {direct:e} vs {via:e}"));
            }
        }
    }
    Ok(())
}

/// Runs every suite in a fixed order.
pub fn run_all() -> Vec<SuiteResult> {
    vec![
        suite("derivatives_vs_fd", 40, derivatives),
        suite("categorical_enumeration", 60, enumeration),
        suite("gaussian_bound_equality", 40, gaussian_equality),
        suite("bound_sandwich", N, sandwich),
        suite("gaussian_head_constants", 8, gaussian_constants),
        suite("classification_spectrum", 200, classification_spectrum),
        suite("covariance_gap_identity", 50, covariance_gap),
    ]
}
