mod common;

use common::random_instance;
use diagfim::bounds::{
    bounded_statistic_bound, classification_spectrum_bound, conditional_bounds, conditional_bounds_all,
    frobenius_from, joint_first_term_bound, spectrum_from, sym_eig_extremes, trace_variance_bounds_frobenius,
    trace_variance_bounds_spectrum, z_eig_extremes, z_eig_relaxed_bounds, HeadSpectrum,
};
use diagfim::estimators::{exact_conditional, joint_variance, ConditionalContext};
use diagfim::linalg::sym_eigenvalues;
use diagfim::rng::rng_from_seed;
use diagfim::{Activation, Matrix, MlpNetwork, NaturalParamHead, Tensor4};
use proptest::prelude::*;
use rand::Rng as _;
use rand_distr::StandardNormal;

const TOL: f64 = 1e-9;

fn sandwich_holds(seed: u64, classes: usize) -> Result<(), String> {
    let inst = random_instance(seed, true, classes);
    let n = 1 + (seed % 7) as usize;
    let ctx = ConditionalContext::new(&inst.net, &inst.head, &inst.x).unwrap();
    let exact = ctx.exact(n).unwrap();
    let bounds = conditional_bounds_all(&ctx, n).unwrap();
    for (i, b) in bounds.iter().enumerate() {
        for (pair, v) in b.iter().zip([exact.fim_diag[i], exact.var1[i], exact.var2[i]]) {
            if !pair.contains(v, TOL) {
                return Err(format!("param {i} {:?}: {v} not in [{}, {}]", pair.kind, pair.lower, pair.upper));
            }
        }
    }
    let spec = HeadSpectrum::new(&ctx.moments).unwrap();
    let frob = frobenius_from(&ctx, &spec, n).bounds;
    let ruhe = spectrum_from(&ctx, n).unwrap();
    let traces = [
        exact.fim_diag.iter().sum::<f64>(),
        exact.var1.iter().sum::<f64>(),
        exact.var2.iter().sum::<f64>(),
    ];
    for (set, name) in [(&frob, "frobenius"), (&ruhe, "spectrum")] {
        for (pair, v) in [&set.fim, &set.var1, &set.var2].into_iter().zip(traces) {
            if !pair.contains(v, TOL) {
                return Err(format!("{name} {:?}: {v} not in [{}, {}]", pair.kind, pair.lower, pair.upper));
            }
        }
    }
    Ok(())
}

#[test]
fn sandwich_on_random_categorical_instances() {
    for seed in 0..1000 {
        let classes = 2 + (seed as usize % 3);
        if let Err(msg) = sandwich_holds(seed, classes) {
            panic!("seed {seed}: {msg}");
        }
    }
}

#[test]
fn spectrum_uppers_are_tighter_for_fim_and_var2() {
    for seed in 0..500 {
        let inst = random_instance(seed, true, 3);
        let frob = trace_variance_bounds_frobenius(&inst.net, &inst.head, &inst.x, 2).unwrap().bounds;
        let ruhe = trace_variance_bounds_spectrum(&inst.net, &inst.head, &inst.x, 2).unwrap();
        assert!(ruhe.fim.upper <= frob.fim.upper + 1e-9 * frob.fim.upper.max(1.0));
        assert!(ruhe.var2.upper <= frob.var2.upper + 1e-9 * frob.var2.upper.max(1.0));
    }
}

#[test]
fn gaussian_pairs_are_equalities() {
    for seed in 0..50 {
        let inst = random_instance(seed, false, 1 + seed as usize % 3);
        let exact = exact_conditional(&inst.net, &inst.head, &inst.x, 4).unwrap();
        for i in (0..inst.net.num_params()).step_by(3) {
            let (f, v1, v2) = conditional_bounds(&inst.net, &inst.head, &inst.x, 4, i).unwrap();
            for (pair, v) in [(f, exact.fim_diag[i]), (v1, exact.var1[i]), (v2, exact.var2[i])] {
                let scale = pair.upper.abs().max(1e-300);
                assert!((pair.upper - pair.lower).abs() <= 1e-9 * scale.max(1.0));
                assert!((pair.upper - v).abs() <= 1e-9 * scale, "{v} vs {}", pair.upper);
            }
        }
    }
}

#[test]
fn gaussian_trace_bounds_collapse() {
    let inst = random_instance(8, false, 3);
    let exact = exact_conditional(&inst.net, &inst.head, &inst.x, 1).unwrap();
    let ruhe = trace_variance_bounds_spectrum(&inst.net, &inst.head, &inst.x, 1).unwrap();
    let trace: f64 = exact.fim_diag.iter().sum();
    assert!((ruhe.fim.lower - trace).abs() <= 1e-9 * trace);
    assert!((ruhe.fim.upper - trace).abs() <= 1e-9 * trace);
    let frob = trace_variance_bounds_frobenius(&inst.net, &inst.head, &inst.x, 1).unwrap();
    // T = 3: min{3‖J‖², ‖J‖²} = ‖J‖² = the trace itself.
    assert!((frob.bounds.fim.upper - trace).abs() <= 1e-9 * trace);
    assert!(frob.components.fim[0] >= frob.components.fim[1]);
}

#[test]
fn zero_network_traces_vanish() {
    let net = MlpNetwork::new(vec![2, 3, 2], Activation::Identity, vec![0.0; 17]).unwrap();
    let head = NaturalParamHead::categorical(2).unwrap();
    let x = [0.5, 0.5];
    let exact = exact_conditional(&net, &head, &x, 1).unwrap();
    let frob = trace_variance_bounds_frobenius(&net, &head, &x, 1).unwrap().bounds;
    // Only the output biases have nonzero gradient when every weight is zero.
    let last = net.param_groups().pop().unwrap().range;
    for i in 0..last.start {
        assert_eq!(exact.fim_diag[i], 0.0);
        let (f, v1, v2) = conditional_bounds(&net, &head, &x, 1, i).unwrap();
        assert_eq!((f.lower, f.upper, v1.upper, v2.upper), (0.0, 0.0, 0.0, 0.0));
    }
    assert!(frob.var2.upper == 0.0);
}

#[test]
fn jacobi_matches_nalgebra() {
    let mut rng = rng_from_seed(5);
    for _ in 0..50 {
        let n = 5;
        let a: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let sym = Matrix::from_fn(n, n, |i, j| a[i * n + j] + a[j * n + i]);
        let ours = sym_eigenvalues(&sym).unwrap();
        let na = nalgebra::DMatrix::from_fn(n, n, |i, j| sym[(i, j)]);
        let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (u, v) in ours.iter().zip(&theirs) {
            assert!((u - v).abs() < 1e-9, "{u} vs {v}");
        }
        let (lo, hi) = sym_eig_extremes(&sym).unwrap();
        assert_eq!((lo, hi), (ours[n - 1], ours[0]));
    }
}

#[test]
fn relaxed_pair_contains_direct_pair() {
    let mut rng = rng_from_seed(9);
    let head = NaturalParamHead::categorical(4).unwrap();
    for _ in 0..30 {
        let h: Vec<f64> = (0..4).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let m = head.moments(&h).unwrap();
        let relaxed = z_eig_relaxed_bounds(&m.k4, &m.fisher_h).unwrap();
        let (zmin, zmax) = z_eig_extremes(&m.variance_kernel(), 16, 1e-10).unwrap();
        assert!(relaxed.lower <= zmin.value + 1e-9);
        assert!(relaxed.upper >= zmax.value - 1e-9);
    }
}

#[test]
fn symmetrization_invariance_on_variance_kernel() {
    let head = NaturalParamHead::categorical(4).unwrap();
    let m = head.moments(&[0.2, 1.0, -0.5, 0.0]).unwrap();
    let kernel = m.variance_kernel();
    let sym = kernel.symmetrized();
    let mut rng = rng_from_seed(1);
    for _ in 0..100 {
        let u: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: Vec<f64> = u.iter().map(|v| v / norm).collect();
        assert!((kernel.quartic_form(&u) - sym.quartic_form(&u)).abs() < 1e-12);
    }
}

#[test]
fn variance_kernel_pair_matrix_is_psd() {
    let head = NaturalParamHead::categorical(3).unwrap();
    let m = head.moments(&[0.5, -0.2, 0.9]).unwrap();
    let pair = m.variance_kernel().to_pair_matrix();
    let eig = sym_eigenvalues(&pair).unwrap();
    assert!(*eig.last().unwrap() >= -1e-12);
    let back = Tensor4::from_pair_matrix(&pair).unwrap();
    assert_eq!(back, m.variance_kernel());
}

#[test]
fn bounded_statistic_dominates_direct_solver() {
    let head = NaturalParamHead::categorical(2).unwrap();
    let m = head.moments(&[0.0, 0.0]).unwrap();
    let (_, kmax) = z_eig_extremes(&m.k4, 16, 1e-10).unwrap();
    assert!(bounded_statistic_bound(&head, &[0.0, 0.0]).unwrap() >= kmax.value - 1e-12);
    let ten = NaturalParamHead::categorical(10).unwrap();
    let b = bounded_statistic_bound(&ten, &[0.0; 10]).unwrap();
    let m_x = classification_spectrum_bound(&[0.1; 10]).unwrap();
    assert!(b <= 2.0 * m_x + 1e-12);
}

#[test]
fn joint_first_term_bound_dominates_input_variance() {
    for seed in 0..20 {
        let inst = random_instance(seed, seed % 2 == 0, 3);
        let mut rng = rng_from_seed(seed);
        let dataset: Vec<Vec<f64>> = (0..5)
            .map(|_| common::random_input(&mut rng, inst.net.input_dim()))
            .collect();
        let bound = joint_first_term_bound(&inst.net, &inst.head, &dataset).unwrap();
        let jv = joint_variance(&inst.net, &inst.head, &dataset, 1).unwrap();
        for (i, b) in bound.per_param.iter().enumerate() {
            // first_term is Var/N with N = 1.
            assert!(jv.first_term[i] <= b + 1e-9 * b.max(1.0));
        }
        let single = joint_variance(&inst.net, &inst.head, &dataset[..1], 1).unwrap();
        assert!(single.first_term.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn gaussian_joint_variance_below_max_gradient_norm() {
    let inst = random_instance(3, false, 2);
    let mut rng = rng_from_seed(3);
    let dataset: Vec<Vec<f64>> = (0..6)
        .map(|_| common::random_input(&mut rng, inst.net.input_dim()))
        .collect();
    let bound = joint_first_term_bound(&inst.net, &inst.head, &dataset).unwrap();
    let jv = joint_variance(&inst.net, &inst.head, &dataset, 1).unwrap();
    for i in 0..inst.net.num_params() {
        let max_g4 = dataset
            .iter()
            .map(|x| {
                let d = inst.net.derivatives(x).unwrap();
                d.jac.row(i).iter().map(|v| v * v).sum::<f64>().powi(2)
            })
            .fold(0.0, f64::max);
        assert!(jv.first_term[i] <= bound.per_param[i] + 1e-12);
        assert!(bound.per_param[i] <= max_g4 * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich_property(seed in any::<u64>(), classes in 2usize..5) {
        prop_assert!(sandwich_holds(seed, classes).is_ok());
    }

    #[test]
    fn classification_bound_dominates_lambda_max(seed in any::<u64>(), t in 2usize..=10) {
        let mut rng = rng_from_seed(seed);
        let w: Vec<f64> = (0..t).map(|_| rng.random::<f64>().powi(3)).collect();
        let z: f64 = w.iter().sum();
        let sigma: Vec<f64> = w.iter().map(|v| v / z).collect();
        let fisher = Matrix::from_fn(t, t, |a, b| if a == b { sigma[a] } else { 0.0 } - sigma[a] * sigma[b]);
        let (_, lmax) = sym_eig_extremes(&fisher).unwrap();
        prop_assert!(lmax <= classification_spectrum_bound(&sigma).unwrap() + 1e-10);
    }

    #[test]
    fn z_eig_residual_is_small(seed in any::<u64>(), t in 2usize..5) {
        let mut rng = rng_from_seed(seed);
        let h: Vec<f64> = (0..t).map(|_| rng.sample(StandardNormal)).collect();
        let head = NaturalParamHead::categorical(t).unwrap();
        let m = head.moments(&h).unwrap();
        let sym = m.variance_kernel().symmetrized();
        let (zmin, zmax) = z_eig_extremes(&m.variance_kernel(), 16, 1e-10).unwrap();
        for r in [zmin, zmax] {
            let g = sym.contract3(&r.unit_vector);
            let res: f64 = g.iter().zip(&r.unit_vector).map(|(a, u)| (a - r.value * u).powi(2)).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-6);
            prop_assert!((sym.quartic_form(&r.unit_vector) - r.value).abs() <= 1e-8);
        }
    }
}
