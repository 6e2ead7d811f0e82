mod common;

use common::{close, random_input, random_instance, random_net, ACTIVATIONS};
use diagfim::oracle::{fd_diag_hessian, fd_jacobian};
use diagfim::rng::rng_from_seed;
use diagfim::{Activation, MlpNetwork};
use proptest::prelude::*;

fn check_against_fd(net: &MlpNetwork, x: &[f64]) -> Result<(), String> {
    let d = net.derivatives(x).unwrap();
    let fj = fd_jacobian(net, x, 1e-4).unwrap();
    let fh = fd_diag_hessian(net, x, 1e-4).unwrap();
    for i in 0..net.num_params() {
        for a in 0..net.output_dim() {
            let (j, jf) = (d.jac[(i, a)], fj[(i, a)]);
            if !close(j, jf, 1e-5, 1e-7) {
                return Err(format!("jac[{i},{a}] = {j} vs fd {jf}"));
            }
            let (h, hf) = (d.dhess[(i, a)], fh[(i, a)]);
            let ok = if hf.abs() > 1e-6 {
                close(h, hf, 1e-4, 0.0) || (h - hf).abs() <= 1e-6
            } else {
                (h - hf).abs() <= 1e-6
            };
            if !ok {
                return Err(format!("dhess[{i},{a}] = {h} vs fd {hf}"));
            }
        }
    }
    Ok(())
}

#[test]
fn analytic_derivatives_match_finite_differences_on_random_nets() {
    for seed in 0..120 {
        let inst = random_instance(seed, seed % 2 == 0, 1 + (seed as usize % 4));
        if let Err(msg) = check_against_fd(&inst.net, &inst.x) {
            panic!("seed {seed} ({:?}, dims {:?}): {msg}", inst.net.activation(), inst.net.layer_dims());
        }
    }
}

#[test]
fn last_layer_curvature_is_exactly_zero() {
    for seed in 0..50 {
        let inst = random_instance(1000 + seed, false, 3);
        let d = inst.net.derivatives(&inst.x).unwrap();
        let last = inst.net.param_groups().pop().unwrap().range;
        for i in last {
            assert!(d.dhess.row(i).iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn groups_partition_parameters() {
    for seed in 0..20 {
        let inst = random_instance(seed, true, 2);
        let groups = inst.net.param_groups();
        let mut next = 0;
        for g in &groups {
            assert_eq!(g.range.start, next);
            next = g.range.end;
        }
        assert_eq!(next, inst.net.num_params());
    }
}

/// Swaps hidden neurons `p` and `q` of a 3-layer net (input → hidden → output).
fn permute_hidden(net: &MlpNetwork, p: usize, q: usize) -> MlpNetwork {
    let dims = net.layer_dims();
    let (i, hdim, t) = (dims[0], dims[1], dims[2]);
    let th = net.theta();
    let mut out = th.to_vec();
    let perm = |j: usize| if j == p { q } else if j == q { p } else { j };
    for j in 0..hdim {
        let src = perm(j);
        for k in 0..i {
            out[j * i + k] = th[src * i + k];
        }
        out[hdim * i + j] = th[hdim * i + src];
    }
    let base = hdim * i + hdim;
    for a in 0..t {
        for j in 0..hdim {
            out[base + a * hdim + j] = th[base + a * hdim + perm(j)];
        }
    }
    net.with_theta(out).unwrap()
}

#[test]
fn hidden_permutation_preserves_group_norms() {
    let mut rng = rng_from_seed(31);
    let net = MlpNetwork::init(vec![3, 6, 2], Activation::Tanh, 4).unwrap();
    let x = random_input(&mut rng, 3);
    let permuted = permute_hidden(&net, 1, 4);
    let a = net.derivatives(&x).unwrap();
    let b = permuted.derivatives(&x).unwrap();
    for (u, v) in a.h.iter().zip(&b.h) {
        assert!((u - v).abs() < 1e-14);
    }
    for g in net.param_groups() {
        let norms = |m: &diagfim::Matrix| {
            let mut v: Vec<f64> = g.range.clone().map(|i| m.row(i).iter().map(|x| x * x).sum()).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for (u, v) in norms(&a.jac).iter().zip(norms(&b.jac)) {
            assert!((u - v).abs() < 1e-13);
        }
        for (u, v) in norms(&a.dhess).iter().zip(norms(&b.dhess)) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}

#[test]
fn fd_error_shrinks_with_step() {
    let net = MlpNetwork::init(vec![2, 5, 2], Activation::Sigmoid, 12).unwrap();
    let x = [0.4, -0.9];
    let exact = net.derivatives(&x).unwrap().jac;
    let err = |s: f64| fd_jacobian(&net, &x, s).unwrap().sub(&exact).unwrap().max_abs();
    let (e3, e4, e5) = (err(1e-3), err(1e-4), err(1e-5));
    assert!(e4 < e3, "{e3} {e4}");
    // Rounding takes over below ~1e-5: no further large gain, but no blow-up either.
    assert!(e5 < 1e-8, "{e5}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_agreement_property(seed in any::<u64>(), act in 0usize..5, out in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let net = random_net(&mut rng, ACTIVATIONS[act], out);
        let x = random_input(&mut rng, net.input_dim());
        prop_assert!(check_against_fd(&net, &x).is_ok());
    }
}
