use diagfim::rng::{rng_from_seed, Rng};
use diagfim::{Activation, MlpNetwork, NaturalParamHead};
use diagfim_harness::data::Dataset;
use diagfim_harness::train::{mean_loss, train_epoch};
use rand::Rng as _;
use rand_distr::StandardNormal;

fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[test]
fn separable_blobs_loss_decreases() {
    let mut rng = rng_from_seed(11);
    let mut data = Dataset::default();
    for j in 0..200 {
        let k = j % 2;
        let c = if k == 0 { -2.0 } else { 2.0 };
        data.inputs.push(vec![c + 0.5 * normal(&mut rng), c + 0.5 * normal(&mut rng)]);
        data.targets.push(diagfim::expfam::one_hot(k, 2));
    }
    let head = NaturalParamHead::categorical(2).unwrap();
    let mut net = MlpNetwork::init(vec![2, 8, 2], Activation::Tanh, 3).unwrap();
    let initial = mean_loss(&net, &head, &data).unwrap();
    let mut shuffle = rng_from_seed(4);
    for _ in 0..20 {
        net = train_epoch(&net, &head, &data, 0.2, 32, &mut shuffle).unwrap().0;
    }
    let last = mean_loss(&net, &head, &data).unwrap();
    assert!(last < initial, "{last} !< {initial}");
    assert!(last < 0.1, "separable data should be nearly fit, loss {last}");
}

#[test]
fn linear_regression_reaches_noise_floor() {
    // y = A x + ε with ε ~ N(0, I_T): the expected NLL at the optimum is T/2.
    let (i, t, n) = (3, 2, 4000);
    let mut rng = rng_from_seed(21);
    let a: Vec<Vec<f64>> = (0..t).map(|_| (0..i).map(|_| normal(&mut rng)).collect()).collect();
    let mut data = Dataset::default();
    for _ in 0..n {
        let x: Vec<f64> = (0..i).map(|_| normal(&mut rng)).collect();
        let y = a
            .iter()
            .map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() + normal(&mut rng))
            .collect();
        data.inputs.push(x);
        data.targets.push(y);
    }
    let head = NaturalParamHead::gaussian(t).unwrap();
    let mut net = MlpNetwork::init(vec![i, t], Activation::Identity, 5).unwrap();
    let mut shuffle = rng_from_seed(6);
    for _ in 0..15 {
        net = train_epoch(&net, &head, &data, 0.05, 32, &mut shuffle).unwrap().0;
    }
    let loss = mean_loss(&net, &head, &data).unwrap();
    let floor = 0.5 * t as f64;
    // Sampling noise of the empirical floor is about sqrt(T/2 / n) ≈ 0.016.
    assert!((loss - floor).abs() < 0.06, "loss {loss} vs floor {floor}");
}

#[test]
fn divergence_is_a_numerical_error() {
    let head = NaturalParamHead::gaussian(1).unwrap();
    let data = Dataset {
        inputs: vec![vec![1e3], vec![-1e3]],
        targets: vec![vec![1e3], vec![0.0]],
    };
    let mut net = MlpNetwork::init(vec![1, 1], Activation::Identity, 0).unwrap();
    let mut rng = rng_from_seed(0);
    let mut outcome = Ok(());
    for _ in 0..200 {
        match train_epoch(&net, &head, &data, 10.0, 1, &mut rng) {
            Ok((next, _)) => net = next,
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    let e = outcome.expect_err("training at lr = 10 on inputs of size 1e3 must diverge");
    assert_eq!(e.exit_code(), 2);
}
