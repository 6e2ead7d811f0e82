use std::f64::consts::PI;
use std::path::Path;

use diagfim::expfam::one_hot;
use diagfim::rng::{derive_seed, rng_from_seed, Rng};
use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::config::{DatasetSpec, ExperimentConfig, Task};
use crate::error::HarnessError;

/// Inputs paired with sufficient statistics `t(y)` (one-hot or real targets).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    fn push(&mut self, x: Vec<f64>, t: Vec<f64>) {
        self.inputs.push(x);
        self.targets.push(t);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    /// Held-out inputs at which FIM quantities are evaluated.
    pub probes: Vec<Vec<f64>>,
}

const DATA_STREAM: u64 = 1;
const PROBE_STREAM: u64 = 2;
const TARGET_MAP_STREAM: u64 = 3;

pub fn load(cfg: &ExperimentConfig) -> Result<Split, HarnessError> {
    match &cfg.dataset {
        DatasetSpec::SyntheticGaussianBlobs => Ok(synthetic(cfg)),
        DatasetSpec::ImageSubsetCsv(path) => {
            let all = read_csv(path, cfg)?;
            split_rows(all, cfg)
        }
    }
}

fn synthetic(cfg: &ExperimentConfig) -> Split {
    let gen = Generator::new(cfg);
    let mut train_rng = rng_from_seed(derive_seed(cfg.seed, DATA_STREAM));
    let mut train = Dataset::default();
    for j in 0..cfg.train_points {
        let (x, t) = gen.draw(j, &mut train_rng);
        train.push(x, t);
    }
    let mut probe_rng = rng_from_seed(derive_seed(cfg.seed, PROBE_STREAM));
    let probes = (0..cfg.probe_inputs)
        .map(|j| gen.draw(j, &mut probe_rng).0)
        .collect();
    Split { train, probes }
}

struct Generator {
    task: Task,
    input_dim: usize,
    output_dim: usize,
    /// Regression map `y = A tanh(x) + ε`, `A` is `T×I`.
    a: Vec<Vec<f64>>,
}

impl Generator {
    fn new(cfg: &ExperimentConfig) -> Self {
        let (i, t) = (cfg.input_dim(), cfg.output_dim());
        let mut rng = rng_from_seed(derive_seed(cfg.seed, TARGET_MAP_STREAM));
        let a = (0..t)
            .map(|_| {
                (0..i)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) / (i as f64).sqrt())
                    .collect()
            })
            .collect();
        Self {
            task: cfg.task,
            input_dim: i,
            output_dim: t,
            a,
        }
    }

    /// Class `k` sits on a ring of radius 3 in the first two input coordinates
    /// (on a line for one-dimensional inputs).
    fn center(&self, k: usize) -> Vec<f64> {
        let c = self.output_dim;
        let mut v = vec![0.0; self.input_dim];
        if self.input_dim >= 2 {
            let angle = 2.0 * PI * k as f64 / c as f64;
            v[0] = 3.0 * angle.cos();
            v[1] = 3.0 * angle.sin();
        } else {
            v[0] = 3.0 * k as f64 - 1.5 * (c as f64 - 1.0);
        }
        v
    }

    fn draw(&self, j: usize, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
        match self.task {
            Task::Classification => {
                let k = j % self.output_dim;
                let x = self
                    .center(k)
                    .into_iter()
                    .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                    .collect();
                (x, one_hot(k, self.output_dim))
            }
            Task::Regression => {
                let x: Vec<f64> = (0..self.input_dim)
                    .map(|_| 1.5 * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let y = self
                    .a
                    .iter()
                    .map(|row| {
                        let mean: f64 = row.iter().zip(&x).map(|(a, xi)| a * xi.tanh()).sum();
                        mean + rng.sample::<f64, _>(StandardNormal)
                    })
                    .collect();
                (x, y)
            }
        }
    }
}

fn read_csv(path: &Path, cfg: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let (i, t) = (cfg.input_dim(), cfg.output_dim());
    let lead = match cfg.task {
        Task::Classification => 1,
        Task::Regression => t,
    };
    let mut out = Dataset::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| HarnessError::Data {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let fields = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(e.to_string()))?;
        if fields.len() != lead + i {
            return Err(err(format!("expected {} fields, found {}", lead + i, fields.len())));
        }
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(err("non-finite value".into()));
        }
        let target = match cfg.task {
            Task::Classification => {
                let label = fields[0];
                if label.fract() != 0.0 || label < 0.0 || label as usize >= t {
                    return Err(err(format!("label {label} is not a class index below {t}")));
                }
                one_hot(label as usize, t)
            }
            Task::Regression => fields[..t].to_vec(),
        };
        out.push(fields[lead..].to_vec(), target);
    }
    Ok(out)
}

fn split_rows(all: Dataset, cfg: &ExperimentConfig) -> Result<Split, HarnessError> {
    if all.len() <= cfg.probe_inputs {
        return Err(HarnessError::Config(format!(
            "dataset has {} rows; need more than probe_inputs = {}",
            all.len(),
            cfg.probe_inputs
        )));
    }
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, DATA_STREAM)));
    let probes = order[..cfg.probe_inputs]
        .iter()
        .map(|&k| all.inputs[k].clone())
        .collect();
    let mut train = Dataset::default();
    for &k in &order[cfg.probe_inputs..] {
        train.push(all.inputs[k].clone(), all.targets[k].clone());
    }
    Ok(Split { train, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cfg(task: Task) -> ExperimentConfig {
        ExperimentConfig {
            task,
            dataset: DatasetSpec::SyntheticGaussianBlobs,
            layer_dims: vec![2, 4, 3],
            activation: diagfim::Activation::Tanh,
            epochs: 1,
            learning_rate: 0.1,
            n_fim_samples: 10,
            probe_inputs: 4,
            seed: 3,
            output_dir: "unused".into(),
            train_points: 30,
            batch_size: 8,
        }
    }

    #[test]
    fn synthetic_shapes_and_determinism() {
        let a = load(&cfg(Task::Classification)).unwrap();
        assert_eq!(a.train.len(), 30);
        assert_eq!(a.probes.len(), 4);
        assert!(a.train.targets.iter().all(|t| t.iter().sum::<f64>() == 1.0));
        assert_eq!(a, load(&cfg(Task::Classification)).unwrap());
        let r = load(&cfg(Task::Regression)).unwrap();
        assert_eq!(r.train.targets[0].len(), 3);
    }

    #[test]
    fn csv_loading_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        for k in 0..10 {
            writeln!(f, "{},{}.0,0.5", k % 3, k).unwrap();
        }
        drop(f);
        let mut c = cfg(Task::Classification);
        c.dataset = DatasetSpec::ImageSubsetCsv(path.clone());
        let split = load(&c).unwrap();
        assert_eq!(split.train.len(), 6);
        assert_eq!(split.probes.len(), 4);

        std::fs::write(&path, "7,1.0,2.0\n").unwrap();
        assert!(matches!(load(&c), Err(HarnessError::Data { line: 1, .. })));
        c.dataset = DatasetSpec::ImageSubsetCsv(dir.path().join("missing.csv"));
        assert!(matches!(load(&c), Err(HarnessError::Io { .. })));
    }
}
