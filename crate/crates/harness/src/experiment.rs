use std::path::Path;

use diagfim::bounds::conditional_bounds_all;
use diagfim::estimators::ConditionalContext;
use diagfim::rng::{derive_seed, rng_from_seed};
use diagfim::{Checkpoint, MlpNetwork, NaturalParamHead};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::data;
use crate::error::HarnessError;
use crate::trace::{ExperimentTrace, Quantity, TraceRow};
use crate::train::{mean_loss, train_epoch};

const INIT_STREAM: u64 = 10;
const SHUFFLE_STREAM: u64 = 11;

/// Variances below this are too small for a meaningful log-ratio.
pub const LOGRATIO_FLOOR: f64 = 1e-12;
pub const SANDWICH_TOL: f64 = 1e-9;

/// Group means over parameters and probe inputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupStats {
    pub fim: f64,
    pub fim_lb: f64,
    pub fim_ub: f64,
    pub var1: f64,
    pub var1_lb: f64,
    pub var1_ub: f64,
    pub var2: f64,
    pub var2_lb: f64,
    pub var2_ub: f64,
}

impl GroupStats {
    fn add(&mut self, o: &GroupStats) {
        self.fim += o.fim;
        self.fim_lb += o.fim_lb;
        self.fim_ub += o.fim_ub;
        self.var1 += o.var1;
        self.var1_lb += o.var1_lb;
        self.var1_ub += o.var1_ub;
        self.var2 += o.var2;
        self.var2_lb += o.var2_lb;
        self.var2_ub += o.var2_ub;
    }

    fn scale(&mut self, s: f64) {
        for v in [
            &mut self.fim,
            &mut self.fim_lb,
            &mut self.fim_ub,
            &mut self.var1,
            &mut self.var1_lb,
            &mut self.var1_ub,
            &mut self.var2,
            &mut self.var2_lb,
            &mut self.var2_ub,
        ] {
            *v *= s;
        }
    }

    /// `(name, value, lower, upper)` triples that must be ordered.
    pub fn triples(&self) -> [(&'static str, f64, f64, f64); 3] {
        [
            ("fim", self.fim, self.fim_lb, self.fim_ub),
            ("var1", self.var1, self.var1_lb, self.var1_ub),
            ("var2", self.var2, self.var2_lb, self.var2_ub),
        ]
    }
}

pub fn within(value: f64, lower: f64, upper: f64, tol: f64) -> bool {
    let scale = value.abs().max(upper.abs()).max(lower.abs());
    value >= lower - tol * scale && value <= upper + tol * scale
}

/// Exact quantities and bounds at each probe, averaged per parameter group.
pub fn evaluate_groups(
    net: &MlpNetwork,
    head: &NaturalParamHead,
    probes: &[Vec<f64>],
    n: usize,
) -> Result<Vec<(String, GroupStats)>, HarnessError> {
    let groups = net.param_groups();
    let per_probe: Vec<Vec<GroupStats>> = probes
        .par_iter()
        .map(|x| {
            let ctx = ConditionalContext::new(net, head, x)?;
            let exact = ctx.exact(n)?;
            let bounds = conditional_bounds_all(&ctx, n)?;
            Ok(groups
                .iter()
                .map(|g| {
                    let mut s = GroupStats::default();
                    for i in g.range.clone() {
                        let [f, v1, v2] = bounds[i];
                        s.add(&GroupStats {
                            fim: exact.fim_diag[i],
                            fim_lb: f.lower,
                            fim_ub: f.upper,
                            var1: exact.var1[i],
                            var1_lb: v1.lower,
                            var1_ub: v1.upper,
                            var2: exact.var2[i],
                            var2_lb: v2.lower,
                            var2_ub: v2.upper,
                        });
                    }
                    s.scale(1.0 / g.range.len() as f64);
                    s
                })
                .collect())
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let mut s = GroupStats::default();
            for probe in &per_probe {
                s.add(&probe[k]);
            }
            s.scale(1.0 / probes.len() as f64);
            (g.name.clone(), s)
        })
        .collect())
}

fn epoch_rows(epoch: usize, stats: &[(String, GroupStats)]) -> Result<Vec<TraceRow>, HarnessError> {
    let mut rows = Vec::new();
    for (group, s) in stats {
        for (quantity, value, lower, upper) in s.triples() {
            if !value.is_finite() || !lower.is_finite() || !upper.is_finite() {
                return Err(HarnessError::Numerical(format!(
                    "non-finite {quantity} at epoch {epoch}, group {group}"
                )));
            }
            if !within(value, lower, upper, SANDWICH_TOL) {
                return Err(HarnessError::Sandwich {
                    epoch,
                    group: group.clone(),
                    quantity,
                    value,
                    lower,
                    upper,
                });
            }
        }
        let mut push = |quantity, value| {
            rows.push(TraceRow {
                epoch,
                group: group.clone(),
                quantity,
                value,
            })
        };
        push(Quantity::Fim, s.fim);
        push(Quantity::Var1, s.var1);
        push(Quantity::Var2, s.var2);
        push(Quantity::Var1Ub, s.var1_ub);
        push(Quantity::Var1Lb, s.var1_lb);
        push(Quantity::Var2Ub, s.var2_ub);
        push(Quantity::Var2Lb, s.var2_lb);
        if s.var1 > LOGRATIO_FLOOR {
            push(Quantity::LogratioUbVar1, (s.var1_ub / s.var1).ln());
        }
        if s.var2 > LOGRATIO_FLOOR {
            push(Quantity::LogratioUbVar2, (s.var2_ub / s.var2).ln());
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: ExperimentTrace,
    pub final_net: MlpNetwork,
}

/// Trains and records; writes nothing.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let split = data::load(cfg)?;
    let head = cfg.head()?;
    let mut net = MlpNetwork::init(
        cfg.layer_dims.clone(),
        cfg.activation,
        derive_seed(cfg.seed, INIT_STREAM),
    )?;
    let mut rng = rng_from_seed(derive_seed(cfg.seed, SHUFFLE_STREAM));
    let mut trace = ExperimentTrace::default();
    trace.losses.push(mean_loss(&net, &head, &split.train)?);
    let stats = evaluate_groups(&net, &head, &split.probes, cfg.n_fim_samples)?;
    trace.rows.extend(epoch_rows(0, &stats)?);
    for epoch in 1..=cfg.epochs {
        let (next, loss) = train_epoch(&net, &head, &split.train, cfg.learning_rate, cfg.batch_size, &mut rng)?;
        net = next;
        trace.losses.push(loss);
        let stats = evaluate_groups(&net, &head, &split.probes, cfg.n_fim_samples)?;
        trace.rows.extend(epoch_rows(epoch, &stats)?);
    }
    Ok(RunOutput { trace, final_net: net })
}

pub const TRACE_FILE: &str = "trace.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const CHECKPOINT_FILE: &str = "checkpoint_final.json";

/// Runs and writes `trace.csv`, `config.json` and `checkpoint_final.json`
/// under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentTrace, HarnessError> {
    let out = run_in_memory(cfg)?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    write(&dir.join(TRACE_FILE), &out.trace.to_csv())?;
    let echo = serde_json::to_string_pretty(cfg).expect("config serializes");
    write(&dir.join(CONFIG_FILE), &(echo + "\n"))?;
    let ck = Checkpoint::from_network(&out.final_net, cfg.seed, Some(cfg.family()));
    write(&dir.join(CHECKPOINT_FILE), &(ck.to_json() + "\n"))?;
    Ok(out.trace)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}
