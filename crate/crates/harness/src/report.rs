//! One-shot bound report for a saved network at a single input.

use std::fmt::Write as _;
use std::path::Path;

use diagfim::{Checkpoint, Family, MlpNetwork, NaturalParamHead};

use crate::error::HarnessError;
use crate::experiment::{evaluate_groups, within, GroupStats, SANDWICH_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub family: Family,
    pub n_samples: usize,
    pub groups: Vec<(String, GroupStats)>,
}

impl BoundsReport {
    pub fn all_within(&self) -> bool {
        self.groups.iter().all(|(_, s)| {
            s.triples()
                .iter()
                .all(|&(_, v, lo, hi)| within(v, lo, hi, SANDWICH_TOL))
        })
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "head: {}, N = {}\n{:<10} {:<6} {:>24} {:>24} {:>24}  ok\n",
            self.family.name(),
            self.n_samples,
            "group",
            "qty",
            "lower",
            "value",
            "upper"
        );
        for (g, s) in &self.groups {
            for (q, v, lo, hi) in s.triples() {
                let ok = if within(v, lo, hi, SANDWICH_TOL) { "yes" } else { "NO" };
                writeln!(out, "{g:<10} {q:<6} {lo:>24.16e} {v:>24.16e} {hi:>24.16e}  {ok}").unwrap();
            }
        }
        out
    }
}

/// Parses a comma-separated row of input coordinates.
pub fn parse_input_row(row: &str) -> Result<Vec<f64>, HarnessError> {
    row.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| HarnessError::Config(format!("input coordinate {f:?} is not a finite number")))
        })
        .collect()
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Checkpoint::from_json(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

/// `family` overrides the head stored in the checkpoint; one of the two is required.
pub fn bounds_report(
    ck: &Checkpoint,
    family: Option<Family>,
    x: &[f64],
    n: usize,
) -> Result<BoundsReport, HarnessError> {
    let family = family.or(ck.head).ok_or_else(|| {
        HarnessError::Config("checkpoint has no head; pass --head gaussian|categorical".into())
    })?;
    if n < 1 {
        return Err(HarnessError::Config("n_samples must be at least 1".into()));
    }
    let net: MlpNetwork = ck.to_network().map_err(|e| HarnessError::Config(e.to_string()))?;
    if x.len() != net.input_dim() {
        return Err(HarnessError::Config(format!(
            "input has {} coordinates, network expects {}",
            x.len(),
            net.input_dim()
        )));
    }
    let head = NaturalParamHead::new(family, net.output_dim()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let groups = evaluate_groups(&net, &head, &[x.to_vec()], n)?;
    Ok(BoundsReport {
        family,
        n_samples: n,
        groups,
    })
}
