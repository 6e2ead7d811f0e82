use std::fmt::Write as _;

pub const HEADER: &str = "epoch,group,quantity,value";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Fim,
    Var1,
    Var2,
    Var1Ub,
    Var1Lb,
    Var2Ub,
    Var2Lb,
    LogratioUbVar1,
    LogratioUbVar2,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Fim => "fim",
            Quantity::Var1 => "var1",
            Quantity::Var2 => "var2",
            Quantity::Var1Ub => "var1_ub",
            Quantity::Var1Lb => "var1_lb",
            Quantity::Var2Ub => "var2_ub",
            Quantity::Var2Lb => "var2_lb",
            Quantity::LogratioUbVar1 => "logratio_ub_var1",
            Quantity::LogratioUbVar2 => "logratio_ub_var2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Quantity::Fim,
            Quantity::Var1,
            Quantity::Var2,
            Quantity::Var1Ub,
            Quantity::Var1Lb,
            Quantity::Var2Ub,
            Quantity::Var2Lb,
            Quantity::LogratioUbVar1,
            Quantity::LogratioUbVar2,
        ]
        .into_iter()
        .find(|q| q.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub epoch: usize,
    pub group: String,
    pub quantity: Quantity,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentTrace {
    pub rows: Vec<TraceRow>,
    /// Mean training loss per epoch; entry 0 is the loss at initialization.
    pub losses: Vec<f64>,
}

impl ExperimentTrace {
    /// Header plus one LF-terminated line per row, values with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(out, "{},{},{},{:.16e}", r.epoch, r.group, r.quantity.as_str(), r.value).unwrap();
        }
        out
    }

    pub fn value(&self, epoch: usize, group: &str, quantity: Quantity) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.epoch == epoch && r.group == group && r.quantity == quantity)
            .map(|r| r.value)
    }
}

/// Parses the CSV produced by [`ExperimentTrace::to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut lines = text.split('\n');
    if lines.next() != Some(HEADER) {
        return Err("missing or wrong header".into());
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(format!("line {}: expected 4 fields", n + 2));
        }
        rows.push(TraceRow {
            epoch: f[0].parse().map_err(|e| format!("line {}: {e}", n + 2))?,
            group: f[1].to_string(),
            quantity: Quantity::parse(f[2]).ok_or_else(|| format!("line {}: unknown quantity {}", n + 2, f[2]))?,
            value: f[3].parse().map_err(|e| format!("line {}: {e}", n + 2))?,
        });
    }
    Ok(rows)
}
