use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use reslab::table::{fmt_f64, Table};
use toml::Value;

use crate::config::ExperimentConfig;
use crate::output::write_atomic;
use crate::pipelines::{run_in, RunOutcome};
use crate::CliError;

#[derive(Debug)]
pub struct SweepOutcome {
    pub axis: String,
    pub values: Vec<f64>,
    /// One entry per value, in input order; failures keep their error.
    pub runs: Vec<Result<RunOutcome, CliError>>,
    pub table: Table,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.is_err()).count()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Float(x) => fmt_f64(*x),
        Value::Integer(n) => n.to_string(),
        Value::Boolean(b) => b.to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Merges per-value summaries into one table with a fixed column order.
fn merge(axis: &str, values: &[f64], runs: &[Result<RunOutcome, CliError>]) -> Table {
    let keys: BTreeSet<&str> = runs
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .flat_map(|o| o.summary.keys().map(String::as_str))
        .filter(|k| *k != "experiment")
        .collect();
    let mut header = vec![axis, "status", "error"];
    header.extend(keys.iter().copied());
    let mut t = Table::new(&header);
    for (v, r) in values.iter().zip(runs) {
        let mut row = vec![fmt_f64(*v)];
        match r {
            Ok(o) => {
                row.push("ok".into());
                row.push(String::new());
                row.extend(keys.iter().map(|k| o.summary.get(*k).map(cell).unwrap_or_default()));
            }
            Err(e) => {
                row.push("failed".into());
                row.push(e.to_string().replace([',', '\n'], ";"));
                row.extend(keys.iter().map(|_| String::new()));
            }
        }
        t.push(row);
    }
    t
}

/// Runs `cfg` once per value of `axis` on up to `jobs` threads and writes `sweep.csv` under `dir`.
///
/// Each value writes into its own subdirectory; a failing value does not stop the others.
pub fn sweep(cfg: &ExperimentConfig, axis: &str, values: &[f64], jobs: usize, dir: &Path) -> Result<SweepOutcome, CliError> {
    if values.is_empty() {
        return Err(CliError::Validation("--values: empty".into()));
    }
    let mut configs = Vec::with_capacity(values.len());
    for &v in values {
        let mut c = cfg.clone();
        c.parameters.set_axis(c.experiment, axis, v)?;
        configs.push(c);
    }
    let dirs: Vec<PathBuf> = (0..values.len()).map(|i| dir.join(format!("{axis}_{i:03}"))).collect();
    let slots: Vec<Mutex<Option<Result<RunOutcome, CliError>>>> = values.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, values.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let outcome = run_in(&configs[i], &dirs[i]);
                *slots[i].lock().expect("slot lock") = Some(outcome);
            });
        }
    });
    let runs: Vec<Result<RunOutcome, CliError>> =
        slots.into_iter().map(|m| m.into_inner().expect("slot lock").expect("every value ran")).collect();
    let table = merge(axis, values, &runs);
    write_atomic(&dir.join("sweep.csv"), table.to_csv().as_bytes())?;
    Ok(SweepOutcome { axis: axis.to_string(), values: values.to_vec(), runs, table })
}
