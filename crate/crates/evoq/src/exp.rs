//! Experiment harness: seeded batches of optimizer runs, optionally
//! spread across a worker pool, with CSV emission for traces and
//! cross-run summaries. Results are byte-identical regardless of the
//! worker count because each run depends only on its own seed.

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::optim::{run, OptimizerConfig, RunRecord};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Batch-level settings shared by every optimizer in an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    /// nfe checkpoints for traces; None means 200 log-spaced points
    /// ending exactly at the budget.
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_runs() -> usize {
    20
}
fn default_budget() -> u64 {
    100_000
}
fn default_base_seed() -> u64 {
    1
}
fn default_workers() -> usize {
    1
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            runs: default_runs(),
            budget: default_budget(),
            base_seed: default_base_seed(),
            checkpoints: None,
            workers: default_workers(),
        }
    }
}

impl ExperimentConfig {
    pub fn resolved_checkpoints(&self) -> Vec<u64> {
        match &self.checkpoints {
            Some(c) => c.clone(),
            None => log_spaced_checkpoints(200, self.budget),
        }
    }
}

/// Strictly ascending log-spaced nfe checkpoints ending at the budget;
/// duplicates from rounding are collapsed, so short budgets yield fewer
/// than `count` points.
pub fn log_spaced_checkpoints(count: usize, budget: u64) -> Vec<u64> {
    let mut points = Vec::with_capacity(count);
    let b = budget.max(1) as f64;
    for k in 1..=count {
        let v = b.powf(k as f64 / count as f64).round() as u64;
        let v = v.clamp(1, budget.max(1));
        if points.last() != Some(&v) {
            points.push(v);
        }
    }
    if points.last() != Some(&budget) && budget >= 1 {
        points.push(budget);
    }
    points
}

/// Mean and sample standard deviation (n - 1 denominator; 0 when fewer
/// than two values).
pub fn summarize(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `exp.runs` seeded optimizations (seed = base_seed + run index)
/// of one optimizer, reporting each run's outcome individually so one
/// failed run does not discard the others. The factory builds a fresh
/// objective per run so noisy objectives get independent, run-indexed
/// noise streams.
pub fn run_batch_each<F>(
    opt_config: &OptimizerConfig,
    make_objective: F,
    exp: &ExperimentConfig,
) -> Result<Vec<Result<RunRecord>>>
where
    F: Fn(usize) -> Result<Box<dyn Objective>> + Sync,
{
    if exp.runs == 0 {
        return Err(Error::invalid_argument("experiment needs at least one run"));
    }
    let checkpoints = exp.resolved_checkpoints();
    let workers = exp.workers.max(1).min(exp.runs);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunRecord>>>> =
        Mutex::new((0..exp.runs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= exp.runs {
                    break;
                }
                let outcome = make_objective(i).and_then(|mut obj| {
                    run(
                        opt_config,
                        obj.as_mut(),
                        exp.budget,
                        exp.base_seed + i as u64,
                        &checkpoints,
                    )
                });
                results.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    Ok(results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every run index visited"))
        .collect())
}

/// Like `run_batch_each` but fails on the first run error.
pub fn run_batch<F>(
    opt_config: &OptimizerConfig,
    make_objective: F,
    exp: &ExperimentConfig,
) -> Result<Vec<RunRecord>>
where
    F: Fn(usize) -> Result<Box<dyn Objective>> + Sync,
{
    run_batch_each(opt_config, make_objective, exp)?
        .into_iter()
        .collect()
}

/// Trace CSV: header `nfe,best`, one row per checkpoint, full-precision
/// scientific notation so replays compare byte-for-byte.
pub fn trace_to_csv(trace: &[(u64, f64)]) -> String {
    let mut out = String::from("nfe,best\n");
    for &(nfe, best) in trace {
        out.push_str(&format!("{nfe},{best:.16e}\n"));
    }
    out
}

/// One optimizer's aggregate over a batch.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub optimizer: String,
    pub mean_best: f64,
    pub std_best: f64,
    pub mean_time_s: f64,
}

impl SummaryRow {
    pub fn from_records(optimizer: &str, records: &[RunRecord]) -> Self {
        let finals: Vec<f64> = records.iter().map(|r| r.final_best.fitness).collect();
        let (mean_best, std_best) = summarize(&finals);
        let times: Vec<f64> = records.iter().map(|r| r.wall_time).collect();
        let (mean_time_s, _) = summarize(&times);
        SummaryRow {
            optimizer: optimizer.to_string(),
            mean_best,
            std_best,
            mean_time_s,
        }
    }
}

/// Summary CSV: header `optimizer,mean_best,std_best,mean_time_s`.
pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("optimizer,mean_best,std_best,mean_time_s\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e}\n",
            row.optimizer, row.mean_best, row.std_best, row.mean_time_s
        ));
    }
    out
}
