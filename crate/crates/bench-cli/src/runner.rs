//! Orchestration: turn a scenario plus run options into trained parameters,
//! a filled gap ledger, and on-disk artifacts.
//!
//! Everything here is deterministic in the pair (configuration, seed). Test
//! sets are derived from their own seed stream, so every strategy evaluated
//! against the same scenario and test seed sees identical held-out instances
//! and identical reference costs.

use std::path::Path;

use anyhow::{Context, Result};
use lifelong_vrp::dree::{run_lifelong, EngineConfig, RunRecord};
use lifelong_vrp::metrics::{compute_metrics, mean_greedy_gap, LifelongMetrics};
use lifelong_vrp::policy::PolicyParams;
use lifelong_vrp::seeding::child_rng;
use lifelong_vrp::taskgen::{sample_instance, TaskSchedule};
use lifelong_vrp::vrp::{brute_force_optimal, reference_solve, Instance};
use lifelong_vrp::Error;
use serde::Serialize;

use crate::emit::{curves_csv, write_atomic};
use crate::scenario::Scenario;
use crate::svg;

/// Options for one training run on top of the engine configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub engine: EngineConfig,
    /// Seed of the training stream.
    pub seed: u64,
    /// Held-out instances per principal task.
    pub test_size: usize,
    /// Seed of the test stream; shared across strategies being compared.
    pub test_seed: u64,
    /// Local-search restarts for reference costs of instances too large to
    /// solve exactly.
    pub test_restarts: u32,
}

impl RunConfig {
    pub fn new(engine: EngineConfig, seed: u64) -> Self {
        RunConfig { engine, seed, test_size: 64, test_seed: 7, test_restarts: 20 }
    }
}

/// Everything a finished run produces in memory.
#[derive(Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub metrics: LifelongMetrics,
    pub names: Vec<String>,
    pub interval: u32,
}

/// One held-out instance with its reference cost.
pub type TestSet = Vec<(Instance, f64)>;

/// Draws the per-principal test sets and computes their reference costs:
/// exact where feasible, multi-restart local search otherwise.
pub fn build_test_sets(schedule: &TaskSchedule, cfg: &RunConfig) -> Result<Vec<TestSet>> {
    let k = schedule.principals().len();
    let mut sets = Vec::with_capacity(k);
    for i in 0..k {
        let endpoint = schedule.interval() * i as u32;
        let spec = schedule.task_at(endpoint)?;
        let mut draw_rng = child_rng(cfg.test_seed, i as u64);
        let mut ref_rng = child_rng(cfg.test_seed, (k + i) as u64);
        let mut set = Vec::with_capacity(cfg.test_size);
        for _ in 0..cfg.test_size {
            let instance = sample_instance(&spec, &mut draw_rng)?;
            let reference = match brute_force_optimal(&instance) {
                Ok(tour) => tour.cost,
                Err(Error::InstanceTooLarge { .. }) => {
                    reference_solve(&instance, cfg.test_restarts, &mut ref_rng)?
                }
                Err(e) => return Err(e.into()),
            };
            set.push((instance, reference));
        }
        sets.push(set);
    }
    Ok(sets)
}

/// Trains one strategy over the scenario and fills the gap ledger.
pub fn run(scenario: &Scenario, cfg: &RunConfig) -> Result<RunOutput> {
    let schedule = scenario.schedule()?;
    let test_sets = build_test_sets(&schedule, cfg)?;
    let eval_starts = cfg.engine.n_starts;
    let mut evaluate = |params: &PolicyParams, _t: u32| {
        test_sets
            .iter()
            .map(|set| mean_greedy_gap(params, set, eval_starts))
            .collect::<lifelong_vrp::Result<Vec<f64>>>()
    };
    let record = run_lifelong(&schedule, &cfg.engine, cfg.seed, &mut evaluate)?;
    let metrics = compute_metrics(&record.ledger)?;
    let names = schedule.principals().iter().map(|p| p.name.clone()).collect();
    Ok(RunOutput { record, metrics, names, interval: schedule.interval() })
}

/// Runs and writes `curves.csv`, `metrics.json`, and `curves.svg` into
/// `out_dir`. Artifacts are byte-identical across repeats of the same
/// configuration and seed.
pub fn execute(scenario: &Scenario, cfg: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    let output = run(scenario, cfg)?;
    let csv = curves_csv(&output.record.ledger, &output.names)?;
    write_atomic(&out_dir.join("curves.csv"), csv.as_bytes())?;
    let report = report_json(scenario, cfg, &output)?;
    write_atomic(&out_dir.join("metrics.json"), report.as_bytes())?;
    let plot = svg::render(&output.record.ledger, &output.names, output.interval)?;
    write_atomic(&out_dir.join("curves.svg"), plot.as_bytes())?;
    Ok(output)
}

#[derive(Serialize)]
struct PrincipalEcho<'a> {
    name: &'a str,
    kind: &'a str,
    scale: u32,
}

#[derive(Serialize)]
struct ScenarioEcho<'a> {
    problem: &'a str,
    total_epochs: u32,
    interval: u32,
    principals: Vec<PrincipalEcho<'a>>,
}

#[derive(Serialize)]
struct ConfigEcho {
    alpha: f64,
    beta: f64,
    buffer_capacity: usize,
    interval_lb: u32,
    interval_ub: u32,
    batch_size: usize,
    batches_per_epoch: u32,
    n_starts: usize,
    learning_rate: f64,
    parity_extra_batches: u32,
    fixed_interval: Option<f64>,
    test_size: usize,
    test_seed: u64,
    test_restarts: u32,
}

#[derive(Serialize)]
struct MetricsEcho {
    average_performance: f64,
    average_forgetting: f64,
    average_max_forgetting: f64,
    average_best: f64,
}

#[derive(Serialize)]
struct RunReport<'a> {
    schema: &'static str,
    strategy: &'a str,
    seed: u64,
    scenario: ScenarioEcho<'a>,
    config: ConfigEcho,
    metrics: MetricsEcho,
    replays_per_epoch: &'a [u32],
    batches_per_epoch: &'a [u32],
    enhancements: u64,
}

/// The metrics.json body for a finished run.
pub fn report_json(scenario: &Scenario, cfg: &RunConfig, output: &RunOutput) -> Result<String> {
    let report = RunReport {
        schema: "llvrp-run v1",
        strategy: cfg.engine.strategy.name(),
        seed: cfg.seed,
        scenario: ScenarioEcho {
            problem: scenario.problem.name(),
            total_epochs: scenario.total_epochs,
            interval: output.interval,
            principals: scenario
                .principals
                .iter()
                .map(|p| PrincipalEcho { name: &p.name, kind: p.kind.name(), scale: p.scale })
                .collect(),
        },
        config: ConfigEcho {
            alpha: cfg.engine.alpha,
            beta: cfg.engine.beta,
            buffer_capacity: cfg.engine.buffer_capacity,
            interval_lb: cfg.engine.interval_lb,
            interval_ub: cfg.engine.interval_ub,
            batch_size: cfg.engine.batch_size,
            batches_per_epoch: cfg.engine.batches_per_epoch,
            n_starts: cfg.engine.n_starts,
            learning_rate: cfg.engine.learning_rate,
            parity_extra_batches: cfg.engine.parity_extra_batches,
            fixed_interval: cfg.engine.fixed_interval,
            test_size: cfg.test_size,
            test_seed: cfg.test_seed,
            test_restarts: cfg.test_restarts,
        },
        metrics: MetricsEcho {
            average_performance: output.metrics.average_performance,
            average_forgetting: output.metrics.average_forgetting,
            average_max_forgetting: output.metrics.average_max_forgetting,
            average_best: output.metrics.average_best,
        },
        replays_per_epoch: &output.record.replays_per_epoch,
        batches_per_epoch: &output.record.batches_per_epoch,
        enhancements: output.record.enhancements,
    };
    let mut body = serde_json::to_string_pretty(&report).context("serializing run report")?;
    body.push('\n');
    Ok(body)
}
