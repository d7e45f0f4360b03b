//! The lifelong training loop.
//!
//! One engine serves every strategy; strategies differ only in which
//! mechanisms are switched on (buffer, behavior replay, instance replay,
//! enhancement, multi-task batch draws) and whether the replay interval
//! adapts or stays fixed. Per batch the order is: sample and solve fresh
//! instances, compute replay losses on one sampled buffer entry, fold the
//! improved solutions back into that entry, take the optimizer step, then
//! offer the fresh batch (solved by the pre-update policy) to the buffer.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ee_update, next_interval, pir_step, Experience, ExperienceBuffer};
use crate::error::{Error, Result};
use crate::learner::{
    br_loss_and_grad, combine_losses, drl_loss_and_grad, AdamState, LossReport,
};
use crate::metrics::MetricsLedger;
use crate::policy::{FeatureConfig, PolicyParams, Trajectory};
use crate::seeding::child_rng;
use crate::taskgen::{sample_instance, TaskSchedule};
use crate::vrp::Instance;

/// Replay cadence used by the ablations instead of the adaptive interval:
/// the long-run average of the adaptive rule on the original workloads.
pub const FIXED_ABLATION_INTERVAL: f64 = 3.56;

/// Training strategy. All share the engine; see the switch table in
/// [`StrategyKind::switches`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    /// Full method: both replays, enhancement, adaptive interval.
    Dree,
    /// Plain training on the current task only.
    FineTuning,
    /// Buffer with behavior replay only.
    BehaviorOnly,
    /// Buffer with instance replay only, adaptive interval.
    InstanceOnly,
    /// No buffer; every batch draws its task epoch uniformly from the whole
    /// horizon. An oracle reference, not a lifelong method.
    MultiTask,
    /// Ablation: replay solves still run (so enhancement keeps working) but
    /// the instance-replay loss is dropped; fixed interval.
    NoPir,
    /// Ablation: behavior replay dropped; fixed interval.
    NoBr,
    /// Ablation: enhancement disabled; fixed interval.
    NoEe,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Dree,
        StrategyKind::FineTuning,
        StrategyKind::BehaviorOnly,
        StrategyKind::InstanceOnly,
        StrategyKind::MultiTask,
        StrategyKind::NoPir,
        StrategyKind::NoBr,
        StrategyKind::NoEe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Dree => "dree",
            StrategyKind::FineTuning => "fine-tuning",
            StrategyKind::BehaviorOnly => "behavior-only",
            StrategyKind::InstanceOnly => "instance-only",
            StrategyKind::MultiTask => "multi-task",
            StrategyKind::NoPir => "no-pir",
            StrategyKind::NoBr => "no-br",
            StrategyKind::NoEe => "no-ee",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParams(format!("unknown strategy '{s}'")))
    }

    pub(crate) fn switches(self) -> Switches {
        let fixed = Some(FIXED_ABLATION_INTERVAL);
        match self {
            StrategyKind::Dree => Switches {
                buffer: true,
                br: true,
                pir_solve: true,
                pir_loss: true,
                ee: true,
                multi_task: false,
                fixed_interval: None,
            },
            StrategyKind::FineTuning => Switches::OFF,
            StrategyKind::BehaviorOnly => Switches { buffer: true, br: true, ..Switches::OFF },
            StrategyKind::InstanceOnly => Switches {
                buffer: true,
                pir_solve: true,
                pir_loss: true,
                ..Switches::OFF
            },
            StrategyKind::MultiTask => Switches { multi_task: true, ..Switches::OFF },
            StrategyKind::NoPir => Switches {
                buffer: true,
                br: true,
                pir_solve: true,
                pir_loss: false,
                ee: true,
                multi_task: false,
                fixed_interval: fixed,
            },
            StrategyKind::NoBr => Switches {
                buffer: true,
                br: false,
                pir_solve: true,
                pir_loss: true,
                ee: true,
                multi_task: false,
                fixed_interval: fixed,
            },
            StrategyKind::NoEe => Switches {
                buffer: true,
                br: true,
                pir_solve: true,
                pir_loss: true,
                ee: false,
                multi_task: false,
                fixed_interval: fixed,
            },
        }
    }
}

/// Mechanism switches; the strategy table above is the only producer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Switches {
    pub buffer: bool,
    pub br: bool,
    pub pir_solve: bool,
    pub pir_loss: bool,
    pub ee: bool,
    pub multi_task: bool,
    pub fixed_interval: Option<f64>,
}

impl Switches {
    const OFF: Switches = Switches {
        buffer: false,
        br: false,
        pir_solve: false,
        pir_loss: false,
        ee: false,
        multi_task: false,
        fixed_interval: None,
    };
}

/// Engine knobs; [`EngineConfig::new`] fills the standard defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub strategy: StrategyKind,
    /// Behavior replay coefficient.
    pub alpha: f64,
    /// Instance replay coefficient.
    pub beta: f64,
    /// Buffer capacity in entries (each entry is one batch).
    pub buffer_capacity: usize,
    /// Adaptive interval bounds.
    pub interval_lb: u32,
    pub interval_ub: u32,
    /// Instances per batch (also the buffer entry size).
    pub batch_size: usize,
    pub batches_per_epoch: u32,
    /// Rollout starts per instance, capped at the instance size.
    pub n_starts: usize,
    pub learning_rate: f64,
    /// Extra batches appended to every epoch; used to grant replay-free
    /// strategies the same solve budget as a replaying run.
    pub parity_extra_batches: u32,
    /// Overrides the strategy's replay cadence when set.
    pub fixed_interval: Option<f64>,
    /// Return the final buffer in the run record.
    pub keep_buffer: bool,
}

impl EngineConfig {
    pub fn new(strategy: StrategyKind) -> Self {
        EngineConfig {
            strategy,
            alpha: 100.0,
            beta: 1.0,
            buffer_capacity: 256,
            interval_lb: 1,
            interval_ub: 4,
            batch_size: 16,
            batches_per_epoch: 16,
            n_starts: 8,
            learning_rate: AdamState::DEFAULT_LR,
            parity_extra_batches: 0,
            fixed_interval: None,
            keep_buffer: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!("alpha {} invalid", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParams(format!("beta {} invalid", self.beta)));
        }
        if self.buffer_capacity == 0 || self.batch_size == 0 || self.batches_per_epoch == 0 {
            return Err(Error::InvalidParams("zero-sized batch, epoch, or buffer".into()));
        }
        if self.interval_lb == 0 || self.interval_lb > self.interval_ub {
            return Err(Error::InvalidParams(format!(
                "interval bounds [{}, {}] invalid",
                self.interval_lb, self.interval_ub
            )));
        }
        if self.n_starts < 2 {
            return Err(Error::InvalidParams(format!("n_starts {} below 2", self.n_starts)));
        }
        if let Some(f) = self.fixed_interval {
            if !(f.is_finite() && f >= 1.0) {
                return Err(Error::InvalidParams(format!("fixed interval {f} below 1")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParams("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// Per-epoch accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochStats {
    pub batches: u32,
    pub replays: u32,
    pub enhancements: u64,
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub params: PolicyParams,
    pub ledger: MetricsLedger,
    /// Replay count per training epoch (index 0 is epoch 1).
    pub replays_per_epoch: Vec<u32>,
    pub batches_per_epoch: Vec<u32>,
    pub enhancements: u64,
    pub buffer: Option<ExperienceBuffer>,
}

struct EngineState {
    params: PolicyParams,
    adam: AdamState,
    buffer: ExperienceBuffer,
    rng: ChaCha8Rng,
    batch: u64,
    last_replay: u64,
    interval: u32,
    cadence_acc: f64,
}

fn train_epoch(
    st: &mut EngineState,
    schedule: &TaskSchedule,
    epoch: u32,
    cfg: &EngineConfig,
    switches: Switches,
) -> Result<EpochStats> {
    let base_task = schedule.task_at(epoch)?;
    let mut stats = EpochStats { batches: 0, replays: 0, enhancements: 0 };
    let dim = st.params.dim();
    for _ in 0..cfg.batches_per_epoch + cfg.parity_extra_batches {
        st.batch += 1;
        stats.batches += 1;
        let task = if switches.multi_task {
            let u = st.rng.gen_range(0..=schedule.total_epochs());
            schedule.task_at(u)?
        } else {
            base_task.clone()
        };
        let mut instances = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            instances.push(sample_instance(&task, &mut st.rng)?);
        }
        let refs: Vec<&Instance> = instances.iter().collect();
        let starts = cfg.n_starts.min(task.scale as usize);
        let drl = drl_loss_and_grad(&st.params, &refs, starts, &mut st.rng)?;

        let mut br = LossReport::zeros(dim);
        let mut pir = LossReport::zeros(dim);
        if switches.buffer && !st.buffer.is_empty() {
            let idx = st.buffer.sample_index(&mut st.rng)?;
            if switches.br {
                let items: Vec<(&Instance, &Trajectory)> = st
                    .buffer
                    .entry(idx)
                    .iter()
                    .map(|e| (e.instance(), e.best_trajectory()))
                    .collect();
                br = br_loss_and_grad(&st.params, &items)?;
            }
            if switches.pir_solve {
                let due = match switches.fixed_interval {
                    Some(cadence) => {
                        st.cadence_acc += 1.0;
                        st.cadence_acc >= cadence
                    }
                    None => st.batch - st.last_replay >= st.interval as u64,
                };
                if due {
                    let entry_starts = cfg.n_starts.min(
                        st.buffer
                            .entry(idx)
                            .iter()
                            .map(|e| e.instance().n())
                            .min()
                            .expect("entries are never empty"),
                    );
                    let out =
                        pir_step(&st.params, st.buffer.entry(idx), entry_starts, &mut st.rng)?;
                    stats.replays += 1;
                    match switches.fixed_interval {
                        Some(cadence) => st.cadence_acc -= cadence,
                        None => {
                            st.last_replay = st.batch;
                            st.interval = next_interval(
                                out.improved,
                                cfg.batch_size as u32,
                                cfg.interval_lb,
                                cfg.interval_ub,
                            )?;
                        }
                    }
                    if switches.ee {
                        let replaced = ee_update(st.buffer.entry_mut(idx), &out.fresh_best)?;
                        debug_assert_eq!(replaced, out.improved);
                        stats.enhancements += replaced as u64;
                    }
                    if switches.pir_loss {
                        pir = out.report;
                    }
                }
            }
        }

        let combined = combine_losses(&drl.report, &br, &pir, cfg.alpha, cfg.beta)?;
        st.adam.step(&mut st.params, &combined.gradient)?;

        if switches.buffer {
            let entry: Vec<Experience> = instances
                .into_iter()
                .zip(&drl.best)
                .map(|(instance, best)| Experience::new(instance, best, epoch))
                .collect::<Result<_>>()?;
            st.buffer.offer(entry, &mut st.rng)?;
        }
    }
    Ok(stats)
}

/// Runs a full lifelong trajectory: evaluate the untrained policy, then
/// alternate training epochs with evaluations.
///
/// `evaluate` receives the current parameters and the epoch index and must
/// return one gap per principal task; its results fill the ledger rows.
pub fn run_lifelong<F>(
    schedule: &TaskSchedule,
    cfg: &EngineConfig,
    seed: u64,
    evaluate: &mut F,
) -> Result<RunRecord>
where
    F: FnMut(&PolicyParams, u32) -> Result<Vec<f64>>,
{
    let switches = {
        let mut s = cfg.strategy.switches();
        if cfg.fixed_interval.is_some() {
            s.fixed_interval = cfg.fixed_interval;
        }
        s
    };
    run_with_switches(schedule, cfg, seed, switches, evaluate)
}

fn run_with_switches<F>(
    schedule: &TaskSchedule,
    cfg: &EngineConfig,
    seed: u64,
    switches: Switches,
    evaluate: &mut F,
) -> Result<RunRecord>
where
    F: FnMut(&PolicyParams, u32) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let tasks = schedule.principals().len();
    let horizon = schedule.total_epochs();
    let mut ledger = MetricsLedger::new(tasks, horizon)?;
    let mut st = EngineState {
        params: PolicyParams::zeros(FeatureConfig::Standard),
        adam: AdamState::new(FeatureConfig::Standard.dim(), cfg.learning_rate)?,
        buffer: ExperienceBuffer::new(cfg.buffer_capacity, cfg.batch_size)?,
        rng: child_rng(seed, 0),
        batch: 0,
        last_replay: 0,
        interval: cfg.interval_lb,
        cadence_acc: 0.0,
    };
    let mut record_row = |ledger: &mut MetricsLedger, params: &PolicyParams, t: u32| -> Result<()> {
        let gaps = evaluate(params, t)?;
        if gaps.len() != tasks {
            return Err(Error::LengthMismatch { expected: tasks, actual: gaps.len() });
        }
        for (i, gap) in gaps.into_iter().enumerate() {
            ledger.record(t, i, gap)?;
        }
        Ok(())
    };
    record_row(&mut ledger, &st.params, 0)?;
    let mut replays_per_epoch = Vec::with_capacity(horizon as usize);
    let mut batches_per_epoch = Vec::with_capacity(horizon as usize);
    let mut enhancements = 0;
    for t in 1..=horizon {
        let stats = train_epoch(&mut st, schedule, t, cfg, switches)?;
        replays_per_epoch.push(stats.replays);
        batches_per_epoch.push(stats.batches);
        enhancements += stats.enhancements;
        record_row(&mut ledger, &st.params, t)?;
    }
    Ok(RunRecord {
        params: st.params,
        ledger,
        replays_per_epoch,
        batches_per_epoch,
        enhancements,
        buffer: cfg.keep_buffer.then_some(st.buffer),
    })
}
