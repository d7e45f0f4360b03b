//! Dual replay with experience enhancement.
//!
//! The buffer stores batch-sized entries of experiences under batch-level
//! reservoir sampling, so every batch ever offered has equal probability of
//! being present. Instance replay re-solves one stored entry and counts how
//! many stored bests were beaten; that count adapts the replay interval.
//! Enhancement writes the improved solutions back into the entry in place.

mod engine;

pub use engine::{
    run_lifelong, EngineConfig, EpochStats, RunRecord, StrategyKind,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::learner::{drl_loss_and_grad, LossReport};
use crate::policy::{PolicyParams, Trajectory};
use crate::taskgen::round_half_up;
use crate::vrp::Instance;

/// One stored problem: the instance, the best solution seen on it, and how
/// often enhancement improved it.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    instance: Instance,
    best_cost: f64,
    best_trajectory: Trajectory,
    origin_epoch: u32,
    enhancement_count: u32,
}

impl Experience {
    /// Stores a solved instance. The trajectory's probabilities are
    /// quantized to storage precision on the way in.
    pub fn new(instance: Instance, trajectory: &Trajectory, origin_epoch: u32) -> Result<Self> {
        if trajectory.instance_id != instance.id() {
            return Err(Error::ReplayMismatch(format!(
                "trajectory for instance {} stored with instance {}",
                trajectory.instance_id,
                instance.id()
            )));
        }
        if trajectory.steps.len() != instance.n() {
            return Err(Error::ReplayMismatch(format!(
                "{} steps for {} customers",
                trajectory.steps.len(),
                instance.n()
            )));
        }
        Ok(Experience {
            instance,
            best_cost: trajectory.cost,
            best_trajectory: trajectory.quantized(),
            origin_epoch,
            enhancement_count: 0,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn best_cost(&self) -> f64 {
        self.best_cost
    }

    pub fn best_trajectory(&self) -> &Trajectory {
        &self.best_trajectory
    }

    pub fn origin_epoch(&self) -> u32 {
        self.origin_epoch
    }

    pub fn enhancement_count(&self) -> u32 {
        self.enhancement_count
    }
}

/// Reservoir of batch-sized entries.
#[derive(Debug, Clone)]
pub struct ExperienceBuffer {
    entries: Vec<Vec<Experience>>,
    capacity: usize,
    entry_size: usize,
    seen: u64,
}

impl ExperienceBuffer {
    /// Buffer holding up to `capacity` entries of exactly `entry_size`
    /// experiences each.
    pub fn new(capacity: usize, entry_size: usize) -> Result<Self> {
        if capacity == 0 || entry_size == 0 {
            return Err(Error::InvalidParams(format!(
                "buffer of {capacity} entries x {entry_size} experiences"
            )));
        }
        Ok(ExperienceBuffer { entries: Vec::new(), capacity, entry_size, seen: 0 })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entry_size(&self) -> usize {
        self.entry_size
    }

    /// Entries ever offered, including rejected ones.
    pub fn seen_count(&self) -> u64 {
        self.seen
    }

    /// Reservoir offer. Counts the entry first, then keeps it outright while
    /// below capacity, otherwise keeps it with probability capacity/seen and
    /// evicts a uniformly chosen victim. Returns whether it was kept.
    pub fn offer(&mut self, entry: Vec<Experience>, rng: &mut ChaCha8Rng) -> Result<bool> {
        if entry.len() != self.entry_size {
            return Err(Error::WrongEntrySize { expected: self.entry_size, actual: entry.len() });
        }
        self.seen += 1;
        if self.entries.len() < self.capacity {
            self.entries.push(entry);
            return Ok(true);
        }
        let keep = rng.gen::<f64>() < self.capacity as f64 / self.seen as f64;
        if keep {
            let victim = rng.gen_range(0..self.capacity);
            self.entries[victim] = entry;
        }
        Ok(keep)
    }

    /// Uniform entry index.
    pub fn sample_index(&self, rng: &mut ChaCha8Rng) -> Result<usize> {
        if self.entries.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        Ok(rng.gen_range(0..self.entries.len()))
    }

    pub fn entry(&self, index: usize) -> &[Experience] {
        &self.entries[index]
    }

    pub fn entry_mut(&mut self, index: usize) -> &mut [Experience] {
        &mut self.entries[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Experience]> {
        self.entries.iter().map(Vec::as_slice)
    }
}

/// Next replay interval from the improvement count of the last replay.
///
/// Interpolates from `ub` (nothing improved) down to `lb` (everything
/// improved), rounding half up: frequent improvement means the buffer still
/// teaches something, so replay more often.
pub fn next_interval(improved: u32, entry_size: u32, lb: u32, ub: u32) -> Result<u32> {
    if entry_size == 0 {
        return Err(Error::InvalidParams("entry size zero".into()));
    }
    if lb == 0 || lb > ub {
        return Err(Error::InvalidParams(format!("interval bounds [{lb}, {ub}] invalid")));
    }
    if improved > entry_size {
        return Err(Error::InvalidParams(format!(
            "{improved} improvements out of {entry_size} instances"
        )));
    }
    let raw = ub as f64 - (improved as f64 / entry_size as f64) * (ub - lb) as f64;
    Ok(round_half_up(raw).clamp(lb, ub))
}

/// Result of replaying one buffered entry.
#[derive(Debug, Clone)]
pub struct PirOutcome {
    /// Driving loss evaluated on the stored instances.
    pub report: LossReport,
    /// Stored instances whose fresh best strictly beat the stored best.
    pub improved: u32,
    /// Fresh best trajectory per stored instance, entry-aligned.
    pub fresh_best: Vec<Trajectory>,
}

/// Instance replay: re-solves a stored entry with the current policy.
///
/// The loss is the plain driving loss on the stored instances; the weighting
/// coefficient is applied later when losses combine.
pub fn pir_step(
    params: &PolicyParams,
    entry: &[Experience],
    n_starts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PirOutcome> {
    let instances: Vec<&Instance> = entry.iter().map(Experience::instance).collect();
    let outcome = drl_loss_and_grad(params, &instances, n_starts, rng)?;
    let improved = entry
        .iter()
        .zip(&outcome.best)
        .filter(|(exp, fresh)| fresh.cost < exp.best_cost)
        .count() as u32;
    Ok(PirOutcome { report: outcome.report, improved, fresh_best: outcome.best })
}

/// Experience enhancement: writes strictly better fresh solutions into the
/// entry, bumping each improved experience's counter. Returns how many were
/// replaced, which always equals the paired replay's improvement count.
pub fn ee_update(entry: &mut [Experience], fresh_best: &[Trajectory]) -> Result<u32> {
    if entry.len() != fresh_best.len() {
        return Err(Error::LengthMismatch { expected: entry.len(), actual: fresh_best.len() });
    }
    for (exp, fresh) in entry.iter().zip(fresh_best) {
        if fresh.instance_id != exp.instance.id() {
            return Err(Error::ReplayMismatch(format!(
                "fresh solution for instance {} aligned with stored instance {}",
                fresh.instance_id,
                exp.instance.id()
            )));
        }
    }
    let mut replaced = 0;
    for (exp, fresh) in entry.iter_mut().zip(fresh_best) {
        if fresh.cost < exp.best_cost {
            exp.best_cost = fresh.cost;
            exp.best_trajectory = fresh.quantized();
            exp.enhancement_count += 1;
            replaced += 1;
        }
    }
    Ok(replaced)
}
