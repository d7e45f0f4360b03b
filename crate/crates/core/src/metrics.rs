//! Gap ledgers and lifelong metrics.
//!
//! A ledger is a dense (T+1) x K grid of optimality gaps: one row per
//! evaluation epoch (row 0 is the untrained policy), one column per
//! principal task. The four summary metrics condense each column:
//!
//! - final performance: the last row, averaged over columns;
//! - forgetting: final minus the column's best, averaged;
//! - maximum forgetting: worst rise after the best point, averaged;
//! - best performance: the column's best, averaged.

use crate::error::{Error, Result};
use crate::policy::{greedy_rollout, PolicyParams};
use crate::vrp::{optimality_gap, Instance};

/// Dense gap grid, write-once per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLedger {
    tasks: usize,
    horizon: u32,
    cells: Vec<Option<f64>>,
}

impl MetricsLedger {
    /// Grid for `tasks` columns and epochs 0..=`horizon`.
    pub fn new(tasks: usize, horizon: u32) -> Result<Self> {
        if tasks == 0 {
            return Err(Error::InvalidParams("ledger needs at least one task".into()));
        }
        let rows = horizon as usize + 1;
        Ok(MetricsLedger { tasks, horizon, cells: vec![None; rows * tasks] })
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    fn index(&self, epoch: u32, task: usize) -> Result<usize> {
        if epoch > self.horizon || task >= self.tasks {
            return Err(Error::CellOutOfRange { epoch, task });
        }
        Ok(epoch as usize * self.tasks + task)
    }

    /// Records one finite gap; each cell accepts exactly one write.
    pub fn record(&mut self, epoch: u32, task: usize, gap: f64) -> Result<()> {
        if !gap.is_finite() {
            return Err(Error::NonFiniteValue(gap));
        }
        let idx = self.index(epoch, task)?;
        if self.cells[idx].is_some() {
            return Err(Error::DuplicateCell { epoch, task });
        }
        self.cells[idx] = Some(gap);
        Ok(())
    }

    pub fn get(&self, epoch: u32, task: usize) -> Option<f64> {
        self.index(epoch, task).ok().and_then(|i| self.cells[i])
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    /// Column `task` over all epochs; the ledger must be complete there.
    pub fn curve(&self, task: usize) -> Result<Vec<f64>> {
        (0..=self.horizon)
            .map(|t| {
                self.get(t, task)
                    .ok_or(Error::IncompleteLedger { epoch: t, task })
            })
            .collect()
    }
}

/// The four lifelong summary metrics, all in gap percentage points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifelongMetrics {
    /// Mean final gap.
    pub average_performance: f64,
    /// Mean rise from each task's best gap to its final gap.
    pub average_forgetting: f64,
    /// Mean worst rise above the best gap after it was reached.
    pub average_max_forgetting: f64,
    /// Mean best gap ever reached.
    pub average_best: f64,
}

/// Earliest minimum of a curve: (value, index).
pub fn tie_break_best(curve: &[f64]) -> (f64, usize) {
    let mut best = curve[0];
    let mut at = 0;
    for (i, &v) in curve.iter().enumerate().skip(1) {
        if v < best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

/// Condenses a complete ledger into the four metrics.
pub fn compute_metrics(ledger: &MetricsLedger) -> Result<LifelongMetrics> {
    let k = ledger.tasks() as f64;
    let (mut ap, mut afb, mut amfb, mut abpl) = (0.0, 0.0, 0.0, 0.0);
    for task in 0..ledger.tasks() {
        let curve = ledger.curve(task)?;
        let final_gap = *curve.last().expect("curve has at least one row");
        let (best, best_at) = tie_break_best(&curve);
        let worst_after_best =
            curve[best_at..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        ap += final_gap;
        afb += final_gap - best;
        amfb += worst_after_best - best;
        abpl += best;
    }
    Ok(LifelongMetrics {
        average_performance: ap / k,
        average_forgetting: afb / k,
        average_max_forgetting: amfb / k,
        average_best: abpl / k,
    })
}

/// Evaluation protocol for one test set: greedy rollout from the first
/// `n_starts` nodes (all nodes if fewer), best cost per instance, gap
/// against the paired reference, averaged over the set.
pub fn mean_greedy_gap(
    params: &PolicyParams,
    test_set: &[(Instance, f64)],
    n_starts: usize,
) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::InvalidParams("empty test set".into()));
    }
    let mut total = 0.0;
    for (instance, reference) in test_set {
        let starts = n_starts.max(1).min(instance.n());
        let mut best = f64::INFINITY;
        for s in 0..starts {
            let cost = greedy_rollout(params, instance, s)?.cost;
            if cost < best {
                best = cost;
            }
        }
        total += optimality_gap(best, *reference)?;
    }
    Ok(total / test_set.len() as f64)
}
