//! Completed tours and their evaluation.

use super::{Instance, ProblemKind};
use crate::error::{Error, Result};

/// Completed solution: the visiting order of all customers plus its cost.
///
/// `actions` is the full order including the start node in first position.
/// TSP cost closes the cycle back to the start; CVRP cost includes every
/// implied depot leg plus the initial departure and final return.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    pub actions: Vec<usize>,
    pub cost: f64,
}

impl Tour {
    pub fn start(&self) -> usize {
        self.actions[0]
    }
}

/// Recomputes the cost of a visiting order from scratch.
///
/// Validates that `actions` is a permutation of all customers. The CVRP
/// depot-refill rule is replayed from the order alone, so any cost produced
/// incrementally during construction can be cross-checked against this.
pub fn evaluate(instance: &Instance, actions: &[usize]) -> Result<f64> {
    let n = instance.n();
    if actions.len() != n {
        return Err(Error::InvalidTour(format!(
            "{} actions for {n} customers",
            actions.len()
        )));
    }
    let mut seen = vec![false; n];
    for &a in actions {
        if a >= n {
            return Err(Error::InvalidTour(format!("node {a} out of range")));
        }
        if seen[a] {
            return Err(Error::InvalidTour(format!("node {a} visited twice")));
        }
        seen[a] = true;
    }

    match instance.kind() {
        ProblemKind::Tsp => {
            if n == 1 {
                return Ok(0.0);
            }
            let mut cost = 0.0;
            for w in actions.windows(2) {
                cost += instance.dist(w[0], w[1]);
            }
            cost += instance.dist(actions[n - 1], actions[0]);
            Ok(cost)
        }
        ProblemKind::Cvrp => {
            let mut cost = instance.depot_dist(actions[0]);
            let mut remaining = instance.capacity() - instance.demand(actions[0]);
            for w in actions.windows(2) {
                let (prev, next) = (w[0], w[1]);
                let demand = instance.demand(next);
                if demand > remaining {
                    cost += instance.depot_dist(prev) + instance.depot_dist(next);
                    remaining = instance.capacity() - demand;
                } else {
                    cost += instance.dist(prev, next);
                    remaining -= demand;
                }
            }
            cost += instance.depot_dist(actions[n - 1]);
            Ok(cost)
        }
    }
}
