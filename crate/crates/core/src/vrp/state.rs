//! Construction states and transitions.
//!
//! A state tracks which customers are visited, where the vehicle is, and (for
//! CVRP) its remaining capacity. CVRP routes are encoded implicitly: choosing
//! a customer whose demand exceeds the remaining capacity means the vehicle
//! returns to the depot first, refills, then serves it. There is no explicit
//! depot action, so every completed action sequence is exactly one
//! permutation of the customers.

use super::{Instance, ProblemKind};
use crate::error::{Error, Result};

/// Partial solution during tour construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionState {
    visited: Vec<bool>,
    visited_count: usize,
    current: Option<usize>,
    remaining_capacity: u32,
    step_count: u32,
}

impl ConstructionState {
    /// Empty state: nothing visited, vehicle at the depot (CVRP) or nowhere
    /// yet (TSP), full capacity.
    pub fn new(instance: &Instance) -> Self {
        ConstructionState {
            visited: vec![false; instance.n()],
            visited_count: 0,
            current: None,
            remaining_capacity: instance.capacity(),
            step_count: 0,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.visited_count == self.visited.len()
    }

    /// Node the vehicle stands at, `None` before the first move.
    pub fn current(&self) -> Option<usize> {
        self.current
    }

    pub fn is_visited(&self, node: usize) -> bool {
        self.visited[node]
    }

    pub fn visited_count(&self) -> usize {
        self.visited_count
    }

    pub fn remaining_capacity(&self) -> u32 {
        self.remaining_capacity
    }

    pub fn step_count(&self) -> u32 {
        self.step_count
    }
}

/// Feasible-action mask for `state`.
///
/// TSP: all unvisited nodes. CVRP: unvisited nodes whose demand fits the
/// remaining capacity; when none fit but unvisited nodes remain, every
/// unvisited node is feasible (serving it implies a depot refill first).
/// Terminal states have no actions.
pub fn feasible_actions(instance: &Instance, state: &ConstructionState) -> Result<Vec<bool>> {
    if state.is_terminal() {
        return Err(Error::TerminalState);
    }
    let mut mask: Vec<bool> = state.visited.iter().map(|v| !v).collect();
    if instance.kind() == ProblemKind::Cvrp {
        let mut any_fits = false;
        for (i, m) in mask.iter().enumerate() {
            if *m && instance.demand(i) <= state.remaining_capacity {
                any_fits = true;
                break;
            }
        }
        if any_fits {
            for (i, m) in mask.iter_mut().enumerate() {
                if *m && instance.demand(i) > state.remaining_capacity {
                    *m = false;
                }
            }
        }
        // otherwise leave the full unvisited set: the move refills en route
    }
    Ok(mask)
}

/// Ascending list of feasible node indices.
pub fn feasible_list(instance: &Instance, state: &ConstructionState) -> Result<Vec<usize>> {
    let mask = feasible_actions(instance, state)?;
    Ok(mask
        .iter()
        .enumerate()
        .filter_map(|(i, &m)| m.then_some(i))
        .collect())
}

/// Whether serving `action` from `state` routes through the depot first.
///
/// Only meaningful mid-route: the initial departure from the depot is not a
/// return. TSP never returns.
pub fn implies_depot_return(instance: &Instance, state: &ConstructionState, action: usize) -> bool {
    instance.kind() == ProblemKind::Cvrp
        && state.current.is_some()
        && instance.demand(action) > state.remaining_capacity
}

/// Applies `action`, returning the successor state.
///
/// Rejects visited or capacity-infeasible choices (an unvisited over-capacity
/// node is still feasible when the refill rule makes it so).
pub fn apply_action(
    instance: &Instance,
    state: &ConstructionState,
    action: usize,
) -> Result<ConstructionState> {
    let mask = feasible_actions(instance, state)?;
    if action >= mask.len() || !mask[action] {
        return Err(Error::InfeasibleAction { node: action });
    }
    let mut next = state.clone();
    if instance.kind() == ProblemKind::Cvrp {
        let demand = instance.demand(action);
        next.remaining_capacity = if implies_depot_return(instance, state, action) {
            instance.capacity() - demand
        } else {
            state.remaining_capacity - demand
        };
    }
    next.visited[action] = true;
    next.visited_count += 1;
    next.current = Some(action);
    next.step_count += 1;
    Ok(next)
}
