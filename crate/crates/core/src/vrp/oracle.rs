//! Reference solvers: exhaustive optimum for tiny instances, nearest
//! neighbor plus first-improvement 2-opt for everything else.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{evaluate, Instance, ProblemKind, Tour};
use crate::error::{Error, Result};

/// Largest TSP the exhaustive solver accepts.
pub const BRUTE_FORCE_TSP_LIMIT: usize = 9;
/// Largest CVRP the exhaustive solver accepts.
pub const BRUTE_FORCE_CVRP_LIMIT: usize = 7;

fn for_each_permutation(items: &mut [usize], from: usize, visit: &mut impl FnMut(&[usize])) {
    if from == items.len() {
        visit(items);
        return;
    }
    for i in from..items.len() {
        items.swap(from, i);
        for_each_permutation(items, from + 1, visit);
        items.swap(from, i);
    }
}

/// Exhaustive optimum.
///
/// TSP fixes the first node (cycle cost is rotation invariant) and permutes
/// the rest; CVRP permutes everything because depot refills break the
/// symmetry. Limits: 9 nodes (TSP), 7 (CVRP).
pub fn brute_force_optimal(instance: &Instance) -> Result<Tour> {
    let n = instance.n();
    let limit = match instance.kind() {
        ProblemKind::Tsp => BRUTE_FORCE_TSP_LIMIT,
        ProblemKind::Cvrp => BRUTE_FORCE_CVRP_LIMIT,
    };
    if n > limit {
        return Err(Error::InstanceTooLarge { nodes: n, limit });
    }
    let mut order: Vec<usize> = (0..n).collect();
    let fixed_prefix = match instance.kind() {
        ProblemKind::Tsp => 1.min(n),
        ProblemKind::Cvrp => 0,
    };
    let mut best_cost = f64::INFINITY;
    let mut best_order = order.clone();
    for_each_permutation(&mut order, fixed_prefix, &mut |perm| {
        let cost = evaluate(instance, perm).expect("permutation of all customers");
        if cost < best_cost {
            best_cost = cost;
            best_order = perm.to_vec();
        }
    });
    Ok(Tour { actions: best_order, cost: best_cost })
}

/// Greedy construction from `start`, always taking the cheapest next move.
///
/// The marginal cost of an unvisited node counts the depot detour whenever
/// its demand exceeds the remaining load. Ties go to the lowest index.
pub fn nearest_neighbor(instance: &Instance, start: usize) -> Result<Vec<usize>> {
    let n = instance.n();
    if start >= n {
        return Err(Error::InfeasibleAction { node: start });
    }
    let cvrp = instance.kind() == ProblemKind::Cvrp;
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    visited[start] = true;
    order.push(start);
    let mut remaining = if cvrp {
        instance.capacity() - instance.demand(start)
    } else {
        0
    };
    let mut current = start;
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_cost = f64::INFINITY;
        let mut best_refill = false;
        for j in 0..n {
            if visited[j] {
                continue;
            }
            let (cost, refill) = if cvrp && instance.demand(j) > remaining {
                (instance.depot_dist(current) + instance.depot_dist(j), true)
            } else {
                (instance.dist(current, j), false)
            };
            if cost < best_cost {
                best_cost = cost;
                best = j;
                best_refill = refill;
            }
        }
        if cvrp {
            remaining = if best_refill {
                instance.capacity() - instance.demand(best)
            } else {
                remaining - instance.demand(best)
            };
        }
        visited[best] = true;
        order.push(best);
        current = best;
    }
    Ok(order)
}

/// Splits a visiting order into refill-delimited routes (index ranges).
fn route_spans(instance: &Instance, order: &[usize]) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut from = 0;
    let mut remaining = instance.capacity() - instance.demand(order[0]);
    for (pos, &node) in order.iter().enumerate().skip(1) {
        let demand = instance.demand(node);
        if demand > remaining {
            spans.push((from, pos));
            from = pos;
            remaining = instance.capacity() - demand;
        } else {
            remaining -= demand;
        }
    }
    spans.push((from, order.len()));
    spans
}

/// First-improvement 2-opt to a local optimum.
///
/// TSP reverses segments of the cycle using constant-time edge deltas. CVRP
/// restricts reversals to single routes and accepts on the re-evaluated cost
/// of the whole order, because moving a route's first node can shift the
/// implied refill points downstream.
pub fn two_opt(instance: &Instance, order: &[usize]) -> Result<Vec<usize>> {
    let mut order = order.to_vec();
    let n = order.len();
    if n != instance.n() {
        return Err(Error::InvalidTour(format!("{n} actions for {} customers", instance.n())));
    }
    if n < 3 {
        return Ok(order);
    }
    const EPS: f64 = 1e-9;
    match instance.kind() {
        ProblemKind::Tsp => loop {
            let mut improved = false;
            'scan: for i in 1..n - 1 {
                for j in i + 1..n {
                    let after_j = if j + 1 == n { 0 } else { j + 1 };
                    let delta = instance.dist(order[i - 1], order[j])
                        + instance.dist(order[i], order[after_j])
                        - instance.dist(order[i - 1], order[i])
                        - instance.dist(order[j], order[after_j]);
                    if delta < -EPS {
                        order[i..=j].reverse();
                        improved = true;
                        break 'scan;
                    }
                }
            }
            if !improved {
                return Ok(order);
            }
        },
        ProblemKind::Cvrp => {
            let mut cost = evaluate(instance, &order)?;
            loop {
                let mut improved = false;
                let spans = route_spans(instance, &order);
                'scan: for &(lo, hi) in &spans {
                    for i in lo..hi.saturating_sub(1) {
                        for j in i + 1..hi {
                            if i == lo && j == hi - 1 {
                                continue; // whole-route reversal is cost neutral
                            }
                            order[i..=j].reverse();
                            let candidate = evaluate(instance, &order)?;
                            if candidate < cost - EPS {
                                cost = candidate;
                                improved = true;
                                break 'scan;
                            }
                            order[i..=j].reverse();
                        }
                    }
                }
                if !improved {
                    return Ok(order);
                }
            }
        }
    }
}

/// Best nearest-neighbor + 2-opt cost over random restarts.
///
/// Each restart draws a start node; the local optimum's re-evaluated cost is
/// kept if it beats the incumbent. Deterministic for a fixed RNG state.
pub fn reference_solve(instance: &Instance, restarts: u32, rng: &mut ChaCha8Rng) -> Result<f64> {
    if restarts == 0 {
        return Err(Error::InvalidParams("reference_solve needs at least one restart".into()));
    }
    let n = instance.n();
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let start = rng.gen_range(0..n);
        let greedy = nearest_neighbor(instance, start)?;
        let improved = two_opt(instance, &greedy)?;
        let cost = evaluate(instance, &improved)?;
        if cost < best {
            best = cost;
        }
    }
    Ok(best)
}

/// Percent excess of `cost` over `reference`; negative when below it.
pub fn optimality_gap(cost: f64, reference: f64) -> Result<f64> {
    if !(reference.is_finite() && reference > 0.0) {
        return Err(Error::NonPositiveReference(reference));
    }
    Ok(100.0 * (cost - reference) / reference)
}
