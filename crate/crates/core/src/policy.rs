//! Featurized softmax construction policy.
//!
//! The policy scores each feasible node with a linear function of hand-built
//! features and samples (or argmaxes) from the softmax over those scores.
//! Rollouts force their start node as a recorded first step so stored
//! trajectories can be replayed index-aligned from the empty state; the
//! forced step is a singleton distribution and contributes nothing to any
//! loss or gradient.
//!
//! Feature geometry always uses plain Euclidean distances on the stored
//! unit-square coordinates, even when the instance's cost metric rounds.
//! Position anchors fall back from depot to centroid for TSP.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vrp::{
    apply_action, evaluate, feasible_actions, implies_depot_return, ConstructionState, Instance,
    Point, ProblemKind,
};

/// Versioned feature layout; checkpoints name it so stale weight files fail
/// loudly instead of silently misaligning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureConfig {
    Standard,
}

impl FeatureConfig {
    pub fn dim(self) -> usize {
        match self {
            FeatureConfig::Standard => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureConfig::Standard => "standard-v1",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "standard-v1" => Ok(FeatureConfig::Standard),
            other => Err(Error::Checkpoint(format!("unknown feature config '{other}'"))),
        }
    }
}

/// Policy weights, one per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    config: FeatureConfig,
    weights: Vec<f64>,
}

impl PolicyParams {
    /// All-zero weights: the uniform policy.
    pub fn zeros(config: FeatureConfig) -> Self {
        PolicyParams { config, weights: vec![0.0; config.dim()] }
    }

    pub fn new(config: FeatureConfig, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != config.dim() {
            return Err(Error::LengthMismatch { expected: config.dim(), actual: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParams("non-finite policy weight".into()));
        }
        Ok(PolicyParams { config, weights })
    }

    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// One recorded decision: the feasible nodes, the policy distribution over
/// them, and which position was taken.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Feasible node indices, ascending.
    pub feasible: Vec<u32>,
    /// Probability per feasible node; strictly positive, sums to one.
    pub probs: Vec<f64>,
    /// Index into `feasible`.
    pub chosen: u32,
}

impl StepRecord {
    pub fn chosen_node(&self) -> usize {
        self.feasible[self.chosen as usize] as usize
    }
}

/// Completed rollout: per-step records plus the evaluated tour cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub instance_id: u64,
    pub start: u32,
    pub steps: Vec<StepRecord>,
    pub cost: f64,
}

impl Trajectory {
    /// Visiting order, start first.
    pub fn actions(&self) -> Vec<usize> {
        self.steps.iter().map(StepRecord::chosen_node).collect()
    }

    /// Copy with probabilities squeezed through f32, the storage precision
    /// of buffered experiences.
    pub fn quantized(&self) -> Trajectory {
        let mut out = self.clone();
        for step in &mut out.steps {
            for p in &mut step.probs {
                *p = *p as f32 as f64;
            }
        }
        out
    }
}

/// How rollout picks among feasible nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RolloutMode {
    /// Draw from the softmax.
    Sample,
    /// Highest probability, lowest node index on ties. Consumes no
    /// randomness.
    Greedy,
}

fn anchor(instance: &Instance, centroid: Point) -> Point {
    match instance.kind() {
        ProblemKind::Cvrp => instance.depot().unwrap(),
        ProblemKind::Tsp => centroid,
    }
}

fn features_at(
    instance: &Instance,
    state: &ConstructionState,
    candidate: usize,
    centroid: Point,
) -> Vec<f64> {
    let cand = instance.node(candidate);
    let home = anchor(instance, centroid);
    let pos = match state.current() {
        Some(c) => instance.node(c),
        None => home,
    };
    let n = instance.n() as f64;
    let mut phi = vec![0.0; FeatureConfig::Standard.dim()];
    phi[0] = 1.0;
    phi[1] = -pos.dist(cand);
    phi[2] = -cand.dist(home);
    phi[3] = -cand.dist(centroid);
    phi[4] = state.visited_count() as f64 / n;
    if instance.kind() == ProblemKind::Cvrp {
        phi[5] = instance.demand(candidate) as f64 / instance.capacity() as f64;
        phi[6] = if implies_depot_return(instance, state, candidate) { 1.0 } else { 0.0 };
    }
    phi
}

/// Feature vector for one candidate node at a state.
pub fn features(
    instance: &Instance,
    state: &ConstructionState,
    candidate: usize,
) -> Result<Vec<f64>> {
    if state.is_terminal() {
        return Err(Error::TerminalState);
    }
    if candidate >= instance.n() || state.is_visited(candidate) {
        return Err(Error::InfeasibleAction { node: candidate });
    }
    Ok(features_at(instance, state, candidate, instance.centroid()))
}

fn softmax_from_logits(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// One replayable decision point with everything gradients need.
pub(crate) struct DecisionPoint {
    pub feasible: Vec<u32>,
    pub probs: Vec<f64>,
    pub features: Vec<Vec<f64>>,
}

fn decision_point(
    params: &PolicyParams,
    instance: &Instance,
    state: &ConstructionState,
    centroid: Point,
) -> Result<DecisionPoint> {
    let mask = feasible_actions(instance, state)?;
    let mut feasible = Vec::new();
    let mut feats = Vec::new();
    let mut logits = Vec::new();
    for (node, &ok) in mask.iter().enumerate() {
        if !ok {
            continue;
        }
        let phi = features_at(instance, state, node, centroid);
        let z: f64 = phi.iter().zip(params.weights()).map(|(f, w)| f * w).sum();
        feasible.push(node as u32);
        feats.push(phi);
        logits.push(z);
    }
    let probs = softmax_from_logits(&logits);
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::DivergedGradient);
    }
    Ok(DecisionPoint { feasible, probs, features: feats })
}

/// Current policy distribution over the feasible nodes of `state`.
pub fn action_distribution(
    params: &PolicyParams,
    instance: &Instance,
    state: &ConstructionState,
) -> Result<(Vec<u32>, Vec<f64>)> {
    let dp = decision_point(params, instance, state, instance.centroid())?;
    Ok((dp.feasible, dp.probs))
}

fn pick(probs: &[f64], mode: RolloutMode, rng: &mut ChaCha8Rng) -> usize {
    match mode {
        RolloutMode::Sample => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return i;
                }
            }
            probs.len() - 1
        }
        RolloutMode::Greedy => {
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate().skip(1) {
                if p > probs[best] {
                    best = i;
                }
            }
            best
        }
    }
}

/// Builds a complete tour from `start`, recording every decision.
///
/// The start is forced and recorded as a singleton step. Cost accumulates
/// leg by leg under the instance metric (depot legs included for CVRP) and
/// agrees with [`evaluate`] on the finished order.
pub fn rollout(
    params: &PolicyParams,
    instance: &Instance,
    start: usize,
    mode: RolloutMode,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let n = instance.n();
    if start >= n {
        return Err(Error::InfeasibleAction { node: start });
    }
    let centroid = instance.centroid();
    let cvrp = instance.kind() == ProblemKind::Cvrp;
    let mut steps = Vec::with_capacity(n);
    steps.push(StepRecord { feasible: vec![start as u32], probs: vec![1.0], chosen: 0 });
    let mut state = apply_action(instance, &ConstructionState::new(instance), start)?;
    let mut cost = if cvrp { instance.depot_dist(start) } else { 0.0 };
    let mut current = start;
    while !state.is_terminal() {
        let dp = decision_point(params, instance, &state, centroid)?;
        let chosen = pick(&dp.probs, mode, rng);
        let node = dp.feasible[chosen] as usize;
        cost += if implies_depot_return(instance, &state, node) {
            instance.depot_dist(current) + instance.depot_dist(node)
        } else {
            instance.dist(current, node)
        };
        steps.push(StepRecord { feasible: dp.feasible, probs: dp.probs, chosen: chosen as u32 });
        state = apply_action(instance, &state, node)?;
        current = node;
    }
    cost += if cvrp { instance.depot_dist(current) } else { instance.dist(current, start) };
    let traj = Trajectory { instance_id: instance.id(), start: start as u32, steps, cost };
    debug_assert!(
        (evaluate(instance, &traj.actions()).unwrap() - cost).abs() < 1e-9,
        "rollout cost disagrees with evaluation"
    );
    Ok(traj)
}

/// Greedy tour from `start`; deterministic, no RNG involved.
pub fn greedy_rollout(params: &PolicyParams, instance: &Instance, start: usize) -> Result<Trajectory> {
    let mut unused = crate::seeding::rng_from_seed(0);
    rollout(params, instance, start, RolloutMode::Greedy, &mut unused)
}

/// Walks a stored visiting order and recomputes the current policy's
/// decision points along it.
///
/// `rest` is the order after the forced start. The returned vector is
/// index-aligned with rollout records: entry 0 is the forced singleton.
/// Errors if the order is not replayable on this instance.
pub(crate) fn replay_decision_points(
    params: &PolicyParams,
    instance: &Instance,
    start: usize,
    rest: &[usize],
) -> Result<Vec<DecisionPoint>> {
    let n = instance.n();
    if start >= n {
        return Err(Error::ReplayMismatch(format!("start {start} out of range")));
    }
    if rest.len() + 1 != n {
        return Err(Error::ReplayMismatch(format!(
            "{} recorded actions for {n} customers",
            rest.len() + 1
        )));
    }
    let centroid = instance.centroid();
    let mut out = Vec::with_capacity(n);
    out.push(DecisionPoint {
        feasible: vec![start as u32],
        probs: vec![1.0],
        features: vec![features_at(instance, &ConstructionState::new(instance), start, centroid)],
    });
    let mut state = apply_action(instance, &ConstructionState::new(instance), start)
        .map_err(|e| Error::ReplayMismatch(e.to_string()))?;
    for &action in rest {
        let dp = decision_point(params, instance, &state, centroid)?;
        if !dp.feasible.contains(&(action as u32)) {
            return Err(Error::ReplayMismatch(format!(
                "recorded action {action} infeasible at replay"
            )));
        }
        out.push(dp);
        state = apply_action(instance, &state, action)
            .map_err(|e| Error::ReplayMismatch(e.to_string()))?;
    }
    Ok(out)
}

/// Current policy distributions along a stored visiting order, one per step,
/// each over that step's feasible set.
pub fn replay_distributions(
    params: &PolicyParams,
    instance: &Instance,
    start: usize,
    rest: &[usize],
) -> Result<Vec<(Vec<u32>, Vec<f64>)>> {
    Ok(replay_decision_points(params, instance, start, rest)?
        .into_iter()
        .map(|dp| (dp.feasible, dp.probs))
        .collect())
}

/// Writes weights as text: a header naming the feature config, then one
/// weight per line with 17 significant digits (exact f64 round trip).
pub fn write_checkpoint(path: &Path, params: &PolicyParams) -> std::io::Result<()> {
    let mut body = String::new();
    body.push_str("llvrp-policy v1\n");
    body.push_str(&format!("features {}\n", params.config().name()));
    for w in params.weights() {
        body.push_str(&format!("{w:.16e}\n"));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(body.as_bytes())?;
    file.flush()
}

/// Reads a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint(path: &Path) -> Result<PolicyParams> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("llvrp-policy v1") => {}
        other => {
            return Err(Error::Checkpoint(format!(
                "bad header {:?}",
                other.unwrap_or("<empty>")
            )))
        }
    }
    let config = match lines.next().and_then(|l| l.strip_prefix("features ")) {
        Some(name) => FeatureConfig::parse(name)?,
        None => return Err(Error::Checkpoint("missing feature config line".into())),
    };
    let mut weights = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let w: f64 = line
            .trim()
            .parse()
            .map_err(|e| Error::Checkpoint(format!("bad weight '{line}': {e}")))?;
        weights.push(w);
    }
    PolicyParams::new(config, weights)
        .map_err(|e| Error::Checkpoint(format!("weight vector rejected: {e}")))
}
