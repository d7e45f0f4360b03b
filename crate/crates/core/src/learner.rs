//! Loss terms, analytic gradients, and the optimizer.
//!
//! Three losses share one report shape. The driving loss samples multi-start
//! rollouts and scores each against the mean cost of its instance's starts
//! (a shared baseline, so no critic is needed). Behavior replay penalizes
//! weighted KL divergence from stored action distributions. Instance replay
//! reuses the driving loss on buffered instances and is built in [`crate::dree`].
//!
//! Gradients are exact: for a linear softmax, the score-function term per
//! decision is the chosen node's features minus the probability-weighted
//! feature mean, and the KL term follows from differentiating through the
//! current distribution while holding the stored one constant.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::policy::{
    replay_decision_points, rollout, PolicyParams, RolloutMode, Trajectory,
};
use crate::vrp::Instance;

/// Stored probabilities below this are lifted before the KL (then the
/// distribution is renormalized), keeping logs bounded.
pub const PROB_FLOOR: f64 = 1e-8;

/// Value, gradient, and (for rollout-based losses) the best cost seen per
/// instance in the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub per_instance_costs: Vec<f64>,
}

impl LossReport {
    /// Zero contribution; used when a loss term is switched off.
    pub fn zeros(dim: usize) -> Self {
        LossReport { value: 0.0, gradient: vec![0.0; dim], per_instance_costs: Vec::new() }
    }

    fn check_finite(self) -> Result<Self> {
        if self.value.is_finite() && self.gradient.iter().all(|g| g.is_finite()) {
            Ok(self)
        } else {
            Err(Error::DivergedGradient)
        }
    }
}

/// Result of one driving-loss batch.
#[derive(Debug, Clone)]
pub struct DrlOutcome {
    pub report: LossReport,
    /// Cheapest rollout per instance (earliest on cost ties).
    pub best: Vec<Trajectory>,
    /// Every rollout, per instance; replaying these at shifted parameters
    /// recomputes the loss with the stochastic part frozen.
    pub rollouts: Vec<Vec<Trajectory>>,
}

/// Log-probability of a stored visiting order under `params`, plus its
/// gradient.
pub fn logprob_and_grad(
    params: &PolicyParams,
    instance: &Instance,
    trajectory: &Trajectory,
) -> Result<(f64, Vec<f64>)> {
    let actions = trajectory.actions();
    let points = replay_decision_points(params, instance, actions[0], &actions[1..])?;
    let mut logp = 0.0;
    let mut grad = vec![0.0; params.dim()];
    for (dp, &action) in points.iter().zip(&actions) {
        let pos = dp
            .feasible
            .binary_search(&(action as u32))
            .map_err(|_| Error::ReplayMismatch(format!("action {action} left feasible set")))?;
        logp += dp.probs[pos].ln();
        for (g, &f) in grad.iter_mut().zip(&dp.features[pos]) {
            *g += f;
        }
        for (phi, &p) in dp.features.iter().zip(&dp.probs) {
            for (g, &f) in grad.iter_mut().zip(phi) {
                *g -= p * f;
            }
        }
    }
    Ok((logp, grad))
}

/// Driving loss over a batch: samples `n_starts` rollouts per instance from
/// distinct start nodes, then scores them with [`drl_replay_loss`].
pub fn drl_loss_and_grad(
    params: &PolicyParams,
    instances: &[&Instance],
    n_starts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DrlOutcome> {
    if instances.is_empty() {
        return Err(Error::InvalidParams("empty instance batch".into()));
    }
    if n_starts < 2 {
        return Err(Error::InvalidParams(format!("n_starts {n_starts} below 2")));
    }
    let mut rollouts = Vec::with_capacity(instances.len());
    for &instance in instances {
        if n_starts > instance.n() {
            return Err(Error::TooManyStarts { requested: n_starts, nodes: instance.n() });
        }
        let starts = rand::seq::index::sample(rng, instance.n(), n_starts);
        let mut per_instance = Vec::with_capacity(n_starts);
        for start in starts {
            per_instance.push(rollout(params, instance, start, RolloutMode::Sample, rng)?);
        }
        rollouts.push(per_instance);
    }
    let report = drl_replay_loss(params, instances, &rollouts)?;
    let best = rollouts
        .iter()
        .map(|rs| {
            rs.iter()
                .min_by(|a, b| a.cost.partial_cmp(&b.cost).expect("finite costs"))
                .expect("at least two rollouts")
                .clone()
        })
        .collect();
    Ok(DrlOutcome { report, best, rollouts })
}

/// Driving loss recomputed for fixed rollouts.
///
/// Costs, and therefore advantages, are constants of the trajectories; only
/// the log-probabilities depend on `params`. Central differences of this
/// value validate the analytic gradient.
pub fn drl_replay_loss(
    params: &PolicyParams,
    instances: &[&Instance],
    rollouts: &[Vec<Trajectory>],
) -> Result<LossReport> {
    if instances.len() != rollouts.len() {
        return Err(Error::LengthMismatch { expected: instances.len(), actual: rollouts.len() });
    }
    let n_starts = rollouts.first().map_or(0, Vec::len);
    if n_starts < 2 {
        return Err(Error::InvalidParams(format!("n_starts {n_starts} below 2")));
    }
    let scale = 1.0 / (instances.len() * n_starts) as f64;
    let mut value = 0.0;
    let mut gradient = vec![0.0; params.dim()];
    let mut per_instance_costs = Vec::with_capacity(instances.len());
    for (&instance, per_instance) in instances.iter().zip(rollouts) {
        if per_instance.len() != n_starts {
            return Err(Error::LengthMismatch { expected: n_starts, actual: per_instance.len() });
        }
        let mean = per_instance.iter().map(|t| t.cost).sum::<f64>() / n_starts as f64;
        let mut best = f64::INFINITY;
        for traj in per_instance {
            let advantage = -(traj.cost - mean);
            let (logp, grad) = logprob_and_grad(params, instance, traj)?;
            value -= scale * advantage * logp;
            for (g, d) in gradient.iter_mut().zip(&grad) {
                *g -= scale * advantage * d;
            }
            if traj.cost < best {
                best = traj.cost;
            }
        }
        per_instance_costs.push(best);
    }
    LossReport { value, gradient, per_instance_costs }.check_finite()
}

/// Per-step replay weights of a stored trajectory: the peak stored
/// probability of each step, normalized to sum to one.
///
/// Confident decisions (peaked distributions) dominate the replay signal;
/// near-uniform ones barely count.
pub fn confidence_weights(trajectory: &Trajectory) -> Vec<f64> {
    let raw: Vec<f64> = trajectory
        .steps
        .iter()
        .map(|s| s.probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|r| r / sum).collect()
}

/// Behavior replay loss: confidence-weighted KL from the current policy to
/// the stored distributions, averaged over the given experiences.
///
/// Stored distributions are constants (no gradient flows into them); they
/// are floored at [`PROB_FLOOR`] and renormalized before the logs.
pub fn br_loss_and_grad(
    params: &PolicyParams,
    items: &[(&Instance, &Trajectory)],
) -> Result<LossReport> {
    if items.is_empty() {
        return Err(Error::InvalidParams("behavior replay over zero experiences".into()));
    }
    let mut value = 0.0;
    let mut gradient = vec![0.0; params.dim()];
    for &(instance, trajectory) in items {
        if trajectory.instance_id != instance.id() {
            return Err(Error::ReplayMismatch(format!(
                "trajectory for instance {} paired with instance {}",
                trajectory.instance_id,
                instance.id()
            )));
        }
        let weights = confidence_weights(trajectory);
        let actions = trajectory.actions();
        let points = replay_decision_points(params, instance, actions[0], &actions[1..])?;
        for ((dp, step), &weight) in points.iter().zip(&trajectory.steps).zip(&weights) {
            if dp.feasible != step.feasible {
                return Err(Error::ReplayMismatch(
                    "stored feasible set differs at replay".into(),
                ));
            }
            let floored: Vec<f64> = step.probs.iter().map(|&p| p.max(PROB_FLOOR)).collect();
            let norm: f64 = floored.iter().sum();
            let stored: Vec<f64> = floored.iter().map(|&q| q / norm).collect();
            let kl: f64 = dp
                .probs
                .iter()
                .zip(&stored)
                .map(|(&p, &q)| p * (p.ln() - q.ln()))
                .sum();
            value += weight * kl / items.len() as f64;
            for ((phi, &p), &q) in dp.features.iter().zip(&dp.probs).zip(&stored) {
                let coeff = weight * p * ((p.ln() - q.ln()) - kl) / items.len() as f64;
                for (g, &f) in gradient.iter_mut().zip(phi) {
                    *g += coeff * f;
                }
            }
        }
    }
    LossReport { value, gradient, per_instance_costs: Vec::new() }.check_finite()
}

/// Composite loss: driving + alpha * behavior + beta * instance replay.
///
/// Per-instance costs pass through from the driving term.
pub fn combine_losses(
    drl: &LossReport,
    br: &LossReport,
    pir: &LossReport,
    alpha: f64,
    beta: f64,
) -> Result<LossReport> {
    for coeff in [alpha, beta] {
        if !(coeff.is_finite() && coeff >= 0.0) {
            return Err(Error::InvalidParams(format!("loss coefficient {coeff} invalid")));
        }
    }
    let dim = drl.gradient.len();
    for other in [br, pir] {
        if other.gradient.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, actual: other.gradient.len() });
        }
    }
    let gradient = (0..dim)
        .map(|i| drl.gradient[i] + alpha * br.gradient[i] + beta * pir.gradient[i])
        .collect();
    LossReport {
        value: drl.value + alpha * br.value + beta * pir.value,
        gradient,
        per_instance_costs: drl.per_instance_costs.clone(),
    }
    .check_finite()
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    steps: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub const DEFAULT_LR: f64 = 1e-2;

    pub fn new(dim: usize, lr: f64) -> Result<Self> {
        Self::with_hyper(dim, lr, 0.9, 0.999, 1e-8)
    }

    pub fn with_hyper(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<Self> {
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::InvalidParams(format!("learning rate {lr} not positive")));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidParams(format!("{name} {b} outside [0, 1)")));
            }
        }
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParams(format!("epsilon {eps} not positive")));
        }
        Ok(AdamState { lr, beta1, beta2, eps, steps: 0, m: vec![0.0; dim], v: vec![0.0; dim] })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One descent step; rejects non-finite gradients before touching state.
    pub fn step(&mut self, params: &mut PolicyParams, gradient: &[f64]) -> Result<()> {
        if gradient.len() != params.dim() || gradient.len() != self.m.len() {
            return Err(Error::LengthMismatch { expected: self.m.len(), actual: gradient.len() });
        }
        if gradient.iter().any(|g| !g.is_finite()) {
            return Err(Error::DivergedGradient);
        }
        self.steps += 1;
        let bc1 = 1.0 - self.beta1.powi(self.steps as i32);
        let bc2 = 1.0 - self.beta2.powi(self.steps as i32);
        let weights = params.weights_mut();
        for i in 0..gradient.len() {
            let g = gradient[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            weights[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
