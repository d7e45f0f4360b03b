//! Central finite differences validate every analytic gradient.
//!
//! Stochastic parts are frozen first (sampled rollouts are replayed at the
//! shifted parameters), so the differentiated scalar is exactly the function
//! whose gradient the learner reports.

use lifelong_vrp::learner::{
    br_loss_and_grad, combine_losses, drl_loss_and_grad, drl_replay_loss, LossReport,
};
use lifelong_vrp::policy::{rollout, FeatureConfig, PolicyParams, RolloutMode, Trajectory};
use lifelong_vrp::seeding::rng_from_seed;
use lifelong_vrp::vrp::{Instance, Point};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;

fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let nodes: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
        .collect();
    if rng.gen() {
        Instance::tsp(rng.gen(), nodes).unwrap()
    } else {
        let demands = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        Instance::cvrp(rng.gen(), nodes, demands, 14, Point::new(0.5, 0.5)).unwrap()
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> PolicyParams {
    let w = (0..FeatureConfig::Standard.dim())
        .map(|_| rng.gen_range(-2.0..2.0))
        .collect();
    PolicyParams::new(FeatureConfig::Standard, w).unwrap()
}

fn shifted(params: &PolicyParams, coord: usize, delta: f64) -> PolicyParams {
    let mut w = params.weights().to_vec();
    w[coord] += delta;
    PolicyParams::new(params.config(), w).unwrap()
}

/// Asserts agreement; relative error uses a unit floor so near-zero
/// coordinates are judged absolutely.
fn check(analytic: &[f64], numeric: &[f64], label: &str) {
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let rel = (a - n).abs() / a.abs().max(n.abs()).max(1.0);
        assert!(
            rel < TOLERANCE,
            "{label}: coordinate {i} analytic {a} vs numeric {n} (rel {rel:.3e})"
        );
    }
}

fn numeric_gradient(params: &PolicyParams, mut value: impl FnMut(&PolicyParams) -> f64) -> Vec<f64> {
    (0..params.dim())
        .map(|i| {
            let hi = value(&shifted(params, i, H));
            let lo = value(&shifted(params, i, -H));
            (hi - lo) / (2.0 * H)
        })
        .collect()
}

fn stored_pairs(
    params: &PolicyParams,
    instances: &[Instance],
    rng: &mut ChaCha8Rng,
) -> Vec<Trajectory> {
    instances
        .iter()
        .map(|inst| {
            rollout(params, inst, rng.gen_range(0..inst.n()), RolloutMode::Sample, rng)
                .unwrap()
                .quantized()
        })
        .collect()
}

#[test]
fn driving_loss_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(101);
    for case in 0..40 {
        let params = random_params(&mut rng);
        let instances: Vec<Instance> =
            (0..2).map(|_| { let n = rng.gen_range(4..=8); random_instance(&mut rng, n) }).collect();
        let refs: Vec<&Instance> = instances.iter().collect();
        let out = drl_loss_and_grad(&params, &refs, 3, &mut rng).unwrap();
        let numeric = numeric_gradient(&params, |p| {
            drl_replay_loss(p, &refs, &out.rollouts).unwrap().value
        });
        check(&out.report.gradient, &numeric, &format!("driving case {case}"));
    }
}

#[test]
fn behavior_replay_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(102);
    for case in 0..40 {
        let stored_params = random_params(&mut rng);
        let params = random_params(&mut rng);
        let instances: Vec<Instance> =
            (0..2).map(|_| { let n = rng.gen_range(4..=8); random_instance(&mut rng, n) }).collect();
        let trajectories = stored_pairs(&stored_params, &instances, &mut rng);
        let items: Vec<(&Instance, &Trajectory)> =
            instances.iter().zip(&trajectories).collect();
        let report = br_loss_and_grad(&params, &items).unwrap();
        let numeric =
            numeric_gradient(&params, |p| br_loss_and_grad(p, &items).unwrap().value);
        check(&report.gradient, &numeric, &format!("behavior case {case}"));
    }
}

#[test]
fn composite_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(103);
    for case in 0..25 {
        let params = random_params(&mut rng);
        let fresh: Vec<Instance> =
            (0..2).map(|_| { let n = rng.gen_range(4..=7); random_instance(&mut rng, n) }).collect();
        let buffered: Vec<Instance> =
            (0..2).map(|_| { let n = rng.gen_range(4..=7); random_instance(&mut rng, n) }).collect();
        let fresh_refs: Vec<&Instance> = fresh.iter().collect();
        let buffered_refs: Vec<&Instance> = buffered.iter().collect();
        let stored_params = random_params(&mut rng);
        let trajectories = stored_pairs(&stored_params, &buffered, &mut rng);
        let items: Vec<(&Instance, &Trajectory)> =
            buffered.iter().zip(&trajectories).collect();

        let drl = drl_loss_and_grad(&params, &fresh_refs, 2, &mut rng).unwrap();
        let pir = drl_loss_and_grad(&params, &buffered_refs, 2, &mut rng).unwrap();
        let (alpha, beta) = (100.0, 1.0);
        let composite = |p: &PolicyParams| -> LossReport {
            let d = drl_replay_loss(p, &fresh_refs, &drl.rollouts).unwrap();
            let b = br_loss_and_grad(p, &items).unwrap();
            let r = drl_replay_loss(p, &buffered_refs, &pir.rollouts).unwrap();
            combine_losses(&d, &b, &r, alpha, beta).unwrap()
        };
        let analytic = composite(&params);
        let numeric = numeric_gradient(&params, |p| composite(p).value);
        check(&analytic.gradient, &numeric, &format!("composite case {case}"));
    }
}
