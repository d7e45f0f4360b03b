//! Canned scenario and run-option presets.
//!
//! The desk profile is sized so a full strategy comparison over several
//! seeds finishes in minutes on one core; the full profile exercises all
//! six distributions at larger scales.

use anyhow::{bail, Result};
use lifelong_vrp::dree::EngineConfig;
use lifelong_vrp::seeding::child_rng;
use lifelong_vrp::taskgen::{DistributionKind, PrincipalTask};
use lifelong_vrp::vrp::ProblemKind;

use crate::runner::RunConfig;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Desk,
    Full,
}

impl Profile {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "desk" => Ok(Profile::Desk),
            "full" => Ok(Profile::Full),
            other => bail!("unknown profile '{other}' (expected desk or full)"),
        }
    }

    /// Builds the profile's drift scenario; `seed` fixes the randomly
    /// placed distribution anchors.
    pub fn scenario(self, problem: ProblemKind, seed: u64) -> Scenario {
        match self {
            Profile::Desk => {
                let mut anchors = child_rng(seed, 1);
                Scenario {
                    problem,
                    total_epochs: 48,
                    principals: vec![
                        PrincipalTask::new("uniform", DistributionKind::Uniform, 8),
                        PrincipalTask::new("cluster", DistributionKind::cluster_from(&mut anchors), 12),
                        PrincipalTask::new("grid", DistributionKind::grid_for(16), 16),
                    ],
                }
            }
            Profile::Full => {
                let mut anchors = child_rng(seed, 1);
                let rotation = DistributionKind::rotation_from(&mut anchors);
                let mixture = DistributionKind::gaussian_mixture_from(&mut anchors);
                let explosion = DistributionKind::explosion_from(&mut anchors);
                let cluster = DistributionKind::cluster_from(&mut anchors);
                Scenario {
                    problem,
                    total_epochs: 60,
                    principals: vec![
                        PrincipalTask::new("uniform", DistributionKind::Uniform, 20),
                        PrincipalTask::new("rotation", rotation, 24),
                        PrincipalTask::new("mixture", mixture, 28),
                        PrincipalTask::new("explosion", explosion, 32),
                        PrincipalTask::new("cluster", cluster, 36),
                        PrincipalTask::new("grid", DistributionKind::grid_for(40), 40),
                    ],
                }
            }
        }
    }

    /// Applies the profile's sizing to engine and evaluation options.
    pub fn apply(self, cfg: &mut RunConfig) {
        match self {
            Profile::Desk => {
                cfg.engine.buffer_capacity = 32;
                cfg.engine.batch_size = 16;
                cfg.engine.batches_per_epoch = 16;
                cfg.engine.n_starts = 4;
                cfg.test_size = 64;
                cfg.test_restarts = 20;
            }
            Profile::Full => {
                cfg.engine.buffer_capacity = 256;
                cfg.engine.batch_size = 64;
                cfg.engine.batches_per_epoch = 64;
                cfg.engine.n_starts = 8;
                cfg.test_size = 128;
                cfg.test_restarts = 50;
            }
        }
    }
}

/// Desk-profile run options for one strategy and seed; the canonical setup
/// used by the strategy-comparison tests.
pub fn desk_run_config(strategy: lifelong_vrp::dree::StrategyKind, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(EngineConfig::new(strategy), seed);
    Profile::Desk.apply(&mut cfg);
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scenario_is_valid_and_deterministic() {
        for problem in [ProblemKind::Tsp, ProblemKind::Cvrp] {
            let a = Profile::Desk.scenario(problem, 3);
            let b = Profile::Desk.scenario(problem, 3);
            assert_eq!(a, b);
            let schedule = a.schedule().unwrap();
            assert_eq!(schedule.interval(), 24);
        }
    }

    #[test]
    fn full_scenario_covers_all_kinds() {
        let s = Profile::Full.scenario(ProblemKind::Tsp, 0);
        let kinds: Vec<&str> = s.principals.iter().map(|p| p.kind.name()).collect();
        assert_eq!(
            kinds,
            vec!["uniform", "rotation", "gaussian-mixture", "explosion", "cluster", "grid"]
        );
        s.schedule().unwrap();
    }

    #[test]
    fn different_anchor_seeds_move_the_anchors() {
        let a = Profile::Desk.scenario(ProblemKind::Tsp, 1);
        let b = Profile::Desk.scenario(ProblemKind::Tsp, 2);
        assert_ne!(a.principals[1].kind, b.principals[1].kind);
    }
}
