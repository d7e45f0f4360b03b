//! Routing instances and the construction MDP built on them.
//!
//! An [`Instance`] is immutable once built: node coordinates in the unit
//! square, optional demands/capacity/depot for the capacitated variant, and a
//! distance metric. Construction states, feasibility and transitions live in
//! [`state`]; completed tours and their evaluation in [`tour`]; exact and
//! local-search reference solvers in [`oracle`].

mod oracle;
mod state;
mod tour;

pub use oracle::{
    brute_force_optimal, nearest_neighbor, optimality_gap, reference_solve, two_opt,
};
pub use state::{
    apply_action, feasible_actions, feasible_list, implies_depot_return, ConstructionState,
};
pub use tour::{evaluate, Tour};

use crate::error::{Error, Result};

/// Which routing problem an instance encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Tsp,
    Cvrp,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Tsp => "tsp",
            ProblemKind::Cvrp => "cvrp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tsp" => Ok(ProblemKind::Tsp),
            "cvrp" => Ok(ProblemKind::Cvrp),
            other => Err(Error::InvalidParams(format!("unknown problem kind '{other}'"))),
        }
    }
}

/// Point in the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Plain Euclidean distance, independent of any instance metric.
    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn in_unit_square(self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// How raw Euclidean lengths map to travel costs.
///
/// `ScaledRounded` covers instances imported from integer-distance benchmark
/// files: stored coordinates are the originals shrunk onto the unit square by
/// `1/scale`, and each leg cost is the original-coordinate Euclidean length
/// rounded to the nearest integer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceMetric {
    Euclidean,
    ScaledRounded { scale: f64 },
}

impl DistanceMetric {
    fn apply(self, raw: f64) -> f64 {
        match self {
            DistanceMetric::Euclidean => raw,
            DistanceMetric::ScaledRounded { scale } => (raw * scale + 0.5).floor(),
        }
    }
}

/// Immutable routing instance.
///
/// TSP instances have no demands, capacity, or depot. CVRP instances have one
/// demand per customer node, a positive capacity no single demand exceeds,
/// and a depot that is not part of `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    kind: ProblemKind,
    nodes: Vec<Point>,
    demands: Vec<u32>,
    capacity: u32,
    depot: Option<Point>,
    metric: DistanceMetric,
    id: u64,
}

impl Instance {
    /// TSP instance over `nodes` with plain Euclidean costs.
    pub fn tsp(id: u64, nodes: Vec<Point>) -> Result<Self> {
        Self::with_metric(id, ProblemKind::Tsp, nodes, Vec::new(), 0, None, DistanceMetric::Euclidean)
    }

    /// CVRP instance with plain Euclidean costs.
    pub fn cvrp(id: u64, nodes: Vec<Point>, demands: Vec<u32>, capacity: u32, depot: Point) -> Result<Self> {
        Self::with_metric(
            id,
            ProblemKind::Cvrp,
            nodes,
            demands,
            capacity,
            Some(depot),
            DistanceMetric::Euclidean,
        )
    }

    /// Fully general constructor; validates every invariant.
    pub fn with_metric(
        id: u64,
        kind: ProblemKind,
        nodes: Vec<Point>,
        demands: Vec<u32>,
        capacity: u32,
        depot: Option<Point>,
        metric: DistanceMetric,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInstance("no nodes".into()));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() || !p.in_unit_square() {
                return Err(Error::InvalidInstance(format!(
                    "node {i} at ({}, {}) outside the unit square",
                    p.x, p.y
                )));
            }
        }
        match kind {
            ProblemKind::Tsp => {
                if !demands.is_empty() || depot.is_some() || capacity != 0 {
                    return Err(Error::InvalidInstance(
                        "tsp instances carry no demands, capacity, or depot".into(),
                    ));
                }
            }
            ProblemKind::Cvrp => {
                if demands.len() != nodes.len() {
                    return Err(Error::InvalidInstance(format!(
                        "{} demands for {} nodes",
                        demands.len(),
                        nodes.len()
                    )));
                }
                if capacity == 0 {
                    return Err(Error::InvalidInstance("capacity must be positive".into()));
                }
                if let Some(d) = demands.iter().position(|&d| d == 0 || d > capacity) {
                    return Err(Error::InvalidInstance(format!(
                        "demand {} at node {d} outside 1..={capacity}",
                        demands[d]
                    )));
                }
                let dep = depot.ok_or_else(|| Error::InvalidInstance("cvrp needs a depot".into()))?;
                if !dep.in_unit_square() {
                    return Err(Error::InvalidInstance("depot outside the unit square".into()));
                }
            }
        }
        if let DistanceMetric::ScaledRounded { scale } = metric {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::InvalidInstance(format!("metric scale {scale} not positive")));
            }
        }
        Ok(Instance { kind, nodes, demands, capacity, depot, metric, id })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Number of customer nodes (depot excluded).
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn demand(&self, i: usize) -> u32 {
        self.demands[i]
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn depot(&self) -> Option<Point> {
        self.depot
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    /// Travel cost between customer nodes under the instance metric.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.metric.apply(self.nodes[i].dist(self.nodes[j]))
    }

    /// Travel cost between node `i` and the depot (CVRP only).
    pub fn depot_dist(&self, i: usize) -> f64 {
        let dep = self.depot.expect("depot_dist on a depot-less instance");
        self.metric.apply(self.nodes[i].dist(dep))
    }

    /// Mean of the customer coordinates.
    pub fn centroid(&self) -> Point {
        let n = self.nodes.len() as f64;
        let (sx, sy) = self
            .nodes
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point::new(sx / n, sy / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn tsp_construction_validates() {
        assert!(Instance::tsp(0, square()).is_ok());
        assert!(Instance::tsp(0, vec![]).is_err());
        assert!(Instance::tsp(0, vec![Point::new(1.2, 0.0)]).is_err());
        assert!(Instance::tsp(0, vec![Point::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn cvrp_construction_validates() {
        let dep = Point::new(0.5, 0.5);
        assert!(Instance::cvrp(0, square(), vec![1, 2, 3, 4], 10, dep).is_ok());
        // demand exceeding capacity
        assert!(Instance::cvrp(0, square(), vec![1, 2, 3, 11], 10, dep).is_err());
        // zero demand
        assert!(Instance::cvrp(0, square(), vec![0, 2, 3, 4], 10, dep).is_err());
        // demand count mismatch
        assert!(Instance::cvrp(0, square(), vec![1, 2, 3], 10, dep).is_err());
        // zero capacity
        assert!(Instance::cvrp(0, square(), vec![1, 2, 3, 4], 0, dep).is_err());
    }

    #[test]
    fn metric_rounds_scaled_lengths() {
        let nodes = vec![Point::new(0.0, 0.0), Point::new(0.3, 0.4)];
        let inst = Instance::with_metric(
            0,
            ProblemKind::Tsp,
            nodes,
            Vec::new(),
            0,
            None,
            DistanceMetric::ScaledRounded { scale: 10.0 },
        )
        .unwrap();
        // raw length 0.5, original-unit length 5.0
        assert_eq!(inst.dist(0, 1), 5.0);
        let skewed = Instance::with_metric(
            1,
            ProblemKind::Tsp,
            vec![Point::new(0.0, 0.0), Point::new(0.35, 0.0)],
            Vec::new(),
            0,
            None,
            DistanceMetric::ScaledRounded { scale: 10.0 },
        )
        .unwrap();
        // 3.5 rounds half up to 4
        assert_eq!(skewed.dist(0, 1), 4.0);
    }

    #[test]
    fn centroid_is_coordinate_mean() {
        let inst = Instance::tsp(0, square()).unwrap();
        let c = inst.centroid();
        assert!((c.x - 0.5).abs() < 1e-12 && (c.y - 0.5).abs() < 1e-12);
    }
}
