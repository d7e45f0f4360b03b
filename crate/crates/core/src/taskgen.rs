//! Drifting task generation.
//!
//! A schedule walks through K principal distributions over T epochs, split
//! into K-1 equal segments of m epochs. Inside a segment the task blends the
//! two surrounding principals: instance size and capacity interpolate
//! linearly (rounded half up), and each instance draws a rounded share of its
//! nodes from the next principal, the rest from the previous one. Epoch 0 is
//! purely the first principal, epoch T purely the last.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vrp::{Instance, Point, ProblemKind};

/// Rounds to the nearest integer, halves away from zero (inputs are never
/// negative here).
pub fn round_half_up(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}

/// Node-coordinate distribution of a principal task.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionKind {
    /// Uniform over the unit square.
    Uniform,
    /// Uniform draw rotated by a fixed angle about the square's center.
    Rotation { angle: f64 },
    /// Equal-weight isotropic Gaussians at fixed means.
    GaussianMixture { means: Vec<Point>, sigma: f64 },
    /// Uniform draw pushed radially away from a center, leaving a hole of
    /// the given radius.
    Explosion { center: Point, radius: f64 },
    /// Tight Gaussian blobs at fixed centers.
    Cluster { centers: Vec<Point>, sigma: f64 },
    /// Random cell center on a cells x cells lattice plus uniform jitter.
    Grid { cells: u32, jitter: f64 },
}

impl DistributionKind {
    pub fn name(&self) -> &'static str {
        match self {
            DistributionKind::Uniform => "uniform",
            DistributionKind::Rotation { .. } => "rotation",
            DistributionKind::GaussianMixture { .. } => "gaussian-mixture",
            DistributionKind::Explosion { .. } => "explosion",
            DistributionKind::Cluster { .. } => "cluster",
            DistributionKind::Grid { .. } => "grid",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_anchor = |what: &str, points: &[Point]| -> Result<()> {
            if points.is_empty() {
                return Err(Error::InvalidParams(format!("{what} needs at least one point")));
            }
            for p in points {
                if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
                    return Err(Error::InvalidParams(format!(
                        "{what} point ({}, {}) outside the unit square",
                        p.x, p.y
                    )));
                }
            }
            Ok(())
        };
        match self {
            DistributionKind::Uniform => Ok(()),
            DistributionKind::Rotation { angle } => {
                if angle.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams("rotation angle must be finite".into()))
                }
            }
            DistributionKind::GaussianMixture { means, sigma } => {
                check_anchor("mixture mean", means)?;
                if *sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("mixture sigma {sigma} not positive")))
                }
            }
            DistributionKind::Explosion { center, radius } => {
                check_anchor("explosion center", std::slice::from_ref(center))?;
                if *radius > 0.0 && *radius <= 0.5 {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("explosion radius {radius} outside (0, 0.5]")))
                }
            }
            DistributionKind::Cluster { centers, sigma } => {
                check_anchor("cluster center", centers)?;
                if *sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams(format!("cluster sigma {sigma} not positive")))
                }
            }
            DistributionKind::Grid { cells, jitter } => {
                if *cells == 0 {
                    return Err(Error::InvalidParams("grid needs at least one cell".into()));
                }
                let max_jitter = 0.5 / *cells as f64;
                if *jitter < 0.0 || *jitter > max_jitter {
                    return Err(Error::InvalidParams(format!(
                        "grid jitter {jitter} outside [0, {max_jitter}]"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Rotation by a random angle.
    pub fn rotation_from(rng: &mut ChaCha8Rng) -> Self {
        DistributionKind::Rotation { angle: rng.gen_range(0.0..std::f64::consts::TAU) }
    }

    /// Three-component mixture with means away from the borders.
    pub fn gaussian_mixture_from(rng: &mut ChaCha8Rng) -> Self {
        let means = (0..3)
            .map(|_| Point::new(rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.8)))
            .collect();
        DistributionKind::GaussianMixture { means, sigma: 0.08 }
    }

    pub fn explosion_from(rng: &mut ChaCha8Rng) -> Self {
        let center = Point::new(rng.gen_range(0.25..0.75), rng.gen_range(0.25..0.75));
        DistributionKind::Explosion { center, radius: 0.3 }
    }

    pub fn cluster_from(rng: &mut ChaCha8Rng) -> Self {
        let centers = (0..3)
            .map(|_| Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9)))
            .collect();
        DistributionKind::Cluster { centers, sigma: 0.05 }
    }

    /// Lattice sized to the instance scale, jitter a quarter cell.
    pub fn grid_for(scale: u32) -> Self {
        let cells = (scale as f64).sqrt().ceil() as u32 + 2;
        DistributionKind::Grid { cells, jitter: 0.25 / cells as f64 }
    }
}

fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u1 kept away from zero so the log stays finite
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn clamp_unit(p: Point) -> Point {
    Point::new(p.x.clamp(0.0, 1.0), p.y.clamp(0.0, 1.0))
}

/// Draws one node coordinate from a principal's distribution.
///
/// Every kind clamps out-of-square samples back onto the boundary.
pub fn sample_principal_node(kind: &DistributionKind, rng: &mut ChaCha8Rng) -> Point {
    match kind {
        DistributionKind::Uniform => Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
        DistributionKind::Rotation { angle } => {
            let raw = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (sin, cos) = angle.sin_cos();
            let (dx, dy) = (raw.x - 0.5, raw.y - 0.5);
            clamp_unit(Point::new(0.5 + dx * cos - dy * sin, 0.5 + dx * sin + dy * cos))
        }
        DistributionKind::GaussianMixture { means, sigma } => {
            let mean = means[rng.gen_range(0..means.len())];
            clamp_unit(Point::new(
                mean.x + sigma * sample_standard_normal(rng),
                mean.y + sigma * sample_standard_normal(rng),
            ))
        }
        DistributionKind::Explosion { center, radius } => {
            let raw = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let (dx, dy) = (raw.x - center.x, raw.y - center.y);
            let d = dx.hypot(dy);
            let (ux, uy) = if d < 1e-12 {
                let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                (theta.cos(), theta.sin())
            } else {
                (dx / d, dy / d)
            };
            let pushed = radius + d;
            clamp_unit(Point::new(center.x + ux * pushed, center.y + uy * pushed))
        }
        DistributionKind::Cluster { centers, sigma } => {
            let center = centers[rng.gen_range(0..centers.len())];
            clamp_unit(Point::new(
                center.x + sigma * sample_standard_normal(rng),
                center.y + sigma * sample_standard_normal(rng),
            ))
        }
        DistributionKind::Grid { cells, jitter } => {
            let g = *cells as f64;
            let cx = (rng.gen_range(0..*cells) as f64 + 0.5) / g;
            let cy = (rng.gen_range(0..*cells) as f64 + 0.5) / g;
            clamp_unit(Point::new(
                cx + rng.gen_range(-*jitter..=*jitter),
                cy + rng.gen_range(-*jitter..=*jitter),
            ))
        }
    }
}

/// One endpoint of the drift: a named distribution at a fixed scale, with
/// demand range and vehicle capacity for the capacitated variant.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalTask {
    pub name: String,
    pub kind: DistributionKind,
    pub scale: u32,
    pub demand_lo: u32,
    pub demand_hi: u32,
    pub capacity: u32,
}

impl PrincipalTask {
    /// Principal with the default demand law 1..=9 and capacity 30 + S/5.
    pub fn new(name: impl Into<String>, kind: DistributionKind, scale: u32) -> Self {
        PrincipalTask {
            name: name.into(),
            kind,
            scale,
            demand_lo: 1,
            demand_hi: 9,
            capacity: 30 + scale / 5,
        }
    }

    fn validate(&self, problem: ProblemKind) -> Result<()> {
        self.kind.validate()?;
        if self.scale < 2 {
            return Err(Error::InvalidParams(format!(
                "principal '{}' scale {} below 2",
                self.name, self.scale
            )));
        }
        if problem == ProblemKind::Cvrp {
            if self.demand_lo == 0 || self.demand_lo > self.demand_hi {
                return Err(Error::InvalidParams(format!(
                    "principal '{}' demand range {}..={} invalid",
                    self.name, self.demand_lo, self.demand_hi
                )));
            }
            if self.demand_hi > self.capacity {
                return Err(Error::InvalidParams(format!(
                    "principal '{}' max demand {} exceeds capacity {}",
                    self.name, self.demand_hi, self.capacity
                )));
            }
        }
        Ok(())
    }
}

/// The full drift trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSchedule {
    problem: ProblemKind,
    principals: Vec<PrincipalTask>,
    total_epochs: u32,
    interval: u32,
}

/// The task in force at one epoch: the two principals being blended and all
/// interpolated quantities needed to sample instances.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub epoch: u32,
    pub problem: ProblemKind,
    pub lower_index: usize,
    pub lower: PrincipalTask,
    pub upper: PrincipalTask,
    /// Blend fraction toward `upper`, 0 at the segment start, 1 at its end.
    pub mixture: f64,
    pub scale: u32,
    pub count_prev: u32,
    pub count_next: u32,
    pub capacity: u32,
}

/// Validates principals and divides the horizon into equal segments.
pub fn make_schedule(
    problem: ProblemKind,
    principals: Vec<PrincipalTask>,
    total_epochs: u32,
) -> Result<TaskSchedule> {
    if principals.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "schedule needs at least two principals, got {}",
            principals.len()
        )));
    }
    for p in &principals {
        p.validate(problem)?;
    }
    let segments = (principals.len() - 1) as u32;
    if total_epochs == 0 || total_epochs % segments != 0 {
        return Err(Error::IndivisibleEpochs { total: total_epochs, segments });
    }
    let interval = total_epochs / segments;
    Ok(TaskSchedule { problem, principals, total_epochs, interval })
}

impl TaskSchedule {
    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn principals(&self) -> &[PrincipalTask] {
        &self.principals
    }

    pub fn total_epochs(&self) -> u32 {
        self.total_epochs
    }

    /// Epochs per segment (m).
    pub fn interval(&self) -> u32 {
        self.interval
    }

    /// Resolves the blended task at epoch `t`, 0..=T.
    pub fn task_at(&self, t: u32) -> Result<TaskSpec> {
        if t > self.total_epochs {
            return Err(Error::EpochOutOfRange { epoch: t, total: self.total_epochs });
        }
        let m = self.interval;
        let last_segment = self.principals.len() - 2;
        let i = ((t / m) as usize).min(last_segment);
        let lambda = (t - i as u32 * m) as f64 / m as f64;
        let lower = &self.principals[i];
        let upper = &self.principals[i + 1];
        let blend = |a: u32, b: u32| round_half_up((1.0 - lambda) * a as f64 + lambda * b as f64);
        let scale = blend(lower.scale, upper.scale);
        let count_next = round_half_up(lambda * scale as f64);
        Ok(TaskSpec {
            epoch: t,
            problem: self.problem,
            lower_index: i,
            lower: lower.clone(),
            upper: upper.clone(),
            mixture: lambda,
            scale,
            count_prev: scale - count_next,
            count_next,
            capacity: blend(lower.capacity, upper.capacity),
        })
    }
}

/// Samples one instance of the blended task.
///
/// Nodes inherit the demand law of the principal they were drawn from; the
/// combined node list is shuffled so position carries no information about
/// the source. CVRP instances get the fixed depot (0.5, 0.5).
pub fn sample_instance(spec: &TaskSpec, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let cvrp = spec.problem == ProblemKind::Cvrp;
    let mut drawn: Vec<(Point, u32)> = Vec::with_capacity(spec.scale as usize);
    for (source, count) in [(&spec.lower, spec.count_prev), (&spec.upper, spec.count_next)] {
        for _ in 0..count {
            let p = sample_principal_node(&source.kind, rng);
            let demand = if cvrp {
                rng.gen_range(source.demand_lo..=source.demand_hi.min(spec.capacity))
            } else {
                0
            };
            drawn.push((p, demand));
        }
    }
    drawn.shuffle(rng);
    let id = rng.gen::<u64>();
    let nodes: Vec<Point> = drawn.iter().map(|(p, _)| *p).collect();
    if cvrp {
        let demands = drawn.iter().map(|(_, d)| *d).collect();
        Instance::cvrp(id, nodes, demands, spec.capacity, Point::new(0.5, 0.5))
    } else {
        Instance::tsp(id, nodes)
    }
}
