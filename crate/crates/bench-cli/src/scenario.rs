//! Plain-text scenario files describing a drift trajectory.
//!
//! A scenario names the problem variant, the epoch horizon, and an ordered
//! list of principal tasks. Example:
//!
//! ```text
//! problem = tsp
//! total_epochs = 48
//!
//! [principal blobs]
//! kind = cluster
//! scale = 12
//! centers = 0.2 0.3; 0.7 0.6
//! sigma = 0.05
//! ```
//!
//! Principals appear in drift order. Lines starting with `#` are comments.
//! `emit` and `parse` round-trip exactly, so generated files can be checked
//! in, hand-edited, and re-read without loss.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use lifelong_vrp::taskgen::{make_schedule, DistributionKind, PrincipalTask, TaskSchedule};
use lifelong_vrp::vrp::{Point, ProblemKind};

/// A parsed scenario: everything needed to build a task schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub problem: ProblemKind,
    pub total_epochs: u32,
    pub principals: Vec<PrincipalTask>,
}

impl Scenario {
    /// Validates the scenario and turns it into a runnable schedule.
    pub fn schedule(&self) -> Result<TaskSchedule> {
        Ok(make_schedule(self.problem, self.principals.clone(), self.total_epochs)?)
    }
}

fn parse_point(s: &str, lineno: usize) -> Result<Point> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    ensure!(parts.len() == 2, "line {lineno}: point needs two coordinates, got '{s}'");
    let x: f64 = parts[0].parse().with_context(|| format!("line {lineno}: bad x '{}'", parts[0]))?;
    let y: f64 = parts[1].parse().with_context(|| format!("line {lineno}: bad y '{}'", parts[1]))?;
    Ok(Point::new(x, y))
}

fn parse_points(s: &str, lineno: usize) -> Result<Vec<Point>> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| parse_point(p, lineno))
        .collect()
}

fn fmt_point(p: Point) -> String {
    format!("{} {}", p.x, p.y)
}

/// Keys collected for one `[principal ...]` section before the kind is built.
struct SectionAcc {
    name: String,
    start_line: usize,
    keys: BTreeMap<String, (String, usize)>,
}

impl SectionAcc {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.keys.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<(String, usize)> {
        self.take(key).with_context(|| {
            format!(
                "principal '{}' (line {}): missing required key '{key}'",
                self.name, self.start_line
            )
        })
    }

    fn finish(mut self, problem: ProblemKind) -> Result<PrincipalTask> {
        let (kind_str, kind_line) = self.require("kind")?;
        let (scale_str, scale_line) = self.require("scale")?;
        let scale: u32 = scale_str
            .parse()
            .with_context(|| format!("line {scale_line}: bad scale '{scale_str}'"))?;

        let kind = match kind_str.as_str() {
            "uniform" => DistributionKind::Uniform,
            "rotation" => {
                let (v, l) = self.require("angle")?;
                let angle: f64 = v.parse().with_context(|| format!("line {l}: bad angle '{v}'"))?;
                DistributionKind::Rotation { angle }
            }
            "gaussian-mixture" => {
                let (m, ml) = self.require("means")?;
                let (s, sl) = self.require("sigma")?;
                DistributionKind::GaussianMixture {
                    means: parse_points(&m, ml)?,
                    sigma: s.parse().with_context(|| format!("line {sl}: bad sigma '{s}'"))?,
                }
            }
            "explosion" => {
                let (c, cl) = self.require("center")?;
                let (r, rl) = self.require("radius")?;
                DistributionKind::Explosion {
                    center: parse_point(&c, cl)?,
                    radius: r.parse().with_context(|| format!("line {rl}: bad radius '{r}'"))?,
                }
            }
            "cluster" => {
                let (c, cl) = self.require("centers")?;
                let (s, sl) = self.require("sigma")?;
                DistributionKind::Cluster {
                    centers: parse_points(&c, cl)?,
                    sigma: s.parse().with_context(|| format!("line {sl}: bad sigma '{s}'"))?,
                }
            }
            "grid" => {
                let (c, cl) = self.require("cells")?;
                let (j, jl) = self.require("jitter")?;
                DistributionKind::Grid {
                    cells: c.parse().with_context(|| format!("line {cl}: bad cells '{c}'"))?,
                    jitter: j.parse().with_context(|| format!("line {jl}: bad jitter '{j}'"))?,
                }
            }
            other => bail!("line {kind_line}: unknown kind '{other}'"),
        };

        let mut task = PrincipalTask::new(self.name.clone(), kind, scale);
        // Demand keys only make sense for the capacitated variant; for TSP
        // they fall through to the unexpected-key check below.
        if problem == ProblemKind::Cvrp {
            if let Some((v, l)) = self.take("demand") {
                let (lo, hi) = v
                    .split_once("..")
                    .with_context(|| format!("line {l}: demand must look like 'lo..hi'"))?;
                task.demand_lo =
                    lo.trim().parse().with_context(|| format!("line {l}: bad demand '{v}'"))?;
                task.demand_hi =
                    hi.trim().parse().with_context(|| format!("line {l}: bad demand '{v}'"))?;
            }
            if let Some((v, l)) = self.take("capacity") {
                task.capacity = v.parse().with_context(|| format!("line {l}: bad capacity '{v}'"))?;
            }
        }
        if let Some((k, (_, l))) = self.keys.iter().next() {
            bail!("line {l}: unexpected key '{k}' for principal '{}'", self.name);
        }
        Ok(task)
    }
}

/// Parse a scenario from text.
pub fn parse(text: &str) -> Result<Scenario> {
    let mut problem: Option<ProblemKind> = None;
    let mut total_epochs: Option<u32> = None;
    let mut sections: Vec<SectionAcc> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let inner = inner
                .strip_suffix(']')
                .with_context(|| format!("line {lineno}: unterminated section header"))?;
            let name = inner
                .strip_prefix("principal ")
                .with_context(|| format!("line {lineno}: expected '[principal NAME]'"))?
                .trim();
            ensure!(!name.is_empty(), "line {lineno}: principal needs a name");
            ensure!(
                !name.chars().any(char::is_whitespace),
                "line {lineno}: principal name '{name}' contains whitespace"
            );
            ensure!(
                !sections.iter().any(|s| s.name == name),
                "line {lineno}: duplicate principal '{name}'"
            );
            sections.push(SectionAcc { name: name.to_string(), start_line: lineno, keys: BTreeMap::new() });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("line {lineno}: expected 'key = value'"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        match sections.last_mut() {
            None => match key.as_str() {
                "problem" => problem = Some(ProblemKind::parse(&value)?),
                "total_epochs" => {
                    total_epochs = Some(
                        value
                            .parse()
                            .with_context(|| format!("line {lineno}: bad total_epochs '{value}'"))?,
                    )
                }
                other => bail!("line {lineno}: unknown top-level key '{other}'"),
            },
            Some(section) => {
                ensure!(
                    !section.keys.contains_key(&key),
                    "line {lineno}: duplicate key '{key}' in principal '{}'",
                    section.name
                );
                section.keys.insert(key, (value, lineno));
            }
        }
    }

    let problem = problem.context("missing 'problem ='")?;
    let total_epochs = total_epochs.context("missing 'total_epochs ='")?;
    let principals: Vec<PrincipalTask> = sections
        .into_iter()
        .map(|s| s.finish(problem))
        .collect::<Result<_>>()?;
    ensure!(principals.len() >= 2, "scenario needs at least two principals");

    let scenario = Scenario { problem, total_epochs, principals };
    scenario.schedule()?; // surface validation errors at parse time
    Ok(scenario)
}

/// Render a scenario back to its file form.
pub fn emit(scenario: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problem = {}", scenario.problem.name());
    let _ = writeln!(out, "total_epochs = {}", scenario.total_epochs);
    for p in &scenario.principals {
        let _ = writeln!(out);
        let _ = writeln!(out, "[principal {}]", p.name);
        let _ = writeln!(out, "kind = {}", p.kind.name());
        let _ = writeln!(out, "scale = {}", p.scale);
        match &p.kind {
            DistributionKind::Uniform => {}
            DistributionKind::Rotation { angle } => {
                let _ = writeln!(out, "angle = {angle}");
            }
            DistributionKind::GaussianMixture { means, sigma } => {
                let pts: Vec<String> = means.iter().copied().map(fmt_point).collect();
                let _ = writeln!(out, "means = {}", pts.join("; "));
                let _ = writeln!(out, "sigma = {sigma}");
            }
            DistributionKind::Explosion { center, radius } => {
                let _ = writeln!(out, "center = {}", fmt_point(*center));
                let _ = writeln!(out, "radius = {radius}");
            }
            DistributionKind::Cluster { centers, sigma } => {
                let pts: Vec<String> = centers.iter().copied().map(fmt_point).collect();
                let _ = writeln!(out, "centers = {}", pts.join("; "));
                let _ = writeln!(out, "sigma = {sigma}");
            }
            DistributionKind::Grid { cells, jitter } => {
                let _ = writeln!(out, "cells = {cells}");
                let _ = writeln!(out, "jitter = {jitter}");
            }
        }
        if scenario.problem == ProblemKind::Cvrp {
            let _ = writeln!(out, "demand = {}..{}", p.demand_lo, p.demand_hi);
            let _ = writeln!(out, "capacity = {}", p.capacity);
        }
    }
    out
}

/// Parse a scenario file from disk.
pub fn parse_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).with_context(|| format!("parsing {}", path.display()))
}
