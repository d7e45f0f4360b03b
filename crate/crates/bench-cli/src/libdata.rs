//! Embedded table of published results on standard routing benchmarks.
//!
//! Each row carries the distance reported for a multi-task baseline and
//! its optimality gap in percent. Dividing the distance by `1 + gap/100`
//! recovers the best-known value the gap was measured against, so the
//! table doubles as a source of reference optima for gap reporting.

use anyhow::{bail, Context, Result};
use lifelong_vrp::vrp::ProblemKind;

const RAW_TABLE: &str = include_str!("../data/lib_reference.tsv");

/// One published benchmark row.
#[derive(Debug, Clone, PartialEq)]
pub struct LibEntry {
    pub name: String,
    pub problem: ProblemKind,
    pub distance: f64,
    pub gap_percent: f64,
}

impl LibEntry {
    /// Best-known solution value implied by the published distance and gap.
    pub fn implied_reference(&self) -> f64 {
        self.distance / (1.0 + self.gap_percent / 100.0)
    }
}

fn parse_table(raw: &str) -> Result<Vec<LibEntry>> {
    let mut entries = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            bail!(
                "reference table line {}: expected 4 tab-separated fields, got {}",
                idx + 1,
                fields.len()
            );
        }
        let problem = ProblemKind::parse(fields[1])
            .with_context(|| format!("reference table line {}", idx + 1))?;
        let distance: f64 = fields[2]
            .parse()
            .with_context(|| format!("reference table line {}: bad distance", idx + 1))?;
        let gap_percent: f64 = fields[3]
            .parse()
            .with_context(|| format!("reference table line {}: bad gap", idx + 1))?;
        if !(distance.is_finite() && distance > 0.0) {
            bail!("reference table line {}: distance must be positive", idx + 1);
        }
        if !(gap_percent.is_finite() && gap_percent > -100.0) {
            bail!("reference table line {}: gap out of range", idx + 1);
        }
        entries.push(LibEntry {
            name: fields[0].to_string(),
            problem,
            distance,
            gap_percent,
        });
    }
    Ok(entries)
}

/// All embedded benchmark rows.
pub fn entries() -> Result<Vec<LibEntry>> {
    parse_table(RAW_TABLE)
}

/// Look up one instance by its benchmark name (case-sensitive).
pub fn lookup(name: &str) -> Result<LibEntry> {
    entries()?
        .into_iter()
        .find(|e| e.name == name)
        .with_context(|| format!("no embedded reference entry for '{name}'"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parses_and_has_both_problems() {
        let all = entries().unwrap();
        assert_eq!(all.len(), 42);
        let tsp = all.iter().filter(|e| e.problem == ProblemKind::Tsp).count();
        let cvrp = all.iter().filter(|e| e.problem == ProblemKind::Cvrp).count();
        assert_eq!(tsp, 23);
        assert_eq!(cvrp, 19);
    }

    #[test]
    fn implied_reference_recovers_known_optima() {
        // These instances have well-known integer optima; the implied
        // reference must land within rounding distance of them.
        let cases = [("kroA100", 21282.0), ("a280", 2579.0), ("lin318", 42029.0)];
        for (name, optimum) in cases {
            let entry = lookup(name).unwrap();
            let implied = entry.implied_reference();
            assert!(
                (implied - optimum).abs() / optimum < 5e-4,
                "{name}: implied {implied} vs known {optimum}"
            );
        }
    }

    #[test]
    fn lookup_unknown_name_fails() {
        assert!(lookup("berlin52").is_err());
    }

    #[test]
    fn names_are_unique() {
        let all = entries().unwrap();
        let mut names: Vec<&str> = all.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), all.len());
    }
}
