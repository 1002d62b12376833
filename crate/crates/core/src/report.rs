//! Named residual records and their JSON / text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_name: String,
    /// The identity being checked, written out symbolically.
    pub paper_anchor: String,
    pub points_evaluated: usize,
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    pub skip_reason: Option<String>,
}

impl CheckRecord {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub manifold: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub jet_order: usize,
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub meta: RunMeta,
    pub checks: Vec<CheckRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

impl CheckReport {
    pub fn new(checks: Vec<CheckRecord>) -> CheckReport {
        let mut r = CheckReport { meta: RunMeta::default(), checks };
        r.sort();
        r
    }

    pub fn sort(&mut self) {
        self.checks.sort_by(|a, b| a.check_name.cmp(&b.check_name));
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check_name == name)
    }

    /// Max residual of a named check; panics if missing or skipped.
    pub fn max(&self, name: &str) -> f64 {
        let rec = self.get(name).unwrap_or_else(|| panic!("no check named {name}"));
        rec.max_residual.unwrap_or_else(|| panic!("check {name} has no residual ({:?})", rec.skip_reason))
    }

    pub fn extend(&mut self, other: CheckReport) {
        self.checks.extend(other.checks);
        self.sort();
    }

    /// True when no record failed. Skipped records do not count as failures.
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut sorted = self.clone();
        sorted.sort();
        serde_json::to_string_pretty(&sorted).expect("report serialises")
    }

    pub fn from_json(s: &str) -> Result<CheckReport> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let params: Vec<String> = m.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(
            out,
            "manifold: {} [{}]  seed: {}  jet order: {}  time: {:.3}s",
            m.manifold,
            params.join(", "),
            m.seed,
            m.jet_order,
            m.wall_time
        );
        let width = self.checks.iter().map(|c| c.check_name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(out, "{:<4}  {:<width$}  {:>10}  {:>10}  {:>8}  {:>5}", "", "check", "max", "mean", "tol", "pts");
        for c in &self.checks {
            let mark = match c.status {
                Status::Pass => "ok",
                Status::Fail => "FAIL",
                Status::Skipped => "skip",
            };
            let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
            let _ = write!(
                out,
                "{mark:<4}  {:<width$}  {:>10}  {:>10}  {:>8.1e}  {:>5}",
                c.check_name,
                fmt(c.max_residual),
                fmt(c.mean_residual),
                c.tolerance,
                c.points_evaluated
            );
            if let Some(reason) = &c.skip_reason {
                let _ = write!(out, "  ({reason})");
            }
            out.push('\n');
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

#[derive(Debug)]
struct Acc {
    anchor: String,
    tolerance: f64,
    max: f64,
    sum: f64,
    points: usize,
    nonfinite: bool,
    skip: Option<String>,
}

/// Accumulates per-point residuals into records.
#[derive(Debug, Default)]
pub struct Checks {
    acc: BTreeMap<String, Acc>,
}

impl Checks {
    pub fn new() -> Checks {
        Checks::default()
    }

    fn entry(&mut self, name: &str, anchor: &str, tolerance: f64) -> &mut Acc {
        self.acc.entry(name.to_string()).or_insert_with(|| Acc {
            anchor: anchor.to_string(),
            tolerance,
            max: 0.0,
            sum: 0.0,
            points: 0,
            nonfinite: false,
            skip: None,
        })
    }

    /// One point's residual for a check.
    pub fn record(&mut self, name: &str, anchor: &str, tolerance: f64, residual: f64) {
        let a = self.entry(name, anchor, tolerance);
        if residual.is_finite() {
            a.max = a.max.max(residual);
            a.sum += residual;
        } else {
            a.nonfinite = true;
        }
        a.points += 1;
    }

    pub fn skip(&mut self, name: &str, anchor: &str, tolerance: f64, reason: impl Into<String>) {
        let a = self.entry(name, anchor, tolerance);
        a.skip = Some(reason.into());
    }

    pub fn merge(&mut self, other: Checks) {
        for (name, b) in other.acc {
            match self.acc.get_mut(&name) {
                Some(a) => {
                    a.max = a.max.max(b.max);
                    a.sum += b.sum;
                    a.points += b.points;
                    a.nonfinite |= b.nonfinite;
                    if b.skip.is_some() {
                        a.skip = b.skip;
                    }
                }
                None => {
                    self.acc.insert(name, b);
                }
            }
        }
    }

    pub fn finish(self) -> CheckReport {
        let checks = self
            .acc
            .into_iter()
            .map(|(name, a)| {
                if let Some(reason) = a.skip {
                    return CheckRecord {
                        check_name: name,
                        paper_anchor: a.anchor,
                        points_evaluated: 0,
                        max_residual: None,
                        mean_residual: None,
                        tolerance: a.tolerance,
                        status: Status::Skipped,
                        skip_reason: Some(reason),
                    };
                }
                if a.nonfinite {
                    return CheckRecord {
                        check_name: name,
                        paper_anchor: a.anchor,
                        points_evaluated: a.points,
                        max_residual: None,
                        mean_residual: None,
                        tolerance: a.tolerance,
                        status: Status::Fail,
                        skip_reason: Some("non-finite residual".into()),
                    };
                }
                let mean = if a.points > 0 { a.sum / a.points as f64 } else { 0.0 };
                CheckRecord {
                    check_name: name,
                    paper_anchor: a.anchor,
                    points_evaluated: a.points,
                    max_residual: Some(a.max),
                    mean_residual: Some(mean),
                    tolerance: a.tolerance,
                    status: if a.max <= a.tolerance { Status::Pass } else { Status::Fail },
                    skip_reason: None,
                }
            })
            .collect();
        CheckReport::new(checks)
    }
}
