//! Batch runs: configuration, suite orchestration and report output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::contact::{einstein_diagnostic, identity_suite, ntensor_suite, verify_axioms, SuiteLevel, Tolerances, WeakStructure};
use crate::error::{Error, Result};
use crate::expr::parse_potential;
use crate::gallery::{lookup, lookup_structure, GalleryEntry};
use crate::manifold::{sample_points, SamplePlan, TensorField};
use crate::oracle::{oracle_suite, FD_STEP, ORACLE_TOLERANCE};
use crate::report::{CheckReport, Checks, Format};
use crate::soliton::{lemma_suite, soliton_suite, theorem51_diagnostic, SolitonData, SolitonParams};
use crate::tensor::Slot;

/// Environment variable read when neither flags nor config file fix a seed.
pub const SEED_ENV: &str = "WEAKCONTACT_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Axioms,
    NTensors,
    ContactIdentities,
    KcontactIdentities,
    Einstein,
    Soliton,
    Lemmas,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Axioms,
        Suite::NTensors,
        Suite::ContactIdentities,
        Suite::KcontactIdentities,
        Suite::Einstein,
        Suite::Soliton,
        Suite::Lemmas,
        Suite::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::NTensors => "n_tensors",
            Suite::ContactIdentities => "contact_identities",
            Suite::KcontactIdentities => "kcontact_identities",
            Suite::Einstein => "einstein",
            Suite::Soliton => "soliton",
            Suite::Lemmas => "lemmas",
            Suite::Oracle => "oracle",
        }
    }

    /// Whether the suite needs a contact structure, not just the chart.
    fn needs_structure(self) -> bool {
        self != Suite::Oracle
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

/// Soliton coefficients and data. Without a potential the field is `X = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    #[serde(flatten)]
    pub params: SolitonParams,
    #[serde(default)]
    pub potential: Option<String>,
    /// Second potential for the two-potential form.
    #[serde(default)]
    pub potential2: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub manifold: String,
    pub params: BTreeMap<String, f64>,
    pub suites: Vec<Suite>,
    pub sampling: SamplePlan,
    pub tolerance: f64,
    pub jet_order: usize,
    pub soliton: Option<SolitonConfig>,
    pub output: Option<PathBuf>,
}

/// Sampling fields as they appear in a config file or on the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialSampling {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub margin: Option<f64>,
}

/// A config layer: every field optional so file and flags can be merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub manifold: Option<String>,
    pub params: Option<BTreeMap<String, f64>>,
    pub suites: Option<Vec<Suite>>,
    #[serde(default)]
    pub sampling: PartialSampling,
    pub tolerance: Option<f64>,
    pub jet_order: Option<usize>,
    pub soliton: Option<SolitonConfig>,
    pub output: Option<PathBuf>,
}

impl PartialConfig {
    pub fn from_json(s: &str) -> Result<PartialConfig> {
        serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<PartialConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read `{}`: {e}", path.display())))?;
        PartialConfig::from_json(&text)
    }

    /// `self` with every field set in `over` replaced; parameter maps merge key by key.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        let params = match (self.params, over.params) {
            (Some(mut base), Some(top)) => {
                base.extend(top);
                Some(base)
            }
            (base, top) => top.or(base),
        };
        PartialConfig {
            manifold: over.manifold.or(self.manifold),
            params,
            suites: over.suites.or(self.suites),
            sampling: PartialSampling {
                count: over.sampling.count.or(self.sampling.count),
                seed: over.sampling.seed.or(self.sampling.seed),
                margin: over.sampling.margin.or(self.sampling.margin),
            },
            tolerance: over.tolerance.or(self.tolerance),
            jet_order: over.jet_order.or(self.jet_order),
            soliton: over.soliton.or(self.soliton),
            output: over.output.or(self.output),
        }
    }

    /// Fills defaults and validates. `env_seed` is the raw value of
    /// [`SEED_ENV`], used only when no layer set a seed.
    pub fn resolve(self, env_seed: Option<&str>) -> Result<RunConfig> {
        let manifold = self.manifold.ok_or_else(|| Error::InvalidConfig("no manifold given".into()))?;
        let defaults = SamplePlan::default();
        let seed = match (self.sampling.seed, env_seed) {
            (Some(s), _) => s,
            (None, Some(raw)) => raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")))?,
            (None, None) => defaults.seed,
        };
        let config = RunConfig {
            manifold,
            params: self.params.unwrap_or_default(),
            suites: self.suites.unwrap_or_else(|| Suite::ALL.to_vec()),
            sampling: SamplePlan {
                count: self.sampling.count.unwrap_or(defaults.count),
                seed,
                margin: self.sampling.margin.unwrap_or(defaults.margin),
            },
            tolerance: self.tolerance.unwrap_or(1e-7),
            jet_order: self.jet_order.unwrap_or(3),
            soliton: self.soliton,
            output: self.output,
        };
        config.validate()?;
        Ok(config)
    }
}

impl RunConfig {
    pub fn new(manifold: &str) -> RunConfig {
        PartialConfig { manifold: Some(manifold.into()), ..Default::default() }
            .resolve(None)
            .expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::InvalidConfig("suite list is empty".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(2..=3).contains(&self.jet_order) {
            return Err(Error::InvalidConfig(format!("jet order must be 2 or 3, got {}", self.jet_order)));
        }
        if self.sampling.count == 0 {
            return Err(Error::InvalidConfig("sample count must be positive".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances { identity: self.tolerance, seed: self.sampling.seed, jet_order: self.jet_order, ..Default::default() }
    }
}

/// A generic smooth potential for the lemma suite when none is configured.
fn default_potential(labels: &[String]) -> String {
    match labels {
        [a, b, c, ..] => format!("sin({a}) * cos({b}) + {c}^2 / 3 + {a} * {b} / 5"),
        [a, ..] => format!("sin({a})"),
        [] => "0".into(),
    }
}

fn soliton_data(labels: &[String], sc: &SolitonConfig) -> Result<SolitonData> {
    Ok(match (&sc.potential, &sc.potential2) {
        (Some(f1), Some(f2)) => SolitonData::TwoPotentials(parse_potential(f1, labels)?, parse_potential(f2, labels)?),
        (Some(f), None) => SolitonData::Potential(parse_potential(f, labels)?),
        (None, None) => {
            let n = labels.len();
            SolitonData::VectorField(TensorField::constant(vec![Slot::Up], vec![0.0; n]))
        }
        (None, Some(_)) => return Err(Error::InvalidConfig("potential2 given without potential".into())),
    })
}

/// Runs every configured suite on the configured gallery entry.
///
/// Suites run in the order given; the merged report is sorted by check name,
/// so two runs of the same config give identical residuals.
pub fn run_suite(config: &RunConfig) -> Result<CheckReport> {
    config.validate()?;
    let start = Instant::now();
    let entry: GalleryEntry = lookup(&config.manifold, &config.params)?;
    let labels = entry.chart.labels().to_vec();
    let soliton = config.soliton.as_ref().map(|sc| soliton_data(&labels, sc).map(|d| (d, sc.params))).transpose()?;
    let points = sample_points(&entry.chart, &config.sampling)?;
    let opts = config.tolerances();

    let structure: Option<WeakStructure> = if config.suites.iter().any(|s| s.needs_structure()) {
        Some(lookup_structure(&config.manifold, &config.params)?)
    } else {
        None
    };

    let mut report = CheckReport::default();
    for suite in &config.suites {
        let run = || -> Result<CheckReport> {
            Ok(match (suite, &structure) {
                (Suite::Oracle, _) => oracle_suite(&entry.chart, &points, FD_STEP, ORACLE_TOLERANCE.max(config.tolerance))?,
                (_, None) => unreachable!("structure built for every suite that needs one"),
                (Suite::Axioms, Some(s)) => verify_axioms(s, &points, &opts)?,
                (Suite::NTensors, Some(s)) => ntensor_suite(s, &points, &opts)?,
                (Suite::ContactIdentities, Some(s)) => identity_suite(s, &points, SuiteLevel::ContactMetric, &opts)?,
                (Suite::KcontactIdentities, Some(s)) => identity_suite(s, &points, SuiteLevel::KContact, &opts)?,
                (Suite::Einstein, Some(s)) => einstein_diagnostic(s, &points, &opts)?.report,
                (Suite::Soliton, Some(s)) => match &soliton {
                    Some((data, params)) => {
                        let mut r = soliton_suite(s, data, params, &points, &opts)?;
                        if let SolitonData::Potential(f) = data {
                            r.extend(theorem51_diagnostic(s, f, params, &points, &opts)?.report);
                        }
                        r
                    }
                    None => {
                        let mut checks = Checks::new();
                        checks.skip("soliton.equation", "", config.tolerance, "no soliton configured");
                        checks.finish()
                    }
                },
                (Suite::Lemmas, Some(s)) => match &soliton {
                    Some((data, params)) => lemma_suite(s, data, params, &points, &opts)?,
                    None => {
                        let f = parse_potential(&default_potential(&labels), &labels)?;
                        lemma_suite(s, &SolitonData::Potential(f), &SolitonParams::new(0.0, 0.0, 0.0), &points, &opts)?
                    }
                },
            })
        };
        // Suites that need third metric derivatives cannot run at order 2.
        let part = match run() {
            Err(Error::InsufficientOrder { needed, have }) => {
                let mut checks = Checks::new();
                let reason = format!("needs metric jets of order {} (have {})", config.jet_order + needed - have, config.jet_order);
                checks.skip(&format!("{suite}.unavailable"), "", config.tolerance, reason);
                checks.finish()
            }
            other => other?,
        };
        report.extend(part);
    }
    report.meta.manifold = config.manifold.clone();
    report.meta.params = entry.params.clone();
    report.meta.seed = config.sampling.seed;
    report.meta.jet_order = config.jet_order;
    report.meta.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Renders `report` and writes it to `path`, or returns the text for stdout
/// when `path` is `None`.
pub fn write_report(report: &CheckReport, format: Format, path: Option<&Path>) -> Result<Option<String>> {
    let text = report.render(format);
    match path {
        Some(p) => {
            std::fs::write(p, text + "\n")
                .map_err(|e| Error::Output { path: p.display().to_string(), reason: e.to_string() })?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
