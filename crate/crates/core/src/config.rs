//! JSON run configurations.
//!
//! ```json
//! {
//!   "run": {"tol": 1e-8, "stages": 8, "samples_per_stage": 32, "horizon": 64, "seed": 42},
//!   "sets": {"A": {"finite": [0]}, "E": {"cofinite_excl": [0]}, "P": {"predicate": "even"}},
//!   "measure": {"additive": {"weights": "geometric:0.5"}},
//!   "functions": {"u": "indicator(A)", "v": {"expr": "1", "support": "A"}},
//!   "p": 2.0
//! }
//! ```
//!
//! Every section is optional except where a command needs it. Unknown keys
//! are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::expr::SetBindings;
use crate::integrator::{IntegrationConfig, ScalarFunction};
use crate::measures::{Distortion, SetFunction, DEFAULT_TAIL_TOLERANCE};
use crate::partitions::{Partition, TailRule};
use crate::space::{MeasurableSet, DEFAULT_HORIZON};

/// A schema or semantic error, located by a dotted path into the document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub tol: Option<f64>,
    pub stages: Option<u32>,
    pub samples_per_stage: Option<usize>,
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Finite(Vec<u64>),
    CofiniteExcl(Vec<u64>),
    /// `even`, `odd`, `all`, `geq:k` or `lt:k`.
    Predicate(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Additive { weights: String },
    Max { weights: String },
    Distorted { base: String, g: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Text(String),
    Full {
        expr: String,
        #[serde(default)]
        support: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSpec {
    #[default]
    Singletons,
    Blocks(Vec<u64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub head: Vec<Vec<u64>>,
    #[serde(default)]
    pub tail: TailSpec,
    /// Head cell tags; least elements when absent.
    #[serde(default)]
    pub tags: Option<Vec<u64>>,
    /// Number of cells in the partial sum.
    pub depth: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub functions: BTreeMap<String, FunctionSpec>,
    /// Function integrated by `integrate` and `norm`; `u` by default.
    pub integrand: Option<String>,
    /// Restricts `integrate`, or names the probe set of `audit`.
    pub set: Option<String>,
    pub p: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub partition: Option<PartitionSpec>,
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub stages: Option<u32>,
    pub samples: Option<usize>,
    pub horizon: Option<u64>,
    pub seed: Option<u64>,
}

/// A validated configuration with every name resolved.
#[derive(Debug, Clone)]
pub struct Config {
    pub raw: serde_json::Value,
    pub file: ConfigFile,
    pub integration: IntegrationConfig,
    pub sets: SetBindings,
    pub measure: Option<SetFunction>,
    pub functions: BTreeMap<String, ScalarFunction>,
}

fn parse_set(name: &str, spec: &SetSpec) -> Result<MeasurableSet, ConfigError> {
    let path = format!("sets.{name}");
    let set = match spec {
        SetSpec::Finite(v) => MeasurableSet::finite(v.iter().copied()),
        SetSpec::CofiniteExcl(v) => MeasurableSet::cofinite(v.iter().copied()),
        SetSpec::Predicate(rule) => {
            let bound = |prefix: &str| {
                rule.strip_prefix(prefix).map(|k| {
                    k.parse::<u64>().map_err(|_| {
                        ConfigError::new(
                            format!("{path}.predicate"),
                            format!("bad bound in `{rule}`"),
                        )
                    })
                })
            };
            match rule.as_str() {
                "even" => MeasurableSet::even(),
                "odd" => MeasurableSet::odd(),
                "all" => MeasurableSet::everything(),
                _ => {
                    if let Some(k) = bound("geq:") {
                        MeasurableSet::at_least(k?)
                    } else if let Some(k) = bound("lt:") {
                        MeasurableSet::below(k?)
                    } else {
                        return Err(ConfigError::new(
                            format!("{path}.predicate"),
                            format!("unknown predicate `{rule}`"),
                        ));
                    }
                }
            }
        }
    };
    Ok(set.with_label(name))
}

fn parse_measure(spec: &MeasureSpec, horizon: u64) -> Result<SetFunction, ConfigError> {
    let nu = match spec {
        MeasureSpec::Additive { weights } => SetFunction::additive(
            weights
                .parse()
                .map_err(|e| ConfigError::new("measure.additive.weights", e))?,
        ),
        MeasureSpec::Max { weights } => SetFunction::max(
            weights
                .parse()
                .map_err(|e| ConfigError::new("measure.max.weights", e))?,
        ),
        MeasureSpec::Distorted { base, g } => SetFunction::distorted(
            base.parse()
                .map_err(|e| ConfigError::new("measure.distorted.base", e))?,
            g.parse::<Distortion>()
                .map_err(|e| ConfigError::new("measure.distorted.g", e))?,
        ),
    };
    Ok(nu.with_limits(horizon.max(DEFAULT_HORIZON), DEFAULT_TAIL_TOLERANCE))
}

impl Config {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &Overrides) -> Result<Config, ConfigError> {
        let raw: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
        let file: ConfigFile = serde_path_to_error::deserialize(&raw).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            ConfigError::new(path, e.into_inner())
        })?;

        let defaults = IntegrationConfig::default();
        let integration = IntegrationConfig {
            tol: overrides.tol.or(file.run.tol).unwrap_or(defaults.tol),
            stages: overrides
                .stages
                .or(file.run.stages)
                .unwrap_or(defaults.stages),
            samples_per_stage: overrides
                .samples
                .or(file.run.samples_per_stage)
                .unwrap_or(defaults.samples_per_stage),
            horizon: overrides
                .horizon
                .or(file.run.horizon)
                .unwrap_or(defaults.horizon),
            seed: overrides.seed.or(file.run.seed).unwrap_or(defaults.seed),
        };
        integration
            .validate()
            .map_err(|e| ConfigError::new("run", e))?;

        let mut sets = SetBindings::new();
        for (name, spec) in &file.sets {
            sets.insert(name.clone(), parse_set(name, spec)?);
        }
        let measure = file
            .measure
            .as_ref()
            .map(|m| parse_measure(m, integration.horizon))
            .transpose()?;

        let mut functions = BTreeMap::new();
        for (name, spec) in &file.functions {
            let path = format!("functions.{name}");
            let (text, support) = match spec {
                FunctionSpec::Text(t) => (t, None),
                FunctionSpec::Full { expr, support } => (expr, support.as_ref()),
            };
            let support = support
                .map(|s| {
                    resolve(&sets, s).map_err(|e| ConfigError::new(format!("{path}.support"), e))
                })
                .transpose()?;
            let f = ScalarFunction::parse(name.clone(), text, support, &sets)
                .map_err(|e| ConfigError::new(path, e))?;
            functions.insert(name.clone(), f);
        }
        for (key, value) in [("p", file.p), ("alpha", file.alpha), ("beta", file.beta)] {
            if value.is_some_and(|x| !x.is_finite()) {
                return Err(ConfigError::new(key, "must be finite"));
            }
        }
        Ok(Config {
            raw,
            file,
            integration,
            sets,
            measure,
            functions,
        })
    }

    pub fn measure(&self) -> Result<&SetFunction, ConfigError> {
        self.measure
            .as_ref()
            .ok_or_else(|| ConfigError::new("measure", "required by this command"))
    }

    pub fn function(&self, name: &str) -> Result<&ScalarFunction, ConfigError> {
        self.functions.get(name).ok_or_else(|| {
            ConfigError::new(format!("functions.{name}"), "required by this command")
        })
    }

    pub fn integrand(&self) -> Result<&ScalarFunction, ConfigError> {
        self.function(self.file.integrand.as_deref().unwrap_or("u"))
    }

    pub fn set(&self) -> Result<Option<MeasurableSet>, ConfigError> {
        self.file
            .set
            .as_deref()
            .map(|s| resolve(&self.sets, s).map_err(|e| ConfigError::new("set", e)))
            .transpose()
    }

    pub fn p(&self) -> Result<f64, ConfigError> {
        self.file
            .p
            .ok_or_else(|| ConfigError::new("p", "required by this command"))
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.file.alpha.zip(self.file.beta)
    }

    pub fn p_grid(&self) -> Result<&[f64], ConfigError> {
        self.file
            .p_grid
            .as_deref()
            .ok_or_else(|| ConfigError::new("p_grid", "required by this command"))
    }

    /// The configured tagged partition and partial-sum depth, if any.
    pub fn tagged_partition(
        &self,
    ) -> Result<Option<(crate::partitions::TaggedPartition, usize)>, ConfigError> {
        let Some(spec) = &self.file.partition else {
            return Ok(None);
        };
        let head = spec
            .head
            .iter()
            .map(|c| MeasurableSet::finite(c.iter().copied()))
            .collect();
        let tail = match &spec.tail {
            TailSpec::Singletons => TailRule::Singletons,
            TailSpec::Blocks(p) => {
                TailRule::blocks(p.clone()).map_err(|e| ConfigError::new("partition.tail", e))?
            }
        };
        let p = Partition::new(head, tail, "configured")
            .map_err(|e| ConfigError::new("partition", e))?;
        let tp = match &spec.tags {
            Some(tags) => crate::partitions::TaggedPartition::new(p, tags.clone())
                .map_err(|e| ConfigError::new("partition.tags", e))?,
            None => crate::partitions::TaggedPartition::least(p),
        };
        if spec.depth == 0 {
            return Err(ConfigError::new("partition.depth", "must be at least 1"));
        }
        Ok(Some((tp, spec.depth)))
    }
}

/// A set by name; `T` is the whole space unless redefined.
fn resolve(sets: &SetBindings, name: &str) -> Result<MeasurableSet, String> {
    match sets.get(name) {
        Some(s) => Ok(s.clone()),
        None if name == "T" => Ok(MeasurableSet::everything().with_label("T")),
        None => Err(format!("unknown set `{name}`")),
    }
}
