//! Run configuration: one struct covering data source, method choice, and
//! the per-module tuning knobs, with a sectioned TOML file form. Every
//! field has a CLI flag twin; flags override file values.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GaParams;
use crate::metrics::Averaging;
use crate::resample::{FilterScope, PercentConvention, SmoteParams, TargetPolicy};
use crate::seed::derive_seed;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUTER_FOLDS: usize = 10;
pub const DEFAULT_WRAPPER_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AllFeatures,
    InfoGain,
    GaWrapper,
    SuGaWrapper,
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::AllFeatures,
        Method::InfoGain,
        Method::GaWrapper,
        Method::SuGaWrapper,
        Method::Hybrid,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::AllFeatures => "all_features",
            Method::InfoGain => "info_gain",
            Method::GaWrapper => "ga_wrapper",
            Method::SuGaWrapper => "su_ga_wrapper",
            Method::Hybrid => "hybrid",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| {
                let labels: Vec<&str> = Method::ALL.iter().map(|m| m.label()).collect();
                Error::config(format!(
                    "unknown method '{s}' (expected one of: {})",
                    labels.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Arff,
    Csv,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arff" => Ok(DataFormat::Arff),
            "csv" => Ok(DataFormat::Csv),
            other => Err(Error::config(format!(
                "unknown data format '{other}' (expected arff or csv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    pub format: DataFormat,
    /// 0-based attribute position of the class; ARFF defaults to the last
    /// attribute, CSV has no default
    pub class_column: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig { path: PathBuf::new(), format: DataFormat::Arff, class_column: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub seed: u64,
    pub outer_folds: usize,
    pub wrapper_folds: usize,
    pub leak_free: bool,
    pub resubstitution: bool,
    pub averaging: Averaging,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Hybrid,
            seed: DEFAULT_SEED,
            outer_folds: DEFAULT_OUTER_FOLDS,
            wrapper_folds: DEFAULT_WRAPPER_FOLDS,
            leak_free: false,
            resubstitution: false,
            averaging: Averaging::Macro,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub filter_scope: FilterScope,
    /// per-class oversampling percentages; omitted means balance every
    /// class up to the majority count
    pub percent: Option<Vec<f64>>,
    pub convention: PercentConvention,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: crate::resample::DEFAULT_K_NEIGHBORS,
            filter_scope: FilterScope::SyntheticOnly,
            percent: None,
            convention: PercentConvention::IntegerReplication,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankConfig {
    /// features must score strictly above this to survive the filter
    pub threshold: f64,
    /// when set, keep the k best-scoring features instead
    pub top_k: Option<usize>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { threshold: 0.0, top_k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub elitism: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        let p = GaParams::defaults(0);
        GaConfig {
            population_size: p.population_size,
            max_generations: p.max_generations,
            crossover_probability: p.crossover_probability,
            mutation_probability: p.mutation_probability,
            elitism: p.elitism,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub data: DataConfig,
    pub run: RunConfig,
    pub smote: SmoteConfig,
    pub rank: RankConfig,
    pub ga: GaConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("config file: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::internal(format!("config serialize: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.path.as_os_str().is_empty() {
            return Err(Error::config("no dataset given (set --data or [data] path)"));
        }
        if self.data.format == DataFormat::Csv && self.data.class_column.is_none() {
            return Err(Error::config("csv input needs --class-col"));
        }
        if self.run.outer_folds < 2 {
            return Err(Error::config("outer_folds must be at least 2"));
        }
        if self.run.wrapper_folds < 2 {
            return Err(Error::config("wrapper_folds must be at least 2"));
        }
        if self.rank.threshold < 0.0 || !self.rank.threshold.is_finite() {
            return Err(Error::config("ig threshold must be a finite non-negative number"));
        }
        if self.rank.top_k == Some(0) {
            return Err(Error::config("top_k must be at least 1"));
        }
        self.ga_params().validate()
    }

    /// SMOTE parameters with the oversampling seed derived from the run
    /// seed.
    pub fn smote_params(&self) -> SmoteParams {
        let target_policy = match &self.smote.percent {
            Some(per_class) => TargetPolicy::Percent {
                per_class: per_class.clone(),
                convention: self.smote.convention,
            },
            None => TargetPolicy::BalanceToMajority,
        };
        SmoteParams {
            k_neighbors: self.smote.k_neighbors,
            target_policy,
            seed: derive_seed(self.run.seed, "phase1-smote", 0),
        }
    }

    pub fn ga_params(&self) -> GaParams {
        GaParams {
            crossover_probability: self.ga.crossover_probability,
            max_generations: self.ga.max_generations,
            mutation_probability: self.ga.mutation_probability,
            population_size: self.ga.population_size,
            elitism: self.ga.elitism,
            seed: derive_seed(self.run.seed, "wrapper-ga", 0),
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        let mut cfg = self.clone();
        cfg.run.method = method;
        cfg
    }
}

impl FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro" => Ok(Averaging::Macro),
            "micro" => Ok(Averaging::Micro),
            other => Err(Error::config(format!(
                "unknown averaging '{other}' (expected macro or micro)"
            ))),
        }
    }
}
