use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distributions::InitialDistributionSpec;
use crate::kernels::{DecaySchedule, LocalKernel, Threshold};

pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_SAVE_EVERY: usize = 1;
pub const DEFAULT_N_CELLS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    Micro,
    Meanfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorMethod {
    #[default]
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Frozen,
    #[default]
    Live,
}

/// A complete experiment. Optional fields take their defaults in
/// [`super::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Local kernel shared by populations without their own.
    pub kernel: LocalKernel,
    pub populations: Vec<PopulationConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partitions: Vec<PartitionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default)]
    pub method: IntegratorMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub save_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub name: String,
    /// Agent count for the micro engine.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    /// Mass fraction for the mean-field engine; derived from sizes if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub initial: InitialDistributionSpec,
    pub alpha: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<f64>,
    /// Forces `alpha = 0`.
    #[serde(default, skip_serializing_if = "is_false")]
    pub stubborn: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<LocalKernel>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    pub name: String,
    #[serde(default)]
    pub mode: PartitionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub assignment: Assignment,
    #[serde(default)]
    pub kernel: PopulationKernelConfig,
}

/// How agents are mapped to the groups of a partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case", deny_unknown_fields)]
pub enum Assignment {
    /// One group per population, named after it.
    Population,
    /// Populations mapped onto named groups.
    Map {
        groups: Vec<String>,
        members: BTreeMap<String, String>,
    },
    /// Groups by initial opinion: group `k` holds opinions in
    /// `[cuts[k-1], cuts[k])`.
    OpinionCuts { groups: Vec<String>, cuts: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationKernelConfig {
    #[serde(default)]
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "is_no_threshold")]
    pub threshold: Threshold,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecaySchedule>,
    /// Allowed directed `[source, target]` group pairs; absent means all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<[String; 2]>>,
}

fn is_no_threshold(t: &Threshold) -> bool {
    *t == Threshold::None
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }
}
