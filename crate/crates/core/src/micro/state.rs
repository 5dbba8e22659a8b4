use crate::kernels::{LocalKernel, PopulationKernel};

/// Radius within which an agent observes peers when building group
/// distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scope {
    Unbounded,
    Bounded(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub opinion: f64,
    /// Rate of movement toward the weighted neighborhood; 0 is fully stubborn.
    pub alpha: f64,
    /// Confidence radius.
    pub epsilon: f64,
    /// Group-threshold radius; `None` uses the partition kernel's own.
    pub sigma: Option<f64>,
    pub scope: Scope,
    /// Group index in each partition.
    pub groups: Vec<usize>,
    /// Index into [`MicroSystem::kernels`].
    pub kernel: usize,
}

impl AgentState {
    pub fn new(opinion: f64, alpha: f64, epsilon: f64, groups: Vec<usize>) -> Self {
        Self {
            opinion,
            alpha,
            epsilon,
            sigma: None,
            scope: Scope::Unbounded,
            groups,
            kernel: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Group distances taken once from the initial state.
    Frozen,
    /// Group distances recomputed from the current state every step.
    Live,
}

/// One way of dividing the agents into groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub name: String,
    pub group_names: Vec<String>,
    pub kernel: PopulationKernel,
    pub mode: WeightMode,
    /// Share `γ_r` of this partition in the combined group weight.
    pub weight: f64,
}

impl Partition {
    pub fn n_groups(&self) -> usize {
        self.group_names.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroSystem {
    pub partitions: Vec<Partition>,
    pub kernels: Vec<LocalKernel>,
    pub integrator: Integrator,
    pub dt: f64,
    pub t_end: f64,
    pub save_every: usize,
}

impl MicroSystem {
    /// Single partition named `population` with one group per name.
    pub fn single_partition(
        group_names: Vec<String>,
        kernel: PopulationKernel,
        mode: WeightMode,
        local: LocalKernel,
        dt: f64,
        t_end: f64,
    ) -> Self {
        Self {
            partitions: vec![Partition {
                name: "population".into(),
                group_names,
                kernel,
                mode,
                weight: 1.0,
            }],
            kernels: vec![local],
            integrator: Integrator::Euler,
            dt,
            t_end,
            save_every: 1,
        }
    }

    /// Number of steps needed to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}
