use crate::derive_seed;
use crate::distributions::{sample_initial, GridDensity, InitialDistributionSpec};
use crate::kernels::{AsymmetryMask, LocalKernel, PopulationKernel};
use crate::meanfield::{MeanFieldPopulation, MeanFieldSystem};
use crate::micro::{
    AgentState, Integrator, MicroEngine, MicroSystem, Partition, Scope, WeightMode,
};

use super::config::{
    Assignment, EngineKind, IntegratorMethod, PartitionMode, PopulationKernelConfig,
    ScenarioConfig, DEFAULT_DT, DEFAULT_N_CELLS, DEFAULT_SAVE_EVERY,
};
use super::ScenarioError;

/// Seed of population `k` in trial `trial`.
pub fn population_seed(seed: u64, trial: usize, k: usize) -> u64 {
    derive_seed(derive_seed(seed, trial as u64), k as u64)
}

impl PopulationKernelConfig {
    pub(crate) fn to_kernel(
        &self,
        groups: &[String],
    ) -> Result<PopulationKernel, (String, &'static str, String)> {
        let mask = match &self.mask {
            None => None,
            Some(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (i, [source, target]) in pairs.iter().enumerate() {
                    let find = |g: &String| groups.iter().position(|x| x == g);
                    match (find(source), find(target)) {
                        (Some(s), Some(t)) => out.push((s, t)),
                        _ => {
                            return Err((
                                format!("mask[{i}]"),
                                "unknown-group",
                                format!("mask pair [{source}, {target}] names an undefined group"),
                            ))
                        }
                    }
                }
                Some(AsymmetryMask::new(out))
            }
        };
        let kernel = PopulationKernel {
            gamma: self.gamma,
            threshold: self.threshold,
            schedule: self.decay,
            mask,
        };
        kernel
            .validate()
            .map_err(|e| (e.field.to_string(), "kernel-parameter", e.reason))?;
        Ok(kernel)
    }
}

/// A scenario that passed validation, with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidScenario {
    config: ScenarioConfig,
}

impl ValidScenario {
    pub(super) fn new(config: ScenarioConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.config
    }

    pub fn engine(&self) -> EngineKind {
        self.config.engine
    }

    pub fn dt(&self) -> f64 {
        self.config.integrator.dt.unwrap_or(DEFAULT_DT)
    }

    pub fn save_every(&self) -> usize {
        self.config
            .integrator
            .save_every
            .unwrap_or(DEFAULT_SAVE_EVERY)
    }

    pub fn n_cells(&self) -> usize {
        self.config
            .grid
            .as_ref()
            .and_then(|g| g.n_cells)
            .unwrap_or(DEFAULT_N_CELLS)
    }

    pub fn seed(&self) -> u64 {
        self.config.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> usize {
        self.config.trials.unwrap_or(1)
    }

    pub fn population_names(&self) -> Vec<String> {
        self.config
            .populations
            .iter()
            .map(|p| p.name.clone())
            .collect()
    }

    /// Group names of partition `r`.
    pub fn group_names(&self, r: usize) -> Vec<String> {
        match &self.config.partitions[r].assignment {
            Assignment::Population => self.population_names(),
            Assignment::Map { groups, .. } | Assignment::OpinionCuts { groups, .. } => {
                groups.clone()
            }
        }
    }

    pub fn initial_laws(&self) -> Vec<InitialDistributionSpec> {
        self.config
            .populations
            .iter()
            .map(|p| p.initial.clone())
            .collect()
    }

    fn local_kernels(&self) -> (Vec<LocalKernel>, Vec<usize>) {
        let mut kernels = vec![self.config.kernel.clone()];
        let mut index = Vec::with_capacity(self.config.populations.len());
        for p in &self.config.populations {
            match &p.kernel {
                None => index.push(0),
                Some(k) => match kernels.iter().position(|x| x == k) {
                    Some(i) => index.push(i),
                    None => {
                        kernels.push(k.clone());
                        index.push(kernels.len() - 1);
                    }
                },
            }
        }
        (kernels, index)
    }

    fn partition_kernel(&self, r: usize) -> PopulationKernel {
        self.config.partitions[r]
            .kernel
            .to_kernel(&self.group_names(r))
            .expect("validated population kernel")
    }

    pub fn micro_system(&self) -> Result<MicroSystem, ScenarioError> {
        if self.engine() != EngineKind::Micro {
            return Err(ScenarioError::WrongEngine {
                expected: "mean-field",
            });
        }
        let partitions = self
            .config
            .partitions
            .iter()
            .enumerate()
            .map(|(r, p)| Partition {
                name: p.name.clone(),
                group_names: self.group_names(r),
                kernel: self.partition_kernel(r),
                mode: match p.mode {
                    PartitionMode::Frozen => WeightMode::Frozen,
                    PartitionMode::Live => WeightMode::Live,
                },
                weight: p.weight.unwrap_or(1.0),
            })
            .collect();
        Ok(MicroSystem {
            partitions,
            kernels: self.local_kernels().0,
            integrator: match self.config.integrator.method {
                IntegratorMethod::Euler => Integrator::Euler,
                IntegratorMethod::Rk4 => Integrator::Rk4,
            },
            dt: self.dt(),
            t_end: self.config.integrator.t_end,
            save_every: self.save_every(),
        })
    }

    /// Agents of one trial, population by population, each population's
    /// opinions sorted.
    pub fn micro_agents(&self, seed: u64, trial: usize) -> Result<Vec<AgentState>, ScenarioError> {
        let (_, kernel_index) = self.local_kernels();
        let mut agents = Vec::new();
        for (k, p) in self.config.populations.iter().enumerate() {
            let size = p.size.unwrap_or(0);
            let samples = sample_initial(&p.initial, size, population_seed(seed, trial, k))?;
            for &x in samples.samples() {
                let groups = self
                    .config
                    .partitions
                    .iter()
                    .map(|part| match &part.assignment {
                        Assignment::Population => k,
                        Assignment::Map { groups, members } => groups
                            .iter()
                            .position(|g| Some(g) == members.get(&p.name))
                            .expect("validated group map"),
                        Assignment::OpinionCuts { cuts, .. } => {
                            cuts.iter().filter(|c| x >= **c).count()
                        }
                    })
                    .collect();
                agents.push(AgentState {
                    opinion: x,
                    alpha: if p.stubborn { 0.0 } else { p.alpha },
                    epsilon: p.epsilon,
                    sigma: p.sigma,
                    scope: p.scope.map_or(Scope::Unbounded, Scope::Bounded),
                    groups,
                    kernel: kernel_index[k],
                });
            }
        }
        Ok(agents)
    }

    pub fn micro_engine(&self, seed: u64, trial: usize) -> Result<MicroEngine, ScenarioError> {
        Ok(MicroEngine::new(
            self.micro_system()?,
            self.micro_agents(seed, trial)?,
        )?)
    }

    /// Mean-field system on the scenario grid. Mass fractions come from
    /// `lambda`, or from the population sizes when no `lambda` is set.
    pub fn meanfield_system(&self) -> Result<MeanFieldSystem, ScenarioError> {
        let n_cells = self.n_cells();
        let pops = &self.config.populations;
        let total: usize = pops.iter().filter_map(|p| p.size).sum();
        let (kernels, index) = self.local_kernels();
        let populations = pops
            .iter()
            .enumerate()
            .map(|(k, p)| {
                Ok(MeanFieldPopulation {
                    name: p.name.clone(),
                    density: GridDensity::from_spec(&p.initial, n_cells)?,
                    lambda: p
                        .lambda
                        .unwrap_or_else(|| p.size.unwrap_or(0) as f64 / total.max(1) as f64),
                    alpha: if p.stubborn { 0.0 } else { p.alpha },
                    epsilon: p.epsilon,
                    sigma: p.sigma,
                    kernel: kernels[index[k]].clone(),
                })
            })
            .collect::<Result<Vec<_>, ScenarioError>>()?;
        let system = MeanFieldSystem {
            populations,
            kernel: self.partition_kernel(0),
            dt: self.dt(),
            t_end: self.config.integrator.t_end,
            save_every: self.save_every(),
        };
        system.validate()?;
        Ok(system)
    }
}
