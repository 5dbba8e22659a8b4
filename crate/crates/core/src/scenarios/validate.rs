use std::collections::BTreeSet;
use std::fmt;

use super::build::ValidScenario;
use super::config::{
    Assignment, EngineKind, GridConfig, PartitionConfig, PartitionMode, PopulationKernelConfig,
    ScenarioConfig, DEFAULT_DT, DEFAULT_N_CELLS, DEFAULT_SAVE_EVERY,
};
use crate::kernels::LocalKernel;

const SUM_TOLERANCE: f64 = 1e-12;

/// One violated rule: where, which rule, and a readable explanation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub path: String,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.path, self.code, self.message)
    }
}

#[derive(Default)]
struct Errors(Vec<ValidationError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, code: &'static str, message: impl Into<String>) {
        self.0.push(ValidationError {
            path: path.into(),
            code,
            message: message.into(),
        });
    }
}

/// Checks every rule and fills defaults. All violations are reported, not
/// only the first.
pub fn validate(mut config: ScenarioConfig) -> Result<ValidScenario, Vec<ValidationError>> {
    let mut errors = Errors::default();
    normalize(&mut config);
    check_integrator(&config, &mut errors);
    check_populations(&config, &mut errors);
    check_partitions(&config, &mut errors);
    if errors.0.is_empty() {
        Ok(ValidScenario::new(config))
    } else {
        Err(errors.0)
    }
}

fn normalize(config: &mut ScenarioConfig) {
    let integrator = &mut config.integrator;
    integrator.dt.get_or_insert(DEFAULT_DT);
    integrator.save_every.get_or_insert(DEFAULT_SAVE_EVERY);
    config.seed.get_or_insert(0);
    config.trials.get_or_insert(1);
    if config.engine == EngineKind::Meanfield {
        config
            .grid
            .get_or_insert(GridConfig { n_cells: None })
            .n_cells
            .get_or_insert(DEFAULT_N_CELLS);
    }
    if config.partitions.is_empty() {
        config.partitions.push(PartitionConfig {
            name: "population".into(),
            mode: PartitionMode::Live,
            weight: None,
            assignment: Assignment::Population,
            kernel: PopulationKernelConfig::default(),
        });
    }
    let m = config.partitions.len();
    for p in &mut config.partitions {
        p.weight.get_or_insert(1.0 / m as f64);
    }
}

fn check_integrator(config: &ScenarioConfig, errors: &mut Errors) {
    let i = &config.integrator;
    let dt = i.dt.unwrap_or(DEFAULT_DT);
    if !(dt > 0.0 && dt.is_finite()) {
        errors.push(
            "integrator.dt",
            "step-positive",
            format!("dt = {dt} must be positive"),
        );
    }
    if !(i.t_end > 0.0 && i.t_end.is_finite()) {
        errors.push(
            "integrator.t_end",
            "horizon-positive",
            format!("t_end = {} must be positive", i.t_end),
        );
    }
    if i.save_every == Some(0) {
        errors.push(
            "integrator.save_every",
            "save-every-positive",
            "save_every must be at least 1",
        );
    }
    if config.trials == Some(0) {
        errors.push("trials", "trials-positive", "trials must be at least 1");
    }
    if let Some(GridConfig { n_cells: Some(0) }) = config.grid {
        errors.push(
            "grid.n_cells",
            "grid-cells-positive",
            "n_cells must be at least 1",
        );
    }
    check_kernel("kernel", &config.kernel, errors);
}

fn check_kernel(path: &str, kernel: &LocalKernel, errors: &mut Errors) {
    if let Err(e) = kernel.validate() {
        errors.push(format!("{path}.{}", e.field), "kernel-parameter", e.reason);
    }
}

fn check_populations(config: &ScenarioConfig, errors: &mut Errors) {
    let pops = &config.populations;
    if pops.is_empty() {
        errors.push(
            "populations",
            "populations-empty",
            "at least one population is required",
        );
        return;
    }
    let mut names = BTreeSet::new();
    for (k, p) in pops.iter().enumerate() {
        let path = format!("populations[{k}]");
        if !names.insert(p.name.as_str()) {
            errors.push(
                format!("{path}.name"),
                "duplicate-name",
                format!("population `{}` defined twice", p.name),
            );
        }
        if config.engine == EngineKind::Micro {
            match p.size {
                None => errors.push(
                    format!("{path}.size"),
                    "population-size",
                    "micro populations need a size",
                ),
                Some(0) => errors.push(
                    format!("{path}.size"),
                    "population-size",
                    "size must be at least 1",
                ),
                Some(_) => {}
            }
        } else if p.size == Some(0) {
            errors.push(
                format!("{path}.size"),
                "population-size",
                "size must be at least 1",
            );
        }
        if !(0.0..=1.0).contains(&p.alpha) {
            errors.push(
                format!("{path}.alpha"),
                "alpha-range",
                format!("alpha = {} outside [0, 1]", p.alpha),
            );
        }
        if !(p.epsilon > 0.0 && p.epsilon.is_finite()) {
            errors.push(
                format!("{path}.epsilon"),
                "confidence-positive",
                format!("epsilon = {} must be positive", p.epsilon),
            );
        }
        if let Some(s) = p.sigma {
            if !(s > 0.0 && s.is_finite()) {
                errors.push(
                    format!("{path}.sigma"),
                    "threshold-positive",
                    format!("sigma = {s} must be positive"),
                );
            }
        }
        if let Some(s) = p.scope {
            if !(s >= p.epsilon) {
                errors.push(
                    format!("{path}.scope"),
                    "scope-below-confidence",
                    format!("scope {s} is below the confidence radius {}", p.epsilon),
                );
            }
        }
        if let Err(e) = p.initial.check() {
            errors.push(
                format!("{path}.initial"),
                "initial-distribution",
                e.to_string(),
            );
        }
        if let Some(kernel) = &p.kernel {
            check_kernel(&format!("{path}.kernel"), kernel, errors);
        }
    }
    check_mass_fractions(config, errors);
}

fn check_mass_fractions(config: &ScenarioConfig, errors: &mut Errors) {
    let pops = &config.populations;
    let given = pops.iter().filter(|p| p.lambda.is_some()).count();
    if given == 0 {
        if config.engine == EngineKind::Meanfield && pops.iter().any(|p| p.size.is_none()) {
            errors.push(
                "populations",
                "mass-fraction-missing",
                "mean-field populations need `lambda` or a `size` on every population",
            );
        }
        return;
    }
    if given < pops.len() {
        errors.push(
            "populations",
            "mass-fraction-missing",
            "set `lambda` on every population or on none",
        );
        return;
    }
    let mut total = 0.0;
    for (k, p) in pops.iter().enumerate() {
        let l = p.lambda.unwrap_or(0.0);
        if !(l > 0.0 && l <= 1.0) {
            errors.push(
                format!("populations[{k}].lambda"),
                "mass-fraction-range",
                format!("lambda = {l} outside (0, 1]"),
            );
        }
        total += l;
    }
    if (total - 1.0).abs() > SUM_TOLERANCE {
        errors.push(
            "populations",
            "mass-fractions-sum",
            format!("mass fractions sum to {total}, not 1"),
        );
    }
}

fn check_partitions(config: &ScenarioConfig, errors: &mut Errors) {
    let pop_names: BTreeSet<&str> = config.populations.iter().map(|p| p.name.as_str()).collect();
    let mut names = BTreeSet::new();
    let mut total = 0.0;
    for (r, p) in config.partitions.iter().enumerate() {
        let path = format!("partitions[{r}]");
        if !names.insert(p.name.as_str()) {
            errors.push(
                format!("{path}.name"),
                "duplicate-name",
                format!("partition `{}` defined twice", p.name),
            );
        }
        let w = p.weight.unwrap_or(0.0);
        if !(w >= 0.0 && w.is_finite()) {
            errors.push(
                format!("{path}.weight"),
                "partition-weight-range",
                format!("weight = {w} must be >= 0"),
            );
        }
        total += w;
        let groups: Vec<String> = match &p.assignment {
            Assignment::Population => config.populations.iter().map(|p| p.name.clone()).collect(),
            Assignment::Map { groups, members } => {
                for (pop, group) in members {
                    if !pop_names.contains(pop.as_str()) {
                        errors.push(
                            format!("{path}.assignment.members.{pop}"),
                            "unknown-population",
                            format!("no population named `{pop}`"),
                        );
                    }
                    if !groups.contains(group) {
                        errors.push(
                            format!("{path}.assignment.members.{pop}"),
                            "unknown-group",
                            format!("no group named `{group}`"),
                        );
                    }
                }
                for pop in &pop_names {
                    if !members.contains_key(*pop) {
                        errors.push(
                            format!("{path}.assignment.members"),
                            "unmapped-population",
                            format!("population `{pop}` has no group"),
                        );
                    }
                }
                for g in groups {
                    if !members.values().any(|m| m == g) {
                        errors.push(
                            format!("{path}.assignment.groups"),
                            "empty-group",
                            format!("group `{g}` has no population"),
                        );
                    }
                }
                groups.clone()
            }
            Assignment::OpinionCuts { groups, cuts } => {
                if groups.len() != cuts.len() + 1 {
                    errors.push(
                        format!("{path}.assignment.cuts"),
                        "cut-count",
                        format!("{} cuts cannot define {} groups", cuts.len(), groups.len()),
                    );
                }
                if cuts.windows(2).any(|w| !(w[0] < w[1])) || cuts.iter().any(|c| !c.is_finite()) {
                    errors.push(
                        format!("{path}.assignment.cuts"),
                        "cuts-unsorted",
                        "cuts must be finite and strictly increasing",
                    );
                }
                groups.clone()
            }
        };
        let mut seen = BTreeSet::new();
        for g in &groups {
            if !seen.insert(g) {
                errors.push(
                    format!("{path}.assignment.groups"),
                    "duplicate-name",
                    format!("group `{g}` defined twice"),
                );
            }
        }
        check_population_kernel(&format!("{path}.kernel"), &p.kernel, &groups, errors);
    }
    if (total - 1.0).abs() > SUM_TOLERANCE {
        errors.push(
            "partitions",
            "partition-weights-sum",
            format!("partition weights sum to {total}, not 1"),
        );
    }
    if config.engine == EngineKind::Meanfield {
        let ok = config.partitions.len() == 1
            && config.partitions[0].assignment == Assignment::Population
            && config.partitions[0].mode == PartitionMode::Live;
        if !ok {
            errors.push(
                "partitions",
                "meanfield-partition",
                "the mean-field engine takes a single live partition by population",
            );
        }
    }
}

fn check_population_kernel(
    path: &str,
    k: &PopulationKernelConfig,
    groups: &[String],
    errors: &mut Errors,
) {
    if let Err(e) = k.to_kernel(groups) {
        errors.push(format!("{path}.{}", e.0), e.1, e.2);
    }
}
