//! Declarative experiment descriptions, their validation, and the named
//! presets.
//!
//! A scenario is a TOML document; see [`ScenarioConfig`] for the schema.

mod build;
mod config;
mod presets;
mod validate;

pub use build::{population_seed, ValidScenario};
pub use config::{
    Assignment, EngineKind, GridConfig, IntegratorConfig, IntegratorMethod, PartitionConfig,
    PartitionMode, PopulationConfig, PopulationKernelConfig, ScenarioConfig, DEFAULT_DT,
    DEFAULT_N_CELLS, DEFAULT_SAVE_EVERY,
};
pub use presets::{preset, preset_names};
pub use validate::{validate, ValidationError};

use std::fmt;

use thiserror::Error;

use crate::distributions::DistributionError;
use crate::meanfield::MeanFieldError;
use crate::micro::EngineError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario is invalid:\n{}", ValidationList(.0))]
    Invalid(Vec<ValidationError>),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("unknown preset `{name}`; available presets: {}", .available.join(", "))]
    UnknownPreset {
        name: String,
        available: Vec<&'static str>,
    },
    #[error("scenario uses the {expected} engine")]
    WrongEngine { expected: &'static str },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    MeanField(#[from] MeanFieldError),
}

struct ValidationList<'a>(&'a [ValidationError]);

impl fmt::Display for ValidationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}

/// Parses and validates a scenario document.
pub fn load(text: &str) -> Result<ValidScenario, ScenarioError> {
    let config =
        ScenarioConfig::from_toml(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    validate(config).map_err(ScenarioError::Invalid)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[integrator]
method = "euler"
t_end = 1.0

[kernel]
kind = "uniform"

[[populations]]
name = "all"
size = 10
alpha = 0.5
epsilon = 0.3
initial = { kind = "uniform", a = -1.0, b = 1.0 }
"#;

    fn codes(text: &str) -> Vec<&'static str> {
        match load(text) {
            Err(ScenarioError::Invalid(errors)) => errors.iter().map(|e| e.code).collect(),
            other => panic!("expected validation errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let s = load(MINIMAL).unwrap();
        assert_eq!(s.dt(), DEFAULT_DT);
        assert_eq!(s.save_every(), DEFAULT_SAVE_EVERY);
        assert_eq!(s.seed(), 0);
        assert_eq!(s.trials(), 1);
        let parts = &s.config().partitions;
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].assignment, Assignment::Population);
        assert_eq!(parts[0].weight, Some(1.0));
        let engine = s.micro_engine(0, 0).unwrap();
        assert_eq!(engine.agents().len(), 10);
    }

    #[test]
    fn mass_fractions_must_sum_to_one() {
        let text = r#"
engine = "meanfield"
[integrator]
method = "euler"
t_end = 1.0
[kernel]
kind = "uniform"
[[populations]]
name = "a"
lambda = 0.6
alpha = 0.5
epsilon = 0.3
initial = { kind = "uniform", a = -1.0, b = 0.0 }
[[populations]]
name = "b"
lambda = 0.5
alpha = 0.5
epsilon = 0.3
initial = { kind = "uniform", a = 0.0, b = 1.0 }
"#;
        assert_eq!(codes(text), vec!["mass-fractions-sum"]);
    }

    #[test]
    fn scope_below_confidence_is_rejected() {
        let text = MINIMAL.replace("epsilon = 0.3", "epsilon = 0.3\nscope = 0.1");
        assert_eq!(codes(&text), vec!["scope-below-confidence"]);
    }

    #[test]
    fn every_violation_is_reported() {
        let text = MINIMAL
            .replace("alpha = 0.5", "alpha = 1.5")
            .replace("t_end = 1.0", "t_end = -1.0");
        let found = codes(&text);
        assert!(found.contains(&"alpha-range"));
        assert!(found.contains(&"horizon-positive"));
    }

    #[test]
    fn unknown_fields_fail_to_parse() {
        let text = MINIMAL.replace("size = 10", "size = 10\ncolour = 3");
        assert!(matches!(load(&text), Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn mask_naming_unknown_group() {
        let text = format!(
            "{MINIMAL}\n[[partitions]]\nname = \"p\"\nassignment = {{ by = \"population\" }}\nkernel = {{ gamma = 1.0, mask = [[\"all\", \"nobody\"]] }}\n"
        );
        assert_eq!(codes(&text), vec!["unknown-group"]);
    }

    #[test]
    fn every_preset_validates_and_round_trips() {
        for name in preset_names() {
            let config = preset(name).unwrap();
            let text = config.to_toml();
            assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), config, "{name}");
            let valid = validate(config).unwrap_or_else(|e| panic!("{name}: {e:?}"));
            match valid.engine() {
                EngineKind::Micro => {
                    valid.micro_engine(1, 0).unwrap();
                }
                EngineKind::Meanfield => {
                    valid.meanfield_system().unwrap();
                }
            }
        }
    }

    #[test]
    fn preset_contents() {
        let bias = preset("in-group-bias").unwrap();
        assert_eq!(bias.populations[0].size, Some(200));
        assert_eq!(bias.populations.len(), 2);
        let polar = preset("polarization-reduction").unwrap();
        assert!(polar.populations[2].stubborn);
        assert_eq!(preset("resistance").unwrap().trials, Some(50));
    }

    #[test]
    fn unknown_preset_lists_names() {
        let err = preset("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope"));
        assert!(msg.contains("in-group-bias"));
    }

    #[test]
    fn opinion_cuts_assign_by_sign() {
        let s = validate(preset("multi-identity-dominance").unwrap()).unwrap();
        for a in s.micro_agents(3, 0).unwrap() {
            assert_eq!(a.groups[1], usize::from(a.opinion >= 0.0));
        }
    }

    #[test]
    fn population_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..4)
            .flat_map(|t| (0..4).map(move |k| population_seed(9, t, k)))
            .collect();
        assert_eq!(seeds.len(), 16);
    }

    mod roundtrip {
        use super::super::*;
        use crate::distributions::InitialDistributionSpec;
        use crate::kernels::{LocalKernel, Threshold};
        use proptest::prelude::*;

        fn law() -> impl Strategy<Value = InitialDistributionSpec> {
            prop_oneof![
                (-1.0..0.0f64, 0.01..1.0f64)
                    .prop_map(|(a, b)| InitialDistributionSpec::Uniform { a, b }),
                (-0.9..0.9f64, 0.05..1.0f64)
                    .prop_map(|(m, s)| InitialDistributionSpec::truncated_gaussian(m, s)),
                (-1.0..=1.0f64).prop_map(|x| InitialDistributionSpec::Dirac { x }),
            ]
        }

        fn threshold() -> impl Strategy<Value = Threshold> {
            prop_oneof![
                Just(Threshold::None),
                (0.01..2.0f64).prop_map(|sigma| Threshold::Above { sigma }),
                (0.01..2.0f64).prop_map(|sigma| Threshold::Below { sigma }),
            ]
        }

        proptest! {
            #[test]
            fn toml_round_trip(
                laws in prop::collection::vec(law(), 1..4),
                alpha in 0.0..=1.0f64,
                epsilon in 0.01..2.0f64,
                gamma in 0.0..10.0f64,
                thr in threshold(),
                seed in any::<u32>(),
                frozen in any::<bool>(),
            ) {
                let mut config = preset("in-group-bias").unwrap();
                config.seed = Some(seed as u64);
                config.kernel = LocalKernel::Triangular;
                config.populations = laws
                    .into_iter()
                    .enumerate()
                    .map(|(k, initial)| PopulationConfig {
                        name: format!("g{k}"),
                        size: Some(5 + k),
                        lambda: None,
                        initial,
                        alpha,
                        epsilon,
                        sigma: Some(epsilon),
                        scope: None,
                        stubborn: k == 0,
                        kernel: None,
                    })
                    .collect();
                config.partitions[0].mode = if frozen { PartitionMode::Frozen } else { PartitionMode::Live };
                config.partitions[0].kernel.gamma = gamma;
                config.partitions[0].kernel.threshold = thr;
                let text = config.to_toml();
                prop_assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), config.clone());
                let valid = validate(config).unwrap();
                prop_assert_eq!(validate(valid.config().clone()).unwrap(), valid);
            }
        }
    }
}
