use crate::distributions::InitialDistributionSpec;
use crate::kernels::{DecaySchedule, LocalKernel, Threshold};

use super::config::{
    Assignment, EngineKind, GridConfig, IntegratorConfig, IntegratorMethod, PartitionConfig,
    PartitionMode, PopulationConfig, PopulationKernelConfig, ScenarioConfig,
};
use super::ScenarioError;

type Builder = fn() -> ScenarioConfig;

const CATALOGUE: &[(&str, Builder)] = &[
    ("basic-kernels", basic_kernels),
    ("resistance", resistance),
    ("in-group-bias", in_group_bias),
    ("asymmetric-bias", asymmetric_bias),
    ("group-cohesion", group_cohesion),
    ("isolated-vs-integrated", isolated_vs_integrated),
    (
        "isolated-vs-integrated-meanfield",
        isolated_vs_integrated_meanfield,
    ),
    ("decaying-effects", decaying_effects),
    ("polarization-reduction", polarization_reduction),
    (
        "polarization-reduction-threshold",
        polarization_reduction_threshold,
    ),
    ("multi-identity-dominance", multi_identity_dominance),
    ("smoke", smoke),
];

pub fn preset_names() -> Vec<&'static str> {
    CATALOGUE.iter().map(|(n, _)| *n).collect()
}

pub fn preset(name: &str) -> Result<ScenarioConfig, ScenarioError> {
    CATALOGUE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, build)| build())
        .ok_or_else(|| ScenarioError::UnknownPreset {
            name: name.to_string(),
            available: preset_names(),
        })
}

fn scenario(name: &str, t_end: f64, save_every: usize, kernel: LocalKernel) -> ScenarioConfig {
    ScenarioConfig {
        name: Some(name.into()),
        engine: EngineKind::Micro,
        seed: None,
        trials: None,
        integrator: IntegratorConfig {
            method: IntegratorMethod::Euler,
            dt: Some(0.05),
            t_end,
            save_every: Some(save_every),
        },
        grid: None,
        kernel,
        populations: Vec::new(),
        partitions: Vec::new(),
    }
}

fn population(
    name: &str,
    size: usize,
    initial: InitialDistributionSpec,
    alpha: f64,
    epsilon: f64,
) -> PopulationConfig {
    PopulationConfig {
        name: name.into(),
        size: Some(size),
        lambda: None,
        initial,
        alpha,
        epsilon,
        sigma: None,
        scope: None,
        stubborn: false,
        kernel: None,
    }
}

fn by_population(mode: PartitionMode, kernel: PopulationKernelConfig) -> PartitionConfig {
    PartitionConfig {
        name: "population".into(),
        mode,
        weight: Some(1.0),
        assignment: Assignment::Population,
        kernel,
    }
}

fn exp_kernel(gamma: f64) -> PopulationKernelConfig {
    PopulationKernelConfig {
        gamma,
        ..PopulationKernelConfig::default()
    }
}

fn mask(pairs: &[(&str, &str)]) -> Option<Vec<[String; 2]>> {
    Some(
        pairs
            .iter()
            .map(|(s, t)| [s.to_string(), t.to_string()])
            .collect(),
    )
}

fn uniform(a: f64, b: f64) -> InitialDistributionSpec {
    InitialDistributionSpec::Uniform { a, b }
}

fn gaussian(mean: f64, std: f64) -> InitialDistributionSpec {
    InitialDistributionSpec::truncated_gaussian(mean, std)
}

// Local-kernel figure: one population on the whole opinion space.
fn basic_kernels() -> ScenarioConfig {
    let mut s = scenario("basic-kernels", 20.0, 20, LocalKernel::Uniform);
    s.populations = vec![population("all", 500, uniform(-1.0, 1.0), 0.1, 0.6)];
    s
}

// Extreme agents resist: γ(|x|) = |x|.
fn resistance() -> ScenarioConfig {
    let kernel = LocalKernel::StateExponential {
        gamma_scale: 1.0,
        gamma_power: 1.0,
        exponent: 1.0,
    };
    let mut s = scenario("resistance", 20.0, 20, kernel);
    s.trials = Some(50);
    s.populations = vec![population("all", 300, uniform(-1.0, 1.0), 0.1, 0.6)];
    s
}

// Two symmetric groups of 200 with frozen group weights; raise `gamma` for
// stronger in-group bias.
fn in_group_bias() -> ScenarioConfig {
    let mut s = scenario("in-group-bias", 20.0, 20, LocalKernel::Uniform);
    s.populations = vec![
        population("p1", 200, gaussian(-0.4, 0.15), 0.5, 0.6),
        population("p2", 200, gaussian(0.4, 0.15), 0.5, 0.6),
    ];
    s.partitions = vec![by_population(PartitionMode::Frozen, exp_kernel(0.0))];
    s
}

// p2 listens to p1; p1 ignores p2.
fn asymmetric_bias() -> ScenarioConfig {
    let mut s = in_group_bias();
    s.name = Some("asymmetric-bias".into());
    s.partitions[0].kernel.mask = mask(&[("p1", "p2")]);
    s
}

fn group_cohesion() -> ScenarioConfig {
    let kernel = LocalKernel::Exponential {
        gamma: 10.0,
        exponent: 2.0,
    };
    let mut s = scenario("group-cohesion", 20.0, 20, kernel);
    s.populations = vec![
        population("p1", 200, gaussian(-0.3, 0.15), 0.4, 0.4),
        population("p2", 200, gaussian(0.3, 0.15), 0.4, 0.4),
    ];
    s.partitions = vec![by_population(
        PartitionMode::Live,
        PopulationKernelConfig {
            gamma: 2.0,
            threshold: Threshold::Above { sigma: 0.8 },
            ..PopulationKernelConfig::default()
        },
    )];
    s
}

fn isolation_kernel() -> PopulationKernelConfig {
    PopulationKernelConfig {
        gamma: 1.0,
        threshold: Threshold::Above { sigma: 0.5 },
        ..PopulationKernelConfig::default()
    }
}

// Small samples whose empirical laws nearly coincide.
fn isolated_vs_integrated() -> ScenarioConfig {
    let mut s = scenario("isolated-vs-integrated", 20.0, 20, LocalKernel::Uniform);
    s.populations = vec![
        population("p1", 100, uniform(-0.1, 0.05), 0.5, 0.5),
        population("p2", 100, uniform(-0.05, 0.1), 0.5, 0.5),
    ];
    s.partitions = vec![by_population(PartitionMode::Live, isolation_kernel())];
    s
}

// The full laws the small samples came from, well separated.
fn isolated_vs_integrated_meanfield() -> ScenarioConfig {
    let mut s = scenario(
        "isolated-vs-integrated-meanfield",
        20.0,
        20,
        LocalKernel::Uniform,
    );
    s.engine = EngineKind::Meanfield;
    s.grid = Some(GridConfig { n_cells: Some(256) });
    s.populations = vec![
        population("p1", 100, uniform(-0.9, 0.1), 0.5, 0.5),
        population("p2", 100, uniform(-0.1, 0.9), 0.5, 0.5),
    ];
    s.partitions = vec![by_population(PartitionMode::Live, isolation_kernel())];
    s
}

// Two extreme groups and a neutral one; cross-group weights fade as Γ(t)
// grows.
fn decaying_effects() -> ScenarioConfig {
    let mut s = scenario("decaying-effects", 20.0, 20, LocalKernel::Uniform);
    s.populations = vec![
        population("p1", 133, gaussian(-0.7, 0.1), 0.5, 0.5),
        population("p2", 133, gaussian(0.7, 0.1), 0.5, 0.5),
        population("p3", 134, uniform(-0.4, 0.4), 0.5, 0.5),
    ];
    s.partitions = vec![by_population(
        PartitionMode::Frozen,
        PopulationKernelConfig {
            gamma: 0.5,
            decay: Some(DecaySchedule { rate: 1.0 }),
            ..PopulationKernelConfig::default()
        },
    )];
    s
}

// p1 and p2 never listen to each other; the stubborn p3 sits between them.
fn polarization_reduction() -> ScenarioConfig {
    let mut s = scenario("polarization-reduction", 20.0, 20, LocalKernel::Uniform);
    let mut p3 = population("p3", 100, uniform(-0.2, 0.2), 0.0, 0.5);
    p3.stubborn = true;
    s.populations = vec![
        population("p1", 150, gaussian(-0.5, 0.15), 0.5, 0.5),
        population("p2", 150, gaussian(0.5, 0.15), 0.5, 0.5),
        p3,
    ];
    s.partitions = vec![by_population(
        PartitionMode::Live,
        PopulationKernelConfig {
            mask: mask(&[("p3", "p1"), ("p3", "p2"), ("p1", "p3"), ("p2", "p3")]),
            ..PopulationKernelConfig::default()
        },
    )];
    s
}

// Contact with p3 stops once a population gets within σ of it.
fn polarization_reduction_threshold() -> ScenarioConfig {
    let mut s = polarization_reduction();
    s.name = Some("polarization-reduction-threshold".into());
    s.partitions[0].kernel.threshold = Threshold::Below { sigma: 0.2 };
    s
}

// Partition "spread": neutral groups of different widths. Partition
// "ideology": sign of the initial opinion. `gamma` weighs ideology.
fn multi_identity_dominance() -> ScenarioConfig {
    let mut s = scenario("multi-identity-dominance", 20.0, 20, LocalKernel::Uniform);
    s.populations = vec![
        population("narrow", 150, gaussian(0.0, 0.15), 0.5, 0.3),
        population("wide", 150, gaussian(0.0, 0.6), 0.5, 0.3),
    ];
    let gamma = 0.5;
    s.partitions = vec![
        PartitionConfig {
            name: "spread".into(),
            mode: PartitionMode::Frozen,
            weight: Some(1.0 - gamma),
            assignment: Assignment::Population,
            kernel: exp_kernel(5.0),
        },
        PartitionConfig {
            name: "ideology".into(),
            mode: PartitionMode::Frozen,
            weight: Some(gamma),
            assignment: Assignment::OpinionCuts {
                groups: vec!["left".into(), "right".into()],
                cuts: vec![0.0],
            },
            kernel: exp_kernel(5.0),
        },
    ];
    s
}

// Small two-population mean-field run with smooth data.
fn smoke() -> ScenarioConfig {
    let mut s = scenario("smoke", 5.0, 20, LocalKernel::Uniform);
    s.engine = EngineKind::Meanfield;
    s.grid = Some(GridConfig { n_cells: Some(128) });
    s.populations = vec![
        population("p1", 500, gaussian(-0.4, 0.2), 0.3, 2.0),
        population("p2", 500, gaussian(0.4, 0.2), 0.3, 2.0),
    ];
    s.partitions = vec![by_population(PartitionMode::Live, exp_kernel(1.0))];
    s
}
