use opinion_lab::distributions::{
    w1_empirical_grid, w1_grid, EmpiricalDistribution, GridDensity, InitialDistributionSpec,
};
use opinion_lab::kernels::{LocalKernel, PopulationKernel};
use opinion_lab::meanfield::{
    run_meanfield, upwind_step, velocity_fields, MeanFieldPopulation, MeanFieldSystem,
};
use proptest::prelude::*;

fn population(
    name: &str,
    density: GridDensity,
    lambda: f64,
    alpha: f64,
    eps: f64,
) -> MeanFieldPopulation {
    MeanFieldPopulation {
        name: name.into(),
        density,
        lambda,
        alpha,
        epsilon: eps,
        sigma: None,
        kernel: LocalKernel::Uniform,
    }
}

fn system(populations: Vec<MeanFieldPopulation>, gamma: f64, t_end: f64) -> MeanFieldSystem {
    MeanFieldSystem {
        populations,
        kernel: PopulationKernel::exponential(gamma),
        dt: 0.05,
        t_end,
        save_every: 10,
    }
}

fn density(raw: Vec<f64>) -> GridDensity {
    let dx = 2.0 / raw.len() as f64;
    let s: f64 = raw.iter().sum::<f64>() * dx;
    GridDensity::new(raw.into_iter().map(|v| v / s).collect()).unwrap()
}

fn raw_density(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, n).prop_filter("some mass", |v| v.iter().sum::<f64>() > 0.5)
}

#[test]
fn consensus_collapses_to_a_point() {
    let law = InitialDistributionSpec::truncated_gaussian(0.1, 0.3);
    let d = GridDensity::from_spec(&law, 64).unwrap();
    let dx = d.dx();
    let run = run_meanfield(&system(
        vec![population("all", d, 1.0, 0.5, 2.0)],
        0.0,
        40.0,
    ))
    .unwrap();
    let last = &run.final_densities()[0];
    let dirac = EmpiricalDistribution::dirac(last.mean()).unwrap();
    let w = w1_empirical_grid(&dirac, last);
    assert!(w < 2.0 * dx, "{w} vs {}", 2.0 * dx);
}

#[test]
fn far_apart_populations_with_a_sharp_kernel_stay_apart() {
    let a =
        GridDensity::from_spec(&InitialDistributionSpec::Uniform { a: -0.9, b: -0.5 }, 64).unwrap();
    let b = a.reflected();
    let start = w1_grid(&a, &b).unwrap();
    let s = system(
        vec![
            population("a", a, 0.5, 0.5, 2.0),
            population("b", b, 0.5, 0.5, 2.0),
        ],
        50.0,
        5.0,
    );
    let run = run_meanfield(&s).unwrap();
    let end = w1_grid(&run.final_densities()[0], &run.final_densities()[1]).unwrap();
    assert!(end > 0.95 * start, "{end} vs {start}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mass_and_positivity(f in raw_density(32), g in raw_density(32), gamma in 0.0..5.0f64, eps in 0.1..2.0f64) {
        let s = system(
            vec![population("a", density(f), 0.4, 0.5, eps), population("b", density(g), 0.6, 0.3, eps)],
            gamma,
            1.0,
        );
        let run = run_meanfield(&s).unwrap();
        prop_assert!(run.max_mass_error <= 1e-12);
        for frame in &run.densities {
            for d in frame {
                prop_assert!((d.mass() - 1.0).abs() <= 1e-11);
                prop_assert!(d.values().iter().all(|v| *v >= 0.0));
            }
        }
    }

    #[test]
    fn single_step_conserves_mass(f in raw_density(40), eps in 0.1..2.0f64) {
        let d = density(f);
        let s = system(vec![population("a", d.clone(), 1.0, 0.8, eps)], 0.0, 1.0);
        let field = &velocity_fields(&s.populations, &s, 0.0).unwrap()[0];
        let next = upwind_step(&d, field, 0.01).unwrap();
        prop_assert!((next.mass() - d.mass()).abs() <= 1e-12);
    }

    #[test]
    fn mirror_symmetry(f in raw_density(32), gamma in 0.0..5.0f64) {
        let a = density(f);
        let b = a.reflected();
        let s = system(vec![population("a", a, 0.5, 0.5, 0.7), population("b", b, 0.5, 0.5, 0.7)], gamma, 1.0);
        let run = run_meanfield(&s).unwrap();
        let last = run.final_densities();
        for (x, y) in last[0].values().iter().zip(last[1].reflected().values()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}
