use opinion_lab::kernels::{
    AsymmetryMask, DecaySchedule, LocalKernel, PopulationKernel, Threshold,
};
use proptest::prelude::*;

fn local() -> impl Strategy<Value = LocalKernel> {
    prop_oneof![
        Just(LocalKernel::Uniform),
        Just(LocalKernel::Triangular),
        (0.1..20.0f64, 0.5..3.0f64)
            .prop_map(|(gamma, exponent)| LocalKernel::Exponential { gamma, exponent }),
        (0.0..5.0f64, 0.5..3.0f64, 0.5..3.0f64).prop_map(|(s, p, e)| {
            LocalKernel::StateExponential {
                gamma_scale: s,
                gamma_power: p,
                exponent: e,
            }
        }),
    ]
}

#[test]
fn cutoff_is_inclusive() {
    assert_eq!(LocalKernel::Uniform.eval(0.0, 0.5, 0.5), 1.0);
    assert_eq!(LocalKernel::Uniform.eval(0.0, 0.500001, 0.5), 0.0);
    assert_eq!(
        LocalKernel::Triangular.eval(0.1, 0.3, 0.5),
        0.5 - (0.1f64 - 0.3).abs()
    );
}

#[test]
fn resistance_kernel_depends_on_the_listener() {
    let k = LocalKernel::StateExponential {
        gamma_scale: 1.0,
        gamma_power: 1.0,
        exponent: 1.0,
    };
    assert_eq!(k.eval(0.0, 0.4, 1.0), 1.0);
    assert!((k.eval(0.8, 0.4, 1.0) - (-0.8f64 * 0.4).exp()).abs() < 1e-15);
    assert!(!k.is_symmetric());
}

#[test]
fn threshold_only_cuts_across_groups() {
    let above = PopulationKernel {
        threshold: Threshold::Above { sigma: 0.2 },
        ..PopulationKernel::exponential(1.0)
    };
    assert_eq!(above.eval(0.3, 0.0, false), 0.0);
    assert!((above.eval(0.1, 0.0, false) - (-0.1f64).exp()).abs() < 1e-15);
    assert_eq!(above.eval(0.0, 0.0, true), 1.0);
    let below = PopulationKernel {
        threshold: Threshold::Below { sigma: 0.2 },
        ..PopulationKernel::exponential(0.0)
    };
    assert_eq!(below.eval(0.2, 0.0, false), 0.0);
    assert_eq!(below.eval(0.21, 0.0, false), 1.0);
}

#[test]
fn mask_is_directed_and_overrides() {
    let k = PopulationKernel {
        mask: Some(AsymmetryMask::new([(0, 1)])),
        ..PopulationKernel::exponential(0.0)
    };
    assert_eq!(k.eval_pair(0.3, 0.0, 0, 1, None), 1.0);
    assert_eq!(k.eval_pair(0.3, 0.0, 1, 0, None), 0.0);
    assert_eq!(k.eval_pair(0.0, 0.0, 1, 1, None), 1.0);
}

#[test]
fn agent_sigma_overrides_partition_radius() {
    let k = PopulationKernel {
        threshold: Threshold::Above { sigma: 0.5 },
        ..PopulationKernel::exponential(0.0)
    };
    assert_eq!(k.eval_pair(0.3, 0.0, 0, 1, None), 1.0);
    assert_eq!(k.eval_pair(0.3, 0.0, 0, 1, Some(0.1)), 0.0);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(LocalKernel::Exponential {
        gamma: -1.0,
        exponent: 1.0
    }
    .validate()
    .is_err());
    assert!(PopulationKernel::exponential(-0.5).validate().is_err());
}

proptest! {
    #[test]
    fn local_kernels_bounded_and_decreasing(
        k in local(),
        x in -1.0..=1.0f64,
        d1 in 0.0..2.0f64,
        d2 in 0.0..2.0f64,
        eps in 0.01..2.0f64,
    ) {
        let (near, far) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = k.eval(x, x + near, eps);
        let b = k.eval(x, x + far, eps);
        prop_assert!(a >= 0.0 && b >= 0.0);
        if !matches!(k, LocalKernel::Triangular) {
            prop_assert!(a <= 1.0);
        }
        prop_assert!(b <= a);
        if far > eps {
            prop_assert_eq!(b, 0.0);
        }
    }

    #[test]
    fn symmetric_kernels_are_symmetric(k in local(), x in -1.0..=1.0f64, y in -1.0..=1.0f64, eps in 0.01..2.0f64) {
        if k.is_symmetric() {
            prop_assert_eq!(k.eval(x, y, eps), k.eval(y, x, eps));
        }
    }

    #[test]
    fn population_kernel_decreasing(gamma in 0.0..20.0f64, w1 in 0.0..2.0f64, w2 in 0.0..2.0f64, t in 0.0..10.0f64) {
        let k = PopulationKernel::exponential(gamma);
        let (near, far) = if w1 <= w2 { (w1, w2) } else { (w2, w1) };
        let a = k.eval(near, t, false);
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(k.eval(far, t, false) <= a);
    }

    #[test]
    fn decay_weakens_over_time(gamma in 0.0..5.0f64, rate in 0.0..3.0f64, w in 0.0..2.0f64, t1 in 0.0..10.0f64, t2 in 0.0..10.0f64) {
        let k = PopulationKernel {
            schedule: Some(DecaySchedule { rate }),
            ..PopulationKernel::exponential(gamma)
        };
        let (early, late) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(k.eval(w, late, false) <= k.eval(w, early, false));
        prop_assert!((k.rate_at(late) - (gamma + rate * late)).abs() < 1e-12);
    }
}
