use covertctl_core::analytics::{
    bound_report, covert_gain_bound_gain_change, k0_control_energy, kl_gain_change, LogBase,
};
use covertctl_core::controllers::one_bit_energy;
use covertctl_core::detectors::{
    control_energy_detector, magnitude_detector, reset_lrt_detector, residual_energy_detector,
};
use covertctl_core::montecarlo::{
    analytic_bound, estimate_error_rates_with, sweep_with, Axis, BoundCheck, Execution,
};
use covertctl_core::{
    Ar1Params, ControllerSpec, DetectorSpec, Hypothesis, InitPolicy, LrtModel, MagnitudeConfig,
    NoiseModel, ResetSchedule, Scenario,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn energy_verdicts_ignore_order(mut w in prop::collection::vec(-3.0f64..3.0, 2..60), seed: u64) {
        let v0 = control_energy_detector(&w, 1.0, 0.1).unwrap();
        let r0 = residual_energy_detector(&w, 0.0, 1.0, 3.0, 0.1).unwrap();
        // Rotation and reversal as permutations. With a = 0 the residuals are
        // the states after the first, so that one stays put.
        let k = (seed as usize) % (w.len() - 1);
        w[1..].rotate_left(k);
        w[1..].reverse();
        let v1 = control_energy_detector(&w, 1.0, 0.1).unwrap();
        let r1 = residual_energy_detector(&w, 0.0, 1.0, 3.0, 0.1).unwrap();
        prop_assert_eq!(v0.decision, v1.decision);
        prop_assert!((v0.statistic - v1.statistic).abs() <= 1e-12 * (1.0 + v0.statistic));
        if (r0.statistic - r0.threshold).abs() > 1e-9 {
            prop_assert_eq!(r0.decision, r1.decision);
        }
    }

    #[test]
    fn decisions_cross_threshold_once(x in 0.0f64..20.0, y in 0.0f64..20.0) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let cfg = MagnitudeConfig::minimal(2.0, 1.0, 0.1).unwrap();
        // Controlled on small magnitudes: if the larger value says controlled, so must the smaller.
        if magnitude_detector(hi, &cfg).unwrap().decision == Hypothesis::Controlled {
            prop_assert_eq!(magnitude_detector(lo, &cfg).unwrap().decision, Hypothesis::Controlled);
        }
        if reset_lrt_detector(hi, 0.9, 1.0, 0.3).unwrap().decision == Hypothesis::Controlled {
            prop_assert_eq!(reset_lrt_detector(lo, 0.9, 1.0, 0.3).unwrap().decision, Hypothesis::Controlled);
        }
        // Controlled on large energies.
        if control_energy_detector(&[lo], 1.0, 0.2).unwrap().decision == Hypothesis::Controlled {
            prop_assert_eq!(control_energy_detector(&[hi], 1.0, 0.2).unwrap().decision, Hypothesis::Controlled);
        }
    }
}

fn gaussian_params(a: f64, n: usize, init: InitPolicy) -> Ar1Params {
    Ar1Params::new(a, n, init, NoiseModel::Gaussian { std: 1.0 }).unwrap()
}

#[test]
fn lrt_respects_divergence_bound() {
    for (a, b, n) in [(0.3, 0.45, 4), (0.5, 0.7, 6), (-0.2, -0.6, 3)] {
        let s = Scenario {
            params: gaussian_params(a, n, InitPolicy::SteadyStateDraw),
            controller: ControllerSpec::GainChange { gain: a, target: b, relaxed: false },
            detector: DetectorSpec::GaussianLrt { model: LrtModel::GainChange },
            trials: 20_000,
            master_seed: 21,
            forced_reset: None,
        };
        let r = estimate_error_rates_with(&s, Execution::Ambient).unwrap();
        let lower = bound_report(kl_gain_change(a, b, n).unwrap()).unwrap().error_sum_lower;
        assert!(r.sum >= lower - 4.0 * r.std_err_sum(), "a={a} b={b}: {r:?} vs {lower}");
        let bound = analytic_bound(&s).unwrap().unwrap();
        assert!((bound.value - lower).abs() < 1e-15);
        assert!(BoundCheck::ErrorSumLower.evaluate(&r, Some(&bound)));
    }
}

#[test]
fn gain_change_at_covert_limit_is_hard_to_detect() {
    let (a, eps, n) = (0.3, 0.2, 4);
    let b = 0.95 * covert_gain_bound_gain_change(a, eps).unwrap();
    let s = Scenario {
        params: gaussian_params(a, n, InitPolicy::SteadyStateDraw),
        controller: ControllerSpec::GainChange { gain: a, target: b, relaxed: false },
        detector: DetectorSpec::GaussianLrt { model: LrtModel::GainChange },
        trials: 20_000,
        master_seed: 3,
        forced_reset: None,
    };
    let r = estimate_error_rates_with(&s, Execution::Ambient).unwrap();
    assert!(r.sum >= 1.0 - eps - 0.02, "{r:?}");
}

#[test]
fn magnitude_false_alarm_within_target() {
    let (a, b, delta) = (1.5, 0.5, 0.1);
    let cfg = MagnitudeConfig::minimal(2.0, 1.0 / (1.0 - b * b), delta).unwrap();
    let n0 = covertctl_core::analytics::n0_magnitude(a, 1.0, cfg.m, delta).unwrap().ceil() as usize;
    let s = Scenario {
        params: gaussian_params(a, n0, InitPolicy::zero()),
        controller: ControllerSpec::GainChange { gain: a, target: b, relaxed: true },
        detector: DetectorSpec::Magnitude { config: cfg, n0 },
        trials: 20_000,
        master_seed: 1,
        forced_reset: None,
    };
    let r = estimate_error_rates_with(&s, Execution::Ambient).unwrap();
    assert!(r.alpha_hat <= delta / 2.0 + 3.0 * r.std_err_alpha);
    let predicted = covertctl_core::analytics::magnitude_false_alarm(a, 1.0, cfg.m, n0);
    assert!((r.alpha_hat - predicted).abs() <= 4.0 * r.std_err_alpha.max(1e-3));
    assert!(analytic_bound(&s).unwrap().unwrap().applicable);
}

fn control_energy_template(window: usize) -> Scenario {
    Scenario {
        params: Ar1Params::new(1.0, window + 1, InitPolicy::zero(), NoiseModel::UniformBounded { bound: 1.0 }).unwrap(),
        controller: ControllerSpec::one_bit_at_fixed_point(1.0, 1.0),
        detector: DetectorSpec::ControlEnergy { sigma_v: 1.0, delta: 0.1, window },
        trials: 4_000,
        master_seed: 13,
        forced_reset: None,
    }
}

#[test]
fn window_sweep_trends_down_and_crosses_delta() {
    let values = [50.0, 100.0, 200.0, 400.0];
    let rows = sweep_with(&control_energy_template(50), Axis::K, &values, LogBase::Natural, Execution::Ambient).unwrap();
    let k0 = k0_control_energy(one_bit_energy(1.0, 1.0), 0.1).unwrap();
    for w in rows.windows(2) {
        let slack = 3.0 * (w[0].rates.std_err_sum() + w[1].rates.std_err_sum());
        assert!(w[1].rates.sum <= w[0].rates.sum + slack, "{:?}", rows);
    }
    for row in &rows {
        let bound = row.bound.as_ref().unwrap();
        assert_eq!(bound.applicable, row.value >= k0.ceil());
        if bound.applicable {
            assert!(row.rates.sum <= 0.1);
            assert!(BoundCheck::MustDetect.evaluate(&row.rates, Some(bound)));
        } else {
            assert!(!BoundCheck::MustDetect.evaluate(&row.rates, Some(bound)));
        }
    }
}

#[test]
fn gain_sweep_for_reset_test_decreases() {
    let template = Scenario {
        params: gaussian_params(0.9, 10, InitPolicy::SteadyStateDraw),
        controller: ControllerSpec::None,
        detector: DetectorSpec::ResetLrt { delta: 0.5 },
        trials: 20_000,
        master_seed: 8,
        forced_reset: Some(ResetSchedule::Uniform),
    };
    let values = [0.9, 0.97, 0.99, 0.999];
    let rows = sweep_with(&template, Axis::A, &values, LogBase::Natural, Execution::Ambient).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].rates.sum < w[0].rates.sum, "{rows:?}");
    }
    assert!(rows[2].rates.sum <= 0.5 && rows[3].rates.sum <= 0.5);
}

#[test]
fn residual_detection_with_truncated_noise() {
    let noise = NoiseModel::truncated(0.5);
    let a = 0.9;
    let bound = noise.support_bound().unwrap();
    let energy = one_bit_energy(a, bound);
    let k0 = covertctl_core::analytics::k0_residual_energy(energy, noise.variance(), noise.fourth_moment(), 0.1)
        .unwrap()
        .k0;
    let k = k0.ceil() as usize;
    let s = Scenario {
        params: Ar1Params::new(a, k + 1, InitPolicy::zero(), noise).unwrap(),
        controller: ControllerSpec::one_bit_at_fixed_point(bound, a),
        detector: DetectorSpec::ResidualEnergy { delta: 0.1, window: k },
        trials: 5_000,
        master_seed: 2,
        forced_reset: None,
    };
    let r = estimate_error_rates_with(&s, Execution::Ambient).unwrap();
    assert!(r.sum <= 0.1, "{r:?}");
}
