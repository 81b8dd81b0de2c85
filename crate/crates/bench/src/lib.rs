//! Shared fixtures for the throughput benchmarks.

use covertctl_core::{
    Ar1Params, ControllerSpec, DetectorSpec, InitPolicy, LrtModel, NoiseModel, ResetSchedule, Scenario,
};

pub fn one_bit_params(n: usize) -> Ar1Params {
    Ar1Params::new(1.0, n, InitPolicy::zero(), NoiseModel::UniformBounded { bound: 1.0 })
        .expect("valid plant")
}

pub fn one_bit_controller() -> ControllerSpec {
    ControllerSpec::one_bit_at_fixed_point(1.0, 1.0)
}

/// Gaussian LRT against a single reset at steady state.
pub fn reset_lrt_scenario(n: usize, trials: usize) -> Scenario {
    Scenario {
        params: Ar1Params::new(0.9, n, InitPolicy::SteadyStateDraw, NoiseModel::Gaussian { std: 1.0 })
            .expect("valid plant"),
        controller: ControllerSpec::None,
        detector: DetectorSpec::GaussianLrt { model: LrtModel::Reset },
        trials,
        master_seed: 1,
        forced_reset: Some(ResetSchedule::Uniform),
    }
}

pub fn control_energy_scenario(window: usize, trials: usize) -> Scenario {
    Scenario {
        params: one_bit_params(window + 1),
        controller: one_bit_controller(),
        detector: DetectorSpec::ControlEnergy { sigma_v: 1.0, delta: 0.1, window },
        trials,
        master_seed: 1,
        forced_reset: None,
    }
}
