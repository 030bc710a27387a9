//! Shared fixtures for the benchmarks.

use stcphase::{derive_gate_params, DerivedGateParams, DetuningSign, Energy, QubitTuning, ResonatorSpec};

/// Gate parameters near the noise optimum at Z = 5 kΩ, Q = 2·10⁴.
pub fn reference_gate() -> DerivedGateParams {
    let res = ResonatorSpec::from_ghz(6.5, 5000.0, 20_000.0).expect("valid resonator");
    let eps_a = Energy::from_microev(50.0);
    let tuning = QubitTuning::at_exchange(Energy::from_ghz(1.0), eps_a, Energy::from_ghz(0.8), 0.18, eps_a * 2.44)
        .expect("valid tuning");
    derive_gate_params(&tuning, None, &res, 2, DetuningSign::Below).expect("valid schedule")
}
