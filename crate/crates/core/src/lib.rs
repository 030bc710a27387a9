//! Resonator-mediated geometric CPHASE gate between two singlet-triplet
//! qubits: device model, 1/f-noise optimum, closed-form noisy channel, a
//! master-equation oracle and fidelity metrics.
//!
//! Energies are carried as angular frequencies in rad/ns (see [`units`]).
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod device;
pub mod error;
pub mod fidelity;
pub mod lindblad;
pub mod noise;
pub mod ops;
pub mod quad;
pub mod stats;
pub mod sweep;
pub mod units;

pub use analytic::{
    alpha_closed_form, analytic_avg_fidelity, analytic_gate_channel, b_factor, correlated_dephasing_channel,
    ideal_gate_unitary, intrinsic_dephasing_channel, BFactor, DisplacementTrajectory,
};
pub use channel::TwoQubitChannel;
pub use device::{
    cavity_decay, coupling_strengths, derive_gate_params, gate_schedule, photon_voltage, CapacitanceMatrix,
    DerivedGateParams, DetuningSign, QubitTuning, ResonatorSpec,
};
pub use error::{Error, Result};
pub use fidelity::{average_gate_fidelity, entanglement_fidelity, FidelityReport, TargetGate};
pub use lindblad::{extract_channel, CompositeState, FockSpace, InitialCavity, SimDiagnostics, SimOptions};
pub use noise::{dephasing_rate, hahn_eta, optimal_drive, DephasingModel, JWindow, NoiseSpec};
pub use sweep::{load_config, optimize_point, run_sweep, RunConfig, SweepResult, SweepRow};
pub use units::Energy;
