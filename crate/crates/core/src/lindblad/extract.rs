use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evolve_rk4, CompositeState, EvolveOptions, FockSpace, LindbladModel, SimDiagnostics, SimGuards, StepPolicy,
    TrajectoryRow,
};
use crate::channel::{TwoQubitChannel, SUPER_DIM};
use crate::device::DerivedGateParams;
use crate::error::{domain, Error, Result};
use crate::fidelity::{local_z_compensation, product_inputs};
use crate::ops::{self, CMatrix, C64};

/// Oscillator state at the start of the gate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialCavity {
    #[default]
    Vacuum,
    /// Coherent state, amplitude as `[re, im]`.
    Coherent([f64; 2]),
    /// Thermal state sampled as coherent states with a Gaussian amplitude.
    Thermal { n_bar: f64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub fock_dim: usize,
    pub policy: StepPolicy,
    pub guards: Option<SimGuards>,
    /// Largest tolerated mismatch on the validation input.
    pub reconstruction_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            fock_dim: 7,
            policy: StepPolicy::default(),
            guards: Some(SimGuards::default()),
            reconstruction_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelExtraction {
    pub channel: TwoQubitChannel,
    /// Worst case over all evolved inputs.
    pub diagnostics: SimDiagnostics,
    pub reconstruction_residual: f64,
    pub fock_dim: usize,
}

/// Entangled check state. The reconstructed map must reproduce its
/// evolution, which fails if truncation made the dynamics non-linear.
fn validation_input() -> CMatrix {
    let v = [
        C64::new(0.6, 0.0),
        C64::new(0.0, 0.3),
        C64::new(-0.2, 0.4),
        C64::new(0.5, -0.3),
    ];
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pure = ops::projector(&v.map(|z| z / norm));
    pure.scale(0.8) + ops::identity(4).scale(0.05)
}

/// Smallest Fock dimension (at least `floor`) whose top level a coherent
/// state of amplitude `peak` would populate below 1e-7.
pub fn fock_dim_for_amplitude(peak: f64, floor: usize) -> usize {
    let mean = peak * peak;
    let mut dim = floor.max(2);
    loop {
        // Poisson tail P(n ≥ dim − 1)
        let mut term = (-mean).exp();
        let mut cdf = 0.0;
        for k in 0..dim - 1 {
            if k > 0 {
                term *= mean / k as f64;
            }
            cdf += term;
        }
        if 1.0 - cdf < 1e-7 || dim >= 60 {
            return dim;
        }
        dim += 1;
    }
}

/// Largest oscillator amplitude the gate itself produces.
pub fn gate_peak_amplitude(params: &DerivedGateParams) -> f64 {
    (params.g1 + params.g2) / (params.delta * params.delta + params.kappa * params.kappa).sqrt()
}

fn cavity_state(fock: FockSpace, initial: InitialCavity) -> Result<CMatrix> {
    match initial {
        InitialCavity::Vacuum => Ok(ops::projector(&fock.coherent(C64::new(0.0, 0.0)))),
        InitialCavity::Coherent([re, im]) => Ok(ops::projector(&fock.coherent(C64::new(re, im)))),
        InitialCavity::Thermal { .. } => Err(domain(
            "channel extraction",
            "thermal states are handled by thermal_average_channel",
        )),
    }
}

/// Evolves the 16 product inputs (and one check state) through the gate
/// and reconstructs the two-qubit channel.
pub fn extract_channel(
    params: &DerivedGateParams,
    gamma_1: f64,
    gamma_2: f64,
    initial: InitialCavity,
    opts: &SimOptions,
) -> Result<ChannelExtraction> {
    let fock = FockSpace::new(opts.fock_dim)?;
    let model = LindbladModel::new(params, gamma_1, gamma_2, fock);
    let cavity = cavity_state(fock, initial)?;
    let evolve_opts = EvolveOptions {
        guards: None,
        record_every: None,
        polaron: false,
    };

    let mut inputs = product_inputs();
    inputs.push(validation_input());
    let runs: Vec<Result<(CMatrix, SimDiagnostics)>> = inputs
        .par_iter()
        .map(|rho_q| {
            let s = CompositeState::product(rho_q, &cavity)?;
            let ev = evolve_rk4(&s, &model, params.t_g, opts.policy, &evolve_opts)?;
            Ok((ev.state.qubits(), ev.diagnostics))
        })
        .collect();

    let mut outputs = Vec::with_capacity(runs.len());
    let mut diagnostics: Option<SimDiagnostics> = None;
    for r in runs {
        let (out, d) = r?;
        match &mut diagnostics {
            Some(acc) => acc.merge(&d),
            None => diagnostics = Some(d),
        }
        outputs.push(out);
    }
    let diagnostics = diagnostics.expect("at least one input");
    if let Some(g) = &opts.guards {
        diagnostics.check(g)?;
    }

    let vin = CMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, c| inputs[c].as_slice()[r]);
    let vout = CMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, c| outputs[c].as_slice()[r]);
    let vin_inv = vin
        .try_inverse()
        .ok_or_else(|| domain("channel extraction", "input states are linearly dependent"))?;
    let channel = TwoQubitChannel::from_superoperator(vout * vin_inv)?;

    let predicted = channel.apply(&inputs[SUPER_DIM]);
    let reconstruction_residual = (predicted - &outputs[SUPER_DIM]).norm();
    if reconstruction_residual > opts.reconstruction_tol {
        return Err(Error::Diagnostic {
            reason: format!("channel reconstruction residual {reconstruction_residual:.3e}"),
            diagnostics: Box::new(diagnostics),
        });
    }
    Ok(ChannelExtraction {
        channel,
        diagnostics,
        reconstruction_residual,
        fock_dim: opts.fock_dim,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PolaronReport {
    pub max_residual: f64,
    pub trajectory: Vec<TrajectoryRow>,
}

/// Runs the gate from the vacuum with `γ = 0` and tracks how far the
/// oscillator strays from the vacuum in the polaron frame.
pub fn polaron_residual(params: &DerivedGateParams, opts: &SimOptions, record_every: usize) -> Result<PolaronReport> {
    let fock = FockSpace::new(opts.fock_dim)?;
    let model = LindbladModel::new(params, 0.0, 0.0, fock);
    let h = 0.5f64.sqrt();
    let plus = [C64::new(h, 0.0), C64::new(h, 0.0)];
    let psi: Vec<C64> = plus.iter().flat_map(|a| plus.iter().map(move |b| a * b)).collect();
    let vac = ops::projector(&fock.coherent(C64::new(0.0, 0.0)));
    let s = CompositeState::product(&ops::projector(&psi), &vac)?;
    let ev = evolve_rk4(
        &s,
        &model,
        params.t_g,
        opts.policy,
        &EvolveOptions {
            guards: opts.guards,
            record_every: Some(record_every.max(1)),
            polaron: true,
        },
    )?;
    let max_residual = ev
        .trajectory
        .iter()
        .map(|r| r.polaron_residual.abs())
        .fold(0.0, f64::max);
    Ok(PolaronReport {
        max_residual,
        trajectory: ev.trajectory,
    })
}

#[derive(Debug, Clone)]
pub struct ThermalAverage {
    /// Plain average of the sampled channels.
    pub channel: TwoQubitChannel,
    /// Average after each sample got its own local-Z correction.
    pub compensated: TwoQubitChannel,
    pub amplitudes: Vec<C64>,
    /// Compensated average fidelity of each sample.
    pub sample_fidelities: Vec<f64>,
    pub diagnostics: SimDiagnostics,
}

/// Monte-Carlo thermal average: coherent amplitudes drawn from a complex
/// Gaussian with `E|β|² = n̄`, deterministic for a given seed.
#[allow(clippy::too_many_arguments)]
pub fn thermal_average_channel(
    params: &DerivedGateParams,
    gamma_1: f64,
    gamma_2: f64,
    n_bar: f64,
    sample_count: usize,
    seed: u64,
    target: &CMatrix,
    opts: &SimOptions,
) -> Result<ThermalAverage> {
    if !(n_bar >= 0.0) || sample_count == 0 {
        return Err(domain("thermal average", "need n̄ ≥ 0 and at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes: Vec<C64> = if n_bar == 0.0 {
        vec![C64::new(0.0, 0.0); sample_count]
    } else {
        let normal = Normal::new(0.0, (n_bar / 2.0).sqrt()).map_err(|e| domain("thermal average", e.to_string()))?;
        (0..sample_count)
            .map(|_| C64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect()
    };
    let gate_peak = gate_peak_amplitude(params);

    let runs: Vec<Result<(TwoQubitChannel, TwoQubitChannel, f64, SimDiagnostics)>> = amplitudes
        .par_iter()
        .map(|&beta| {
            let (initial, fock_dim) = if beta.norm() == 0.0 {
                (InitialCavity::Vacuum, opts.fock_dim)
            } else {
                (
                    InitialCavity::Coherent([beta.re, beta.im]),
                    fock_dim_for_amplitude(beta.norm() + gate_peak, opts.fock_dim),
                )
            };
            let ex = extract_channel(params, gamma_1, gamma_2, initial, &SimOptions { fock_dim, ..*opts })?;
            let fit = local_z_compensation(&ex.channel, target, 1e-6)?;
            let corrected = ex
                .channel
                .then_unitary(&crate::fidelity::local_z(fit.theta_1, fit.theta_2));
            Ok((ex.channel, corrected, fit.report.f_avg, ex.diagnostics))
        })
        .collect();

    let mut sum = CMatrix::zeros(SUPER_DIM, SUPER_DIM);
    let mut sum_c = CMatrix::zeros(SUPER_DIM, SUPER_DIM);
    let mut fids = Vec::with_capacity(sample_count);
    let mut diagnostics: Option<SimDiagnostics> = None;
    let mut first: Option<(TwoQubitChannel, TwoQubitChannel)> = None;
    for r in runs {
        let (ch, corrected, f, d) = r?;
        sum += ch.superoperator();
        sum_c += corrected.superoperator();
        fids.push(f);
        match &mut diagnostics {
            Some(acc) => acc.merge(&d),
            None => diagnostics = Some(d),
        }
        if first.is_none() {
            first = Some((ch, corrected));
        }
    }
    let (channel, compensated) = if n_bar == 0.0 {
        // every sample is the vacuum run
        first.expect("at least one sample")
    } else {
        let k = sample_count as f64;
        (
            TwoQubitChannel::from_superoperator(sum.unscale(k))?,
            TwoQubitChannel::from_superoperator(sum_c.unscale(k))?,
        )
    };
    Ok(ThermalAverage {
        channel,
        compensated,
        amplitudes,
        sample_fidelities: fids,
        diagnostics: diagnostics.expect("at least one sample"),
    })
}
