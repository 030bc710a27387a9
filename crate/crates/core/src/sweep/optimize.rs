//! Operating-point selection and evaluation of a single grid point.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::analytic::{analytic_avg_fidelity, b_factor};
use crate::device::{derive_gate_params, DerivedGateParams};
use crate::error::{Error, Result};
use crate::fidelity::{average_gate_fidelity, golden_max, local_z_compensation};
use crate::lindblad::{
    extract_channel, fock_dim_for_amplitude, gate_peak_amplitude, thermal_average_channel, InitialCavity,
};
use crate::noise::{dephasing_rate, infidelity_power_law, optimal_drive_amplitude, optimal_exchange, undriven_rate};
use crate::units::Energy;

/// A named input coordinate of a sweep row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValue {
    pub name: String,
    pub value: f64,
}

/// Everything computed at one point. Fields are `None` when the point
/// failed before reaching them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub inputs: Vec<AxisValue>,
    pub z_ohm: f64,
    pub q: f64,
    pub n: u32,
    pub j_ghz: Option<f64>,
    pub eps_d_over_eps_a: Option<f64>,
    pub g_mhz: Option<f64>,
    pub delta_mhz: Option<f64>,
    pub t_g_ns: Option<f64>,
    pub kappa_per_ns: Option<f64>,
    pub gamma_phi_per_ns: Option<f64>,
    pub b: Option<f64>,
    pub f_analytic: Option<f64>,
    /// Analytic fidelity at the closed-form point, before refinement.
    pub f_closed_form: Option<f64>,
    pub f_numeric: Option<f64>,
    pub infidelity_powerlaw: Option<f64>,
    /// The noise-optimal J fell outside the allowed window.
    pub clamped: bool,
    pub j_unclamped_ghz: Option<f64>,
    pub max_fock_pop: Option<f64>,
    pub max_trace_drift: Option<f64>,
    pub error: Option<String>,
    /// The failure was a simulation guard, not bad input.
    pub diagnostic_failure: bool,
}

impl SweepRow {
    fn empty(cfg: &RunConfig, inputs: Vec<AxisValue>) -> Self {
        Self {
            inputs,
            z_ohm: cfg.z_ohm,
            q: cfg.q,
            n: cfg.n,
            j_ghz: None,
            eps_d_over_eps_a: None,
            g_mhz: None,
            delta_mhz: None,
            t_g_ns: None,
            kappa_per_ns: None,
            gamma_phi_per_ns: None,
            b: None,
            f_analytic: None,
            f_closed_form: None,
            f_numeric: None,
            infidelity_powerlaw: None,
            clamped: false,
            j_unclamped_ghz: None,
            max_fock_pop: None,
            max_trace_drift: None,
            error: None,
            diagnostic_failure: false,
        }
    }

    /// Relative infidelity reduction gained by the local refinement.
    pub fn refinement_gain(&self) -> Option<f64> {
        let (a, c) = (self.f_analytic?, self.f_closed_form?);
        Some(((1.0 - c) - (1.0 - a)) / (1.0 - c))
    }
}

/// Gate parameters and fidelity at one `(J, ε_d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub j: Energy,
    pub eps_d: Energy,
    pub params: DerivedGateParams,
    pub gamma_phi: f64,
    pub b: f64,
    pub f_analytic: f64,
}

/// Analytic fidelity of the gate run at exchange `j` and drive `eps_d`.
pub fn evaluate(cfg: &RunConfig, j: Energy, eps_d: Energy) -> Result<Evaluation> {
    let res = cfg.resonator()?;
    let noise = cfg.noise()?;
    let tuning = cfg.tuning(j, eps_d)?;
    let params = derive_gate_params(&tuning, None, &res, cfg.n, cfg.detuning_sign)?;
    let gamma_phi = dephasing_rate(j, eps_d, &noise, cfg.eps_a())?.gamma_phi;
    let b = b_factor(params.g(), params.delta, params.kappa, params.t_g)?
        .b
        .clamp(0.0, 1.0);
    let f_analytic = analytic_avg_fidelity(b, gamma_phi, params.t_g)?;
    Ok(Evaluation {
        j,
        eps_d,
        params,
        gamma_phi,
        b,
        f_analytic,
    })
}

/// Closed-form operating point, honouring any value the config pins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub j: Energy,
    pub j_unclamped: Energy,
    pub clamped: bool,
    pub eps_d: Energy,
}

pub fn closed_form_point(cfg: &RunConfig) -> Result<ClosedForm> {
    let res = cfg.resonator()?;
    let noise = cfg.noise()?;
    let kappa = crate::device::cavity_decay(&res);
    let (j, j_unclamped, clamped) = match cfg.j_ghz {
        Some(j) => (Energy::from_ghz(j), Energy::from_ghz(j), false),
        None => {
            let o = optimal_exchange(&noise, kappa, cfg.n, cfg.eps_a(), cfg.j_window())?;
            (o.j, o.j_unclamped, o.clamped)
        }
    };
    let eps_d = match cfg.eps_d_over_eps_a {
        Some(x) => cfg.eps_a() * x,
        None => optimal_drive_amplitude(kappa, cfg.n, cfg.eps_a(), undriven_rate(j, cfg.eps_a(), &noise))?,
    };
    Ok(ClosedForm {
        j,
        j_unclamped,
        clamped,
        eps_d,
    })
}

/// Coordinate descent in `(ln J, ln ε_d)` from the closed-form point. Each
/// line search spans a factor 3 either side of the current value; stops
/// once the relative infidelity change drops below `cfg.refine_rel_tol`.
///
/// Only runs when the config pins neither value. With ε_d pinned (an ε_d
/// sweep) J stays at its closed-form optimum so the sweep isolates ε_d.
pub fn refine(cfg: &RunConfig, start: &Evaluation) -> Result<Evaluation> {
    if cfg.j_ghz.is_some() || cfg.eps_d_over_eps_a.is_some() {
        return Ok(*start);
    }
    let (lo_j, hi_j) = (
        cfg.j_window().min.rad_per_ns().ln(),
        cfg.j_window().max.rad_per_ns().ln(),
    );
    let score = |lj: f64, le: f64| -> f64 {
        evaluate(
            cfg,
            Energy::from_rad_per_ns(lj.exp()),
            Energy::from_rad_per_ns(le.exp()),
        )
        .map(|e| e.f_analytic)
        .unwrap_or(f64::NEG_INFINITY)
    };
    let span = 3f64.ln();
    let mut lj = start.j.rad_per_ns().ln();
    let mut le = start.eps_d.rad_per_ns().ln();
    let mut best = *start;
    for _ in 0..100 {
        let before = 1.0 - best.f_analytic;
        lj = golden_max(|x| score(x, le), (lj - span).max(lo_j), (lj + span).min(hi_j), 1e-7);
        le = golden_max(|x| score(lj, x), le - span, le + span, 1e-7);
        let trial = evaluate(
            cfg,
            Energy::from_rad_per_ns(lj.exp()),
            Energy::from_rad_per_ns(le.exp()),
        )?;
        if trial.f_analytic < best.f_analytic {
            break;
        }
        best = trial;
        if ((before - (1.0 - best.f_analytic)) / before).abs() < cfg.refine_rel_tol {
            break;
        }
    }
    Ok(best)
}

/// The point [`optimize_point`] reports: closed form, refined if the
/// config asks for it.
pub fn operating_point(cfg: &RunConfig) -> Result<Evaluation> {
    let cf = closed_form_point(cfg)?;
    let start = evaluate(cfg, cf.j, cf.eps_d)?;
    if cfg.refine {
        refine(cfg, &start)
    } else {
        Ok(start)
    }
}

/// Master-equation fidelity at the evaluated point, plus the largest top
/// Fock level population seen.
pub struct NumericResult {
    pub f_avg: f64,
    pub max_fock_pop: f64,
    pub max_trace_drift: f64,
}

pub fn numeric_fidelity(cfg: &RunConfig, eval: &Evaluation, seed: u64) -> Result<NumericResult> {
    let opts = cfg.sim_options();
    let p = &eval.params;
    let target = cfg.target.unitary(p.target_phase());
    let g = eval.gamma_phi;
    match cfg.initial_cavity {
        InitialCavity::Vacuum => {
            let ex = extract_channel(p, g, g, InitialCavity::Vacuum, &opts)?;
            Ok(NumericResult {
                f_avg: average_gate_fidelity(&ex.channel, &target)?.f_avg,
                max_fock_pop: ex.diagnostics.max_top_level_pop,
                max_trace_drift: ex.diagnostics.max_trace_drift,
            })
        }
        InitialCavity::Coherent([re, im]) => {
            let dim = fock_dim_for_amplitude((re * re + im * im).sqrt() + gate_peak_amplitude(p), opts.fock_dim);
            let opts = crate::lindblad::SimOptions { fock_dim: dim, ..opts };
            let ex = extract_channel(p, g, g, cfg.initial_cavity, &opts)?;
            let fit = local_z_compensation(&ex.channel, &target, 1e-6)?;
            Ok(NumericResult {
                f_avg: fit.report.f_avg,
                max_fock_pop: ex.diagnostics.max_top_level_pop,
                max_trace_drift: ex.diagnostics.max_trace_drift,
            })
        }
        InitialCavity::Thermal { n_bar, samples } => {
            let avg = thermal_average_channel(p, g, g, n_bar, samples, seed, &target, &opts)?;
            Ok(NumericResult {
                f_avg: average_gate_fidelity(&avg.compensated, &target)?.f_avg,
                max_fock_pop: avg.diagnostics.max_top_level_pop,
                max_trace_drift: avg.diagnostics.max_trace_drift,
            })
        }
    }
}

fn mhz(rad_per_ns: f64) -> f64 {
    rad_per_ns / (2.0 * PI) * 1e3
}

/// Closed-form optimum, optional refinement, optional numeric check, all
/// at the config's own `(Z_r, Q)`. Errors land in the row.
pub fn optimize_point(cfg: &RunConfig, inputs: Vec<AxisValue>, seed: u64) -> SweepRow {
    let mut row = SweepRow::empty(cfg, inputs);
    if let Err(e) = fill_row(cfg, seed, &mut row) {
        row.diagnostic_failure = matches!(e, Error::Diagnostic { .. });
        if let Error::Diagnostic { diagnostics, .. } = &e {
            row.max_fock_pop = Some(diagnostics.max_top_level_pop);
            row.max_trace_drift = Some(diagnostics.max_trace_drift);
        }
        row.error = Some(e.to_string());
    }
    row
}

fn fill_row(cfg: &RunConfig, seed: u64, row: &mut SweepRow) -> Result<()> {
    let res = cfg.resonator()?;
    let noise = cfg.noise()?;
    row.kappa_per_ns = Some(crate::device::cavity_decay(&res));
    if cfg.n >= 2 {
        row.infidelity_powerlaw = Some(infidelity_power_law(&noise, &res, cfg.c_r, cfg.n)?);
    }
    let cf = closed_form_point(cfg)?;
    row.clamped = cf.clamped;
    row.j_unclamped_ghz = Some(cf.j_unclamped.ghz());
    let start = evaluate(cfg, cf.j, cf.eps_d)?;
    row.f_closed_form = Some(start.f_analytic);
    let best = if cfg.refine { refine(cfg, &start)? } else { start };
    let p = &best.params;
    row.j_ghz = Some(best.j.ghz());
    row.eps_d_over_eps_a = Some(best.eps_d / cfg.eps_a());
    row.g_mhz = Some(mhz(p.g()));
    row.delta_mhz = Some(mhz(p.delta));
    row.t_g_ns = Some(p.t_g);
    row.gamma_phi_per_ns = Some(best.gamma_phi);
    row.b = Some(best.b);
    row.f_analytic = Some(best.f_analytic);
    if cfg.numeric {
        let num = numeric_fidelity(cfg, &best, seed)?;
        row.f_numeric = Some(num.f_avg);
        row.max_fock_pop = Some(num.max_fock_pop);
        row.max_trace_drift = Some(num.max_trace_drift);
    }
    Ok(())
}
