use serde::{Deserialize, Serialize};

use super::{lindblad_rhs_blocks, CompositeState, LindbladModel, Z_SIGNS};
use crate::analytic::drive_frame_amplitude;
use crate::error::{Error, Result};
use crate::ops::{self, CMatrix, C64};

/// Fixed-step rule: aim for `dt`, but keep the step count within
/// `[min_steps, max_steps]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub dt_ns: f64,
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            dt_ns: 0.02,
            min_steps: 200,
            max_steps: 10_000,
        }
    }
}

impl StepPolicy {
    /// Exactly `steps` steps regardless of duration.
    pub fn fixed(steps: usize) -> Self {
        Self {
            dt_ns: f64::INFINITY,
            min_steps: steps,
            max_steps: steps,
        }
    }

    pub fn steps_for(&self, t: f64) -> usize {
        let raw = if self.dt_ns.is_finite() {
            (t / self.dt_ns).ceil() as usize
        } else {
            0
        };
        raw.clamp(self.min_steps.max(1), self.max_steps.max(1))
    }
}

/// Limits beyond which a run is reported as failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimGuards {
    pub max_trace_drift: f64,
    pub max_top_level_pop: f64,
}

impl Default for SimGuards {
    fn default() -> Self {
        Self {
            max_trace_drift: 1e-6,
            max_top_level_pop: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimDiagnostics {
    /// Largest population of the highest Fock level seen during the run.
    pub max_top_level_pop: f64,
    pub final_polaron_residual: Option<f64>,
    pub steps: usize,
    pub dt_ns: f64,
    /// Largest `|Tr ρ − 1|` seen.
    pub max_trace_drift: f64,
    /// `‖ρ − ρ†‖` before the per-step symmetrisation, worst step.
    pub max_hermiticity_error: f64,
    pub final_min_eigenvalue: f64,
}

impl SimDiagnostics {
    /// Worst case over several runs.
    pub fn merge(&mut self, other: &SimDiagnostics) {
        self.max_top_level_pop = self.max_top_level_pop.max(other.max_top_level_pop);
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.final_min_eigenvalue = self.final_min_eigenvalue.min(other.final_min_eigenvalue);
        self.steps = self.steps.max(other.steps);
        self.dt_ns = other.dt_ns;
        self.final_polaron_residual = match (self.final_polaron_residual, other.final_polaron_residual) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn check(&self, guards: &SimGuards) -> Result<()> {
        let reason = if self.max_trace_drift > guards.max_trace_drift {
            format!(
                "trace drift {:.3e} exceeds {:.1e}",
                self.max_trace_drift, guards.max_trace_drift
            )
        } else if self.max_top_level_pop > guards.max_top_level_pop {
            format!(
                "top Fock level population {:.3e} exceeds {:.1e}; raise the Fock dimension",
                self.max_top_level_pop, guards.max_top_level_pop
            )
        } else if !(self.max_top_level_pop.is_finite() && self.max_trace_drift.is_finite()) {
            "non-finite state".to_string()
        } else {
            return Ok(());
        };
        Err(Error::Diagnostic {
            reason,
            diagnostics: Box::new(self.clone()),
        })
    }
}

/// One line of the optional trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t_ns: f64,
    pub trace: f64,
    pub purity: f64,
    pub mean_photon: f64,
    pub top_level_pop: f64,
    pub polaron_residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolveOptions {
    pub guards: Option<SimGuards>,
    /// Record a [`TrajectoryRow`] every this many steps (and at the end).
    pub record_every: Option<usize>,
    /// Track the polaron-frame residual. Only meaningful from a vacuum start.
    pub polaron: bool,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: CompositeState,
    pub diagnostics: SimDiagnostics,
    pub trajectory: Vec<TrajectoryRow>,
}

/// Population outside the oscillator vacuum after undoing the
/// qubit-conditioned displacement expected at time `t`, relative to the
/// trace.
pub fn polaron_frame_residual(model: &LindbladModel, state: &CompositeState, t: f64) -> f64 {
    let n = model.fock.dim;
    let beta1 = drive_frame_amplitude(model.g1, model.delta, model.kappa, t).unwrap_or_default();
    let beta2 = drive_frame_amplitude(model.g2, model.delta, model.kappa, t).unwrap_or_default();
    let mut vac = 0.0;
    for (q, &(s1, s2)) in Z_SIGNS.iter().enumerate() {
        let amp = beta1 * s1 + beta2 * s2;
        let d = model.fock.displacement(-amp);
        let row: Vec<C64> = (0..n).map(|i| d[(0, i)]).collect();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += row[i] * state.rho[(q * n + i, q * n + j)] * row[j].conj();
            }
        }
        vac += acc.re;
    }
    1.0 - vac / state.trace()
}

fn record(model: &LindbladModel, state: &CompositeState, t: f64, polaron: bool) -> TrajectoryRow {
    TrajectoryRow {
        t_ns: t,
        trace: state.trace(),
        purity: state.purity(),
        mean_photon: state.mean_photon(),
        top_level_pop: state.top_level_population(),
        polaron_residual: if polaron {
            polaron_frame_residual(model, state, t)
        } else {
            f64::NAN
        },
    }
}

/// `y += a·x` over all entries.
fn axpy(y: &mut CMatrix, a: f64, x: &CMatrix) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yi += xi * a;
    }
}

/// Fixed-step RK4 from `t = 0` to `t_end`, re-Hermitising after every step.
pub fn evolve_rk4(
    initial: &CompositeState,
    model: &LindbladModel,
    t_end: f64,
    policy: StepPolicy,
    opts: &EvolveOptions,
) -> Result<Evolution> {
    assert_eq!(initial.fock, model.fock, "state and model disagree on the Fock space");
    let steps = policy.steps_for(t_end);
    let h = t_end / steps as f64;
    let blocks = initial.active_blocks();
    let d = initial.dim();

    let mut rho = initial.rho.clone();
    let mut k = CMatrix::zeros(d, d);
    let mut acc = CMatrix::zeros(d, d);
    let mut tmp = CMatrix::zeros(d, d);

    let mut diag = SimDiagnostics {
        dt_ns: h,
        steps,
        final_min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut trajectory = Vec::new();
    let mut state = CompositeState {
        rho: rho.clone(),
        fock: model.fock,
    };
    diag.max_top_level_pop = state.top_level_population();
    diag.max_trace_drift = (state.trace() - 1.0).abs();
    if opts.record_every.is_some() {
        trajectory.push(record(model, &state, 0.0, opts.polaron));
    }

    for step in 1..=steps {
        // k1
        lindblad_rhs_blocks(model, &rho, &mut k, &blocks);
        acc.copy_from(&k);
        tmp.copy_from(&rho);
        axpy(&mut tmp, 0.5 * h, &k);
        // k2
        lindblad_rhs_blocks(model, &tmp, &mut k, &blocks);
        axpy(&mut acc, 2.0, &k);
        tmp.copy_from(&rho);
        axpy(&mut tmp, 0.5 * h, &k);
        // k3
        lindblad_rhs_blocks(model, &tmp, &mut k, &blocks);
        axpy(&mut acc, 2.0, &k);
        tmp.copy_from(&rho);
        axpy(&mut tmp, h, &k);
        // k4
        lindblad_rhs_blocks(model, &tmp, &mut k, &blocks);
        acc += &k;
        axpy(&mut rho, h / 6.0, &acc);

        diag.max_hermiticity_error = diag.max_hermiticity_error.max(ops::hermiticity_error(&rho));
        rho = ops::hermitian_part(&rho);

        let tr = rho.trace().re;
        diag.max_trace_drift = diag.max_trace_drift.max((tr - 1.0).abs());
        let n = model.fock.dim;
        let top: f64 = (0..4).map(|q| rho[(q * n + n - 1, q * n + n - 1)].re).sum();
        diag.max_top_level_pop = diag.max_top_level_pop.max(top);

        if let Some(every) = opts.record_every {
            if step % every.max(1) == 0 || step == steps {
                state.rho.copy_from(&rho);
                trajectory.push(record(model, &state, step as f64 * h, opts.polaron));
            }
        }
    }

    state.rho = rho;
    diag.final_min_eigenvalue = ops::min_hermitian_eigenvalue(&state.rho);
    if opts.polaron {
        diag.final_polaron_residual = Some(polaron_frame_residual(model, &state, t_end));
    }
    if let Some(g) = &opts.guards {
        diag.check(g)?;
    }
    Ok(Evolution {
        state,
        diagnostics: diag,
        trajectory,
    })
}

/// Writes a trajectory as CSV.
pub fn write_trajectory_csv<W: std::io::Write>(rows: &[TrajectoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::FockSpace;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> LindbladModel {
        LindbladModel {
            fock: FockSpace::new(6).unwrap(),
            delta: 1.6,
            g1: 0.5,
            g2: 0.5,
            kappa: 0.02,
            gamma_1: 0.01,
            gamma_2: 0.01,
        }
    }

    #[test]
    fn step_policy_clamps() {
        let p = StepPolicy::default();
        assert_eq!(p.steps_for(1.0), 200);
        assert_eq!(p.steps_for(10.0), 500);
        assert_eq!(p.steps_for(1e4), 10_000);
        assert_eq!(StepPolicy::fixed(37).steps_for(123.0), 37);
    }

    #[test]
    fn stationary_without_dynamics() {
        let m = LindbladModel {
            g1: 0.0,
            g2: 0.0,
            kappa: 0.0,
            gamma_1: 0.0,
            gamma_2: 0.0,
            ..model()
        };
        let q = ops::diag(&[0.1, 0.2, 0.3, 0.4].map(|x| C64::new(x, 0.0)));
        let c = ops::diag(&[0.5, 0.3, 0.1, 0.05, 0.03, 0.02].map(|x| C64::new(x, 0.0)));
        let s = CompositeState::product(&q, &c).unwrap();
        let ev = evolve_rk4(&s, &m, 5.0, StepPolicy::default(), &EvolveOptions::default()).unwrap();
        assert!((ev.state.rho - s.rho).norm() < 1e-10);
    }

    #[test]
    fn trace_and_hermiticity_hold() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let q = ops::random_density_matrix(4, &mut rng);
        let vac = ops::projector(&m.fock.coherent(C64::new(0.0, 0.0)));
        let s = CompositeState::product(&q, &vac).unwrap();
        let opts = EvolveOptions {
            guards: Some(SimGuards::default()),
            record_every: Some(10),
            polaron: true,
        };
        let ev = evolve_rk4(&s, &m, 7.0, StepPolicy::default(), &opts).unwrap();
        assert!(ev.diagnostics.max_trace_drift < 1e-12);
        ev.state.validate(1e-10, 1e-8, 1e-7).unwrap();
        assert_eq!(ev.diagnostics.steps, 350);
        assert!(ev.trajectory.len() > 30);
        assert_eq!(ev.trajectory[0].polaron_residual, 0.0);
    }

    #[test]
    fn guard_trips_on_small_fock_space() {
        let m = LindbladModel {
            fock: FockSpace::new(2).unwrap(),
            ..model()
        };
        let q = ops::projector(&[ops::ONE, ops::ZERO, ops::ZERO, ops::ZERO]);
        let vac = ops::projector(&[ops::ONE, ops::ZERO]);
        let s = CompositeState::product(&q, &vac).unwrap();
        let opts = EvolveOptions {
            guards: Some(SimGuards::default()),
            ..Default::default()
        };
        match evolve_rk4(&s, &m, 3.0, StepPolicy::default(), &opts) {
            Err(Error::Diagnostic { diagnostics, .. }) => assert!(diagnostics.max_top_level_pop > 1e-4),
            other => panic!("expected diagnostic failure, got {:?}", other.map(|e| e.diagnostics)),
        }
    }

    #[test]
    fn trajectory_csv_header() {
        let rows = [TrajectoryRow {
            t_ns: 0.0,
            trace: 1.0,
            purity: 1.0,
            mean_photon: 0.0,
            top_level_pop: 0.0,
            polaron_residual: 0.0,
        }];
        let mut buf = Vec::new();
        write_trajectory_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_ns,trace,purity,mean_photon,top_level_pop,polaron_residual\n"));
    }
}
