//! JSON run configuration. Every key carries its unit in the name; an
//! empty object gives the reference device.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::{DetuningSign, QubitTuning, ResonatorSpec};
use crate::error::{Error, Result};
use crate::fidelity::TargetGate;
use crate::lindblad::{InitialCavity, SimGuards, SimOptions, StepPolicy};
use crate::noise::{JWindow, NoiseSpec};
use crate::units::Energy;

/// Parameters a sweep axis may vary.
pub const AXIS_NAMES: &[&str] = &[
    "z_ohm",
    "q",
    "n",
    "eps_d_over_eps_a",
    "j_ghz",
    "omega_r_ghz",
    "c_r",
    "beta",
    "s_eps_ev2",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<Range>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Range>,
}

impl Axis {
    pub fn list(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values: Some(values),
            log: None,
            linear: None,
        }
    }

    pub fn log(name: &str, start: f64, stop: f64, count: usize) -> Self {
        Self {
            name: name.into(),
            values: None,
            log: Some(Range { start, stop, count }),
            linear: None,
        }
    }

    /// The points along this axis. Assumes [`RunConfig::validate`] passed.
    pub fn points(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        let spaced = |r: &Range, f: &dyn Fn(f64) -> f64, inv: &dyn Fn(f64) -> f64| -> Vec<f64> {
            if r.count == 1 {
                return vec![r.start];
            }
            let (a, b) = (f(r.start), f(r.stop));
            (0..r.count)
                .map(|i| {
                    if i == 0 {
                        r.start
                    } else if i + 1 == r.count {
                        r.stop
                    } else {
                        inv(a + (b - a) * i as f64 / (r.count - 1) as f64)
                    }
                })
                .collect()
        };
        if let Some(r) = &self.log {
            return spaced(r, &f64::ln, &f64::exp);
        }
        if let Some(r) = &self.linear {
            return spaced(r, &|x| x, &|x| x);
        }
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
}

impl SweepSpec {
    /// Impedances 50 Ω – 50 kΩ against 8 quality factors from 10³ to 2·10⁵.
    pub fn reference_grid() -> Self {
        Self {
            axes: vec![
                Axis::list("z_ohm", vec![50.0, 500.0, 5000.0, 50_000.0]),
                Axis::log("q", 1e3, 2e5, 8),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub omega_r_ghz: f64,
    pub z_ohm: f64,
    pub q: f64,
    /// Exchange at zero detuning, as `J₀/h`.
    pub j0_ghz: f64,
    pub eps_a_uev: f64,
    pub c_r: f64,
    /// Fixed operating exchange `J/h`. Absent: noise-optimal.
    pub j_ghz: Option<f64>,
    /// Fixed drive amplitude in units of `ε_a`. Absent: noise-optimal.
    pub eps_d_over_eps_a: Option<f64>,
    pub n: u32,
    pub detuning_sign: DetuningSign,
    /// Allowed `|ε − ε₀|` in units of `ε_a`.
    pub eps_window: f64,
    pub j_min_ghz: f64,
    pub j_max_ghz: f64,

    pub s_eps_ev2: f64,
    pub beta: f64,
    pub eta: f64,
    pub m: u32,

    pub target: TargetGate,
    /// Local refinement of the closed-form optimum.
    pub refine: bool,
    pub refine_rel_tol: f64,

    pub numeric: bool,
    pub initial_cavity: InitialCavity,
    pub fock_dim: usize,
    pub dt_ps: f64,
    pub min_steps: usize,
    pub max_steps: usize,
    pub max_top_level_pop: f64,
    pub max_trace_drift: f64,

    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    pub out: Option<String>,
    /// Where `simulate` writes the state trajectory, if anywhere.
    pub trajectory_csv: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega_r_ghz: 6.5,
            z_ohm: 5000.0,
            q: 20_000.0,
            j0_ghz: 1.0,
            eps_a_uev: 50.0,
            c_r: 0.18,
            j_ghz: None,
            eps_d_over_eps_a: None,
            n: 2,
            detuning_sign: DetuningSign::Below,
            eps_window: 6.0,
            j_min_ghz: 0.05,
            j_max_ghz: 30.0,
            s_eps_ev2: 1.4e-16,
            beta: 0.67,
            eta: 0.086,
            m: 1,
            target: TargetGate::Geometric,
            refine: true,
            refine_rel_tol: 1e-4,
            numeric: false,
            initial_cavity: InitialCavity::Vacuum,
            fock_dim: 7,
            dt_ps: 20.0,
            min_steps: 200,
            max_steps: 10_000,
            max_top_level_pop: 1e-4,
            max_trace_drift: 1e-6,
            seed: 0,
            sweep: None,
            out: None,
            trajectory_csv: None,
        }
    }
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(path, format!("must be a positive number, got {v}")))
    }
}

fn check_range(path: &str, r: &Range, log: bool) -> Result<()> {
    if r.count == 0 {
        return Err(config_err(
            format!("{path}.count"),
            "range must contain at least one point",
        ));
    }
    if !(r.start.is_finite() && r.stop.is_finite()) {
        return Err(config_err(path, "range ends must be finite"));
    }
    if log && !(r.start > 0.0 && r.stop > 0.0) {
        return Err(config_err(path, "log range ends must be positive"));
    }
    Ok(())
}

impl RunConfig {
    /// Parses JSON text, rejecting unknown keys.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(
                if path == "." { "<root>".to_string() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("omega_r_ghz", self.omega_r_ghz)?;
        positive("z_ohm", self.z_ohm)?;
        positive("q", self.q)?;
        positive("j0_ghz", self.j0_ghz)?;
        positive("eps_a_uev", self.eps_a_uev)?;
        if !(0.0..=1.0).contains(&self.c_r) {
            return Err(config_err(
                "c_r",
                format!("lever arm must lie in [0, 1], got {}", self.c_r),
            ));
        }
        if let Some(j) = self.j_ghz {
            positive("j_ghz", j)?;
        }
        if let Some(e) = self.eps_d_over_eps_a {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(config_err("eps_d_over_eps_a", format!("must be ≥ 0, got {e}")));
            }
        }
        if self.n == 0 {
            return Err(config_err("n", "oscillation count must be ≥ 1"));
        }
        positive("eps_window", self.eps_window)?;
        positive("j_min_ghz", self.j_min_ghz)?;
        positive("j_max_ghz", self.j_max_ghz)?;
        if self.j_min_ghz >= self.j_max_ghz {
            return Err(config_err("j_min_ghz", "must be below j_max_ghz"));
        }
        positive("s_eps_ev2", self.s_eps_ev2)?;
        positive("beta", self.beta)?;
        positive("eta", self.eta)?;
        if self.m == 0 {
            return Err(config_err("m", "pulse count must be ≥ 1"));
        }
        positive("refine_rel_tol", self.refine_rel_tol)?;
        if self.fock_dim < 2 {
            return Err(config_err("fock_dim", "need at least 2 levels"));
        }
        positive("dt_ps", self.dt_ps)?;
        if self.min_steps == 0 || self.min_steps > self.max_steps {
            return Err(config_err("min_steps", "need 1 ≤ min_steps ≤ max_steps"));
        }
        positive("max_top_level_pop", self.max_top_level_pop)?;
        positive("max_trace_drift", self.max_trace_drift)?;
        match self.initial_cavity {
            InitialCavity::Thermal { n_bar, samples } => {
                if !(n_bar >= 0.0) || samples == 0 {
                    return Err(config_err("initial_cavity.thermal", "need n_bar ≥ 0 and samples ≥ 1"));
                }
            }
            InitialCavity::Coherent([re, im]) => {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(config_err("initial_cavity.coherent", "amplitude must be finite"));
                }
            }
            InitialCavity::Vacuum => {}
        }
        if let Some(s) = &self.sweep {
            if s.axes.is_empty() {
                return Err(config_err("sweep.axes", "at least one axis is required"));
            }
            for (i, a) in s.axes.iter().enumerate() {
                let path = format!("sweep.axes[{i}]");
                if !AXIS_NAMES.contains(&a.name.as_str()) {
                    return Err(config_err(
                        format!("{path}.name"),
                        format!(
                            "unknown parameter `{}`; expected one of {}",
                            a.name,
                            AXIS_NAMES.join(", ")
                        ),
                    ));
                }
                if s.axes[..i].iter().any(|b| b.name == a.name) {
                    return Err(config_err(
                        format!("{path}.name"),
                        format!("axis `{}` appears twice", a.name),
                    ));
                }
                let given = [a.values.is_some(), a.log.is_some(), a.linear.is_some()];
                if given.iter().filter(|&&g| g).count() != 1 {
                    return Err(config_err(path, "give exactly one of `values`, `log` or `linear`"));
                }
                if let Some(v) = &a.values {
                    if v.is_empty() {
                        return Err(config_err(format!("{path}.values"), "must not be empty"));
                    }
                    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                        return Err(config_err(format!("{path}.values"), format!("non-finite value {bad}")));
                    }
                }
                if let Some(r) = &a.log {
                    check_range(&format!("{path}.log"), r, true)?;
                }
                if let Some(r) = &a.linear {
                    check_range(&format!("{path}.linear"), r, false)?;
                }
                if a.name == "n" && a.points().iter().any(|&x| x < 1.0 || x.fract() != 0.0) {
                    return Err(config_err(path, "n must take positive integer values"));
                }
            }
        }
        Ok(())
    }

    pub fn resonator(&self) -> Result<ResonatorSpec> {
        ResonatorSpec::from_ghz(self.omega_r_ghz, self.z_ohm, self.q)
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        NoiseSpec::new(self.s_eps_ev2, self.beta, self.eta, self.m)
    }

    pub fn eps_a(&self) -> Energy {
        Energy::from_microev(self.eps_a_uev)
    }

    pub fn j_window(&self) -> JWindow {
        JWindow {
            min: Energy::from_ghz(self.j_min_ghz),
            max: Energy::from_ghz(self.j_max_ghz),
        }
    }

    /// Tuning at exchange `j` with drive `eps_d`.
    pub fn tuning(&self, j: Energy, eps_d: Energy) -> Result<QubitTuning> {
        let mut t = QubitTuning::at_exchange(Energy::from_ghz(self.j0_ghz), self.eps_a(), j, self.c_r, eps_d)?;
        t.eps_window = self.eps_window;
        t.validate()?;
        Ok(t)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            fock_dim: self.fock_dim,
            policy: StepPolicy {
                dt_ns: self.dt_ps * 1e-3,
                min_steps: self.min_steps,
                max_steps: self.max_steps,
            },
            guards: Some(SimGuards {
                max_trace_drift: self.max_trace_drift,
                max_top_level_pop: self.max_top_level_pop,
            }),
            reconstruction_tol: 1e-6,
        }
    }

    /// A copy with one named parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<RunConfig> {
        let mut c = self.clone();
        match name {
            "z_ohm" => c.z_ohm = value,
            "q" => c.q = value,
            "n" => c.n = value as u32,
            "eps_d_over_eps_a" => c.eps_d_over_eps_a = Some(value),
            "j_ghz" => c.j_ghz = Some(value),
            "omega_r_ghz" => c.omega_r_ghz = value,
            "c_r" => c.c_r = value,
            "beta" => c.beta = value,
            "s_eps_ev2" => c.s_eps_ev2 = value,
            other => return Err(config_err("sweep.axes", format!("unknown parameter `{other}`"))),
        }
        Ok(c)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunConfig::from_json_str(&text)
}
