//! Device parameters to effective gate parameters.
//!
//! The exchange splitting is modelled as `J(ε) = J₀·exp(ε/ε_a)`, expanded to
//! second order around the DC operating point `ε₀`. Driving ε at amplitude
//! `ε_d` near the resonator frequency then produces a longitudinal coupling
//! `g/2·(a + a†)σ_z` and a small dispersive correction `χ/2·a†a·σ_z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::units::{consts, rad_per_ns_to_rad_per_s, rad_per_s_to_rad_per_ns, Energy};

/// Default half-width of the ε window, in units of ε_a.
pub const DEFAULT_EPS_WINDOW: f64 = 6.0;

/// Range where the exponential J model is trusted, in GHz (`J/h`).
pub const J_WARNING_BAND_GHZ: (f64, f64) = (0.05, 30.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// Angular frequency, rad/ns.
    omega_r: f64,
    /// Characteristic impedance, Ω.
    z_r: f64,
    /// Loaded quality factor.
    q: f64,
}

impl ResonatorSpec {
    /// `omega_r` in rad/ns.
    pub fn new(omega_r: f64, z_r: f64, q: f64) -> Result<Self> {
        if !(omega_r > 0.0 && omega_r.is_finite()) {
            return Err(domain("resonator frequency", format!("must be > 0, got {omega_r}")));
        }
        if !(z_r > 0.0 && z_r.is_finite()) {
            return Err(domain("resonator impedance", format!("must be > 0, got {z_r}")));
        }
        if !(q > 0.0) {
            return Err(domain("resonator quality factor", format!("must be > 0, got {q}")));
        }
        Ok(Self { omega_r, z_r, q })
    }

    pub fn from_ghz(f_ghz: f64, z_r: f64, q: f64) -> Result<Self> {
        Self::new(2.0 * PI * f_ghz, z_r, q)
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn z_r(&self) -> f64 {
        self.z_r
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn with_z_r(self, z_r: f64) -> Result<Self> {
        Self::new(self.omega_r, z_r, self.q)
    }

    pub fn with_q(self, q: f64) -> Result<Self> {
        Self::new(self.omega_r, self.z_r, q)
    }
}

/// Zero-point voltage at the resonator antinode, `V₀ = √(ħ Z_r)·ω_r`, in volts.
///
/// Note this is the expression used for the gate analysis; the textbook
/// zero-point voltage of a half-wave resonator carries an extra `1/√2`.
pub fn photon_voltage(res: &ResonatorSpec) -> f64 {
    (consts::HBAR * res.z_r).sqrt() * rad_per_ns_to_rad_per_s(res.omega_r)
}

/// Cavity amplitude decay rate `κ = ω_r/(2Q)`, in 1/ns.
pub fn cavity_decay(res: &ResonatorSpec) -> f64 {
    res.omega_r / (2.0 * res.q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitTuning {
    pub j0: Energy,
    pub eps_a: Energy,
    pub eps_0: Energy,
    /// Resonator lever arm.
    pub c_r: f64,
    pub eps_d: Energy,
    /// Half-width of the trusted ε window in units of `eps_a`.
    pub eps_window: f64,
}

impl QubitTuning {
    pub fn new(j0: Energy, eps_a: Energy, eps_0: Energy, c_r: f64, eps_d: Energy) -> Result<Self> {
        let t = Self {
            j0,
            eps_a,
            eps_0,
            c_r,
            eps_d,
            eps_window: DEFAULT_EPS_WINDOW,
        };
        t.validate()?;
        Ok(t)
    }

    /// Tuning whose operating point sits where `J(ε₀) = j`.
    pub fn at_exchange(j0: Energy, eps_a: Energy, j: Energy, c_r: f64, eps_d: Energy) -> Result<Self> {
        if !(j.rad_per_ns() > 0.0 && j0.rad_per_ns() > 0.0) {
            return Err(domain("exchange", "J and J₀ must be > 0"));
        }
        let eps_0 = eps_a * (j / j0).ln();
        Self::new(j0, eps_a, eps_0, c_r, eps_d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_a.rad_per_ns() > 0.0) {
            return Err(domain("eps_a", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.c_r) {
            return Err(domain("lever arm c_r", format!("must lie in [0, 1], got {}", self.c_r)));
        }
        if !(self.eps_d.rad_per_ns() >= 0.0) {
            return Err(domain("drive amplitude eps_d", "must be ≥ 0"));
        }
        if !(self.j0.rad_per_ns() > 0.0) {
            return Err(domain("J0", "must be > 0"));
        }
        if !(self.eps_window > 0.0) {
            return Err(domain("eps window", "must be > 0"));
        }
        Ok(())
    }

    /// `J(ε₀)`.
    pub fn j_operating(&self) -> Energy {
        self.j0 * (self.eps_0 / self.eps_a).exp()
    }

    /// True when `J(ε₀)` lies outside the band where the exponential model
    /// has been characterised. Not an error.
    pub fn outside_warning_band(&self) -> bool {
        let f = self.j_operating().ghz();
        f < J_WARNING_BAND_GHZ.0 || f > J_WARNING_BAND_GHZ.1
    }
}

/// `J` and its first three ε-derivatives. Derivatives are in internal units:
/// `dᵏJ/dεᵏ` carries (rad/ns)^(1−k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeDerivatives {
    pub j: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

pub fn exchange_and_derivatives(tuning: &QubitTuning, eps: Energy) -> Result<ExchangeDerivatives> {
    let half_width = tuning.eps_window * tuning.eps_a.rad_per_ns();
    let offset = (eps.rad_per_ns() - tuning.eps_0.rad_per_ns()).abs();
    if offset > half_width {
        return Err(domain(
            "exchange model window",
            format!(
                "ε = {:.3} µeV is outside ε₀ ± {}·ε_a = [{:.3}, {:.3}] µeV",
                eps.microev(),
                tuning.eps_window,
                Energy::from_rad_per_ns(tuning.eps_0.rad_per_ns() - half_width).microev(),
                Energy::from_rad_per_ns(tuning.eps_0.rad_per_ns() + half_width).microev(),
            ),
        ));
    }
    let ea = tuning.eps_a.rad_per_ns();
    let j = tuning.j0.rad_per_ns() * (eps / tuning.eps_a).exp();
    Ok(ExchangeDerivatives {
        j,
        d1: j / ea,
        d2: j / (ea * ea),
        d3: j / (ea * ea * ea),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    /// Longitudinal coupling, rad/ns.
    pub g: f64,
    /// Dispersive correction, rad/ns.
    pub chi: f64,
    /// `χ/g = 2 c_r V₀/ε_d`; absent when the drive is off.
    pub chi_over_g: Option<f64>,
}

/// Energy shift of ε from one photon's voltage, `c_r·e·V₀`.
pub fn photon_detuning_shift(tuning: &QubitTuning, res: &ResonatorSpec) -> Energy {
    Energy::from_joules(tuning.c_r * consts::ELEMENTARY_CHARGE * photon_voltage(res))
}

/// `g = ½ J''(ε₀) c_r V₀ ε_d`, `χ = J''(ε₀) c_r² V₀²`.
pub fn coupling_strengths(tuning: &QubitTuning, res: &ResonatorSpec) -> Result<Couplings> {
    let d = exchange_and_derivatives(tuning, tuning.eps_0)?;
    let shift = photon_detuning_shift(tuning, res).rad_per_ns();
    let eps_d = tuning.eps_d.rad_per_ns();
    let g = 0.5 * d.d2 * shift * eps_d;
    let chi = d.d2 * shift * shift;
    let chi_over_g = (eps_d > 0.0).then(|| 2.0 * shift / eps_d);
    Ok(Couplings { g, chi, chi_over_g })
}

/// Drive below (`Δ > 0`) or above (`Δ < 0`) the resonator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningSign {
    #[default]
    Below,
    Above,
}

impl DetuningSign {
    pub fn factor(self) -> f64 {
        match self {
            DetuningSign::Below => 1.0,
            DetuningSign::Above => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSchedule {
    /// Signed detuning `ω_r − ω_d`, rad/ns.
    pub delta: f64,
    /// Gate time, ns.
    pub t_g: f64,
    pub n: u32,
}

/// Detuning and gate time that close `n` phase-space loops with a total
/// two-qubit phase of π/4: `Δ = 2√(n g₁g₂)`, `t_g = 2πn/|Δ|`.
pub fn gate_schedule(g1: f64, g2: f64, n: u32) -> Result<GateSchedule> {
    gate_schedule_signed(g1, g2, n, DetuningSign::Below)
}

pub fn gate_schedule_signed(g1: f64, g2: f64, n: u32, sign: DetuningSign) -> Result<GateSchedule> {
    if !(g1 > 0.0 && g2 > 0.0) || !g1.is_finite() || !g2.is_finite() {
        return Err(domain(
            "gate schedule",
            format!("couplings must be > 0, got g1={g1}, g2={g2}"),
        ));
    }
    if n == 0 {
        return Err(domain("gate schedule", "oscillation count n must be ≥ 1"));
    }
    let magnitude = 2.0 * (n as f64 * g1 * g2).sqrt();
    let t_g = 2.0 * PI * n as f64 / magnitude;
    Ok(GateSchedule {
        delta: sign.factor() * magnitude,
        t_g,
        n,
    })
}

/// Everything the analytic channel and the master-equation solver need.
/// Rates and energies in rad/ns, times in ns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedGateParams {
    /// Photon voltage, V.
    pub v0: f64,
    pub kappa: f64,
    pub g1: f64,
    pub g2: f64,
    pub chi: f64,
    pub delta: f64,
    pub t_g: f64,
    pub n: u32,
    pub j_tilde: f64,
}

impl DerivedGateParams {
    /// Gate parameters straight from couplings, bypassing the device model.
    pub fn from_couplings(g1: f64, g2: f64, kappa: f64, n: u32) -> Result<Self> {
        Self::from_couplings_signed(g1, g2, kappa, n, DetuningSign::Below)
    }

    pub fn from_couplings_signed(g1: f64, g2: f64, kappa: f64, n: u32, sign: DetuningSign) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(domain("cavity decay", format!("κ must be ≥ 0, got {kappa}")));
        }
        let s = gate_schedule_signed(g1, g2, n, sign)?;
        Ok(Self {
            v0: 0.0,
            kappa,
            g1,
            g2,
            chi: 0.0,
            delta: s.delta,
            t_g: s.t_g,
            n,
            j_tilde: 0.0,
        })
    }

    /// Geometric mean coupling `√(g₁g₂)`.
    pub fn g(&self) -> f64 {
        (self.g1 * self.g2).sqrt()
    }

    /// Target two-qubit phase: π/4 below resonance, −π/4 above.
    pub fn target_phase(&self) -> f64 {
        PI / 4.0 * self.delta.signum()
    }

    pub fn delta_times_t_g(&self) -> f64 {
        self.delta.abs() * self.t_g
    }
}

/// Derives the gate parameters for two qubits with the given tunings on one
/// resonator. Qubit 2 defaults to the same tuning as qubit 1.
pub fn derive_gate_params(
    qubit1: &QubitTuning,
    qubit2: Option<&QubitTuning>,
    res: &ResonatorSpec,
    n: u32,
    sign: DetuningSign,
) -> Result<DerivedGateParams> {
    let c1 = coupling_strengths(qubit1, res)?;
    let c2 = match qubit2 {
        Some(q) => coupling_strengths(q, res)?,
        None => c1,
    };
    let s = gate_schedule_signed(c1.g, c2.g, n, sign)?;
    let d = exchange_and_derivatives(qubit1, qubit1.eps_0)?;
    let shift = photon_detuning_shift(qubit1, res).rad_per_ns();
    let eps_d = qubit1.eps_d.rad_per_ns();
    let j_tilde = d.j + 0.5 * d.d2 * (shift * shift + 0.5 * eps_d * eps_d);
    Ok(DerivedGateParams {
        v0: photon_voltage(res),
        kappa: cavity_decay(res),
        g1: c1.g,
        g2: c2.g,
        chi: c1.chi,
        delta: s.delta,
        t_g: s.t_g,
        n,
        j_tilde,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceMatrix {
    /// Total capacitance of the left dot, F.
    pub c_l: f64,
    /// Total capacitance of the right dot, F.
    pub c_r: f64,
    /// Left dot to left gate.
    pub c_ll: f64,
    /// Left dot to right gate.
    pub c_lr: f64,
    /// Right dot to left gate.
    pub c_rl: f64,
    /// Right dot to right gate.
    pub c_rr: f64,
    /// Left dot to resonator.
    pub c_l_res: f64,
    /// Right dot to resonator.
    pub c_r_res: f64,
}

impl CapacitanceMatrix {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.c_l,
            self.c_r,
            self.c_ll,
            self.c_lr,
            self.c_rl,
            self.c_rr,
            self.c_l_res,
            self.c_r_res,
        ];
        if all.iter().any(|c| !(*c >= 0.0)) {
            return Err(domain("capacitance matrix", "entries must be ≥ 0"));
        }
        if self.c_l == 0.0 || self.c_r == 0.0 {
            return Err(domain("capacitance matrix", "total dot capacitance is zero"));
        }
        let tol = 1e-12 * self.c_l.max(self.c_r);
        if self.c_ll + self.c_lr + self.c_l_res > self.c_l + tol {
            return Err(domain(
                "capacitance matrix",
                "C_L is smaller than the sum of its couplings",
            ));
        }
        if self.c_rl + self.c_rr + self.c_r_res > self.c_r + tol {
            return Err(domain(
                "capacitance matrix",
                "C_R is smaller than the sum of its couplings",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverArms {
    /// `dε/dV_ε` in units of the electron charge.
    pub d_eps_d_v_eps: f64,
    /// Resonator lever arm `c_r = C_R,r/C_R − C_L,r/C_L`.
    pub c_r: f64,
}

pub fn lever_arm_from_capacitances(c: &CapacitanceMatrix) -> Result<LeverArms> {
    c.validate()?;
    Ok(LeverArms {
        d_eps_d_v_eps: (c.c_ll - c.c_lr) / c.c_l - (c.c_rl - c.c_rr) / c.c_r,
        c_r: c.c_r_res / c.c_r - c.c_l_res / c.c_l,
    })
}

/// Resonator angular frequency in rad/s, for reporting.
pub fn omega_r_si(res: &ResonatorSpec) -> f64 {
    rad_per_ns_to_rad_per_s(res.omega_r)
}

/// Builds a resonator from an SI angular frequency.
pub fn resonator_from_si(omega_r_rad_per_s: f64, z_r: f64, q: f64) -> Result<ResonatorSpec> {
    ResonatorSpec::new(rad_per_s_to_rad_per_ns(omega_r_rad_per_s), z_r, q)
}
