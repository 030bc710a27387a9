//! Closed-form noisy gate: displacement trajectory, the b-factor, the two
//! dephasing channels and the resulting average fidelity.
//!
//! The oscillator amplitude here is the one driven by `E(t) = (g/2)e^{iΔt}`
//! in the frame without the `Δa†a` term, per unit of `σ_z1 + σ_z2`.

use std::f64::consts::PI;

use crate::channel::TwoQubitChannel;
use crate::device::DerivedGateParams;
use crate::error::{domain, Result};
use crate::ops::{self, CMatrix, C64};
use crate::quad::adaptive_simpson;

/// `U_g = exp(iΦ σ_z1 σ_z2)`.
pub fn ideal_gate_unitary(phi_12: f64) -> CMatrix {
    let p = C64::from_polar(1.0, phi_12);
    let m = p.conj();
    ops::diag(&[p, m, m, p])
}

/// `α(t) = −(g/2)(e^{−κt} − e^{iΔt})/(iΔ + κ)`.
pub fn alpha_closed_form(g: f64, delta: f64, kappa: f64, t: f64) -> Result<C64> {
    if delta == 0.0 && kappa == 0.0 {
        return Err(domain("displacement amplitude", "Δ and κ cannot both vanish"));
    }
    let num = C64::new((-kappa * t).exp(), 0.0) - C64::from_polar(1.0, delta * t);
    Ok(-0.5 * g * num / C64::new(kappa, delta))
}

/// The same amplitude seen in the frame that keeps `Δa†a` in the
/// Hamiltonian (the frame the master equation is solved in).
pub fn drive_frame_amplitude(g: f64, delta: f64, kappa: f64, t: f64) -> Result<C64> {
    Ok(-ops::I * C64::from_polar(1.0, -delta * t) * alpha_closed_form(g, delta, kappa, t)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementTrajectory {
    pub g: f64,
    pub delta: f64,
    pub kappa: f64,
    /// `(t, α(t))` on a uniform grid over `[0, t_g]`.
    pub samples: Vec<(f64, C64)>,
}

impl DisplacementTrajectory {
    pub fn sample(g: f64, delta: f64, kappa: f64, t_g: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(domain("displacement trajectory", "need at least two samples"));
        }
        let samples = (0..count)
            .map(|i| {
                let t = t_g * i as f64 / (count - 1) as f64;
                alpha_closed_form(g, delta, kappa, t).map(|a| (t, a))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            g,
            delta,
            kappa,
            samples,
        })
    }

    /// Drive `E(t)/ħ`.
    pub fn drive(&self, t: f64) -> C64 {
        0.5 * self.g * C64::from_polar(1.0, self.delta * t)
    }

    /// Largest `|α̇ + κα − E|` on the grid, with `α̇` by central differences.
    pub fn ode_residual(&self, h: f64) -> f64 {
        self.samples
            .iter()
            .map(|&(t, a)| {
                let ap = alpha_closed_form(self.g, self.delta, self.kappa, t + h).unwrap();
                let am = alpha_closed_form(self.g, self.delta, self.kappa, t - h).unwrap();
                ((ap - am) / (2.0 * h) + self.kappa * a - self.drive(t)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// `Φ₁₂(t) = 2 Im ∫₀ᵗ E(t') α*(t') dt'` by quadrature.
pub fn geometric_phase(g: f64, delta: f64, kappa: f64, t: f64) -> Result<f64> {
    alpha_closed_form(g, delta, kappa, 0.0)?;
    let integrand = |s: f64| {
        let e = 0.5 * g * C64::from_polar(1.0, delta * s);
        (e * alpha_closed_form(g, delta, kappa, s).unwrap().conj()).im
    };
    Ok(2.0 * adaptive_simpson(integrand, 0.0, t, 1e-13 * t.max(1.0)))
}

/// Lossless phase `(g²/2Δ²)(Δt − sin Δt)`.
pub fn geometric_phase_lossless(g: f64, delta: f64, t: f64) -> f64 {
    g * g / (2.0 * delta * delta) * (delta * t - (delta * t).sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BFactor {
    pub b: f64,
    /// From photons lost during the gate.
    pub b_l: f64,
    /// From residual qubit–cavity entanglement at `t_g`.
    pub b_e: f64,
}

/// `∫₀ᵗ |α|² dt'` in closed form.
pub fn alpha_sq_integral(g: f64, delta: f64, kappa: f64, t: f64) -> f64 {
    let d2 = delta * delta + kappa * kappa;
    // (1 − e^{−2κt})/(2κ), → t as κ → 0
    let decay = if kappa == 0.0 {
        t
    } else {
        -(-2.0 * kappa * t).exp_m1() / (2.0 * kappa)
    };
    let osc = (kappa - (-kappa * t).exp() * (kappa * (delta * t).cos() - delta * (delta * t).sin())) / d2;
    g * g / (4.0 * d2) * (decay + t - 2.0 * osc)
}

/// `b = exp(−4κ∫|α|² − 2|α(t_g)|²)` and its two factors.
pub fn b_factor(g: f64, delta: f64, kappa: f64, t_g: f64) -> Result<BFactor> {
    let a = alpha_closed_form(g, delta, kappa, t_g)?;
    let b_l = (-4.0 * kappa * alpha_sq_integral(g, delta, kappa, t_g)).exp();
    let b_e = (-2.0 * a.norm_sqr()).exp();
    Ok(BFactor { b: b_l * b_e, b_l, b_e })
}

/// The three-term exponent form of `b(t_g)`, kept separate as a
/// cross-check of [`b_factor`].
pub fn b_factor_explicit(g: f64, delta: f64, kappa: f64, t_g: f64) -> f64 {
    let d2 = delta * delta + kappa * kappa;
    let g2 = g * g;
    let decay = (-kappa * t_g).exp();
    let e = -kappa * t_g * g2 / d2
        + g2 * (delta * delta - kappa * kappa) / (d2 * d2) * ((delta * t_g).cos() * decay - 1.0)
        + 2.0 * g2 * decay * kappa * delta / (d2 * d2) * (delta * t_g).sin();
    e.exp()
}

/// `b` from direct quadrature of `|α|²`.
pub fn b_factor_quadrature(g: f64, delta: f64, kappa: f64, t_g: f64) -> Result<f64> {
    let a_end = alpha_closed_form(g, delta, kappa, t_g)?;
    let integral = adaptive_simpson(
        |s| alpha_closed_form(g, delta, kappa, s).unwrap().norm_sqr(),
        0.0,
        t_g,
        1e-12 * t_g,
    );
    Ok((-4.0 * kappa * integral - 2.0 * a_end.norm_sqr()).exp())
}

/// Small-κ limit at the gate point, `exp(−πκ/(2g√n))`.
pub fn b_factor_simplified(g: f64, kappa: f64, n: u32) -> f64 {
    (-PI * kappa / (2.0 * g * (n as f64).sqrt())).exp()
}

/// Correlated dephasing `E_b`.
pub fn correlated_dephasing_channel(b: f64) -> Result<TwoQubitChannel> {
    if !(0.0..=1.0).contains(&b) {
        return Err(domain("correlated dephasing", format!("b must lie in [0, 1], got {b}")));
    }
    let id = ops::identity(4);
    let zz = ops::zz();
    let k0 = (id.scale(1.0 + b) - zz.scale(1.0 - b)).scale(0.5);
    let k_odd = (ops::z1() + ops::z2()).scale(0.5 * ((1.0 - b.powi(4)) / 2.0).sqrt());
    let k_even = (&id + &zz).scale(0.5 * (1.0 - b * b) / 2f64.sqrt());
    TwoQubitChannel::from_kraus(vec![k0, k_odd, k_even])
}

/// Independent single-qubit dephasing: coherence of qubit j decays as
/// `e^{−γ_j t}`.
pub fn intrinsic_dephasing_channel(gamma_1: f64, gamma_2: f64, t: f64) -> Result<TwoQubitChannel> {
    if !(gamma_1 >= 0.0 && gamma_2 >= 0.0 && t >= 0.0) {
        return Err(domain("intrinsic dephasing", "rates and time must be ≥ 0"));
    }
    let p1 = -0.5 * (-gamma_1 * t).exp_m1();
    let p2 = -0.5 * (-gamma_2 * t).exp_m1();
    let ops_weights = [
        (ops::identity(4), (1.0 - p1) * (1.0 - p2)),
        (ops::z1(), p1 * (1.0 - p2)),
        (ops::z2(), p2 * (1.0 - p1)),
        (ops::zz(), p1 * p2),
    ];
    TwoQubitChannel::from_kraus(ops_weights.into_iter().map(|(k, w)| k.scale(w.sqrt())).collect())
}

/// Intrinsic dephasing for `t_g`, then correlated dephasing, then `U_g`.
pub fn analytic_gate_channel(params: &DerivedGateParams, gamma_1: f64, gamma_2: f64) -> Result<TwoQubitChannel> {
    let b = b_factor(params.g(), params.delta, params.kappa, params.t_g)?;
    let deph = intrinsic_dephasing_channel(gamma_1, gamma_2, params.t_g)?;
    let corr = correlated_dephasing_channel(b.b.clamp(0.0, 1.0))?;
    Ok(deph
        .then(&corr)
        .then_unitary(&ideal_gate_unitary(params.target_phase())))
}

/// `F̄ = (4 + 4b e^{−γt} + (b⁴+1) e^{−2γt})/10`.
pub fn analytic_avg_fidelity(b: f64, gamma_phi: f64, t_g: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&b) {
        return Err(domain("analytic fidelity", format!("b must lie in [0, 1], got {b}")));
    }
    let d = (-gamma_phi * t_g).exp();
    Ok((4.0 + 4.0 * b * d + (b.powi(4) + 1.0) * d * d) / 10.0)
}
