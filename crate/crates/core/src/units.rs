//! Physical constants and the unit boundary.
//!
//! Inside the crate every energy is carried as the equivalent angular
//! frequency `E/ħ` in rad/ns, times are in ns and rates in 1/ns, with ħ = 1.
//! SI and eV quantities are converted here and nowhere else.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// CODATA 2018 values (exact where the SI fixes them).
pub mod consts {
    /// Planck constant, J·s (exact).
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant, J·s, `h/2π` (1.054 571 817…e-34).
    pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
    /// Elementary charge, C (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Nanoseconds per second.
    pub const NS_PER_S: f64 = 1e9;
}

use consts::*;

/// An energy, stored as the angular frequency `E/ħ` in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Energy(f64);

impl Energy {
    pub const ZERO: Energy = Energy(0.0);

    pub const fn from_rad_per_ns(w: f64) -> Self {
        Energy(w)
    }

    pub fn from_joules(e: f64) -> Self {
        Energy(e / HBAR / NS_PER_S)
    }

    pub fn from_ev(e: f64) -> Self {
        Self::from_joules(e * ELEMENTARY_CHARGE)
    }

    pub fn from_microev(e: f64) -> Self {
        Self::from_ev(e * 1e-6)
    }

    /// `E = h f` with `f` in GHz.
    pub fn from_ghz(f: f64) -> Self {
        Energy(2.0 * PI * f)
    }

    pub const fn rad_per_ns(self) -> f64 {
        self.0
    }

    pub fn joules(self) -> f64 {
        self.0 * HBAR * NS_PER_S
    }

    pub fn ev(self) -> f64 {
        self.joules() / ELEMENTARY_CHARGE
    }

    pub fn microev(self) -> f64 {
        self.ev() * 1e6
    }

    /// Frequency `E/h` in GHz.
    pub fn ghz(self) -> f64 {
        self.0 / (2.0 * PI)
    }

    /// Frequency `E/h` in Hz.
    pub fn hz(self) -> f64 {
        self.ghz() * 1e9
    }
}

impl std::ops::Mul<f64> for Energy {
    type Output = Energy;
    fn mul(self, rhs: f64) -> Energy {
        Energy(self.0 * rhs)
    }
}

impl std::ops::Div for Energy {
    type Output = f64;
    fn div(self, rhs: Energy) -> f64 {
        self.0 / rhs.0
    }
}

pub fn rad_per_s_to_rad_per_ns(w: f64) -> f64 {
    w / NS_PER_S
}

pub fn rad_per_ns_to_rad_per_s(w: f64) -> f64 {
    w * NS_PER_S
}

pub fn ghz_to_rad_per_ns(f: f64) -> f64 {
    2.0 * PI * f
}

/// Converts a charge-noise prefactor `S_ε` quoted in eV²/Hz^(1−β) into
/// Hz^(1+β), i.e. the noise energy expressed as a frequency `E/h`.
///
/// The dephasing formula is evaluated in this system so that `1/T₂`
/// comes out in s⁻¹. Using `E/ħ` instead would make every dephasing rate
/// larger by `(2π)^(2/(1+β))`.
pub fn noise_psd_ev2_to_hz(s_eps_ev2: f64) -> f64 {
    let ev_to_hz = ELEMENTARY_CHARGE / PLANCK;
    s_eps_ev2 * ev_to_hz * ev_to_hz
}

/// Inverse of [`noise_psd_ev2_to_hz`].
pub fn noise_psd_hz_to_ev2(s_hz: f64) -> f64 {
    let hz_to_ev = PLANCK / ELEMENTARY_CHARGE;
    s_hz * hz_to_ev * hz_to_ev
}
