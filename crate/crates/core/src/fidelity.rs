//! Entanglement and average gate fidelity of a two-qubit channel against a
//! unitary target.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::ideal_gate_unitary;
use crate::channel::{CptpTolerance, TwoQubitChannel, DIM, SUPER_DIM};
use crate::error::{domain, Result};
use crate::ops::{self, CMatrix, C64};

/// Which unitary a channel is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetGate {
    /// `exp(iΦσ_z1σ_z2)`, what the resonator gate produces.
    #[default]
    Geometric,
    /// `diag(1,1,1,−1)` preceded by the local `S†⊗S†` that turns it into
    /// the geometric gate up to a global phase.
    Textbook,
}

impl TargetGate {
    /// Target for two-qubit phase `phi` (±π/4).
    pub fn unitary(self, phi: f64) -> CMatrix {
        match self {
            TargetGate::Geometric => ideal_gate_unitary(phi),
            TargetGate::Textbook => {
                let cz = ops::diag(&[ops::ONE, ops::ONE, ops::ONE, -ops::ONE]);
                // exp(iΦZZ) ∝ (Rz(−2Φ)⊗Rz(−2Φ))·CZ at Φ = ±π/4
                let r = ops::rz(-2.0 * phi);
                ops::kron(&r, &r) * cz
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub f_e: f64,
    pub f_avg: f64,
    /// `1 − Re Tr[ρ_μ† N′(ρ_μ)]` for each element of the orthonormal
    /// operator basis used in the sum.
    pub basis_residuals: Vec<f64>,
}

/// `F̄ = (dF_e + 1)/(d + 1)` with `d = 4`.
pub fn average_from_entanglement(f_e: f64) -> f64 {
    (4.0 * f_e + 1.0) / 5.0
}

/// The 16 two-qubit Paulis scaled to unit Hilbert–Schmidt norm.
pub fn pauli_basis() -> Vec<CMatrix> {
    let p = [ops::identity(2), ops::sigma_x(), ops::sigma_y(), ops::sigma_z()];
    let mut out = Vec::with_capacity(SUPER_DIM);
    for a in &p {
        for b in &p {
            out.push(ops::kron(a, b).scale(0.5));
        }
    }
    out
}

/// Single-qubit inputs `|0⟩, |1⟩, |+⟩, |+i⟩` as density matrices.
pub fn single_qubit_inputs() -> [CMatrix; 4] {
    let s = 1.0 / 2f64.sqrt();
    [
        ops::projector(&[ops::ONE, ops::ZERO]),
        ops::projector(&[ops::ZERO, ops::ONE]),
        ops::projector(&[C64::new(s, 0.0), C64::new(s, 0.0)]),
        ops::projector(&[C64::new(s, 0.0), C64::new(0.0, s)]),
    ]
}

/// All 16 products of [`single_qubit_inputs`], first qubit slowest.
pub fn product_inputs() -> Vec<CMatrix> {
    let s = single_qubit_inputs();
    let mut out = Vec::with_capacity(SUPER_DIM);
    for a in &s {
        for b in &s {
            out.push(ops::kron(a, b));
        }
    }
    out
}

/// The product inputs made trace-orthonormal by Gram–Schmidt.
pub fn product_state_basis() -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::with_capacity(SUPER_DIM);
    for m in product_inputs() {
        let mut v = m;
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for e in &basis {
                let c = ops::hs_inner(e, &v);
                v -= e * c;
            }
        }
        let norm = ops::hs_inner(&v, &v).re.sqrt();
        basis.push(v.unscale(norm));
    }
    basis
}

/// `F_e = (1/16)Σ_μ Tr[ρ_μ† U†N(ρ_μ)U]` over a given trace-orthonormal basis.
/// No CPTP check.
pub fn entanglement_fidelity_in_basis(
    channel: &TwoQubitChannel,
    target: &CMatrix,
    basis: &[CMatrix],
) -> (C64, Vec<f64>) {
    let ud = target.adjoint();
    let mut total = C64::new(0.0, 0.0);
    let mut residuals = Vec::with_capacity(basis.len());
    for rho in basis {
        let out = ops::conjugate(&ud, &channel.apply(rho));
        let term = ops::hs_inner(rho, &out);
        residuals.push(1.0 - term.re);
        total += term;
    }
    (total / (DIM * DIM) as f64, residuals)
}

fn checked_real(z: C64) -> Result<f64> {
    if z.im.abs() > 1e-10 {
        return Err(domain(
            "entanglement fidelity",
            format!("imaginary part {:.3e} exceeds 1e-10", z.im),
        ));
    }
    Ok(z.re)
}

pub fn entanglement_fidelity(channel: &TwoQubitChannel, target: &CMatrix) -> Result<f64> {
    Ok(average_gate_fidelity(channel, target)?.f_e)
}

pub fn average_gate_fidelity(channel: &TwoQubitChannel, target: &CMatrix) -> Result<FidelityReport> {
    average_gate_fidelity_with(
        channel,
        target,
        CptpTolerance {
            choi_eigenvalue: 1e-8,
            completeness: 1e-8,
        },
    )
}

pub fn average_gate_fidelity_with(
    channel: &TwoQubitChannel,
    target: &CMatrix,
    tol: CptpTolerance,
) -> Result<FidelityReport> {
    channel.check_cptp(tol)?;
    let (f, basis_residuals) = entanglement_fidelity_in_basis(channel, target, &pauli_basis());
    let f_e = checked_real(f)?;
    Ok(FidelityReport {
        f_e,
        f_avg: average_from_entanglement(f_e),
        basis_residuals,
    })
}

/// `Tr(S_U† S_N)/16`, the same quantity through the superoperators.
pub fn superoperator_entanglement_fidelity(channel: &TwoQubitChannel, target: &CMatrix) -> f64 {
    let su = TwoQubitChannel::unitary(target);
    ops::hs_inner(su.superoperator(), channel.superoperator()).re / (SUPER_DIM as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalZFit {
    pub theta_1: f64,
    pub theta_2: f64,
    pub report: FidelityReport,
}

/// Local correction applied after the channel.
pub fn local_z(theta_1: f64, theta_2: f64) -> CMatrix {
    ops::kron(&ops::rz(theta_1), &ops::rz(theta_2))
}

/// Maximises `F̄` over single-qubit Z rotations applied after the channel:
/// coarse grid, then alternating golden-section line searches.
pub fn local_z_compensation(channel: &TwoQubitChannel, target: &CMatrix, tol: f64) -> Result<LocalZFit> {
    channel.check_cptp(CptpTolerance {
        choi_eigenvalue: 1e-8,
        completeness: 1e-8,
    })?;
    // F_e(θ) = Σ_i d_i(θ)·M_ii/16 with M = S_N S_U† and d = diag(S_R).
    let su = TwoQubitChannel::unitary(target);
    let m = channel.superoperator() * su.superoperator().adjoint();
    let mdiag: Vec<C64> = (0..SUPER_DIM).map(|i| m[(i, i)]).collect();
    let f = |t1: f64, t2: f64| -> f64 {
        let r = local_z(t1, t2);
        let d: Vec<C64> = (0..DIM).map(|i| r[(i, i)]).collect();
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..DIM {
            for row in 0..DIM {
                acc += d[col].conj() * d[row] * mdiag[row + DIM * col];
            }
        }
        acc.re / SUPER_DIM as f64
    };

    const GRID: usize = 24;
    let step = 2.0 * PI / GRID as f64;
    let (mut t1, mut t2, mut best) = (0.0, 0.0, f(0.0, 0.0));
    for i in 0..GRID {
        for j in 0..GRID {
            let (a, b) = (-PI + i as f64 * step, -PI + j as f64 * step);
            let v = f(a, b);
            if v > best {
                (t1, t2, best) = (a, b, v);
            }
        }
    }
    for _ in 0..100 {
        let n1 = golden_max(|x| f(x, t2), t1 - step, t1 + step, tol);
        let n2 = golden_max(|x| f(n1, x), t2 - step, t2 + step, tol);
        let moved = (n1 - t1).abs().max((n2 - t2).abs());
        (t1, t2) = (n1, n2);
        if moved < tol {
            break;
        }
    }
    let corrected = channel.then_unitary(&local_z(t1, t2));
    Ok(LocalZFit {
        theta_1: t1,
        theta_2: t2,
        report: average_gate_fidelity(&corrected, target)?,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
