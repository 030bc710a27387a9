//! Master-equation solver for two qubits coupled to one truncated
//! oscillator, in the drive frame
//!
//! ```text
//! H = Δa†a + (g₁/2)(a+a†)σ_z1 + (g₂/2)(a+a†)σ_z2
//! ρ̇ = −i[H,ρ] + 2κD[a]ρ + (γ₁/2)D[σ_z1]ρ + (γ₂/2)D[σ_z2]ρ
//! ```
//!
//! Basis ordering is qubit 1 ⊗ qubit 2 ⊗ Fock. Every operator is diagonal
//! in the qubits, so the 4×4 qubit blocks of ρ evolve independently and the
//! right-hand side is evaluated block by block without forming `H`.

mod evolve;
mod extract;

pub use evolve::*;
pub use extract::*;

use crate::device::DerivedGateParams;
use crate::error::{domain, Result};
use crate::ops::{self, CMatrix, C64};

/// `σ_z` eigenvalues of (qubit 1, qubit 2) for each computational index.
pub(crate) const Z_SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Oscillator levels `0..dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    pub dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(domain("Fock space", format!("need at least 2 levels, got {dim}")));
        }
        Ok(Self { dim })
    }

    pub fn annihilation(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |r, c| {
            if c == r + 1 {
                C64::new((c as f64).sqrt(), 0.0)
            } else {
                ops::ZERO
            }
        })
    }

    pub fn number(&self) -> CMatrix {
        ops::diag(&(0..self.dim).map(|n| C64::new(n as f64, 0.0)).collect::<Vec<_>>())
    }

    /// Truncated coherent state `|α⟩`, renormalised.
    pub fn coherent(&self, alpha: C64) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.dim);
        let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for n in 0..self.dim {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            v.push(c);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|z| z / norm).collect()
    }

    /// `D(α) = exp(αa† − α*a)` on this space, computed in a larger space
    /// and cropped so the top levels are not distorted by the truncation.
    pub fn displacement(&self, alpha: C64) -> CMatrix {
        let big = FockSpace { dim: self.dim + 24 };
        let a = big.annihilation();
        let gen = a.adjoint() * alpha - a * alpha.conj();
        gen.exp().view((0, 0), (self.dim, self.dim)).into_owned()
    }
}

/// Everything the right-hand side needs, in rad/ns and 1/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladModel {
    pub fock: FockSpace,
    pub delta: f64,
    pub g1: f64,
    pub g2: f64,
    pub kappa: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
}

impl LindbladModel {
    pub fn new(params: &DerivedGateParams, gamma_1: f64, gamma_2: f64, fock: FockSpace) -> Self {
        Self {
            fock,
            delta: params.delta,
            g1: params.g1,
            g2: params.g2,
            kappa: params.kappa,
            gamma_1,
            gamma_2,
        }
    }

    pub fn hilbert_dim(&self) -> usize {
        4 * self.fock.dim
    }

    /// Coefficient of `(a+a†)` in qubit block `q`.
    fn block_coupling(&self, q: usize) -> f64 {
        let (s1, s2) = Z_SIGNS[q];
        0.5 * (self.g1 * s1 + self.g2 * s2)
    }

    fn block_dephasing(&self, q: usize, p: usize) -> f64 {
        let (a1, a2) = Z_SIGNS[q];
        let (b1, b2) = Z_SIGNS[p];
        0.5 * self.gamma_1 * (a1 * b1 - 1.0) + 0.5 * self.gamma_2 * (a2 * b2 - 1.0)
    }
}

/// Dense drive-frame Hamiltonian.
pub fn build_hamiltonian(model: &LindbladModel) -> CMatrix {
    let f = model.fock;
    let a = f.annihilation();
    let x = &a + a.adjoint();
    let osc = ops::kron(&ops::identity(4), &f.number()).scale(model.delta);
    let c1 = ops::kron(&ops::z1(), &x).scale(0.5 * model.g1);
    let c2 = ops::kron(&ops::z2(), &x).scale(0.5 * model.g2);
    osc + c1 + c2
}

/// A density operator on qubits ⊗ oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    pub rho: CMatrix,
    pub fock: FockSpace,
}

impl CompositeState {
    pub fn product(rho_q: &CMatrix, cavity: &CMatrix) -> Result<Self> {
        if rho_q.shape() != (4, 4) || cavity.nrows() != cavity.ncols() {
            return Err(domain(
                "composite state",
                "need a 4×4 qubit state and a square cavity state",
            ));
        }
        Ok(Self {
            rho: ops::kron(rho_q, cavity),
            fock: FockSpace::new(cavity.nrows())?,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn purity(&self) -> f64 {
        ops::hs_inner(&self.rho, &self.rho).re
    }

    pub fn qubits(&self) -> CMatrix {
        ops::partial_trace_second(&self.rho, 4, self.fock.dim)
    }

    pub fn cavity(&self) -> CMatrix {
        ops::partial_trace_first(&self.rho, 4, self.fock.dim)
    }

    pub fn mean_photon(&self) -> f64 {
        let n = self.fock.dim;
        (0..self.dim()).map(|r| (r % n) as f64 * self.rho[(r, r)].re).sum()
    }

    pub fn top_level_population(&self) -> f64 {
        let n = self.fock.dim;
        (0..4).map(|q| self.rho[(q * n + n - 1, q * n + n - 1)].re).sum()
    }

    /// Checks the invariants to the given tolerances.
    pub fn validate(&self, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<()> {
        let h = ops::hermiticity_error(&self.rho);
        if h > herm_tol {
            return Err(domain("composite state", format!("not Hermitian: {h:.3e}")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > trace_tol {
            return Err(domain("composite state", format!("trace {t}")));
        }
        let m = ops::min_hermitian_eigenvalue(&self.rho);
        if m < -eig_tol {
            return Err(domain("composite state", format!("eigenvalue {m:.3e}")));
        }
        Ok(())
    }

    /// Which qubit blocks hold anything. Blocks never mix, so zero blocks
    /// can be skipped for the whole run.
    pub(crate) fn active_blocks(&self) -> Vec<(usize, usize)> {
        let n = self.fock.dim;
        let mut out = Vec::new();
        for q in 0..4 {
            for p in 0..4 {
                let nonzero = (0..n).any(|i| (0..n).any(|j| self.rho[(q * n + i, p * n + j)] != ops::ZERO));
                if nonzero {
                    out.push((q, p));
                }
            }
        }
        out
    }
}

/// Writes `dρ/dt` into `out` for the listed blocks. Entries outside them
/// are left untouched.
pub(crate) fn lindblad_rhs_blocks(model: &LindbladModel, rho: &CMatrix, out: &mut CMatrix, blocks: &[(usize, usize)]) {
    let n = model.fock.dim;
    let d = 4 * n;
    let src = rho.as_slice();
    let dst = out.as_mut_slice();
    let sq: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt()).collect();
    let mi = C64::new(0.0, -1.0);
    for &(q, p) in blocks {
        let cq = model.block_coupling(q);
        let cp = model.block_coupling(p);
        let deph = model.block_dephasing(q, p);
        let (r0, c0) = (q * n, p * n);
        for j in 0..n {
            let col = (c0 + j) * d;
            for i in 0..n {
                let at = |ii: usize, jj: usize| src[(r0 + ii) + (c0 + jj) * d];
                let x = src[r0 + i + col];
                // H ρ
                let mut hr = x * (model.delta * i as f64);
                if i > 0 {
                    hr += at(i - 1, j) * (cq * sq[i]);
                }
                if i + 1 < n {
                    hr += at(i + 1, j) * (cq * sq[i + 1]);
                }
                // ρ H
                let mut rh = x * (model.delta * j as f64);
                if j > 0 {
                    rh += at(i, j - 1) * (cp * sq[j]);
                }
                if j + 1 < n {
                    rh += at(i, j + 1) * (cp * sq[j + 1]);
                }
                let mut v = mi * (hr - rh);
                // 2κ(aρa† − ½{a†a, ρ})
                if model.kappa != 0.0 {
                    let mut jump = -0.5 * (i + j) as f64 * x;
                    if i + 1 < n && j + 1 < n {
                        jump += at(i + 1, j + 1) * (sq[i + 1] * sq[j + 1]);
                    }
                    v += 2.0 * model.kappa * jump;
                }
                v += deph * x;
                dst[r0 + i + col] = v;
            }
        }
    }
}

/// `dρ/dt` for a full composite state.
pub fn lindblad_rhs(model: &LindbladModel, state: &CompositeState) -> CMatrix {
    let all: Vec<(usize, usize)> = (0..4).flat_map(|q| (0..4).map(move |p| (q, p))).collect();
    let mut out = CMatrix::zeros(state.dim(), state.dim());
    lindblad_rhs_blocks(model, &state.rho, &mut out, &all);
    out
}

/// Reference right-hand side from dense operators. Slow; used by tests.
pub fn lindblad_rhs_dense(model: &LindbladModel, rho: &CMatrix) -> CMatrix {
    let h = build_hamiltonian(model);
    let a = ops::kron(&ops::identity(4), &model.fock.annihilation());
    let diss = |c: &CMatrix| -> CMatrix {
        let cd = c.adjoint();
        let cdc = &cd * c;
        c * rho * &cd - (&cdc * rho + rho * &cdc).scale(0.5)
    };
    let nf = model.fock.dim;
    let z1 = ops::kron(&ops::z1(), &ops::identity(nf));
    let z2 = ops::kron(&ops::z2(), &ops::identity(nf));
    (&h * rho - rho * &h) * C64::new(0.0, -1.0)
        + diss(&a).scale(2.0 * model.kappa)
        + diss(&z1).scale(0.5 * model.gamma_1)
        + diss(&z2).scale(0.5 * model.gamma_2)
}
