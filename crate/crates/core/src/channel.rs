//! Two-qubit quantum channels.
//!
//! A channel is always held as its 16×16 superoperator in the
//! column-stacking convention, `vec(N(ρ)) = S·vec(ρ)`. Channels built from
//! Kraus operators keep the Kraus set as well.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::ops::{self, CMatrix, C64};

pub const DIM: usize = 4;
pub const SUPER_DIM: usize = DIM * DIM;

/// Tolerances a channel must meet to count as CPTP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptpTolerance {
    pub choi_eigenvalue: f64,
    pub completeness: f64,
}

impl Default for CptpTolerance {
    fn default() -> Self {
        Self {
            choi_eigenvalue: 1e-8,
            completeness: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitChannel {
    kraus: Option<Vec<CMatrix>>,
    superop: CMatrix,
}

impl TwoQubitChannel {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(domain("channel", "empty Kraus set"));
        }
        let mut s = CMatrix::zeros(SUPER_DIM, SUPER_DIM);
        for k in &kraus {
            if k.shape() != (DIM, DIM) {
                return Err(domain(
                    "channel",
                    format!("Kraus operator has shape {:?}, expected 4×4", k.shape()),
                ));
            }
            s += ops::kron(&k.map(|z| z.conj()), k);
        }
        Ok(Self {
            kraus: Some(kraus),
            superop: s,
        })
    }

    pub fn from_superoperator(superop: CMatrix) -> Result<Self> {
        if superop.shape() != (SUPER_DIM, SUPER_DIM) {
            return Err(domain(
                "channel",
                format!("superoperator has shape {:?}, expected 16×16", superop.shape()),
            ));
        }
        Ok(Self { kraus: None, superop })
    }

    pub fn identity() -> Self {
        Self::unitary(&ops::identity(DIM))
    }

    /// Conjugation `ρ ↦ UρU†`.
    pub fn unitary(u: &CMatrix) -> Self {
        Self::from_kraus(vec![u.clone()]).expect("4×4 unitary")
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superop
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        ops::unvec_op(&(&self.superop * ops::vec_op(rho)), DIM)
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &TwoQubitChannel) -> TwoQubitChannel {
        let kraus = match (&self.kraus, &next.kraus) {
            (Some(a), Some(b)) => Some(b.iter().flat_map(|kb| a.iter().map(move |ka| kb * ka)).collect()),
            _ => None,
        };
        TwoQubitChannel {
            kraus,
            superop: &next.superop * &self.superop,
        }
    }

    pub fn then_unitary(&self, u: &CMatrix) -> TwoQubitChannel {
        self.then(&Self::unitary(u))
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ N(|i⟩⟨j|)`, unnormalised (trace 4).
    pub fn choi(&self) -> CMatrix {
        CMatrix::from_fn(SUPER_DIM, SUPER_DIM, |r, c| {
            let (i, k) = (r / DIM, r % DIM);
            let (j, l) = (c / DIM, c % DIM);
            self.superop[(k + DIM * l, i + DIM * j)]
        })
    }

    /// `‖Σ K†K − I‖_F`, evaluated through the Choi matrix so it also covers
    /// channels without a Kraus set.
    pub fn completeness_error(&self) -> f64 {
        let reduced = ops::partial_trace_second(&self.choi(), DIM, DIM);
        // Tr_out gives (Σ K†K)ᵀ
        (reduced - ops::identity(DIM)).norm()
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        ops::min_hermitian_eigenvalue(&self.choi())
    }

    pub fn check_cptp(&self, tol: CptpTolerance) -> Result<()> {
        let min_choi_eigenvalue = self.min_choi_eigenvalue();
        let completeness_error = self.completeness_error();
        let choi_herm = ops::hermiticity_error(&self.choi());
        if min_choi_eigenvalue < -tol.choi_eigenvalue
            || completeness_error > tol.completeness
            || choi_herm > tol.choi_eigenvalue
        {
            return Err(Error::NotCptp {
                min_choi_eigenvalue,
                completeness_error,
            });
        }
        Ok(())
    }

    /// A Kraus set recovered from the Choi matrix. Eigenvalues below
    /// `cutoff` are dropped.
    pub fn kraus_from_choi(&self, cutoff: f64) -> Vec<CMatrix> {
        let eig = ops::hermitian_part(&self.choi()).symmetric_eigen();
        let mut out = Vec::new();
        for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda <= cutoff {
                continue;
            }
            let v = eig.eigenvectors.column(idx);
            let s = lambda.sqrt();
            out.push(CMatrix::from_fn(DIM, DIM, |k, i| v[i * DIM + k] * s));
        }
        out
    }

    /// Frobenius distance between normalised Choi matrices.
    pub fn choi_distance(&self, other: &TwoQubitChannel) -> f64 {
        (self.choi() - other.choi()).norm() / DIM as f64
    }
}

/// Checks the two-qubit density-matrix invariants: Hermitian, unit trace,
/// no eigenvalue below `−eig_tol`.
pub fn validate_density_matrix(rho: &CMatrix, herm_tol: f64, trace_tol: f64, eig_tol: f64) -> Result<()> {
    if rho.shape() != (DIM, DIM) {
        return Err(domain(
            "density matrix",
            format!("shape {:?}, expected 4×4", rho.shape()),
        ));
    }
    let h = ops::hermiticity_error(rho);
    if h > herm_tol {
        return Err(domain("density matrix", format!("not Hermitian: ‖ρ − ρ†‖ = {h:.3e}")));
    }
    let tr = ops::trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > trace_tol {
        return Err(domain("density matrix", format!("trace {tr} ≠ 1")));
    }
    let m = ops::min_hermitian_eigenvalue(rho);
    if m < -eig_tol {
        return Err(domain("density matrix", format!("negative eigenvalue {m:.3e}")));
    }
    Ok(())
}

type MatrixRows = Vec<Vec<[f64; 2]>>;

fn to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn from_rows(rows: &MatrixRows) -> std::result::Result<CMatrix, String> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMatrix::from_fn(nr, nc, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelJson {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    kraus: Option<Vec<MatrixRows>>,
    superoperator: MatrixRows,
}

impl Serialize for TwoQubitChannel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelJson {
            kraus: self.kraus.as_ref().map(|ks| ks.iter().map(to_rows).collect()),
            superoperator: to_rows(&self.superop),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TwoQubitChannel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ChannelJson::deserialize(d)?;
        let superop = from_rows(&j.superoperator).map_err(D::Error::custom)?;
        if superop.shape() != (SUPER_DIM, SUPER_DIM) {
            return Err(D::Error::custom("superoperator must be 16×16"));
        }
        let kraus = match j.kraus {
            Some(ks) => Some(
                ks.iter()
                    .map(|k| from_rows(k).map_err(D::Error::custom))
                    .collect::<std::result::Result<Vec<_>, _>>()?,
            ),
            None => None,
        };
        Ok(TwoQubitChannel { kraus, superop })
    }
}
