//! Liouville-space (`N²`-dimensional) representation of superoperators.
//!
//! Operators are flattened row-major over `(m, n)` storage offsets, so the pair
//! `(m, n)` sits at index `m * N + n`.

use crate::error::{Error, Result};
use crate::lattice::{build_propagator, DensityMatrix, LatticeSpec, C64};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Largest lattice for which `N²×N²` superoperators are materialized.
pub const DENSE_LIMIT: usize = 64;

/// Flattening of site pairs into Liouville-space indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiouvilleIndex {
    n: usize,
}

impl LiouvilleIndex {
    pub fn new(spec: &LatticeSpec) -> Self {
        Self { n: spec.n_sites() }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn flatten(&self, row: usize, col: usize) -> usize {
        row * self.n + col
    }

    pub fn unflatten(&self, index: usize) -> (usize, usize) {
        (index / self.n, index % self.n)
    }
}

/// The non-unitary map applied at each random event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target", rename_all = "lowercase")]
pub enum InterventionKind {
    /// `ρ ↦ Tr(ρ) |target⟩⟨target|`.
    Reset(i64),
    /// `ρ ↦ P ρ P†` with `P = |target⟩⟨target|`; trace is not restored.
    Projection(i64),
}

impl InterventionKind {
    pub fn target(&self) -> i64 {
        match *self {
            InterventionKind::Reset(t) | InterventionKind::Projection(t) => t,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InterventionKind::Reset(_) => "reset",
            InterventionKind::Projection(_) => "projection",
        }
    }

    /// Both built-in interventions map pure states to (unnormalized) pure states.
    pub fn preserves_purity(&self) -> bool {
        true
    }

    pub fn validate(&self, spec: &LatticeSpec) -> Result<usize> {
        spec.index(self.target())
    }
}

impl fmt::Display for InterventionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name(), self.target())
    }
}

pub fn apply_intervention(rho: &DensityMatrix, kind: InterventionKind) -> Result<DensityMatrix> {
    let spec = *rho.spec();
    let target = kind.validate(&spec)?;
    // complex weights keep the map linear on non-Hermitian operators
    let weight = match kind {
        InterventionKind::Reset(_) => rho.matrix().trace(),
        InterventionKind::Projection(_) => rho.matrix()[(target, target)],
    };
    let n = spec.n_sites();
    let mut data = DMatrix::zeros(n, n);
    data[(target, target)] = weight;
    DensityMatrix::from_matrix(spec, data)
}

/// `(mn|e^{-iLt}|m'n') = ⟨m|e^{-iHt}|m'⟩ ⟨n'|e^{iHt}|n⟩`, by site labels.
pub fn free_superop_element(m: i64, n: i64, m_prime: i64, n_prime: i64, spec: &LatticeSpec, t: f64) -> Result<C64> {
    let u = build_propagator(spec, t)?;
    let left = u.element(m, m_prime)?;
    // ⟨n'|e^{iHt}|n⟩ = conj(⟨n|e^{-iHt}|n'⟩)
    let right = u.element(n, n_prime)?.conj();
    Ok(left * right)
}

type Action = dyn Fn(&DensityMatrix) -> Result<DensityMatrix> + Send + Sync;

/// A superoperator, either materialized as an `N²×N²` matrix or held as its
/// action on density matrices.
#[derive(Clone)]
pub enum SuperMatrix {
    Dense { spec: LatticeSpec, matrix: DMatrix<C64> },
    Action { spec: LatticeSpec, action: Arc<Action> },
}

impl fmt::Debug for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SuperMatrix::Dense { spec, .. } => write!(f, "SuperMatrix::Dense(N={})", spec.n_sites()),
            SuperMatrix::Action { spec, .. } => write!(f, "SuperMatrix::Action(N={})", spec.n_sites()),
        }
    }
}

impl SuperMatrix {
    pub fn spec(&self) -> &LatticeSpec {
        match self {
            SuperMatrix::Dense { spec, .. } | SuperMatrix::Action { spec, .. } => spec,
        }
    }

    pub fn dense(&self) -> Option<&DMatrix<C64>> {
        match self {
            SuperMatrix::Dense { matrix, .. } => Some(matrix),
            SuperMatrix::Action { .. } => None,
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.spec().n_sites() != self.spec().n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.spec().n_sites(),
                got: rho.dim(),
            });
        }
        match self {
            SuperMatrix::Dense { spec, matrix } => {
                let x = DVector::from_vec(rho.flatten());
                let y = matrix * x;
                DensityMatrix::unflatten(*spec, y.as_slice())
            }
            SuperMatrix::Action { action, .. } => action(rho),
        }
    }
}

/// Matrix of an intervention in Liouville space. Materialized for
/// `N <= DENSE_LIMIT`, action-only beyond.
pub fn build_intervention_matrix(kind: InterventionKind, spec: &LatticeSpec) -> Result<SuperMatrix> {
    let target = kind.validate(spec)?;
    let n = spec.n_sites();
    if n > DENSE_LIMIT {
        return Ok(SuperMatrix::Action {
            spec: *spec,
            action: Arc::new(move |rho: &DensityMatrix| apply_intervention(rho, kind)),
        });
    }
    let idx = LiouvilleIndex::new(spec);
    let mut matrix = DMatrix::zeros(n * n, n * n);
    let one = C64::new(1.0, 0.0);
    let row = idx.flatten(target, target);
    match kind {
        // (n1 n1'|T|n2 n2') = δ_{n1 n1'} δ_{n2 n2'} δ_{n1 N}
        InterventionKind::Reset(_) => {
            for k in 0..n {
                matrix[(row, idx.flatten(k, k))] = one;
            }
        }
        // (n1 n1'|T|n2 n2') = δ_{n1 N} δ_{n1' N} δ_{n2 N} δ_{n2' N}
        InterventionKind::Projection(_) => {
            matrix[(row, row)] = one;
        }
    }
    Ok(SuperMatrix::Dense { spec: *spec, matrix })
}

/// Dense matrix of the free evolution `e^{-iLt}`.
pub fn free_evolution_matrix(spec: &LatticeSpec, t: f64) -> Result<SuperMatrix> {
    let n = spec.n_sites();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let u = build_propagator(spec, t)?;
    let idx = LiouvilleIndex::new(spec);
    let matrix = DMatrix::from_fn(n * n, n * n, |r, c| {
        let (m, nn) = idx.unflatten(r);
        let (mp, np) = idx.unflatten(c);
        u.at(m, mp) * u.at(nn, np).conj()
    });
    Ok(SuperMatrix::Dense { spec: *spec, matrix })
}
