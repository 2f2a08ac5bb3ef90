//! Operators acting on vectorized operators.
//!
//! Vectorization is column stacking throughout the crate: `vec(X)[i + j·D] = X[i, j]`,
//! which is exactly nalgebra's column-major storage. Under this convention
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use super::csr::CsrMatrix;
use super::space::Space;
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

#[derive(Clone, Debug)]
pub struct SparseSuperOperator {
    space: Space,
    matrix: CsrMatrix,
}

pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &[C64], dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v)
}

impl SparseSuperOperator {
    pub fn new(space: Space, matrix: CsrMatrix) -> Result<Self> {
        let d = space.dim();
        if matrix.dim() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: matrix.dim(),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self {
            space,
            matrix: CsrMatrix::zeros(d * d),
        }
    }

    /// `X ↦ A X`.
    pub fn left(a: &SparseOperator) -> Self {
        let id = CsrMatrix::identity(a.dim());
        Self {
            space: a.space(),
            matrix: id.kron(a.matrix()),
        }
    }

    /// `X ↦ X B`.
    pub fn right(b: &SparseOperator) -> Self {
        let id = CsrMatrix::identity(b.dim());
        Self {
            space: b.space(),
            matrix: b.matrix().transpose().kron(&id),
        }
    }

    /// `X ↦ A X B`.
    pub fn sandwich(a: &SparseOperator, b: &SparseOperator) -> Result<Self> {
        if a.space() != b.space() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(Self {
            space: a.space(),
            matrix: b.matrix().transpose().kron(a.matrix()),
        })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Dimension of the operator space, `D²`.
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        self.matrix.matvec(v)
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d = self.space.dim();
        unvectorize(&self.matrix.matvec(x.as_slice()), d)
    }

    pub fn linear_combination(space: Space, terms: &[(C64, &SparseSuperOperator)]) -> Self {
        let d = space.dim();
        let mats: Vec<(C64, &CsrMatrix)> = terms.iter().map(|(c, s)| (*c, &s.matrix)).collect();
        Self {
            space,
            matrix: CsrMatrix::linear_combination(d * d, &mats),
        }
    }

    pub fn matmul(&self, other: &SparseSuperOperator) -> SparseSuperOperator {
        Self {
            space: self.space,
            matrix: self.matrix.matmul(&other.matrix),
        }
    }

    pub fn adjoint(&self) -> SparseSuperOperator {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.hermiticity_defect()
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }
}

/// The adjoint action `X ↦ [A, X]`, i.e. `I ⊗ A − Aᵀ ⊗ I` under column stacking.
pub fn adjoint_superop(a: &SparseOperator) -> SparseSuperOperator {
    let one = C64::new(1.0, 0.0);
    SparseSuperOperator::linear_combination(
        a.space(),
        &[
            (one, &SparseSuperOperator::left(a)),
            (-one, &SparseSuperOperator::right(a)),
        ],
    )
}

/// The double commutator `X ↦ [A, [A, X]] = A²X − 2AXA + XA²`.
pub fn double_commutator_superop(a: &SparseOperator) -> Result<SparseSuperOperator> {
    let a2 = a.matmul(a)?;
    let one = C64::new(1.0, 0.0);
    Ok(SparseSuperOperator::linear_combination(
        a.space(),
        &[
            (one, &SparseSuperOperator::left(&a2)),
            (C64::new(-2.0, 0.0), &SparseSuperOperator::sandwich(a, a)?),
            (one, &SparseSuperOperator::right(&a2)),
        ],
    ))
}
