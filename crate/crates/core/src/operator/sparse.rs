use std::collections::HashSet;

use super::csr::CsrMatrix;
use super::space::{HilbertSpec, Space};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// Complex sparse operator on a chain (or one of its sectors).
#[derive(Clone, Debug)]
pub struct SparseOperator {
    space: Space,
    matrix: CsrMatrix,
    hermitian: bool,
}

impl SparseOperator {
    pub fn new(space: impl Into<Space>, matrix: CsrMatrix) -> Result<Self> {
        let space = space.into();
        if matrix.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.dim(),
            });
        }
        let hermitian = matrix.hermiticity_defect() < HERMITIAN_TOL;
        Ok(Self {
            space,
            matrix,
            hermitian,
        })
    }

    pub fn from_dense(space: impl Into<Space>, m: &CMatrix) -> Result<Self> {
        Self::new(space, CsrMatrix::from_dense(m))
    }

    pub fn identity(space: impl Into<Space>) -> Self {
        let space = space.into();
        Self {
            matrix: CsrMatrix::identity(space.dim()),
            space,
            hermitian: true,
        }
    }

    pub fn zeros(space: impl Into<Space>) -> Self {
        let space = space.into();
        Self {
            matrix: CsrMatrix::zeros(space.dim()),
            space,
            hermitian: true,
        }
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(space: impl Into<Space>, psi: &CVector) -> Result<Self> {
        Self::from_dense(space, &(psi * psi.adjoint()))
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn spec(&self) -> HilbertSpec {
        self.space.chain()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        CVector::from_vec(self.matrix.matvec(v.as_slice()))
    }

    fn check_same_space(&self, other: &SparseOperator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.check_same_space(other)?;
        SparseOperator::new(self.space, self.matrix.matmul(&other.matrix))
    }

    pub fn adjoint(&self) -> SparseOperator {
        SparseOperator {
            space: self.space,
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn scaled(&self, s: C64) -> SparseOperator {
        let matrix = self.matrix.scaled(s);
        let hermitian = matrix.hermiticity_defect() < HERMITIAN_TOL;
        SparseOperator {
            space: self.space,
            matrix,
            hermitian,
        }
    }

    /// `Σ_k c_k A_k` over operators on a common space.
    pub fn linear_combination(
        space: impl Into<Space>,
        terms: &[(C64, &SparseOperator)],
    ) -> Result<SparseOperator> {
        let space = space.into();
        for (_, op) in terms {
            if op.space != space {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: op.dim(),
                });
            }
        }
        let mats: Vec<(C64, &CsrMatrix)> = terms.iter().map(|(c, op)| (*c, &op.matrix)).collect();
        SparseOperator::new(space, CsrMatrix::linear_combination(space.dim(), &mats))
    }

    pub fn add(&self, other: &SparseOperator) -> Result<SparseOperator> {
        let one = C64::new(1.0, 0.0);
        SparseOperator::linear_combination(self.space, &[(one, self), (one, other)])
    }

    pub fn sub(&self, other: &SparseOperator) -> Result<SparseOperator> {
        let one = C64::new(1.0, 0.0);
        SparseOperator::linear_combination(self.space, &[(one, self), (-one, other)])
    }

    /// `[self, other]` as a sparse operator.
    pub fn commutator(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix.is_diagonal()
    }

    /// `self · m` for dense `m`.
    pub fn mul_dense(&self, m: &CMatrix) -> CMatrix {
        self.matrix.mul_dense(m)
    }

    /// `m · self` for dense `m`.
    pub fn dense_mul(&self, m: &CMatrix) -> CMatrix {
        self.matrix.dense_mul(m)
    }

    /// `[self, m]` for dense `m`.
    pub fn commutator_dense(&self, m: &CMatrix) -> CMatrix {
        self.mul_dense(m) - self.dense_mul(m)
    }

    /// `Tr[self · m]`.
    pub fn trace_with(&self, m: &CMatrix) -> C64 {
        self.matrix
            .triplets()
            .map(|(r, c, v)| v * m[(c, r)])
            .sum()
    }

    pub fn expectation(&self, psi: &CVector) -> C64 {
        psi.dotc(&self.apply(psi))
    }
}

/// Kronecker embedding of single-site matrices into the chain, identity elsewhere.
///
/// Sites are 1-based; under periodic boundaries labels `L+1..=2L` wrap to `1..=L`.
pub fn embed(local_ops: &[(usize, CMatrix)], spec: &HilbertSpec) -> Result<SparseOperator> {
    let d = spec.local_dim();
    let mut positions = Vec::with_capacity(local_ops.len());
    let mut seen = HashSet::new();
    for (site, m) in local_ops {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.nrows(),
            });
        }
        let pos = spec.site_position(*site)?;
        if !seen.insert(pos) {
            return Err(Error::DuplicateSite(*site));
        }
        positions.push(pos);
    }

    // nonzero entries of each local matrix, grouped by column
    let columns: Vec<Vec<Vec<(usize, C64)>>> = local_ops
        .iter()
        .map(|(_, m)| {
            (0..d)
                .map(|col| {
                    (0..d)
                        .filter(|&r| m[(r, col)].norm() > 0.0)
                        .map(|r| (r, m[(r, col)]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let strides: Vec<usize> = positions
        .iter()
        .map(|&p| d.pow((spec.len() - 1 - p) as u32))
        .collect();

    let dim = spec.dim();
    let mut triplets = Vec::new();
    let mut partial: Vec<(usize, C64)> = Vec::new();
    let mut next: Vec<(usize, C64)> = Vec::new();
    for col in 0..dim {
        partial.clear();
        partial.push((col, C64::new(1.0, 0.0)));
        for (k, &pos) in positions.iter().enumerate() {
            let digit = spec.digit(col, pos);
            next.clear();
            for &(row, amp) in &partial {
                for &(r, v) in &columns[k][digit] {
                    let new_row = row - digit * strides[k] + r * strides[k];
                    next.push((new_row, amp * v));
                }
            }
            std::mem::swap(&mut partial, &mut next);
            if partial.is_empty() {
                break;
            }
        }
        triplets.extend(partial.iter().map(|&(r, v)| (r, col, v)));
    }
    SparseOperator::new(*spec, CsrMatrix::from_triplets(dim, triplets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{local_operator, Boundary, LocalKind};

    fn op(kind: LocalKind, d: usize) -> CMatrix {
        local_operator(kind, d).unwrap()
    }

    #[test]
    fn sigma_z_on_middle_site() {
        let spec = HilbertSpec::spin_half(3, Boundary::Open).unwrap();
        let z2 = embed(&[(2, op(LocalKind::Z, 2))], &spec).unwrap();
        assert_eq!(z2.matrix().nnz(), 8);
        assert!(z2.is_diagonal());
        for i in 0..8 {
            let expected = if spec.digit(i, 1) == 0 { 1.0 } else { -1.0 };
            assert_eq!(z2.matrix().get(i, i), C64::new(expected, 0.0));
        }
    }

    #[test]
    fn two_site_exchange_by_hand() {
        let spec = HilbertSpec::spin_half(2, Boundary::Open).unwrap();
        let xx = embed(&[(1, op(LocalKind::X, 2)), (2, op(LocalKind::X, 2))], &spec).unwrap();
        let yy = embed(&[(1, op(LocalKind::Y, 2)), (2, op(LocalKind::Y, 2))], &spec).unwrap();
        let exchange = xx.add(&yy).unwrap().to_dense();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 2)] = C64::new(2.0, 0.0);
        expected[(2, 1)] = C64::new(2.0, 0.0);
        assert!((exchange - expected).norm() < 1e-14);
    }

    #[test]
    fn wrap_under_open_boundary_fails() {
        let spec = HilbertSpec::spin_half(3, Boundary::Open).unwrap();
        let res = embed(&[(3, op(LocalKind::Plus, 2)), (4, op(LocalKind::Minus, 2))], &spec);
        assert!(matches!(res, Err(Error::WrapUnderOpenBoundary { site: 4 })));
        let pbc = HilbertSpec::spin_half(3, Boundary::Periodic).unwrap();
        let wrapped = embed(&[(3, op(LocalKind::Z, 2)), (4, op(LocalKind::Z, 2))], &pbc).unwrap();
        let direct = embed(&[(3, op(LocalKind::Z, 2)), (1, op(LocalKind::Z, 2))], &pbc).unwrap();
        assert!((wrapped.to_dense() - direct.to_dense()).norm() < 1e-14);
    }

    #[test]
    fn embed_errors() {
        let spec = HilbertSpec::spin_half(3, Boundary::Open).unwrap();
        assert!(matches!(
            embed(&[(4, op(LocalKind::Z, 2))], &spec),
            Err(Error::WrapUnderOpenBoundary { .. })
        ));
        assert!(matches!(
            embed(&[(7, op(LocalKind::Z, 2))], &spec),
            Err(Error::SiteOutOfRange { .. })
        ));
        assert!(matches!(
            embed(&[(1, op(LocalKind::Z, 2)), (1, op(LocalKind::X, 2))], &spec),
            Err(Error::DuplicateSite(1))
        ));
        assert!(embed(&[(1, op(LocalKind::Z, 3))], &spec).is_err());
    }

    #[test]
    fn embedding_matches_dense_kronecker() {
        let spec = HilbertSpec::spin_one(3, Boundary::Open).unwrap();
        let a = op(LocalKind::Plus, 3);
        let b = op(LocalKind::Y, 3);
        let sparse = embed(&[(3, b.clone()), (1, a.clone())], &spec).unwrap();
        let dense = a.kronecker(&CMatrix::identity(3, 3)).kronecker(&b);
        assert!((sparse.to_dense() - dense).norm() < 1e-13);
    }

    #[test]
    fn commuting_single_site_operators_commute_exactly() {
        let spec = HilbertSpec::spin_one(3, Boundary::Open).unwrap();
        let a = embed(&[(1, op(LocalKind::X, 3))], &spec).unwrap();
        let b = embed(&[(2, op(LocalKind::Y, 3))], &spec).unwrap();
        let comm = a.commutator(&b).unwrap();
        assert_eq!(comm.matrix().nnz(), 0);
    }
}
