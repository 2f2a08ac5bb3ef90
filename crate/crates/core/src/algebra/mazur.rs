use super::commutant::CommutantBasis;
use crate::error::{Error, Result};
use crate::operator::SparseOperator;
use crate::C64;

/// `Tr[A† B]` for sparse operators.
pub fn hs_inner(a: &SparseOperator, b: &SparseOperator) -> C64 {
    a.matrix()
        .triplets()
        .map(|(r, c, v)| v.conj() * b.matrix().get(r, c))
        .sum()
}

/// `(1/D) Σ_α |Tr[Q_α† O]|²` over the orthonormal commutant basis.
pub fn mazur_bound(commutant: &CommutantBasis, o: &SparseOperator) -> Result<f64> {
    if !o.is_hermitian() {
        return Err(Error::InvalidArgument("Mazur bound needs a hermitian observable".into()));
    }
    if o.dim() != commutant.spec().dim() {
        return Err(Error::DimensionMismatch {
            expected: commutant.spec().dim(),
            found: o.dim(),
        });
    }
    let d = o.dim() as f64;
    Ok(commutant
        .operators()
        .iter()
        .map(|q| hs_inner(q, o).norm_sqr())
        .sum::<f64>()
        / d)
}
