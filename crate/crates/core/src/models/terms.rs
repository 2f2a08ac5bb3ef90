//! Local terms shared by the catalog models.

use crate::error::Result;
use crate::operator::{embed, local_operator, HilbertSpec, LocalKind, SparseOperator};
use crate::{CMatrix, C64};

fn local(spec: &HilbertSpec, kind: LocalKind) -> Result<CMatrix> {
    local_operator(kind, spec.local_dim())
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn site_operator(spec: &HilbertSpec, kind: LocalKind, site: usize) -> Result<SparseOperator> {
    embed(&[(site, local(spec, kind)?)], spec)
}

/// Product of single-site operators on consecutive sites starting at `site`.
pub fn string_operator(spec: &HilbertSpec, kinds: &[LocalKind], site: usize) -> Result<SparseOperator> {
    let ops = kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| Ok((site + k, local(spec, kind)?)))
        .collect::<Result<Vec<_>>>()?;
    embed(&ops, spec)
}

/// `X_j X_{j+1} + Y_j Y_{j+1}` (Pauli or spin-1 matrices depending on the chain).
pub fn exchange(spec: &HilbertSpec, site: usize) -> Result<SparseOperator> {
    let xx = string_operator(spec, &[LocalKind::X, LocalKind::X], site)?;
    let yy = string_operator(spec, &[LocalKind::Y, LocalKind::Y], site)?;
    xx.add(&yy)
}

/// `σ⁺_j σ⁺_{j+1} σ⁻_{j+2} + h.c.`
pub fn pair_flip(spec: &HilbertSpec, site: usize) -> Result<SparseOperator> {
    let t = string_operator(spec, &[LocalKind::Plus, LocalKind::Plus, LocalKind::Minus], site)?;
    t.add(&t.adjoint())
}

/// `σ^x_j (1 − σ^z_{j+1})`.
pub fn flip_if_down_right(spec: &HilbertSpec, site: usize) -> Result<SparseOperator> {
    let x = string_operator(spec, &[LocalKind::X, LocalKind::Identity], site)?;
    let xz = string_operator(spec, &[LocalKind::X, LocalKind::Z], site)?;
    x.sub(&xz)
}

/// `(1 − σ^z_j) σ^x_{j+1}`.
pub fn flip_if_down_left(spec: &HilbertSpec, site: usize) -> Result<SparseOperator> {
    let x = string_operator(spec, &[LocalKind::Identity, LocalKind::X], site)?;
    let zx = string_operator(spec, &[LocalKind::Z, LocalKind::X], site)?;
    x.sub(&zx)
}

/// `(S^z_j + S^z_{j+1})(1 − S^z_j S^z_{j+1})`.
pub fn tower_bond(spec: &HilbertSpec, site: usize) -> Result<SparseOperator> {
    use LocalKind::{Identity as I, ZSquared as Z2, Z};
    let terms = [
        string_operator(spec, &[Z, I], site)?,
        string_operator(spec, &[I, Z], site)?,
        string_operator(spec, &[Z2, Z], site)?,
        string_operator(spec, &[Z, Z2], site)?,
    ];
    let c = [one(), one(), -one(), -one()];
    let pairs: Vec<(C64, &SparseOperator)> = c.iter().copied().zip(terms.iter()).collect();
    SparseOperator::linear_combination(*spec, &pairs)
}

/// `Σ_j Z_j`.
pub fn total_z(spec: &HilbertSpec) -> Result<SparseOperator> {
    let terms = (1..=spec.len())
        .map(|j| site_operator(spec, LocalKind::Z, j))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(C64, &SparseOperator)> = terms.iter().map(|t| (one(), t)).collect();
    SparseOperator::linear_combination(*spec, &pairs)
}

/// Bimagnon creation `(S⁺)²/2 = |+⟩⟨−|` on a spin-1 site.
pub fn bimagnon_creation(spec: &HilbertSpec) -> Result<CMatrix> {
    let p = local(spec, LocalKind::Plus)?;
    Ok(&p * &p * C64::new(0.5, 0.0))
}

/// `J⁺_k = Σ_j e^{ikj} (S⁺_j)²/2` with 1-based `j`.
pub fn bimagnon_raising(spec: &HilbertSpec, k: f64) -> Result<SparseOperator> {
    let b = bimagnon_creation(spec)?;
    let terms = (1..=spec.len())
        .map(|j| embed(&[(j, b.clone())], spec))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(C64, &SparseOperator)> = terms
        .iter()
        .enumerate()
        .map(|(j, t)| (C64::from_polar(1.0, k * (j + 1) as f64), t))
        .collect();
    SparseOperator::linear_combination(*spec, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Boundary;

    #[test]
    fn exchange_two_sites_hand_kron() {
        let spec = HilbertSpec::spin_half(2, Boundary::Open).unwrap();
        let m = exchange(&spec, 1).unwrap().to_dense();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 2)] = C64::new(2.0, 0.0);
        expected[(2, 1)] = C64::new(2.0, 0.0);
        assert!((m - expected).norm() < 1e-15);
    }

    #[test]
    fn wrapped_bond_needs_periodic_chain() {
        let open = HilbertSpec::spin_half(3, Boundary::Open).unwrap();
        assert!(exchange(&open, 3).is_err());
        let ring = HilbertSpec::spin_half(3, Boundary::Periodic).unwrap();
        assert!(exchange(&ring, 3).is_ok());
    }

    #[test]
    fn bimagnon_is_half_square_of_raising() {
        let spec = HilbertSpec::spin_one(2, Boundary::Open).unwrap();
        let b = bimagnon_creation(&spec).unwrap();
        assert!((b[(0, 2)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((b.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tower_bond_is_diagonal_with_expected_entries() {
        let spec = HilbertSpec::spin_one(2, Boundary::Open).unwrap();
        let t = tower_bond(&spec, 1).unwrap();
        assert!(t.is_diagonal());
        for idx in 0..9 {
            let d = spec.digits(idx);
            let (a, b) = ((1 - d[0] as i32) as f64, (1 - d[1] as i32) as f64);
            let expected = (a + b) * (1.0 - a * b);
            assert!((t.matrix().get(idx, idx).re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn pair_flip_is_hermitian_and_kills_ferromagnets() {
        let spec = HilbertSpec::spin_half(4, Boundary::Open).unwrap();
        let t = pair_flip(&spec, 2).unwrap();
        assert!(t.is_hermitian());
        let m = t.to_dense();
        assert!(m.column(0).norm() < 1e-15);
        assert!(m.column(15).norm() < 1e-15);
    }
}
