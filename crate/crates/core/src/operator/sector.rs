use std::collections::BTreeMap;

use super::csr::CsrMatrix;
use super::space::{HilbertSpec, Space};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

const SECTOR_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    pub magnetization: i32,
    pub indices: Vec<usize>,
}

impl Sector {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

/// Computational basis grouped by total magnetization (σ^z units for
/// spin-1/2, S^z units for spin-1), sorted by increasing `M`.
#[derive(Clone, Debug)]
pub struct SectorPartition {
    spec: HilbertSpec,
    sectors: Vec<Sector>,
    // basis index -> (sector slot, position within sector)
    lookup: Vec<(usize, usize)>,
}

pub fn sector_partition(spec: &HilbertSpec) -> SectorPartition {
    let mut groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for i in 0..spec.dim() {
        groups.entry(spec.magnetization(i)).or_default().push(i);
    }
    let sectors: Vec<Sector> = groups
        .into_iter()
        .map(|(magnetization, indices)| Sector {
            magnetization,
            indices,
        })
        .collect();
    let mut lookup = vec![(0, 0); spec.dim()];
    for (slot, s) in sectors.iter().enumerate() {
        for (pos, &i) in s.indices.iter().enumerate() {
            lookup[i] = (slot, pos);
        }
    }
    SectorPartition {
        spec: *spec,
        sectors,
        lookup,
    }
}

impl SectorPartition {
    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, magnetization: i32) -> Result<&Sector> {
        self.sectors
            .iter()
            .find(|s| s.magnetization == magnetization)
            .ok_or(Error::UnknownSector(magnetization))
    }

    pub fn sector_space(&self, magnetization: i32) -> Result<Space> {
        let s = self.sector(magnetization)?;
        Ok(Space::Sector {
            chain: self.spec,
            magnetization,
            dim: s.dim(),
        })
    }

    /// Largest modulus of a matrix element connecting different sectors.
    pub fn leakage(&self, a: &SparseOperator) -> f64 {
        a.matrix()
            .triplets()
            .filter(|&(r, c, _)| self.lookup[r].0 != self.lookup[c].0)
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn conserves(&self, a: &SparseOperator) -> bool {
        self.leakage(a) <= SECTOR_TOL
    }

    /// Restricts a state vector to a sector; fails if it has weight outside it.
    pub fn restrict_vector(&self, psi: &CVector, magnetization: i32) -> Result<CVector> {
        let s = self.sector(magnetization)?;
        let inside: f64 = s.indices.iter().map(|&i| psi[i].norm_sqr()).sum();
        let outside = (psi.norm_squared() - inside).max(0.0).sqrt();
        if outside > SECTOR_TOL.sqrt() {
            return Err(Error::SectorViolation(outside));
        }
        Ok(CVector::from_iterator(s.dim(), s.indices.iter().map(|&i| psi[i])))
    }

    pub fn expand_vector(&self, v: &CVector, magnetization: i32) -> Result<CVector> {
        let s = self.sector(magnetization)?;
        let mut out = CVector::zeros(self.spec.dim());
        for (k, &i) in s.indices.iter().enumerate() {
            out[i] = v[k];
        }
        Ok(out)
    }

    /// The `(M, M)` block of an arbitrary operator, as an operator on the sector.
    pub fn diagonal_block(&self, a: &SparseOperator, magnetization: i32) -> Result<SparseOperator> {
        if a.space() != Space::Chain(self.spec) {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dim(),
                found: a.dim(),
            });
        }
        let space = self.sector_space(magnetization)?;
        let slot = self.lookup[self.sector(magnetization)?.indices[0]].0;
        let triplets: Vec<(usize, usize, C64)> = a
            .matrix()
            .triplets()
            .filter(|&(r, c, _)| self.lookup[r].0 == slot && self.lookup[c].0 == slot)
            .map(|(r, c, v)| (self.lookup[r].1, self.lookup[c].1, v))
            .collect();
        SparseOperator::new(space, CsrMatrix::from_triplets(space.dim(), triplets))
    }

    /// Sector containing all the weight of `psi`, if there is one.
    pub fn sector_of(&self, psi: &CVector) -> Option<i32> {
        let mut found = None;
        for (i, z) in psi.iter().enumerate() {
            if z.norm() > SECTOR_TOL {
                let m = self.spec.magnetization(i);
                match found {
                    None => found = Some(m),
                    Some(f) if f != m => return None,
                    _ => {}
                }
            }
        }
        found
    }

    pub fn restrict_matrix(&self, m: &CMatrix, magnetization: i32) -> Result<CMatrix> {
        let s = self.sector(magnetization)?;
        Ok(CMatrix::from_fn(s.dim(), s.dim(), |r, c| {
            m[(s.indices[r], s.indices[c])]
        }))
    }

    pub fn expand_matrix(&self, m: &CMatrix, magnetization: i32) -> Result<CMatrix> {
        let s = self.sector(magnetization)?;
        let mut out = CMatrix::zeros(self.spec.dim(), self.spec.dim());
        for (r, &i) in s.indices.iter().enumerate() {
            for (c, &j) in s.indices.iter().enumerate() {
                out[(i, j)] = m[(r, c)];
            }
        }
        Ok(out)
    }
}

/// Restriction of a sector-conserving operator to one magnetization sector.
pub fn project_to_sector(
    a: &SparseOperator,
    partition: &SectorPartition,
    magnetization: i32,
) -> Result<SparseOperator> {
    if a.space() != Space::Chain(partition.spec) {
        return Err(Error::DimensionMismatch {
            expected: partition.spec.dim(),
            found: a.dim(),
        });
    }
    let leak = partition.leakage(a);
    if leak > SECTOR_TOL {
        return Err(Error::SectorViolation(leak));
    }
    partition.diagonal_block(a, magnetization)
}

/// Number of spin-1 configurations with zero total S^z: `Σ_k C(L,2k)·C(2k,k)`.
pub fn spin_one_zero_sector_dim(len: usize) -> u64 {
    (0..=len / 2)
        .map(|k| binomial(len as u64, 2 * k as u64) * binomial(2 * k as u64, k as u64))
        .sum()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{embed, local_operator, Boundary, LocalKind};

    #[test]
    fn two_site_spin_half_sectors() {
        let spec = HilbertSpec::spin_half(2, Boundary::Open).unwrap();
        let p = sector_partition(&spec);
        let got: Vec<(i32, Vec<usize>)> = p
            .sectors()
            .iter()
            .map(|s| (s.magnetization, s.indices.clone()))
            .collect();
        // basis order ↑↑, ↑↓, ↓↑, ↓↓
        assert_eq!(got, vec![(-2, vec![3]), (0, vec![1, 2]), (2, vec![0])]);
    }

    #[test]
    fn spin_one_zero_sector_matches_enumeration() {
        for len in 2..=8 {
            let spec = HilbertSpec::spin_one(len, Boundary::Open).unwrap();
            let enumerated = (0..spec.dim()).filter(|&i| spec.magnetization(i) == 0).count();
            assert_eq!(enumerated as u64, spin_one_zero_sector_dim(len));
            assert_eq!(sector_partition(&spec).sector(0).unwrap().dim() as u64, spin_one_zero_sector_dim(len));
        }
        assert_eq!(spin_one_zero_sector_dim(4), 19);
    }

    #[test]
    fn sectors_partition_the_basis() {
        for d in [2, 3] {
            for len in 2..=8 {
                let spec = HilbertSpec::new(len, d, Boundary::Open).unwrap();
                let p = sector_partition(&spec);
                let total: usize = p.sectors().iter().map(Sector::dim).sum();
                assert_eq!(total, spec.dim());
                let mut all: Vec<usize> = p.sectors().iter().flat_map(|s| s.indices.clone()).collect();
                all.sort_unstable();
                assert_eq!(all, (0..spec.dim()).collect::<Vec<_>>());
                if d == 3 {
                    assert_eq!(p.sectors().first().unwrap().magnetization, -(len as i32));
                    assert_eq!(p.sectors().len(), 2 * len + 1);
                }
            }
        }
    }

    #[test]
    fn projection_requires_block_diagonal_operator() {
        let spec = HilbertSpec::spin_half(3, Boundary::Open).unwrap();
        let p = sector_partition(&spec);
        let x = embed(&[(1, local_operator(LocalKind::X, 2).unwrap())], &spec).unwrap();
        assert!(matches!(project_to_sector(&x, &p, 1), Err(Error::SectorViolation(_))));

        let flip = embed(
            &[
                (1, local_operator(LocalKind::Plus, 2).unwrap()),
                (2, local_operator(LocalKind::Minus, 2).unwrap()),
            ],
            &spec,
        )
        .unwrap();
        let restricted = project_to_sector(&flip, &p, 1).unwrap();
        assert_eq!(restricted.dim(), 3);
        assert_eq!(restricted.space().sector(), Some(1));
        assert_eq!(restricted.matrix().nnz(), 1);
        assert!(matches!(project_to_sector(&flip, &p, 2), Err(Error::UnknownSector(2))));
    }
}
