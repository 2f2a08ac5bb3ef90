use crate::error::Result;
use crate::models::LindbladModel;
use crate::models::terms::total_z;
use crate::operator::{
    adjoint_superop, project_to_sector, sector_partition, CsrMatrix, SectorPartition, Space, SparseOperator,
    SparseSuperOperator,
};
use crate::{CMatrix, C64};

/// Hamiltonian and jumps of a model, optionally restricted to one magnetization sector.
#[derive(Clone, Debug)]
pub struct WorkingModel {
    pub hamiltonian: SparseOperator,
    pub jumps: Vec<(f64, SparseOperator)>,
    sector: Option<(SectorPartition, i32)>,
}

impl WorkingModel {
    /// Restriction to sector `M` requires every term to conserve magnetization.
    pub fn new(model: &LindbladModel, sector: Option<i32>) -> Result<Self> {
        let h = model.hamiltonian()?;
        let jumps = model.jumps();
        match sector {
            None => Ok(Self {
                hamiltonian: h,
                jumps: jumps.into_iter().map(|(g, l)| (g, l.clone())).collect(),
                sector: None,
            }),
            Some(m) => {
                let partition = sector_partition(&model.spec());
                let hamiltonian = project_to_sector(&h, &partition, m)?;
                let jumps = jumps
                    .into_iter()
                    .map(|(g, l)| Ok((g, project_to_sector(l, &partition, m)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self {
                    hamiltonian,
                    jumps,
                    sector: Some((partition, m)),
                })
            }
        }
    }

    /// Smallest working space containing `psi`: its magnetization sector when
    /// the model conserves magnetization, the full chain otherwise.
    pub fn for_state(model: &LindbladModel, psi: &crate::CVector) -> Result<Self> {
        Self::new(model, conserved_sector(model, psi)?)
    }

    pub fn space(&self) -> Space {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn sector(&self) -> Option<(&SectorPartition, i32)> {
        self.sector.as_ref().map(|(p, m)| (p, *m))
    }

    /// The working-space block of a full-chain operator.
    pub fn restrict(&self, op: &SparseOperator) -> Result<SparseOperator> {
        match &self.sector {
            None => Ok(op.clone()),
            Some((p, m)) => p.diagonal_block(op, *m),
        }
    }

    pub fn restrict_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        match &self.sector {
            None => Ok(m.clone()),
            Some((p, s)) => p.restrict_matrix(m, *s),
        }
    }

    pub fn restrict_vector(&self, psi: &crate::CVector) -> Result<crate::CVector> {
        match &self.sector {
            None => Ok(psi.clone()),
            Some((p, s)) => p.restrict_vector(psi, *s),
        }
    }

    /// `L(X) = −i[H, X] − ½ Σ_j γ_j [l_j, [l_j, X]]` on a dense matrix.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.hamiltonian.commutator_dense(x) * C64::new(0.0, -1.0);
        for (g, l) in &self.jumps {
            let c = l.commutator_dense(x);
            out -= l.commutator_dense(&c) * C64::new(0.5 * g, 0.0);
        }
        out
    }

    /// Adjoint generator `L†(X) = i[H, X] − ½ Σ_j γ_j [l_j, [l_j, X]]`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        let mut out = self.hamiltonian.commutator_dense(x) * C64::new(0.0, 1.0);
        for (g, l) in &self.jumps {
            let c = l.commutator_dense(x);
            out -= l.commutator_dense(&c) * C64::new(0.5 * g, 0.0);
        }
        out
    }

    pub fn superoperator(&self) -> Result<SparseSuperOperator> {
        let space = self.space();
        let mut terms = vec![(
            C64::new(0.0, -1.0),
            SparseSuperOperator::left(&self.hamiltonian),
        )];
        terms.push((C64::new(0.0, 1.0), SparseSuperOperator::right(&self.hamiltonian)));
        for (g, l) in &self.jumps {
            let l2 = l.matmul(l)?;
            let half = C64::new(-0.5 * g, 0.0);
            terms.push((half, SparseSuperOperator::left(&l2)));
            terms.push((half, SparseSuperOperator::right(&l2)));
            terms.push((C64::new(*g, 0.0), SparseSuperOperator::sandwich(l, l)?));
        }
        let refs: Vec<(C64, &SparseSuperOperator)> = terms.iter().map(|(c, s)| (*c, s)).collect();
        Ok(SparseSuperOperator::linear_combination(space, &refs))
    }
}

/// Vectorized Liouvillian of the full chain.
pub fn liouvillian(model: &LindbladModel) -> Result<SparseSuperOperator> {
    WorkingModel::new(model, None)?.superoperator()
}

/// Vectorized Liouvillian restricted to operators `|a⟩⟨b|` with `a`, `b` in sector `M`.
pub fn sector_liouvillian(model: &LindbladModel, magnetization: i32) -> Result<SparseSuperOperator> {
    WorkingModel::new(model, Some(magnetization))?.superoperator()
}

/// Frobenius norm of `[L, ad_{M}]` with `M` the total magnetization; zero when the
/// Liouvillian preserves every block `|a⟩⟨b|` of fixed magnetizations.
pub fn magnetization_commutator(model: &LindbladModel) -> Result<f64> {
    let l = liouvillian(model)?;
    let ad = adjoint_superop(&total_z(&model.spec())?);
    let one = C64::new(1.0, 0.0);
    let lhs = l.matmul(&ad);
    let rhs = ad.matmul(&l);
    Ok(CsrMatrix::linear_combination(l.dim(), &[(one, lhs.matrix()), (-one, rhs.matrix())]).frobenius_norm())
}

/// Magnetization sector of `psi` if every Hamiltonian term and jump conserves magnetization.
pub fn conserved_sector(model: &LindbladModel, psi: &crate::CVector) -> Result<Option<i32>> {
    let partition = sector_partition(&model.spec());
    let conserving = partition.conserves(&model.hamiltonian()?)
        && model.jumps().iter().all(|(_, l)| partition.conserves(l));
    Ok(if conserving { partition.sector_of(psi) } else { None })
}
