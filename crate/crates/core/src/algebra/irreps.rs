use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bond::BondAlgebra;
use super::commutant::{cluster_eigenvalues, CommutantBasis};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, polar_unitary};
use crate::operator::{HilbertSpec, SparseOperator};
use crate::{CMatrix, C64};

const MAX_RETRIES: usize = 5;
const CLUSTER_TOL: f64 = 1e-8;
const PURITY_TOL: f64 = 1e-8;
const CONNECT_TOL: f64 = 1e-8;

/// One irrep `λ`: `d_λ` aligned copies of a `D_λ`-dimensional invariant subspace.
#[derive(Clone, Debug)]
pub struct IrrepBlock {
    /// Isometries `V_m` (D × D_λ), with `V_m† X V_m'` identical for every `X` in the algebra.
    copies: Vec<CMatrix>,
}

impl IrrepBlock {
    /// `D_λ`, the dimension of each Krylov subspace.
    pub fn irrep_dim(&self) -> usize {
        self.copies[0].ncols()
    }

    /// `d_λ`, the number of copies.
    pub fn multiplicity(&self) -> usize {
        self.copies.len()
    }

    /// Isometry onto copy `m` (0-based).
    pub fn copy(&self, m: usize) -> &CMatrix {
        &self.copies[m]
    }

    /// Intertwiner `Π_{m,m'} = V_m V_{m'}†` (0-based); `m = m'` gives the Krylov projector.
    pub fn intertwiner(&self, m: usize, m2: usize) -> CMatrix {
        &self.copies[m] * self.copies[m2].adjoint()
    }

    pub fn projector(&self) -> CMatrix {
        let d = self.copies[0].nrows();
        self.copies
            .iter()
            .fold(CMatrix::zeros(d, d), |acc, v| acc + v * v.adjoint())
    }
}

#[derive(Clone, Debug)]
pub struct IrrepDecomposition {
    spec: HilbertSpec,
    blocks: Vec<IrrepBlock>,
}

impl IrrepDecomposition {
    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn blocks(&self) -> &[IrrepBlock] {
        &self.blocks
    }

    /// `Σ_λ D_λ d_λ`.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.irrep_dim() * b.multiplicity()).sum()
    }

    /// `Σ_λ d_λ²`.
    pub fn commutant_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity().pow(2)).sum()
    }

    /// Number of Krylov subspaces, `Σ_λ d_λ`.
    pub fn krylov_count(&self) -> usize {
        self.blocks.iter().map(IrrepBlock::multiplicity).sum()
    }

    /// `(λ, D_λ, d_λ)` rows.
    pub fn table(&self) -> Vec<(usize, usize, usize)> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(k, b)| (k, b.irrep_dim(), b.multiplicity()))
            .collect()
    }

    pub fn block(&self, label: usize) -> Result<&IrrepBlock> {
        self.blocks
            .get(label)
            .ok_or(Error::InvalidBlock { block: label, copy: 0 })
    }

    /// Every intertwiner `Π^λ_{m,m'}`, in block order then row-major copy order.
    pub fn intertwiners(&self) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for m in 0..b.multiplicity() {
                for m2 in 0..b.multiplicity() {
                    out.push(b.intertwiner(m, m2));
                }
            }
        }
        out
    }
}

fn random_element(basis: &[CMatrix], rng: &mut ChaCha8Rng) -> CMatrix {
    let d = basis[0].nrows();
    basis.iter().fold(CMatrix::zeros(d, d), |acc, q| {
        acc + q * C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn smallest_index(v: &CMatrix) -> usize {
    (0..v.nrows())
        .find(|&i| v.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-10)
        .unwrap_or(v.nrows())
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

fn try_decompose(basis: &[CMatrix], rng: &mut ChaCha8Rng) -> Option<Vec<IrrepBlock>> {
    let x = random_element(basis, rng);
    let h = &x + x.adjoint();
    let (values, vectors) = hermitian_eigen(&h);
    let spaces: Vec<CMatrix> = cluster_eigenvalues(&values, CLUSTER_TOL)
        .into_iter()
        .map(|r| vectors.columns(r.start, r.len()).into_owned())
        .collect();

    // each eigenspace must carry a single copy: the commutant acts on it as scalars
    for v in &spaces {
        let m = v.ncols();
        for q in basis {
            let b = v.adjoint() * q * v;
            let scalar = b.trace() / C64::new(m as f64, 0.0);
            let defect = (b - CMatrix::identity(m, m) * scalar).norm();
            if defect > PURITY_TOL {
                return None;
            }
        }
    }

    let n = spaces.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if find(&mut parent, i) == find(&mut parent, j) {
                continue;
            }
            let connected = basis
                .iter()
                .any(|q| (spaces[i].adjoint() * q * &spaces[j]).norm() > CONNECT_TOL);
            if connected {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&x| x == r) {
            Some(g) => groups[g].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }

    let y = random_element(basis, rng);
    let mut blocks = Vec::with_capacity(groups.len());
    for group in groups {
        let mut members: Vec<&CMatrix> = group.iter().map(|&i| &spaces[i]).collect();
        let dim = members[0].ncols();
        if members.iter().any(|v| v.ncols() != dim) {
            return None;
        }
        members.sort_by_key(|v| smallest_index(v));
        let first = members[0].clone();
        let mut copies = vec![first.clone()];
        for v in &members[1..] {
            let t = v.adjoint() * &y * &first;
            if t.norm() < CONNECT_TOL {
                return None;
            }
            copies.push(*v * polar_unitary(&t));
        }
        blocks.push(IrrepBlock { copies });
    }
    blocks.sort_by_key(|b| b.copies.iter().map(smallest_index).min().unwrap_or(usize::MAX));
    Some(blocks)
}

/// Simultaneous block diagonalization of the commutant into irreps of the algebra.
pub fn irrep_decomposition(
    _algebra: &BondAlgebra,
    commutant: &CommutantBasis,
    seed: u64,
) -> Result<IrrepDecomposition> {
    let basis = commutant.dense();
    let spec = commutant.spec();
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty commutant basis".into()));
    }
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
        if let Some(blocks) = try_decompose(&basis, &mut rng) {
            return Ok(IrrepDecomposition { spec, blocks });
        }
    }
    Err(Error::DegenerateCommutantElement(MAX_RETRIES + 1))
}

/// A unitary in the commutant that multiplies Krylov copy `n` of block `λ` by `e^{iθ}`.
#[derive(Clone, Debug)]
pub struct StrongSymmetry {
    pub unitary: SparseOperator,
    pub block: usize,
    /// 1-based copy index.
    pub copy: usize,
    pub theta: f64,
}

/// `S = 1 + (e^{iθ} − 1) Π^λ_{n,n}` with 1-based `n`.
pub fn strong_symmetry(decomp: &IrrepDecomposition, block: usize, copy: usize, theta: f64) -> Result<StrongSymmetry> {
    let b = decomp
        .blocks
        .get(block)
        .ok_or(Error::InvalidBlock { block, copy })?;
    if copy == 0 || copy > b.multiplicity() {
        return Err(Error::InvalidBlock { block, copy });
    }
    if theta == 0.0 {
        return Err(Error::InvalidArgument("strong-symmetry phase must be nonzero".into()));
    }
    let d = decomp.spec.dim();
    let phase = C64::from_polar(1.0, theta) - C64::new(1.0, 0.0);
    let s = CMatrix::identity(d, d) + b.intertwiner(copy - 1, copy - 1) * phase;
    Ok(StrongSymmetry {
        unitary: SparseOperator::from_dense(decomp.spec, &s)?,
        block,
        copy,
        theta,
    })
}

/// Checks hermiticity, unit trace and positivity of a density matrix.
pub fn validate_density_matrix(rho: &CMatrix, dim: usize) -> Result<()> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.nrows(),
        });
    }
    let herm = (rho - rho.adjoint()).norm();
    if herm > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("not hermitian ({herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
    }
    let (vals, _) = hermitian_eigen(rho);
    if let Some(&min) = vals.first() {
        if min < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
    }
    Ok(())
}

/// `ρ_ss = Σ_λ Σ_{m,m'} Tr[Π^λ_{m',m} ρ0] Π^λ_{m,m'} / D_λ`.
pub fn stationary_state(decomp: &IrrepDecomposition, rho0: &CMatrix) -> Result<CMatrix> {
    let d = decomp.spec.dim();
    validate_density_matrix(rho0, d)?;
    let mut out = CMatrix::zeros(d, d);
    for b in &decomp.blocks {
        let dl = C64::new(b.irrep_dim() as f64, 0.0);
        for m in 0..b.multiplicity() {
            for m2 in 0..b.multiplicity() {
                // Tr[V_m' V_m† ρ] = Tr[V_m† ρ V_m']
                let w = (b.copies[m].adjoint() * rho0 * &b.copies[m2]).trace();
                out += b.intertwiner(m, m2) * (w / dl);
            }
        }
    }
    Ok(out)
}
