use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bond::BondAlgebra;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::operator::{HilbertSpec, SparseOperator};
use crate::{CMatrix, C64};

pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0x5ca7_1ab0;

// eigenvalues of the random probe closer than this (relative) share an eigenspace
const CLUSTER_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-7;
const MAX_CANDIDATES: usize = 6000;

/// Hilbert–Schmidt orthonormal basis of the commutant.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    spec: HilbertSpec,
    operators: Vec<SparseOperator>,
    kernel_tol: f64,
    gap: f64,
    candidates: usize,
}

impl CommutantBasis {
    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn operators(&self) -> &[SparseOperator] {
        &self.operators
    }

    pub fn dim(&self) -> usize {
        self.operators.len()
    }

    pub fn kernel_tol(&self) -> f64 {
        self.kernel_tol
    }

    /// Smallest eigenvalue of the super-Hamiltonian above the kernel, within the
    /// candidate subspace searched (infinite if the whole candidate space is the kernel).
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Dimension of the operator subspace in which the kernel was searched.
    pub fn candidates(&self) -> usize {
        self.candidates
    }

    pub fn dense(&self) -> Vec<CMatrix> {
        self.operators.iter().map(SparseOperator::to_dense).collect()
    }
}

/// Gram matrix of the restricted super-Hamiltonian over the candidates
/// `E_ij` (in the eigenbasis of the probe), for transformed generators `gs`:
/// `⟨[g,E_ij],[g,E_kl]⟩ = δ_jl (g²)_ik − 2 g_ik g_lj + δ_ik (g²)_lj`.
fn restricted_super_hamiltonian(gs: &[CMatrix], pairs: &[(usize, usize)]) -> CMatrix {
    let n = pairs.len();
    let squares: Vec<CMatrix> = gs.iter().map(|g| g * g).collect();
    let mut out = CMatrix::zeros(n, n);
    for (a, &(i, j)) in pairs.iter().enumerate() {
        for (b, &(k, l)) in pairs.iter().enumerate().skip(a) {
            let mut acc = C64::new(0.0, 0.0);
            for (g, g2) in gs.iter().zip(&squares) {
                if j == l {
                    acc += g2[(i, k)];
                }
                if i == k {
                    acc += g2[(l, j)];
                }
                acc -= g[(i, k)] * g[(l, j)] * 2.0;
            }
            out[(a, b)] = acc;
            out[(b, a)] = acc.conj();
        }
    }
    out
}

/// Groups sorted eigenvalues into clusters of (numerically) equal values.
pub(crate) fn cluster_eigenvalues(values: &[f64], rel_tol: f64) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > rel_tol * scale {
            clusters.push(start..k);
            start = k;
        }
    }
    clusters
}

/// Row-reduces `rows` (each a flattened operator) and orthonormalizes the result,
/// so the basis depends only on the spanned subspace.
fn canonical_basis(mut rows: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    if rows.is_empty() {
        return rows;
    }
    let len = rows[0].len();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let mut rank = 0;
    for col in 0..len {
        if rank == rows.len() {
            break;
        }
        let (best, best_val) = (rank..rows.len())
            .map(|r| (r, rows[r][col].norm()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_val < PIVOT_TOL * scale {
            continue;
        }
        rows.swap(rank, best);
        let pivot = rows[rank][col];
        rows[rank].iter_mut().for_each(|z| *z /= pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == rank {
                continue;
            }
            let f = row[col];
            if f.norm() == 0.0 {
                continue;
            }
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        rank += 1;
    }
    rows.truncate(rank);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(rank);
    for mut row in rows {
        for _ in 0..2 {
            for q in &basis {
                let h: C64 = q.iter().zip(&row).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in row.iter_mut().zip(q) {
                    *x -= h * y;
                }
            }
        }
        let nrm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        row.iter_mut().for_each(|z| *z /= nrm);
        basis.push(row);
    }
    let lead = |r: &Vec<C64>| r.iter().position(|z| z.norm() > 1e-12).unwrap_or(len);
    basis.sort_by_key(lead);
    basis
}

pub fn commutant_basis(algebra: &BondAlgebra, tol: f64) -> Result<CommutantBasis> {
    commutant_basis_seeded(algebra, tol, DEFAULT_SEED)
}

/// Commutant as the kernel of the super-Hamiltonian.
///
/// The search is restricted to operators that are block diagonal in the
/// eigenspaces of a random real combination of the generators: every commutant
/// element commutes with that combination, so the kernel lies in this subspace.
pub fn commutant_basis_seeded(algebra: &BondAlgebra, tol: f64, seed: u64) -> Result<CommutantBasis> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("kernel tolerance must be positive".into()));
    }
    let spec = algebra.spec();
    let d = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe = CMatrix::zeros(d, d);
    for g in algebra.generators() {
        let c = rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        for (r, col, v) in g.op.matrix().triplets() {
            probe[(r, col)] += v * c;
        }
    }
    let (values, vectors) = hermitian_eigen(&probe);
    let clusters = cluster_eigenvalues(&values, CLUSTER_TOL);
    let pairs: Vec<(usize, usize)> = clusters
        .iter()
        .flat_map(|c| c.clone().flat_map(move |i| c.clone().map(move |j| (i, j))))
        .collect();
    if pairs.len() > MAX_CANDIDATES {
        return Err(Error::InvalidArgument(format!(
            "commutant search space of {} operators is too large",
            pairs.len()
        )));
    }

    let rotated: Vec<CMatrix> = algebra
        .generators()
        .iter()
        .map(|g| vectors.adjoint() * g.op.mul_dense(&vectors))
        .collect();
    let gram = restricted_super_hamiltonian(&rotated, &pairs);
    let (evals, evecs) = hermitian_eigen(&gram);
    let top = evals.last().copied().unwrap_or(0.0).abs();
    let threshold = tol * top.max(1.0);
    let kernel_dim = evals.iter().take_while(|&&v| v <= threshold).count();
    let gap = evals.get(kernel_dim).copied().unwrap_or(f64::INFINITY);

    let rows: Vec<Vec<C64>> = (0..kernel_dim)
        .map(|k| {
            let mut small = CMatrix::zeros(d, d);
            for (a, &(i, j)) in pairs.iter().enumerate() {
                small[(i, j)] = evecs[(a, k)];
            }
            let op = &vectors * small * vectors.adjoint();
            op.as_slice().to_vec()
        })
        .collect();
    let basis = canonical_basis(rows);
    let operators = basis
        .into_iter()
        .map(|v| SparseOperator::from_dense(spec, &CMatrix::from_column_slice(d, d, &v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutantBasis {
        spec,
        operators,
        kernel_tol: tol,
        gap,
        candidates: pairs.len(),
    })
}

/// Largest relative commutator `‖[Q, g]‖ / ‖g‖` over basis elements and generators.
pub fn commutation_residual(basis: &CommutantBasis, algebra: &BondAlgebra) -> f64 {
    let mut worst: f64 = 0.0;
    for q in basis.operators() {
        for g in algebra.generators() {
            let gn = g.op.frobenius_norm().max(1e-300);
            let r = g.op.commutator(q).map(|c| c.frobenius_norm()).unwrap_or(f64::INFINITY);
            worst = worst.max(r / gn);
        }
    }
    worst
}
