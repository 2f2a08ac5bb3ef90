use serde::{Deserialize, Serialize};

use super::liouvillian::WorkingModel;
use crate::algebra::validate_density_matrix;
use crate::error::{Error, Result};
use crate::linalg::{dopri5, expmv, KrylovOptions, OdeOptions};
use crate::models::LindbladModel;
use crate::operator::{unvectorize, SectorPartition, SparseOperator};
use crate::{CMatrix, CVector, C64};

/// Largest vectorized dimension propagated with the Krylov exponential in `Auto` mode.
pub const KRYLOV_LIMIT: usize = 16_384;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactSolver {
    /// Krylov up to [`KRYLOV_LIMIT`], Runge–Kutta above.
    Auto,
    Krylov,
    RungeKutta,
}

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    pub solver: ExactSolver,
    pub krylov: KrylovOptions,
    pub ode: OdeOptions,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            solver: ExactSolver::Auto,
            krylov: KrylovOptions::default(),
            ode: OdeOptions::default(),
        }
    }
}

/// Density matrices along an exact evolution, stored in the working space
/// (the full chain or one magnetization sector).
#[derive(Clone, Debug)]
pub struct EvolutionResult {
    times: Vec<f64>,
    states: Vec<CMatrix>,
    sector: Option<(SectorPartition, i32)>,
    solver: ExactSolver,
}

impl EvolutionResult {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[CMatrix] {
        &self.states
    }

    pub fn sector(&self) -> Option<i32> {
        self.sector.as_ref().map(|s| s.1)
    }

    /// Solver actually used (never `Auto`).
    pub fn solver(&self) -> ExactSolver {
        self.solver
    }

    /// State at time index `k` on the full chain.
    pub fn full_state(&self, k: usize) -> Result<CMatrix> {
        match &self.sector {
            None => Ok(self.states[k].clone()),
            Some((p, m)) => p.expand_matrix(&self.states[k], *m),
        }
    }

    fn working_vector(&self, psi: &CVector) -> CVector {
        match &self.sector {
            None => psi.clone(),
            Some((p, m)) => {
                let idx = &p.sector(*m).expect("sector exists").indices;
                CVector::from_iterator(idx.len(), idx.iter().map(|&i| psi[i]))
            }
        }
    }

    /// `Tr[O ρ(t)]` for a full-chain observable.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Vec<f64>> {
        let block = match &self.sector {
            None => op.clone(),
            Some((p, m)) => p.diagonal_block(op, *m)?,
        };
        Ok(self.states.iter().map(|r| block.trace_with(r).re).collect())
    }

    /// `⟨ψ|ρ(t)|ψ⟩`.
    pub fn fidelity(&self, psi: &CVector) -> Vec<f64> {
        let v = self.working_vector(psi);
        self.states.iter().map(|r| v.dotc(&(r * &v)).re).collect()
    }
}

/// `F(t) = ⟨ψ0|ρ(t)|ψ0⟩`.
pub fn fidelity_series(result: &EvolutionResult, psi0: &CVector) -> Vec<f64> {
    result.fidelity(psi0)
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be nondecreasing".into()));
    }
    Ok(())
}

/// Propagates a working-space density matrix to every time in `times`.
pub(crate) fn propagate(
    working: &WorkingModel,
    rho0: &CMatrix,
    times: &[f64],
    opts: ExactOptions,
) -> Result<(Vec<CMatrix>, ExactSolver)> {
    check_times(times)?;
    let d = working.dim();
    let l = working.superoperator()?;
    let n = d * d;
    let solver = match opts.solver {
        ExactSolver::Auto if n <= KRYLOV_LIMIT => ExactSolver::Krylov,
        ExactSolver::Auto => ExactSolver::RungeKutta,
        s => s,
    };
    let apply = |x: &[C64], y: &mut [C64]| l.matrix().matvec_into(x, y);
    let v0 = rho0.as_slice().to_vec();
    let vecs = match solver {
        ExactSolver::RungeKutta => dopri5(apply, &v0, times, opts.ode)?,
        _ => {
            let anorm = l.matrix().max_abs_row_sum();
            let mut out = Vec::with_capacity(times.len());
            let mut v = v0;
            let mut t_prev = 0.0;
            for &t in times {
                v = expmv(apply, n, anorm, t - t_prev, &v, opts.krylov)?;
                t_prev = t;
                out.push(v.clone());
            }
            out
        }
    };
    Ok((vecs.iter().map(|v| unvectorize(v, d)).collect(), solver))
}

fn sector_weight_outside(rho: &CMatrix, partition: &SectorPartition, m: i32) -> Result<f64> {
    let mut inside = vec![false; rho.nrows()];
    for &i in &partition.sector(m)?.indices {
        inside[i] = true;
    }
    let mut outside = 0.0;
    for c in 0..rho.ncols() {
        for r in 0..rho.nrows() {
            if !(inside[r] && inside[c]) {
                outside += rho[(r, c)].norm_sqr();
            }
        }
    }
    Ok(outside.sqrt())
}

pub fn evolve_exact(
    model: &LindbladModel,
    rho0: &CMatrix,
    times: &[f64],
    sector_hint: Option<i32>,
) -> Result<EvolutionResult> {
    evolve_exact_with(model, rho0, times, sector_hint, ExactOptions::default())
}

pub fn evolve_exact_with(
    model: &LindbladModel,
    rho0: &CMatrix,
    times: &[f64],
    sector_hint: Option<i32>,
    opts: ExactOptions,
) -> Result<EvolutionResult> {
    validate_density_matrix(rho0, model.spec().dim())?;
    let working = WorkingModel::new(model, sector_hint)?;
    if let Some((p, m)) = working.sector() {
        let leak = sector_weight_outside(rho0, p, m)?;
        if leak > 1e-12 {
            return Err(Error::SectorViolation(leak));
        }
    }
    let start = working.restrict_matrix(rho0)?;
    let (states, solver) = propagate(&working, &start, times, opts)?;
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        sector: working.sector().map(|(p, m)| (p.clone(), m)),
        solver,
    })
}

/// Exact evolution of `|ψ0⟩⟨ψ0|` without forming the full density matrix,
/// so that sector-restricted runs scale with the sector dimension only.
pub fn evolve_pure_exact(
    model: &LindbladModel,
    psi0: &CVector,
    times: &[f64],
    sector_hint: Option<i32>,
    opts: ExactOptions,
) -> Result<EvolutionResult> {
    if psi0.len() != model.spec().dim() {
        return Err(Error::DimensionMismatch {
            expected: model.spec().dim(),
            found: psi0.len(),
        });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state norm {} is not 1", psi0.norm())));
    }
    let working = WorkingModel::new(model, sector_hint)?;
    let v = working.restrict_vector(psi0)?;
    let (states, solver) = propagate(&working, &(&v * v.adjoint()), times, opts)?;
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        sector: working.sector().map(|(p, m)| (p.clone(), m)),
        solver,
    })
}
