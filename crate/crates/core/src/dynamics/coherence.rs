use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::{check_times, evolve_exact};
use super::liouvillian::WorkingModel;
use crate::algebra::BondAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{expm, expmv, hermitian_eigen, KrylovOptions};
use crate::models::{build_model, scar_state, singlet_check, LindbladModel, ModelId, Params, ScarState};
use crate::operator::{sector_partition, unvectorize, Boundary, HilbertSpec, LocalKind, SparseOperator, SparseSuperOperator};
use crate::{CMatrix, CVector, C64};

const PROJECTOR_TOL: f64 = 1e-10;
const COMMUTANT_TOL: f64 = 1e-8;
/// The `L(Π_th ρ Π_s) = H_eff Π_th ρ Π_s` identity is verified on random states up to this dimension.
const IDENTITY_CHECK_DIM: usize = 256;
const SPECTRUM_CHECK_DIM: usize = 1024;

/// `H_eff = −i H1 − ½ H2` governing coherences between a singlet and the rest.
#[derive(Clone, Debug)]
pub struct EffectivePair {
    /// `Σ_α J_α (h_α − ε_α)`.
    pub h1: SparseOperator,
    /// `Σ_j γ_j (l_j − λ_j)²`.
    pub h2: SparseOperator,
    pub epsilons: Vec<(String, f64)>,
    pub lambdas: Vec<(String, f64)>,
    /// Smallest eigenvalue of `H2` (dense check, small chains only).
    pub h2_min_eigenvalue: Option<f64>,
    /// Largest relative residual of the coherence identity over random states.
    pub identity_residual: Option<f64>,
}

impl EffectivePair {
    pub fn h_eff(&self) -> CMatrix {
        self.h1.to_dense() * C64::new(0.0, -1.0) - self.h2.to_dense() * C64::new(0.5, 0.0)
    }
}

fn random_density_matrix(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn effective_pair(model: &LindbladModel, psi: &CVector) -> Result<EffectivePair> {
    let algebra = model.algebra();
    let spec = model.spec();
    if psi.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: psi.len(),
        });
    }
    let report = singlet_check(algebra, psi);
    if let Some(label) = report.first_failure() {
        return Err(Error::NotASinglet(label.to_string()));
    }
    let identity = SparseOperator::identity(spec);
    let mut h1_terms = Vec::new();
    let mut h2_terms = Vec::new();
    let mut epsilons = Vec::new();
    let mut lambdas = Vec::new();
    for g in algebra.generators() {
        let e = report.eigenvalue(&g.label).expect("singlet eigenvalue");
        let shifted = g.op.sub(&identity.scaled(C64::new(e, 0.0)))?;
        if let Some(&j) = model.couplings().get(&g.label) {
            epsilons.push((g.label.clone(), e));
            h1_terms.push((C64::new(j, 0.0), shifted.clone()));
        }
        if let Some(&r) = model.rates().get(&g.label) {
            lambdas.push((g.label.clone(), e));
            if r > 0.0 {
                h2_terms.push((C64::new(r, 0.0), shifted.matmul(&shifted)?));
            }
        }
    }
    let combine = |terms: &[(C64, SparseOperator)]| {
        let refs: Vec<(C64, &SparseOperator)> = terms.iter().map(|(c, o)| (*c, o)).collect();
        SparseOperator::linear_combination(spec, &refs)
    };
    let mut pair = EffectivePair {
        h1: combine(&h1_terms)?,
        h2: combine(&h2_terms)?,
        epsilons,
        lambdas,
        h2_min_eigenvalue: None,
        identity_residual: None,
    };

    let d = spec.dim();
    if d <= SPECTRUM_CHECK_DIM {
        let (values, _) = hermitian_eigen(&pair.h2.to_dense());
        let min = values.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidArgument(format!("H2 has negative eigenvalue {min:e}")));
        }
        pair.h2_min_eigenvalue = Some(min);
    }
    if d <= IDENTITY_CHECK_DIM {
        let working = WorkingModel::new(model, None)?;
        let h_eff = pair.h_eff();
        let pi_s = psi * psi.adjoint();
        let pi_th = CMatrix::identity(d, d) - &pi_s;
        let mut rng = ChaCha8Rng::seed_from_u64(0x00c0_ffee);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let rho = random_density_matrix(d, &mut rng);
            let x = &pi_th * &rho * &pi_s;
            let lhs = working.apply(&x);
            let rhs = &h_eff * &x;
            let scale = (h_eff.norm() * x.norm()).max(1.0);
            worst = worst.max((lhs - rhs).norm() / scale);
            let y = x.adjoint();
            let lhs = working.apply(&y);
            let rhs = &y * h_eff.adjoint();
            worst = worst.max((lhs - rhs).norm() / scale);
        }
        if worst > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "coherence identity fails with residual {worst:e}"
            )));
        }
        pair.identity_residual = Some(worst);
    }
    Ok(pair)
}

/// Largest `‖[g, P]‖ / max(1, ‖P‖)` over the generators of an algebra.
pub fn commutant_residual(algebra: &BondAlgebra, p: &CMatrix) -> f64 {
    let scale = p.norm().max(1.0);
    algebra
        .generators()
        .iter()
        .map(|g| g.op.commutator_dense(p).norm() / scale)
        .fold(0.0, f64::max)
}

fn check_projectors(algebra: &BondAlgebra, projectors: &[&CMatrix]) -> Result<()> {
    let d = algebra.spec().dim();
    for p in projectors {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.nrows(),
            });
        }
        let scale = p.norm().max(1.0);
        let defect = ((*p - p.adjoint()).norm() + (*p * *p - *p).norm()) / scale;
        if defect > PROJECTOR_TOL {
            return Err(Error::InvalidArgument(format!(
                "not an orthogonal projector (defect {defect:e})"
            )));
        }
        let r = commutant_residual(algebra, p);
        if r > COMMUTANT_TOL {
            return Err(Error::NotInCommutant(r));
        }
    }
    if let [a, b] = projectors {
        let overlap = (*a * *b).norm();
        if overlap > PROJECTOR_TOL {
            return Err(Error::InvalidArgument(format!("projectors overlap ({overlap:e})")));
        }
    }
    Ok(())
}

/// `‖Π_s ρ(t) Π_th‖²` (Hilbert–Schmidt) along the exact evolution of `ρ0`.
pub fn coherence_norm_series(
    model: &LindbladModel,
    rho0: &CMatrix,
    pi_s: &CMatrix,
    pi_th: &CMatrix,
    times: &[f64],
    sector_hint: Option<i32>,
) -> Result<Vec<f64>> {
    check_times(times)?;
    check_projectors(model.algebra(), &[pi_s, pi_th])?;
    let result = evolve_exact(model, rho0, times, sector_hint)?;
    let (a, b) = match result.sector() {
        None => (pi_s.clone(), pi_th.clone()),
        Some(m) => {
            let partition = sector_partition(&model.spec());
            let idx = &partition.sector(m)?.indices;
            (pi_s.select_columns(idx.iter()), pi_th.select_rows(idx.iter()))
        }
    };
    Ok(result
        .states()
        .iter()
        .map(|r| (&a * r * &b).norm_squared())
        .collect())
}

fn coherence_at(l: &SparseSuperOperator, v0: &[C64], d: usize, pi_s: &CMatrix, pi_th: &CMatrix, t: f64) -> Result<f64> {
    let v = expmv(
        |x, y| l.matrix().matvec_into(x, y),
        v0.len(),
        l.matrix().max_abs_row_sum(),
        t,
        v0,
        KrylovOptions::default(),
    )?;
    let rho = unvectorize(&v, d);
    Ok((pi_s * rho * pi_th).norm_squared())
}

/// Derivative of `‖Π_s ρ(t) Π_th‖²` with `Π_s = |ψ⟩⟨ψ|`, `Π_th = 1 − Π_s`.
///
/// Returns `(lhs, rhs)`: a central difference of the exactly evolved norm, and
/// `−Tr[Z† H2 Z]` with `Z = e^{t H_eff} Π_th ρ0 Π_s`.
pub fn coherence_rate_check(model: &LindbladModel, rho0: &CMatrix, psi: &CVector, t: f64) -> Result<(f64, f64)> {
    let d = model.spec().dim();
    let pi_s = psi * psi.adjoint();
    let pi_th = CMatrix::identity(d, d) - &pi_s;
    coherence_rate_check_with(model, rho0, psi, &pi_th, t)
}

/// As [`coherence_rate_check`] with an explicit complementary projector.
pub fn coherence_rate_check_with(
    model: &LindbladModel,
    rho0: &CMatrix,
    psi: &CVector,
    pi_th: &CMatrix,
    t: f64,
) -> Result<(f64, f64)> {
    const H: f64 = 1e-4;
    let d = model.spec().dim();
    crate::algebra::validate_density_matrix(rho0, d)?;
    let pair = effective_pair(model, psi)?;
    let pi_s = psi * psi.adjoint();
    check_projectors(model.algebra(), &[&pi_s, pi_th])?;

    let z = expm(&(pair.h_eff() * C64::new(t, 0.0))) * (pi_th * rho0 * &pi_s);
    let rhs = -(z.adjoint() * pair.h2.mul_dense(&z)).trace().re;

    let l = WorkingModel::new(model, None)?.superoperator()?;
    let v0 = rho0.as_slice().to_vec();
    let f = |s: f64| coherence_at(&l, &v0, d, &pi_s, pi_th, s);
    let central = |h: f64| -> Result<f64> { Ok((f(t + h)? - f(t - h)?) / (2.0 * h)) };
    let mut lhs = central(H)?;
    if (lhs - rhs).abs() > 1e-6 * rhs.abs().max(1.0) {
        lhs = (4.0 * central(H / 2.0)? - lhs) / 3.0;
    }
    Ok((lhs, rhs))
}

/// Isometry embedding a spin-1/2 chain into the `±1` states of a spin-1 chain (`↑ → +`, `↓ → −`).
pub fn spin_half_embedding(spin_one: &HilbertSpec) -> Result<CMatrix> {
    let half = HilbertSpec::spin_half(spin_one.len(), spin_one.boundary())?;
    let mut v = CMatrix::zeros(spin_one.dim(), half.dim());
    for col in 0..half.dim() {
        let digits: Vec<usize> = half.digits(col).iter().map(|&b| 2 * b).collect();
        v[(spin_one.index_of(&digits), col)] = C64::new(1.0, 0.0);
    }
    Ok(v)
}

/// `‖U† (H2|_{S½}) U − 2γ H_Heis‖` (Frobenius) for the exchange-dephased spin-1 chain.
///
/// `H2 = γ Σ_j (S^x_j S^x_{j+1} + S^y_j S^y_{j+1})²` under periodic boundaries,
/// `H_Heis = Σ_j (¼ − τ_j·τ_{j+1})`, and `U` rotates the odd sites by π about z.
pub fn heisenberg_map_check(len: usize, gamma: f64) -> Result<f64> {
    if len < 4 || !len.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("need even L ≥ 4, got {len}")));
    }
    let spin_one = HilbertSpec::spin_one(len, Boundary::Periodic)?;
    let half = HilbertSpec::spin_half(len, Boundary::Periodic)?;
    let mut h2 = CMatrix::zeros(spin_one.dim(), spin_one.dim());
    for j in spin_one.bonds() {
        let l = crate::models::terms::exchange(&spin_one, j)?;
        h2 += l.matmul(&l)?.to_dense() * C64::new(gamma, 0.0);
    }
    let v = spin_half_embedding(&spin_one)?;
    let restricted = v.adjoint() * &h2 * &v;

    let phase = |index: usize| -> C64 {
        half.digits(index)
            .iter()
            .enumerate()
            .filter(|(site0, _)| site0 % 2 == 0)
            .fold(C64::new(1.0, 0.0), |acc, (_, &b)| {
                acc * if b == 0 { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) }
            })
    };
    let u = CMatrix::from_diagonal(&CVector::from_fn(half.dim(), |i, _| phase(i)));
    let rotated = u.adjoint() * restricted * &u;

    let mut heis = CMatrix::zeros(half.dim(), half.dim());
    for j in half.bonds() {
        // τ·τ = ¼(σˣσˣ + σʸσʸ + σᶻσᶻ)
        let flip = crate::models::terms::exchange(&half, j)?.to_dense();
        let zz = crate::models::terms::string_operator(&half, &[LocalKind::Z, LocalKind::Z], j)?.to_dense();
        heis += (CMatrix::identity(half.dim(), half.dim()) - flip - zz) * C64::new(0.25, 0.0);
    }
    Ok((rotated - heis * C64::new(2.0 * gamma, 0.0)).norm())
}

/// Coherences between a tower state and its complement within one magnetization sector.
#[derive(Clone, Debug)]
pub struct TowerCoherence {
    pub model: LindbladModel,
    /// `(|ψ_{n0}⟩ + |n0, k⟩)/√2`.
    pub initial: CVector,
    pub scar: CVector,
    pub rho0: CMatrix,
    /// `|ψ_{n0}⟩⟨ψ_{n0}|`.
    pub pi_s: CMatrix,
    /// Projector onto the magnetization sector of `ψ_{n0}` minus `pi_s`.
    pub pi_w: CMatrix,
    pub sector: i32,
    pub momentum: f64,
    pub gamma: f64,
}

impl TowerCoherence {
    /// `¼ exp(−2γ t ε_{k−π})` with `ε_q = 2 sin²(q/2)`.
    pub fn law(&self, t: f64) -> f64 {
        let q = self.momentum - PI;
        0.25 * (-2.0 * self.gamma * t * 2.0 * (q / 2.0).sin().powi(2)).exp()
    }

    pub fn series(&self, times: &[f64]) -> Result<Vec<f64>> {
        coherence_norm_series(&self.model, &self.rho0, &self.pi_w, &self.pi_s, times, Some(self.sector))
    }
}

/// Exchange-dephased spin-1 chain (periodic, even `L`) prepared in a
/// superposition of the tower state `n0` and its slow bimagnon partner.
pub fn tower_coherence_case(len: usize, n0: usize, params: &Params) -> Result<TowerCoherence> {
    if !len.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("need even L, got {len}")));
    }
    let model = build_model(ModelId::Tower2, len, Boundary::Periodic, params)?;
    let spec = model.spec();
    let k = ScarState::default_momentum(len);
    let scar = scar_state(&ScarState::Tower { n: n0 }, &spec)?;
    let partner = scar_state(&ScarState::Aqmbs { n: n0, k }, &spec)?;
    let initial = (&scar + &partner).unscale(2f64.sqrt());
    let sector = -(len as i32) + 2 * n0 as i32;
    let partition = sector_partition(&spec);
    let mut pi_m = CMatrix::zeros(spec.dim(), spec.dim());
    for &i in &partition.sector(sector)?.indices {
        pi_m[(i, i)] = C64::new(1.0, 0.0);
    }
    let pi_s = &scar * scar.adjoint();
    let pi_w = pi_m - &pi_s;
    Ok(TowerCoherence {
        gamma: params.get("gamma").copied().unwrap_or(0.0),
        rho0: &initial * initial.adjoint(),
        model,
        initial,
        scar,
        pi_s,
        pi_w,
        sector,
        momentum: k,
    })
}
