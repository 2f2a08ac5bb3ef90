use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::liouvillian::WorkingModel;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::models::{scar_state, LindbladModel, ModelId, ScarState};
use crate::operator::SparseOperator;
use crate::{CMatrix, CVector, C64};

const DENSE_NORM_LIMIT: usize = 512;

/// Initial-time derivatives of the fidelity and of one observable.
#[derive(Clone, Debug, Serialize)]
pub struct ShortTimeReport {
    pub len: usize,
    /// `Tr[ρ L(ρ)]`.
    pub first: f64,
    /// `Tr[ρ L²(ρ)]`.
    pub second: f64,
    /// Finite-`L` closed form `−(4/L) cos²(k/2) Σ_j γ_j` (exchange jumps).
    pub first_closed_form: Option<f64>,
    /// Finite-`L` closed form `−2 (4/L) cos²(k/2) Σ_j g_j²` (exchange in `H` only).
    pub second_closed_form: Option<f64>,
    /// Large-`L` form `−8π² γ̃ / L²` as printed in the source, `γ̃ = Σ_j γ_j / L`.
    pub first_asymptotic: Option<f64>,
    /// Large-`L` form `−16π² g̃² / L²` as printed in the source, `g̃² = Σ_j g_j² / L`.
    pub second_asymptotic: Option<f64>,
    /// `Tr[O L(ρ)]`.
    pub observable_rate: f64,
    /// `‖O‖(Σ_α |g_α| ‖[h_α, ρ]‖ + ½ Σ_j γ_j ‖[l_j, [l_j, ρ]]‖)`.
    pub observable_bound_exact: f64,
    /// The same with `⟨l̃⁴⟩ ≤ ‖l̃‖² ⟨l̃²⟩`, `l̃ = l − ⟨l⟩`.
    pub observable_bound: f64,
}

/// Operator norm of a hermitian operator.
pub fn hermitian_norm(op: &SparseOperator) -> f64 {
    let d = op.dim();
    if d <= DENSE_NORM_LIMIT {
        let (values, _) = hermitian_eigen(&op.to_dense());
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    // power iteration on op², seeded deterministically
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f_726d);
    let mut v = CVector::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    v.unscale_mut(v.norm());
    let mut estimate = 0.0;
    for _ in 0..20_000 {
        let w = op.apply(&op.apply(&v));
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w.unscale(next);
        if (next - estimate).abs() <= 1e-15 * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    estimate.sqrt()
}

fn expectation(psi: &CVector, x: &CMatrix) -> C64 {
    psi.dotc(&(x * psi))
}

/// Derivatives at `t = 0` of `F(t) = Tr[ρ e^{tL}(ρ)]` for `ρ = |ψ⟩⟨ψ|` with
/// `ψ` a catalog scar state, evaluated by exact traces in the state's sector.
pub fn short_time_derivatives(
    model: &LindbladModel,
    state: &ScarState,
    observable: &SparseOperator,
) -> Result<ShortTimeReport> {
    let spec = model.spec();
    if observable.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: observable.dim(),
        });
    }
    let psi_full = scar_state(state, &spec)?;
    let working = WorkingModel::for_state(model, &psi_full)?;
    let psi = working.restrict_vector(&psi_full)?;
    let rho = &psi * psi.adjoint();
    let l_rho = working.apply(&rho);
    let l2_rho = working.apply(&l_rho);
    let first = expectation(&psi, &l_rho).re;
    let second = expectation(&psi, &l2_rho).re;

    let o = working.restrict(observable)?;
    let observable_rate = o.trace_with(&l_rho).re;
    let o_norm = hermitian_norm(observable);

    let algebra = model.algebra();
    let mut exact_h = 0.0;
    let mut sm_h = 0.0;
    let mut exact_l = 0.0;
    let mut sm_l = 0.0;
    for g in algebra.generators() {
        let op = working.restrict(&g.op)?;
        if let Some(&j) = model.couplings().get(&g.label) {
            exact_h += j.abs() * op.commutator_dense(&rho).norm();
            let mean = op.expectation(&psi).re;
            let second_moment = op.apply(&psi).norm_squared();
            sm_h += j.abs() * (2.0 * (second_moment - mean * mean)).max(0.0).sqrt();
        }
        if let Some(&r) = model.rates().get(&g.label) {
            let c = op.commutator_dense(&rho);
            exact_l += r * op.commutator_dense(&c).norm();
            let mean = op.expectation(&psi).re;
            let shifted = g.op.sub(&SparseOperator::identity(spec).scaled(C64::new(mean, 0.0)))?;
            let bound = hermitian_norm(&shifted);
            let m2 = (op.apply(&psi).norm_squared() - mean * mean).max(0.0);
            sm_l += r * (2.0 * bound * bound * m2 + 6.0 * m2 * m2).sqrt();
        }
    }

    let len = spec.len();
    let lf = len as f64;
    let exchange_rates: Vec<f64> = algebra
        .family("exchange")
        .filter_map(|g| model.rates().get(&g.label).copied())
        .collect();
    let exchange_couplings: Vec<f64> = algebra
        .family("exchange")
        .filter_map(|g| model.couplings().get(&g.label).copied())
        .collect();
    let is_tower = matches!(model.id(), Some(ModelId::Tower1 | ModelId::Tower2));
    let (mut f1, mut f2, mut a1, mut a2) = (None, None, None, None);
    match *state {
        ScarState::Aqmbs { k, .. } if is_tower => {
            let c = 4.0 / lf * (k / 2.0).cos().powi(2);
            let sum_gamma: f64 = exchange_rates.iter().sum();
            f1 = Some(-c * sum_gamma);
            a1 = Some(-8.0 * PI * PI / (lf * lf) * (sum_gamma / lf));
            if exchange_rates.iter().all(|&g| g == 0.0) {
                let sum_g2: f64 = exchange_couplings.iter().map(|g| g * g).sum();
                f2 = Some(-2.0 * c * sum_g2);
                a2 = Some(-16.0 * PI * PI / (lf * lf) * (sum_g2 / lf));
            }
        }
        ScarState::Tower { .. } | ScarState::FerromagnetUp | ScarState::FerromagnetDown if is_tower => {
            f1 = Some(0.0);
            f2 = Some(0.0);
        }
        _ => {}
    }

    Ok(ShortTimeReport {
        len,
        first,
        second,
        first_closed_form: f1,
        second_closed_form: f2,
        first_asymptotic: a1,
        second_asymptotic: a2,
        observable_rate,
        observable_bound_exact: o_norm * (exact_h + 0.5 * exact_l),
        observable_bound: o_norm * (sm_h + 0.5 * sm_l),
    })
}
