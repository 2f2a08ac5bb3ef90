use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scarlab::algebra::{commutant_basis, irrep_decomposition, stationary_state, DEFAULT_KERNEL_TOL, DEFAULT_SEED};
use scarlab::dynamics::*;
use scarlab::error::Error;
use scarlab::linalg::hermitian_eigen;
use scarlab::models::terms::site_operator;
use scarlab::models::*;
use scarlab::operator::{sector_partition, Boundary, LocalKind, SparseOperator};
use scarlab::{CMatrix, CVector, C64};

fn model(id: ModelId, len: usize) -> LindbladModel {
    build_model(id, len, Boundary::Open, &id.default_params()).unwrap()
}

fn random_rho(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    v.unscale(v.norm())
}

fn grid(t_max: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

#[test]
fn zero_couplings_give_zero_liouvillian() {
    let alg = bond_algebra(ModelId::U1, 3, Boundary::Open).unwrap();
    let m = LindbladModel::from_families(alg, &[("exchange", 0.0)], &[("z", 0.0)]).unwrap();
    assert_eq!(liouvillian(&m).unwrap().matrix().frobenius_norm(), 0.0);
}

#[test]
fn liouvillian_is_trace_preserving_and_unital() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for id in ModelId::ALL {
        let len = if id.local_dim() == 3 { 3 } else { 4 };
        let m = model(id, len);
        let w = WorkingModel::new(&m, None).unwrap();
        let d = w.dim();
        let l = liouvillian(&m).unwrap();
        for _ in 0..20 {
            let rho = random_rho(d, &mut rng);
            assert!(w.apply(&rho).trace().norm() < 1e-12, "{id}");
            let sparse = l.apply(&rho);
            assert!((sparse - w.apply(&rho)).norm() < 1e-12);
        }
        assert!(w.apply(&CMatrix::identity(d, d)).norm() < 1e-12);
        assert!(w.apply_adjoint(&CMatrix::identity(d, d)).norm() < 1e-12);
    }
}

#[test]
fn ferromagnet_is_stationary_for_isolated_2() {
    let m = model(ModelId::Isolated2, 5);
    let spec = m.spec();
    for s in [ScarState::FerromagnetUp, ScarState::FerromagnetDown] {
        let psi = scar_state(&s, &spec).unwrap();
        let rho = &psi * psi.adjoint();
        assert!(WorkingModel::new(&m, None).unwrap().apply(&rho).norm() < 1e-13);
    }
}

#[test]
fn sector_liouvillian_matches_full_block() {
    let m = model(ModelId::U1, 4);
    let psi = product_state(&m.spec(), "ud").unwrap();
    let times = grid(2.0, 4);
    let full = evolve_pure_exact(&m, &psi, &times, None, ExactOptions::default()).unwrap();
    let block = evolve_pure_exact(&m, &psi, &times, Some(0), ExactOptions::default()).unwrap();
    for k in 0..times.len() {
        assert!((full.full_state(k).unwrap() - block.full_state(k).unwrap()).norm() < 1e-10);
    }
    assert_eq!(magnetization_commutator(&m).unwrap(), 0.0);
    assert!(magnetization_commutator(&model(ModelId::Isolated2, 4)).unwrap() > 1.0);
}

#[test]
fn evolution_starts_at_initial_state() {
    let m = model(ModelId::Full, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho0 = random_rho(8, &mut rng);
    let r = evolve_exact(&m, &rho0, &[0.0, 0.0], None).unwrap();
    assert_eq!(r.states()[0], rho0);
    assert_eq!(r.states()[1], rho0);
}

#[test]
fn krylov_and_runge_kutta_agree() {
    let m = model(ModelId::Isolated1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho0 = random_rho(16, &mut rng);
    let times = grid(3.0, 6);
    let a = evolve_exact(&m, &rho0, &times, None).unwrap();
    let opts = ExactOptions {
        solver: ExactSolver::RungeKutta,
        ..ExactOptions::default()
    };
    let b = evolve_exact_with(&m, &rho0, &times, None, opts).unwrap();
    assert_eq!(a.solver(), ExactSolver::Krylov);
    assert_eq!(b.solver(), ExactSolver::RungeKutta);
    for (x, y) in a.states().iter().zip(b.states()) {
        assert!((x - y).norm() < 1e-6);
    }
}

#[test]
fn structural_preservation_along_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for id in ModelId::ALL {
        let len = if id.local_dim() == 3 { 3 } else { 5 };
        let m = model(id, len);
        let d = m.spec().dim();
        let rho0 = random_rho(d, &mut rng);
        let r = evolve_exact(&m, &rho0, &grid(4.0, 8), None).unwrap();
        for rho in r.states() {
            assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-8, "{id}");
            assert!((rho - rho.adjoint()).norm() < 1e-8, "{id}");
            let (values, _) = hermitian_eigen(rho);
            assert!(values[0] > -1e-7, "{id}: {}", values[0]);
        }
    }
}

#[test]
fn commutant_elements_are_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for id in ModelId::ALL {
        let len = if id.local_dim() == 3 { 3 } else { 4 };
        let m = model(id, len);
        let basis = commutant_basis(m.algebra(), DEFAULT_KERNEL_TOL).unwrap();
        let rho0 = random_rho(m.spec().dim(), &mut rng);
        let r = evolve_exact(&m, &rho0, &grid(5.0, 5), None).unwrap();
        for q in basis.operators() {
            let values = r.expectation(q).unwrap();
            for v in &values {
                assert!((v - values[0]).abs() < 1e-8, "{id}");
            }
        }
    }
}

#[test]
fn stationary_states_are_annihilated() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for id in ModelId::ALL {
        let len = if id.local_dim() == 3 { 3 } else { 4 };
        let m = model(id, len);
        let basis = commutant_basis(m.algebra(), DEFAULT_KERNEL_TOL).unwrap();
        let decomp = irrep_decomposition(m.algebra(), &basis, DEFAULT_SEED).unwrap();
        let w = WorkingModel::new(&m, None).unwrap();
        for _ in 0..20 {
            let rho0 = random_rho(m.spec().dim(), &mut rng);
            let ss = stationary_state(&decomp, &rho0).unwrap();
            assert!(w.apply(&ss).norm() < 1e-8, "{id}");
        }
    }
}

#[test]
fn fig1_plateaus_exact() {
    let m = model(ModelId::Isolated2, 6);
    let spec = m.spec();
    let sz = site_operator(&spec, LocalKind::Z, 3).unwrap();
    let times = grid(500.0, 50);
    for (name, psi) in isolated_initial_states(&spec).unwrap() {
        let r = evolve_pure_exact(&m, &psi, &times, None, ExactOptions::default()).unwrap();
        let f = r.fidelity(&psi);
        assert_eq!(f[0], 1.0);
        assert!(f.iter().all(|&x| (-1e-10..=1.0 + 1e-8).contains(&x)));
        let pf = plateau(&f);
        let pz = plateau(&r.expectation(&sz).unwrap());
        assert!((pf.mean - 1.0 / 62.0).abs() < 1e-6, "{name}: {pf:?}");
        assert!(pz.mean.abs() < 1e-6, "{name}: {pz:?}");
    }
}

#[test]
fn fig2_plateaus_exact() {
    let m = model(ModelId::Tower1, 4);
    let spec = m.spec();
    let psi = tower_initial_state(&spec).unwrap();
    let sz = site_operator(&spec, LocalKind::Z, 2).unwrap();
    let r = evolve_pure_exact(&m, &psi, &grid(1000.0, 50), Some(0), ExactOptions::default()).unwrap();
    assert_eq!(sector_partition(&spec).sector(0).unwrap().dim(), 19);
    assert!((plateau(&r.fidelity(&psi)).mean - 1.0 / 18.0).abs() < 1e-6);
    assert!(plateau(&r.expectation(&sz).unwrap()).mean.abs() < 1e-6);
}

#[test]
fn sector_hint_errors() {
    let m = model(ModelId::Isolated2, 4);
    let psi = product_state(&m.spec(), "ud").unwrap();
    let err = evolve_pure_exact(&m, &psi, &[1.0], Some(0), ExactOptions::default()).unwrap_err();
    assert!(matches!(err, Error::SectorViolation(_)));
    let u1 = model(ModelId::U1, 4);
    let rho = CMatrix::identity(16, 16) / C64::new(16.0, 0.0);
    assert!(matches!(evolve_exact(&u1, &rho, &[1.0], Some(0)), Err(Error::SectorViolation(_))));
    assert!(evolve_exact(&u1, &rho, &[1.0, 0.5], None).is_err());
}

#[test]
fn unitary_trajectories_match_schroedinger() {
    let alg = bond_algebra(ModelId::U1, 4, Boundary::Open).unwrap();
    let m = LindbladModel::from_families(alg, &[("exchange", 1.0)], &[("z", 0.0)]).unwrap();
    let psi = product_state(&m.spec(), "uudd").unwrap();
    let times = grid(2.0, 10);
    let traj = evolve_trajectories(&m, &psi, &times, 1, 1e-3, 7, &[]).unwrap();
    let exact = evolve_pure_exact(&m, &psi, &times, None, ExactOptions::default()).unwrap();
    for (a, b) in traj.fidelity.mean.iter().zip(exact.fidelity(&psi)) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn trajectories_agree_with_exact_evolution() {
    let m = model(ModelId::Isolated2, 4);
    let spec = m.spec();
    let psi = product_state(&spec, "uudd").unwrap();
    let sz = site_operator(&spec, LocalKind::Z, 2).unwrap();
    let times = grid(4.0, 20)[1..].to_vec();
    let traj = evolve_trajectories(&m, &psi, &times, 2000, 2e-3, 11, std::slice::from_ref(&sz)).unwrap();
    let exact = evolve_pure_exact(&m, &psi, &times, None, ExactOptions::default()).unwrap();
    let z = exact.expectation(&sz).unwrap();
    let s = &traj.observables[0];
    for k in 0..times.len() {
        assert!((s.mean[k] - z[k]).abs() < 3.0 * s.stderr[k] + 1e-3, "t = {}", times[k]);
    }
}

#[test]
fn trajectory_error_shrinks_with_samples() {
    let m = model(ModelId::Isolated2, 4);
    let psi = product_state(&m.spec(), "ud").unwrap();
    let times = [1.0];
    let exact = evolve_pure_exact(&m, &psi, &times, None, ExactOptions::default()).unwrap().fidelity(&psi)[0];
    let stderr: Vec<f64> = [100, 400, 1600]
        .iter()
        .map(|&n| {
            let r = evolve_trajectories(&m, &psi, &times, n, 2e-3, 3, &[]).unwrap();
            assert!((r.fidelity.mean[0] - exact).abs() < 4.0 * r.fidelity.stderr[0]);
            r.fidelity.stderr[0]
        })
        .collect();
    // ~1/√n: each fourfold increase roughly halves the error
    for w in stderr.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.5).contains(&ratio), "{ratio}");
    }
}

#[test]
fn trajectories_are_deterministic_and_checked() {
    let m = model(ModelId::Isolated2, 4);
    let psi = product_state(&m.spec(), "ud").unwrap();
    let a = evolve_trajectories(&m, &psi, &[0.5, 1.0], 30, 1e-2, 5, &[]).unwrap();
    let b = evolve_trajectories(&m, &psi, &[0.5, 1.0], 30, 1e-2, 5, &[]).unwrap();
    assert_eq!(a.fidelity, b.fidelity);
    assert!(matches!(
        evolve_trajectories(&m, &psi, &[1.0], 2, 0.5, 5, &[]),
        Err(Error::ProbabilityOverflow(_))
    ));
    assert!(!evolve_trajectories(&m, &psi, &[0.2], 1, 0.1, 5, &[]).unwrap().warnings.is_empty());
    assert!((default_dt(&m) - 1e-3).abs() < 1e-15);
    let r = evolve_trajectories(&m, &psi, &[0.1234], 1, 1e-2, 5, &[]).unwrap();
    assert!((r.times[0] - 0.12).abs() < 1e-12);
}

#[test]
fn effective_pair_for_dephased_ferromagnet() {
    let m = model(ModelId::Isolated2, 4);
    let spec = m.spec();
    let up = scar_state(&ScarState::FerromagnetUp, &spec).unwrap();
    let pair = effective_pair(&m, &up).unwrap();
    assert!(pair.identity_residual.unwrap() < 1e-10);
    assert!(pair.h2_min_eigenvalue.unwrap() > -1e-10);
    let mut expected = SparseOperator::zeros(spec);
    for j in 1..=4 {
        let p_down = site_operator(&spec, LocalKind::ProjDown, j).unwrap();
        expected = expected.add(&p_down.scaled(C64::new(4.0, 0.0))).unwrap();
    }
    assert!(pair.h2.sub(&expected).unwrap().frobenius_norm() < 1e-12);
    let down = scar_state(&ScarState::FerromagnetDown, &spec).unwrap();
    assert!((pair.h2.expectation(&down).re - 16.0).abs() < 1e-12);

    // gap of H2 on the complement of the scar
    let d = spec.dim();
    let pi_th = CMatrix::identity(d, d) - &up * up.adjoint();
    let h2 = pair.h2.to_dense();
    let (values, vectors) = hermitian_eigen(&(&pi_th * &h2 * &pi_th));
    let mut restricted: Vec<f64> = (0..d)
        .filter(|&i| (pi_th.clone() * vectors.column(i)).norm() > 0.5)
        .map(|i| values[i])
        .collect();
    restricted.sort_by(f64::total_cmp);
    assert!(restricted[0] >= 4.0 - 1e-10);

    let neel = product_state(&spec, "ud").unwrap();
    assert!(matches!(effective_pair(&m, &neel), Err(Error::NotASinglet(_))));
}

#[test]
fn dephasing_bounds_coherence_decay() {
    let m = model(ModelId::Isolated2, 4);
    let spec = m.spec();
    let d = spec.dim();
    let up = scar_state(&ScarState::FerromagnetUp, &spec).unwrap();
    let pi_s = &up * up.adjoint();
    let pi_th = CMatrix::identity(d, d) - &pi_s;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let phi = random_state(d, &mut rng);
    let rho0 = &phi * phi.adjoint();
    let times = grid(3.0, 15);
    let series = coherence_norm_series(&m, &rho0, &pi_s, &pi_th, &times, None).unwrap();
    for (t, c) in times.iter().zip(&series) {
        assert!(*c <= series[0] * (-4.0 * t).exp() + 1e-12);
    }
    let block = &pi_s * &rho0 * &pi_s + &pi_th * &rho0 * &pi_th;
    let zero = coherence_norm_series(&m, &block, &pi_s, &pi_th, &times, None).unwrap();
    assert!(zero.iter().all(|&c| c < 1e-20));

    let neel = product_state(&spec, "ud").unwrap();
    let bad = &neel * neel.adjoint();
    let rest = CMatrix::identity(d, d) - &bad;
    assert!(matches!(
        coherence_norm_series(&m, &rho0, &bad, &rest, &times, None),
        Err(Error::NotInCommutant(_))
    ));
}

#[test]
fn coherence_rate_matches_effective_hamiltonian() {
    let m = model(ModelId::Isolated2, 4);
    let spec = m.spec();
    let up = scar_state(&ScarState::FerromagnetUp, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        let rho0 = random_rho(spec.dim(), &mut rng);
        for t in [0.0, 0.5, 2.0] {
            let (lhs, rhs) = coherence_rate_check(&m, &rho0, &up, t).unwrap();
            assert!(rhs < 0.0);
            assert!((lhs - rhs).abs() < 1e-6 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
        }
    }
    let d = spec.dim();
    let pi_s = &up * up.adjoint();
    let pi_th = CMatrix::identity(d, d) - &pi_s;
    let rho0 = random_rho(d, &mut rng);
    let block = &pi_s * &rho0 * &pi_s + &pi_th * &rho0 * &pi_th;
    let (lhs, rhs) = coherence_rate_check(&m, &block, &up, 0.5).unwrap();
    assert!(lhs.abs() < 1e-9 && rhs.abs() < 1e-12);

    let still = m.with_scaled_rates(0.0).unwrap();
    let (lhs, rhs) = coherence_rate_check(&still, &rho0, &up, 0.5).unwrap();
    assert!(lhs.abs() < 1e-8 && rhs.abs() < 1e-12);
}

#[test]
fn heisenberg_equivalence() {
    assert!(heisenberg_map_check(4, 1.0).unwrap() < 1e-10);
    assert!(heisenberg_map_check(6, 0.7).unwrap() < 1e-10);
    assert_eq!(heisenberg_map_check(4, 0.0).unwrap(), 0.0);
    assert!(heisenberg_map_check(5, 1.0).is_err());

    let spec = scarlab::operator::HilbertSpec::spin_one(4, Boundary::Periodic).unwrap();
    let v = spin_half_embedding(&spec).unwrap();
    let p = &v * v.adjoint();
    assert!((&p * &p - &p).norm() < 1e-14);
    assert!((v.adjoint() * &v - CMatrix::identity(16, 16)).norm() < 1e-14);
    let mut h2 = CMatrix::zeros(81, 81);
    for j in spec.bonds() {
        let l = terms::exchange(&spec, j).unwrap();
        h2 += l.matmul(&l).unwrap().to_dense();
    }
    assert!((&h2 * &v - &p * &h2 * &v).norm() < 1e-12);
}

#[test]
fn tower_coherence_law() {
    for len in [4, 6] {
        let case = tower_coherence_case(len, 1, &ModelId::Tower2.default_params()).unwrap();
        let times = grid(20.0, 19);
        let series = case.series(&times).unwrap();
        for (t, c) in times.iter().zip(&series) {
            assert!((c - case.law(*t)).abs() < 1e-8, "L = {len}, t = {t}");
        }
        let q = 2.0 * PI / len as f64;
        assert!((case.law(1.0) - 0.25 * (-2.0 * 4.0 * 2.0 * (q / 2.0).sin().powi(2)).exp()).abs() < 1e-15);
    }
}

#[test]
fn short_time_closed_forms() {
    let params = ModelId::Tower2.default_params();
    for len in [4, 6] {
        let m = build_model(ModelId::Tower2, len, Boundary::Open, &params).unwrap();
        let sz = site_operator(&m.spec(), LocalKind::Z, len / 2).unwrap();
        let k = ScarState::default_momentum(len);
        let r = short_time_derivatives(&m, &ScarState::Aqmbs { n: 1, k }, &sz).unwrap();
        let cf = r.first_closed_form.unwrap();
        assert!((r.first - cf).abs() < 1e-10 * cf.abs(), "{r:?}");
        let expected = -(4.0 / len as f64) * (k / 2.0).cos().powi(2) * 4.0 * (len - 1) as f64;
        assert!((cf - expected).abs() < 1e-12);
        assert!(r.observable_rate.abs() <= r.observable_bound_exact + 1e-12);
        assert!(r.observable_bound_exact <= r.observable_bound + 1e-12);
    }
    let t1 = ModelId::Tower1.default_params();
    for len in [4, 6] {
        let m = build_model(ModelId::Tower1, len, Boundary::Periodic, &t1).unwrap();
        let sz = site_operator(&m.spec(), LocalKind::Z, 1).unwrap();
        let k = ScarState::default_momentum(len);
        let r = short_time_derivatives(&m, &ScarState::Aqmbs { n: 2, k }, &sz).unwrap();
        assert!(r.first.abs() < 1e-12);
        assert_eq!(r.first_closed_form, Some(0.0));
        let cf = r.second_closed_form.unwrap();
        assert!((r.second - cf).abs() < 1e-10 * cf.abs(), "{r:?}");
        let top = short_time_derivatives(&m, &ScarState::Tower { n: len }, &sz).unwrap();
        assert!(top.first.abs() < 1e-12 && top.second.abs() < 1e-12 && top.observable_rate.abs() < 1e-12);
    }
}
