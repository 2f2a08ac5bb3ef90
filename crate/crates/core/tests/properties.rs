use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scarlab::algebra::{
    commutant_basis, irrep_decomposition, stationary_state, BondAlgebra, CommutantBasis, DEFAULT_KERNEL_TOL,
};
use scarlab::brownian::{d_eff, BrownianSpec};
use scarlab::dynamics::{evolve_exact, liouvillian, magnetization_commutator};
use scarlab::linalg::hermitian_eigen;
use scarlab::models::{bond_algebra, build_model, scar_state, singlet_check, terms, ModelId, ScarState};
use scarlab::operator::{
    adjoint_superop, embed, local_operator, sector_partition, vectorize, Boundary, HilbertSpec, LocalKind,
};
use scarlab::{CMatrix, CVector, C64};

fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_rho(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let a = random_matrix(d, rng);
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

fn boundary() -> impl Strategy<Value = Boundary> {
    prop_oneof![Just(Boundary::Open), Just(Boundary::Periodic)]
}

/// Catalog model with a chain short enough for dense checks.
fn small_model() -> impl Strategy<Value = (ModelId, usize)> {
    prop::sample::select(ModelId::ALL.to_vec()).prop_flat_map(|id| {
        let hi = if id.local_dim() == 3 { 3 } else { 4 };
        (Just(id), id.min_len().max(2)..=hi)
    })
}

fn commutant(id: ModelId, len: usize) -> (BondAlgebra, CommutantBasis) {
    let a = bond_algebra(id, len, Boundary::Open).unwrap();
    let c = commutant_basis(&a, DEFAULT_KERNEL_TOL).unwrap();
    (a, c)
}

const SPIN_HALF_KINDS: [LocalKind; 6] = [
    LocalKind::X,
    LocalKind::Y,
    LocalKind::Z,
    LocalKind::Plus,
    LocalKind::Minus,
    LocalKind::ProjUp,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distinct_site_operators_commute_exactly(
        len in 2usize..=6,
        a in prop::sample::select(SPIN_HALF_KINDS.to_vec()),
        b in prop::sample::select(SPIN_HALF_KINDS.to_vec()),
        s1 in 1usize..=6,
        s2 in 1usize..=6,
    ) {
        prop_assume!(s1 <= len && s2 <= len && s1 != s2);
        let spec = HilbertSpec::spin_half(len, Boundary::Open).unwrap();
        let x = embed(&[(s1, local_operator(a, 2).unwrap())], &spec).unwrap();
        let y = embed(&[(s2, local_operator(b, 2).unwrap())], &spec).unwrap();
        let diff = x.matmul(&y).unwrap().sub(&y.matmul(&x).unwrap()).unwrap();
        prop_assert_eq!(diff.frobenius_norm(), 0.0);
    }

    #[test]
    fn adjoint_superop_matches_commutator(len in 2usize..=3, local_dim in 2usize..=3, seed: u64) {
        let spec = HilbertSpec::new(len, local_dim, Boundary::Open).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kind = if rng.random_bool(0.5) { LocalKind::X } else { LocalKind::Plus };
        let a = embed(&[(rng.random_range(1..=len), local_operator(kind, local_dim).unwrap())], &spec).unwrap();
        let ad = adjoint_superop(&a);
        let x = random_matrix(spec.dim(), &mut rng);
        let expected = vectorize(&(a.mul_dense(&x) - a.dense_mul(&x)));
        let got = CVector::from_vec(ad.apply_vec(vectorize(&x).as_slice()));
        prop_assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn sector_dimensions_sum_to_hilbert_dimension(len in 2usize..=8, local_dim in 2usize..=3, b in boundary()) {
        let spec = HilbertSpec::new(len, local_dim, b).unwrap();
        let p = sector_partition(&spec);
        let total: usize = p.sectors().iter().map(|s| s.dim()).sum();
        prop_assert_eq!(total, local_dim.pow(len as u32));
    }

    #[test]
    fn tower_magnetization_and_exchange_moments(len in 3usize..=6, n in 0usize..=6, m in 0usize..6, b in boundary()) {
        // the momentum-π tower closes around a periodic chain only for even L
        prop_assume!(n <= len && m < len && (b == Boundary::Open || len % 2 == 0));
        let spec = HilbertSpec::spin_one(len, b).unwrap();
        let mz = terms::total_z(&spec).unwrap();
        let t = scar_state(&ScarState::Tower { n }, &spec).unwrap();
        prop_assert!((mz.expectation(&t).re - (2 * n) as f64 + len as f64).abs() < 1e-12);
        prop_assert!((mz.apply(&t) - &t * C64::new(2.0 * n as f64 - len as f64, 0.0)).norm() < 1e-10);

        prop_assume!(n >= 1 && n < len);
        let k = PI + 2.0 * PI * m as f64 / len as f64;
        let Ok(psi) = scar_state(&ScarState::Aqmbs { n, k }, &spec) else {
            return Ok(());
        };
        let expected = 4.0 / len as f64 * (k / 2.0).cos().powi(2);
        for j in spec.bonds() {
            let l = terms::exchange(&spec, j).unwrap();
            let lpsi = l.apply(&psi);
            prop_assert!(psi.dotc(&lpsi).norm() < 1e-10);
            prop_assert!((lpsi.norm_squared() - expected).abs() < 1e-10, "bond {j}: {} vs {expected}", lpsi.norm_squared());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn commutant_commutes_with_random_words((id, len) in small_model(), seed: u64) {
        let (a, c) = commutant(id, len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gens = a.generators();
        let d = a.spec().dim();
        let basis = c.dense();
        for _ in 0..5 {
            let mut word = CMatrix::identity(d, d);
            for _ in 0..rng.random_range(1..=4) {
                word = gens[rng.random_range(0..gens.len())].op.mul_dense(&word);
            }
            let scale = word.norm().max(1.0);
            for q in &basis {
                prop_assert!((&word * q - q * &word).norm() / scale < 1e-9);
            }
        }
    }

    #[test]
    fn irrep_blocks_account_for_the_space((id, len) in small_model(), seed: u64) {
        let (a, c) = commutant(id, len);
        let decomp = irrep_decomposition(&a, &c, seed).unwrap();
        prop_assert_eq!(decomp.total_dim(), a.spec().dim());
        prop_assert_eq!(decomp.commutant_dim(), c.dim());
        let q = c.dense();
        let abelian = q.iter().all(|a| q.iter().all(|b| (a * b - b * a).norm() < 1e-9));
        if abelian {
            prop_assert_eq!(decomp.krylov_count(), c.dim());
        }
    }

    #[test]
    fn declared_scars_are_singlets(len in 3usize..=5, n in 0usize..=5, b in boundary()) {
        prop_assume!(n <= len);
        for id in [ModelId::Isolated1, ModelId::Isolated2] {
            let a = bond_algebra(id, len, b).unwrap();
            let mut scars = vec![ScarState::FerromagnetUp];
            if id == ModelId::Isolated2 {
                scars.push(ScarState::FerromagnetDown);
            }
            for s in scars {
                let psi = scar_state(&s, &a.spec()).unwrap();
                prop_assert!(singlet_check(&a, &psi).is_singlet(), "{id} {s:?}");
            }
        }
        prop_assume!(len <= 4 && (b == Boundary::Open || len % 2 == 0));
        for id in [ModelId::Tower1, ModelId::Tower2] {
            let a = bond_algebra(id, len, b).unwrap();
            let psi = scar_state(&ScarState::Tower { n }, &a.spec()).unwrap();
            prop_assert!(singlet_check(&a, &psi).is_singlet(), "{id} tower {n}");
        }
    }

    #[test]
    fn exact_evolution_preserves_states((id, len) in small_model(), seed: u64, t in 0.0f64..20.0) {
        let len = len.min(3);
        let model = build_model(id, len, Boundary::Open, &id.default_params()).unwrap();
        let d = model.spec().dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho0 = random_rho(d, &mut rng);
        let r = evolve_exact(&model, &rho0, &[t], None).unwrap();
        let rho = &r.states()[0];
        prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-8);
        prop_assert!((rho - rho.adjoint()).norm() < 1e-8);
        let (values, _) = hermitian_eigen(rho);
        prop_assert!(values[0] > -1e-7);

        let c = commutant_basis(model.algebra(), DEFAULT_KERNEL_TOL).unwrap();
        for q in c.operators() {
            let before = q.trace_with(&rho0);
            let after = q.trace_with(rho);
            prop_assert!((before - after).norm() < 1e-8);
        }
    }

    #[test]
    fn stationary_states_are_fixed_points((id, len) in small_model(), seed: u64) {
        let len = len.min(3);
        let model = build_model(id, len, Boundary::Open, &id.default_params()).unwrap();
        let c = commutant_basis(model.algebra(), DEFAULT_KERNEL_TOL).unwrap();
        let decomp = irrep_decomposition(model.algebra(), &c, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho_ss = stationary_state(&decomp, &random_rho(model.spec().dim(), &mut rng)).unwrap();
        let l = liouvillian(&model).unwrap();
        prop_assert!(l.apply(&rho_ss).norm() < 1e-8);
    }

    #[test]
    fn d_eff_is_positive((id, len) in small_model(), k in 0.05f64..2.0, gamma in 0.0f64..2.0) {
        let len = len.min(3);
        let a = bond_algebra(id, len, Boundary::Open).unwrap();
        let spec = BrownianSpec::uniform(a, k, gamma, 1e-2, 1, 0).unwrap();
        let (values, _) = hermitian_eigen(&d_eff(&spec).unwrap().to_dense());
        prop_assert!(values[0] >= -1e-10);
    }
}

#[test]
fn tower_liouvillians_conserve_magnetization() {
    for id in [ModelId::Tower1, ModelId::Tower2] {
        for len in 2..=3 {
            for b in [Boundary::Open, Boundary::Periodic] {
                let m = build_model(id, len, b, &id.default_params()).unwrap();
                assert!(magnetization_commutator(&m).unwrap() < 1e-12);
            }
        }
    }
}
