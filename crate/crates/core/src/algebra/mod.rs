//! Bond algebras, their commutants and the induced Hilbert-space decomposition.

mod bond;
mod commutant;
mod irreps;
mod mazur;

pub use bond::{super_hamiltonian, BondAlgebra, Generator, Role};
pub use commutant::{
    commutant_basis, commutant_basis_seeded, commutation_residual, CommutantBasis, DEFAULT_KERNEL_TOL,
    DEFAULT_SEED,
};
pub use irreps::{
    irrep_decomposition, stationary_state, strong_symmetry, validate_density_matrix, IrrepBlock,
    IrrepDecomposition, StrongSymmetry,
};
pub use mazur::{hs_inner, mazur_bound};
