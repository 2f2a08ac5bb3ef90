//! Sparse operators on spin-1/2 and spin-1 chains.

mod csr;
mod local;
mod sector;
mod space;
mod sparse;
mod superop;

pub use csr::{CsrMatrix, PRUNE_TOL};
pub use local::{local_operator, LocalKind};
pub use sector::{
    binomial, project_to_sector, sector_partition, spin_one_zero_sector_dim, Sector,
    SectorPartition,
};
pub use space::{Boundary, HilbertSpec, Space};
pub use sparse::{embed, SparseOperator};
pub use superop::{
    adjoint_superop, double_commutator_superop, unvectorize, vectorize, SparseSuperOperator,
};
