//! Catalog of Lindbladian spin chains and their scar states.

mod catalog;
mod states;
pub mod terms;

pub use catalog::{bond_algebra, build_model, LindbladModel, ModelId, Params};
pub use states::{
    basis_state, isolated_initial_states, product_state, scar_state, singlet_check, tower_initial_state,
    ScarState, SingletReport, SINGLET_TOL,
};
