//! Commutant algebras, stationary states and scar dynamics of Lindbladian spin chains.

pub mod algebra;
pub mod brownian;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod operator;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
