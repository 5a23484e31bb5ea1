pub mod asymptotics;
pub mod bounds;
pub mod config;
pub mod dirac;
pub mod error;
pub mod fock;
pub mod grids;
pub mod hamiltonian;
pub mod kernels;
pub mod landau;
pub mod neutrino;
pub mod quadrature;
pub mod selftest;
pub mod sparse;
pub mod spectral;

pub use config::ModelConfig;
pub use error::{Error, Result};
pub use fock::{FockOperator, FockSpace};
pub use grids::{GridSet, Species};
pub use hamiltonian::Model;
pub use sparse::SparseMatrix;
