//! The 2D Hubbard model on a periodic `L1 × L2` lattice in momentum space,
//! exposed as a matrix-free [`levp_core::operator::ColumnOracle`] over one
//! total-momentum sector of the determinant basis.

mod basis;
mod error;
mod hamiltonian;
mod lattice;

pub use basis::{enumerate_sector, enumerate_sector_at, sector_dimension, MomentumBasis, DEFAULT_DIM_CAP};
pub use error::{Error, Result};
pub use hamiltonian::{ground_state_reference, GroundState, HubbardHamiltonian, HubbardInfo, NnzStats};
pub use lattice::{dispersion, hf_determinant, Determinant, LatticeSpec, Momentum};
