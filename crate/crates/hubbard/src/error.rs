#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidSpec(String),
    #[error("orbital {index} out of range for {n_orb} orbitals")]
    OrbitalOutOfRange { index: usize, n_orb: usize },
    #[error("state {index} out of range for sector dimension {dim}")]
    StateOutOfRange { index: usize, dim: usize },
    #[error("sector dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error(transparent)]
    Solver(#[from] levp_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
