use thiserror::Error;

use crate::fock::Spatial;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("post-selection annihilated state")]
    Annihilated,
    #[error("spatial label {0} is occupied by both operands")]
    OverlappingSpatial(Spatial),
    #[error("expected exactly one photon in mode {spatial}, found a term with {found}")]
    PhotonNumber { spatial: Spatial, found: usize },
    #[error("photon number {found} exceeds the cap of {cap}")]
    TooManyPhotons { found: usize, cap: usize },
    #[error("state uses {found} distinct modes, more than the cap of {cap}")]
    TooManyModes { found: usize, cap: usize },
    #[error("time-bin label {0} is already in use")]
    TbinCollision(u8),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl SimError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Annihilated => "annihilated",
            SimError::OverlappingSpatial(_) => "overlapping_spatial",
            SimError::PhotonNumber { .. } => "photon_number",
            SimError::TooManyPhotons { .. } => "too_many_photons",
            SimError::TooManyModes { .. } => "too_many_modes",
            SimError::TbinCollision(_) => "tbin_collision",
            SimError::InvalidArgument(_) => "invalid_argument",
            SimError::Config(_) => "config",
            SimError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
