//! Sparse exact state algebra over bounded-photon-number Fock space.
//!
//! A state is a map from canonical basis kets (sorted mode occupations) to
//! complex amplitudes. Every optical element is expressed as a linear map on
//! creation operators and pushed through [`PureState::transform_modes`], so
//! bosonic factors are handled in one place.

mod ket;
mod qubit;
mod state;

pub use ket::{Ket, Mode, Pol, Spatial};
pub use qubit::{fidelity, PolKet, PolState};
pub use state::{
    extract_pol_qubit, inner, normalize, projection_fidelity, tensor, PureState, MAX_MODES,
    MAX_PHOTONS, PRUNE_EPS,
};
