//! Simulator for post-selected, polarization-encoded linear-optical
//! experiments: two-pair GHZ generation through polarizing beam splitters,
//! Bell-state heralding and open-destination teleportation, with
//! distinguishability, multi-pair emission, detector loss and imperfect
//! beam-splitter extinction.

pub mod config;
pub mod elements;
pub mod error;
pub mod fock;
pub mod harness;
pub mod measurement;
pub mod protocols;
pub mod sources;

pub use config::{DeviceConfig, SourceModel};
pub use error::{Result, SimError};
pub use fock::{Ket, Mode, Pol, PolKet, PolState, PureState, Spatial};
