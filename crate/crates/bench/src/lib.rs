//! Shared fixtures for the benchmarks.

use fivephoton::measurement::AnalysisBasis;
use fivephoton::protocols::{build_ghz, output};
use fivephoton::{DeviceConfig, PureState, Spatial};

/// Post-selected five-photon state under the fitted noise model.
pub fn fitted_five_photon() -> PureState {
    build_ghz(5, &DeviceConfig::fitted())
        .expect("fitted pipeline")
        .0
}

pub fn five_modes() -> Vec<Spatial> {
    (1..=5).map(output).collect()
}

pub fn pm_bases() -> Vec<AnalysisBasis> {
    vec![AnalysisBasis::PM; 5]
}
