//! Device configuration: everything the optical table parameterizes.
//!
//! Stored as flat TOML with units in the key names. Unknown keys are
//! rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elements::{overlap, DelaySetting, FilterSpec};
use crate::error::{Result, SimError};
use crate::sources::SourceConfig;

/// How the photon sources are modeled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceModel {
    /// Deterministic Bell pairs and a deterministic single photon.
    Ideal,
    /// Truncated down-conversion pairs and a weak coherent pulse.
    Spdc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub rep_rate_hz: f64,
    /// Recorded for provenance; it sets `pair_prob` upstream.
    pub pump_power_mw: f64,
    /// Recorded for provenance; accidental coincidences are not simulated.
    pub coincidence_window_ns: f64,
    pub source_model: SourceModel,
    /// Pair-emission probability per pulse, equal for both passes.
    pub pair_prob: f64,
    /// Mean photon number of the attenuated laser pulse.
    pub mu: f64,
    pub spdc_order: u8,
    pub filter_center_nm: f64,
    pub filter_fwhm_nm: f64,
    /// Path offset between photons 3 and 4.
    pub delay1_um: f64,
    /// Path offset between photons 1 and 2.
    pub delay2_um: f64,
    /// Input mode shifted by Delay 1 (3 or 4).
    pub delay1_mode: u8,
    /// Input mode shifted by Delay 2 (1 or 2).
    pub delay2_mode: u8,
    /// Best achievable overlap of photons 1 and 2 at zero delay.
    pub overlap12: f64,
    /// Best achievable overlap of photons 3 and 4 at zero delay.
    pub overlap34: f64,
    /// Intensity leak into the wrong port of each beam splitter.
    pub pbs_extinction: f64,
    /// Whether leaked light keeps a fixed phase relative to the transmitted
    /// light. When false it is treated as mutually incoherent.
    pub pbs_leak_coherent: bool,
    pub detector_efficiency: f64,
    pub integration_time_s: f64,
    /// Expected events per analysis setting for Monte Carlo counts.
    pub samples_per_setting: f64,
    pub seed: u64,
}

const FITTED_TOML: &str = include_str!("../../../configs/fitted.toml");

impl DeviceConfig {
    /// Noiseless device: deterministic sources, perfect optics and detectors.
    pub fn ideal() -> Self {
        DeviceConfig {
            source_model: SourceModel::Ideal,
            overlap12: 1.0,
            overlap34: 1.0,
            pbs_extinction: 0.0,
            detector_efficiency: 1.0,
            ..Self::fitted()
        }
    }

    /// Noise parameters fitted to the published summary statistics.
    pub fn fitted() -> Self {
        Self::from_toml_str(FITTED_TOML).expect("bundled config is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: DeviceConfig =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(SimError::Config(format!("{what} = {v} out of range")));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.rep_rate_hz) {
            return bad("rep_rate_hz", self.rep_rate_hz);
        }
        if !(self.pump_power_mw >= 0.0 && self.pump_power_mw.is_finite()) {
            return bad("pump_power_mw", self.pump_power_mw);
        }
        if !(self.coincidence_window_ns >= 0.0 && self.coincidence_window_ns.is_finite()) {
            return bad("coincidence_window_ns", self.coincidence_window_ns);
        }
        self.source_config()
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if !finite_pos(self.filter_center_nm) {
            return bad("filter_center_nm", self.filter_center_nm);
        }
        if !finite_pos(self.filter_fwhm_nm) {
            return bad("filter_fwhm_nm", self.filter_fwhm_nm);
        }
        if !self.delay1_um.is_finite() {
            return bad("delay1_um", self.delay1_um);
        }
        if !self.delay2_um.is_finite() {
            return bad("delay2_um", self.delay2_um);
        }
        if !matches!(self.delay1_mode, 3 | 4) {
            return Err(SimError::Config(format!(
                "delay1_mode = {} must be 3 or 4",
                self.delay1_mode
            )));
        }
        if !matches!(self.delay2_mode, 1 | 2) {
            return Err(SimError::Config(format!(
                "delay2_mode = {} must be 1 or 2",
                self.delay2_mode
            )));
        }
        for (name, v) in [
            ("overlap12", self.overlap12),
            ("overlap34", self.overlap34),
            ("detector_efficiency", self.detector_efficiency),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(name, v);
            }
        }
        if !(0.0..1.0).contains(&self.pbs_extinction) {
            return bad("pbs_extinction", self.pbs_extinction);
        }
        if !(self.integration_time_s >= 0.0 && self.integration_time_s.is_finite()) {
            return bad("integration_time_s", self.integration_time_s);
        }
        if !(self.samples_per_setting >= 0.0 && self.samples_per_setting.is_finite()) {
            return bad("samples_per_setting", self.samples_per_setting);
        }
        Ok(())
    }

    pub fn source_config(&self) -> SourceConfig {
        SourceConfig {
            p: self.pair_prob,
            mu: self.mu,
            truncation_order: self.spdc_order,
        }
    }

    pub fn filter(&self) -> FilterSpec {
        FilterSpec {
            center_wavelength: self.filter_center_nm * 1e-9,
            fwhm_bandwidth: self.filter_fwhm_nm * 1e-9,
        }
    }

    /// Effective overlap of photons 3 and 4 at the current Delay 1 setting.
    pub fn gamma34(&self) -> f64 {
        self.overlap34
            * overlap(
                DelaySetting {
                    path_offset: self.delay1_um * 1e-6,
                },
                self.filter(),
            )
    }

    /// Effective overlap of photons 1 and 2 at the current Delay 2 setting.
    pub fn gamma12(&self) -> f64 {
        self.overlap12
            * overlap(
                DelaySetting {
                    path_offset: self.delay2_um * 1e-6,
                },
                self.filter(),
            )
    }

    /// Coherence length of the filtered photons in micrometres.
    pub fn coherence_length_um(&self) -> f64 {
        self.filter().coherence_length() * 1e6
    }
}
