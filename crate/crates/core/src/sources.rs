//! Photon-state factories: ideal Bell pairs and single photons, SPDC with
//! the double-pair term, and a truncated weak coherent state.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elements::pol_components;
use crate::error::{Result, SimError};
use crate::fock::{normalize, Mode, Pol, PolKet, PureState, Spatial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Amplitudes on `[HH, HV, VH, VV]`.
    pub fn amplitudes(self) -> [f64; 4] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellKind::PhiPlus => [r, 0.0, 0.0, r],
            BellKind::PhiMinus => [r, 0.0, 0.0, -r],
            BellKind::PsiPlus => [0.0, r, r, 0.0],
            BellKind::PsiMinus => [0.0, r, -r, 0.0],
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        })
    }
}

/// Emission parameters shared by the SPDC passes and the attenuated laser.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    /// Pair-emission probability per pulse per SPDC pass.
    pub p: f64,
    /// Mean photon number of the weak coherent pulse.
    pub mu: f64,
    /// Highest retained emission order (1 or 2).
    pub truncation_order: u8,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            p: 1.044e-3,
            mu: 0.05,
            truncation_order: 2,
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(SimError::InvalidArgument(format!(
                "p = {} outside [0, 1)",
                self.p
            )));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "mu = {} must be >= 0",
                self.mu
            )));
        }
        if !matches!(self.truncation_order, 1 | 2) {
            return Err(SimError::InvalidArgument(format!(
                "unsupported truncation order {}",
                self.truncation_order
            )));
        }
        Ok(())
    }

    /// Set when the first neglected order is no longer small against the
    /// retained weight.
    pub fn truncation_warning(&self) -> Option<String> {
        let worst = self.p.max(self.mu);
        (worst * worst >= 0.01).then(|| {
            format!(
                "truncation at order {} is inaccurate for p = {}, mu = {}",
                self.truncation_order, self.p, self.mu
            )
        })
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// One of the four Bell states on spatial modes `i`, `j`, time-bin 0.
pub fn bell_pair(kind: BellKind, i: Spatial, j: Spatial) -> Result<PureState> {
    if i == j {
        return Err(SimError::InvalidArgument(
            "Bell pair needs two distinct modes".into(),
        ));
    }
    let a = kind.amplitudes();
    let mut s = PureState::zero().with_weight(1.0);
    for (idx, (pi, pj)) in [
        (Pol::H, Pol::H),
        (Pol::H, Pol::V),
        (Pol::V, Pol::H),
        (Pol::V, Pol::V),
    ]
    .into_iter()
    .enumerate()
    {
        if a[idx] != 0.0 {
            let term = PureState::vacuum()
                .create(&[(Mode::new(i, pi), c(1.0))])
                .create(&[(Mode::new(j, pj), c(a[idx]))]);
            s = s.plus(&term);
        }
    }
    Ok(s)
}

/// The Φ⁺ pair-creation operator `(a†_iH a†_jH + a†_iV a†_jV)/√2`.
fn create_pair(s: &PureState, i: Spatial, j: Spatial) -> PureState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let hh = s
        .create(&[(Mode::new(i, Pol::H), c(1.0))])
        .create(&[(Mode::new(j, Pol::H), c(r))]);
    let vv = s
        .create(&[(Mode::new(i, Pol::V), c(1.0))])
        .create(&[(Mode::new(j, Pol::V), c(r))]);
    hh.plus(&vv)
}

/// Truncated Φ⁺ down-conversion: `(1 + √p K† + (p/2) K†²)|0⟩`, renormalized.
///
/// `K†|0⟩` is exactly Φ⁺; `K†²|0⟩` has squared norm 3, so the double-pair
/// term carries `3p/4` of the single-pair weight.
pub fn spdc_state(cfg: &SourceConfig, i: Spatial, j: Spatial) -> Result<PureState> {
    cfg.validate()?;
    if i == j {
        return Err(SimError::InvalidArgument(
            "SPDC needs two distinct modes".into(),
        ));
    }
    if let Some(w) = cfg.truncation_warning() {
        log::warn!("{w}");
    }
    let vac = PureState::vacuum();
    let one = create_pair(&vac, i, j);
    let mut s = vac.plus(&one.scaled(c(cfg.p.sqrt())));
    if cfg.truncation_order >= 2 {
        let two = create_pair(&one, i, j);
        s = s.plus(&two.scaled(c(cfg.p / 2.0)));
    }
    Ok(normalize(&s)?.0.with_weight(1.0))
}

/// Coherent state of mean photon number `mu` in polarization `pol`,
/// truncated at the configured order and renormalized.
pub fn weak_coherent(cfg: &SourceConfig, i: Spatial, pol: &PolKet) -> Result<PureState> {
    cfg.validate()?;
    if let Some(w) = cfg.truncation_warning() {
        log::warn!("{w}");
    }
    let comps = pol_components(i, pol);
    let vac = PureState::vacuum();
    let one = vac.create(&comps);
    let mut s = vac.plus(&one.scaled(c(cfg.mu.sqrt())));
    if cfg.truncation_order >= 2 {
        s = s.plus(&one.create(&comps).scaled(c(cfg.mu / 2.0)));
    }
    Ok(normalize(&s)?.0.with_weight(1.0))
}

/// Deterministic single photon.
pub fn single_photon(i: Spatial, pol: &PolKet) -> PureState {
    PureState::vacuum().create(&pol_components(i, pol))
}
