//! Linear-optical elements as substitutions on creation operators.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{Mode, Pol, PolKet, PureState, Spatial};

pub type Jones = [[Complex64; 2]; 2];

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Band-pass filter in front of a detector. Lengths in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub center_wavelength: f64,
    pub fwhm_bandwidth: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            center_wavelength: 788e-9,
            fwhm_bandwidth: 3e-9,
        }
    }
}

impl FilterSpec {
    pub fn new(center_wavelength: f64, fwhm_bandwidth: f64) -> Result<Self> {
        let f = FilterSpec {
            center_wavelength,
            fwhm_bandwidth,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center_wavelength > 0.0 && self.fwhm_bandwidth > 0.0)
            || !self.center_wavelength.is_finite()
            || !self.fwhm_bandwidth.is_finite()
        {
            return Err(SimError::InvalidArgument(
                "filter wavelength and bandwidth must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `λ₀² / Δλ`.
    pub fn coherence_length(&self) -> f64 {
        self.center_wavelength * self.center_wavelength / self.fwhm_bandwidth
    }
}

/// Signed optical path offset in meters; 0 is perfect overlap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DelaySetting {
    pub path_offset: f64,
}

impl DelaySetting {
    pub fn new(path_offset: f64) -> Result<Self> {
        if !path_offset.is_finite() {
            return Err(SimError::InvalidArgument("delay must be finite".into()));
        }
        Ok(DelaySetting { path_offset })
    }
}

/// Polarizer / analyzer axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolAxis {
    H,
    V,
    Plus,
    Minus,
    R,
    L,
}

impl PolAxis {
    pub fn ket(self) -> PolKet {
        match self {
            PolAxis::H => PolKet::horizontal(),
            PolAxis::V => PolKet::vertical(),
            PolAxis::Plus => PolKet::plus(),
            PolAxis::Minus => PolKet::minus(),
            PolAxis::R => PolKet::right(),
            PolAxis::L => PolKet::left(),
        }
    }
}

/// Applies a 2×2 Jones matrix to every photon in `spatial` (all time-bins).
pub fn apply_jones(s: &PureState, spatial: Spatial, j: &Jones) -> PureState {
    s.transform_modes(|m| {
        (m.spatial == spatial).then(|| {
            let c = m.pol.index();
            vec![(m.with_pol(Pol::H), j[0][c]), (m.with_pol(Pol::V), j[1][c])]
        })
    })
}

/// Half-wave plate with fast axis at `angle` from horizontal.
pub fn hwp_matrix(angle: f64) -> Jones {
    let (s2, c2) = (2.0 * angle).sin_cos();
    [[re(c2), re(s2)], [re(s2), re(-c2)]]
}

/// Quarter-wave plate with fast axis at `angle`: `R(θ) diag(1, −i) R(θ)ᵀ`.
pub fn qwp_matrix(angle: f64) -> Jones {
    let (s, c) = angle.sin_cos();
    let i = Complex64::new(0.0, 1.0);
    [
        [re(c * c) - i * (s * s), (re(1.0) + i) * (c * s)],
        [(re(1.0) + i) * (c * s), re(s * s) - i * (c * c)],
    ]
}

pub fn apply_hwp(s: &PureState, spatial: Spatial, angle: f64) -> PureState {
    apply_jones(s, spatial, &hwp_matrix(angle))
}

pub fn apply_qwp(s: &PureState, spatial: Spatial, angle: f64) -> PureState {
    apply_jones(s, spatial, &qwp_matrix(angle))
}

/// Phase flip `diag(1, −1)` on one spatial mode.
pub fn apply_phase_flip(s: &PureState, spatial: Spatial) -> PureState {
    apply_jones(s, spatial, &[[re(1.0), re(0.0)], [re(0.0), re(-1.0)]])
}

/// Polarizer followed by detection behind it: keeps the terms where the
/// photons in `spatial` pass the axis. Returns the renormalized state and the
/// transmission probability. Terms with no photon in the mode do not count as
/// transmitted. An annihilated state comes back as `(PureState::zero(), 0)`.
pub fn apply_polarizer(s: &PureState, spatial: Spatial, axis: PolAxis) -> (PureState, f64) {
    let a = axis.ket().components();
    let proj: Jones = [
        [a[0] * a[0].conj(), a[0] * a[1].conj()],
        [a[1] * a[0].conj(), a[1] * a[1].conj()],
    ];
    let before = s.norm_sqr();
    let occupied = s.filter(|k| k.photons_in(spatial) > 0);
    let out = apply_jones(&occupied, spatial, &proj);
    let prob = if before > 0.0 {
        out.norm_sqr() / before
    } else {
        0.0
    };
    match crate::fock::normalize(&out) {
        Ok((n, _)) => (n.with_weight(s.weight() * prob), prob),
        Err(_) => (PureState::zero(), 0.0),
    }
}

/// Polarizing beam splitter: transmits H, reflects V.
///
/// `in_a(H)→out_c(H)`, `in_a(V)→out_d(V)`, `in_b(H)→out_d(H)`,
/// `in_b(V)→out_c(V)`. With `extinction > 0` each photon leaks amplitude
/// `√ε` into the wrong port; the leak from `in_b` carries a minus sign so the
/// map stays unitary. Time-bins are preserved.
pub fn apply_pbs(
    s: &PureState,
    in_a: Spatial,
    in_b: Spatial,
    out_c: Spatial,
    out_d: Spatial,
    extinction: f64,
) -> Result<PureState> {
    pbs_impl(s, [in_a, in_b, out_c, out_d], extinction, 0)
}

/// Beam splitter whose leaked amplitude does not interfere with anything
/// else: a photon in time-bin `t` leaking from `in_a` moves to time-bin
/// `t + leak_tag`, one leaking from `in_b` to `t + 2·leak_tag`. Models leak
/// phases that drift independently from pulse to pulse. `leak_tag` must be
/// nonzero and above every time-bin in use.
pub fn apply_pbs_incoherent_leak(
    s: &PureState,
    in_a: Spatial,
    in_b: Spatial,
    out_c: Spatial,
    out_d: Spatial,
    extinction: f64,
    leak_tag: u8,
) -> Result<PureState> {
    let max = s.tbins().last().copied().unwrap_or(0);
    if leak_tag == 0 || max >= leak_tag || max as usize + 2 * leak_tag as usize > u8::MAX as usize {
        return Err(SimError::TbinCollision(leak_tag));
    }
    pbs_impl(s, [in_a, in_b, out_c, out_d], extinction, leak_tag)
}

fn pbs_impl(
    s: &PureState,
    ports: [Spatial; 4],
    extinction: f64,
    leak_tag: u8,
) -> Result<PureState> {
    let [in_a, in_b, out_c, out_d] = ports;
    if in_a == in_b || out_c == out_d {
        return Err(SimError::InvalidArgument(
            "beam splitter ports must be distinct".into(),
        ));
    }
    if !(0.0..1.0).contains(&extinction) {
        return Err(SimError::InvalidArgument(format!(
            "extinction {extinction} outside [0, 1)"
        )));
    }
    let used = s.spatial_labels();
    for out in [out_c, out_d] {
        if out != in_a && out != in_b && used.contains(&out) {
            return Err(SimError::InvalidArgument(format!(
                "output label {out} already occupied"
            )));
        }
    }
    let t = re((1.0 - extinction).sqrt());
    let r = re(extinction.sqrt());
    Ok(s.transform_modes(|m| {
        let to = |sp: Spatial| m.with_spatial(sp);
        let leak_a = |sp: Spatial| m.with_spatial(sp).with_tbin(m.tbin + leak_tag);
        let leak_b = |sp: Spatial| m.with_spatial(sp).with_tbin(m.tbin + 2 * leak_tag);
        let mut v = if m.spatial == in_a {
            match m.pol {
                Pol::H => vec![(to(out_c), t), (leak_a(out_d), r)],
                Pol::V => vec![(to(out_d), t), (leak_a(out_c), r)],
            }
        } else if m.spatial == in_b {
            match m.pol {
                Pol::H => vec![(to(out_d), t), (leak_b(out_c), -r)],
                Pol::V => vec![(to(out_c), t), (leak_b(out_d), -r)],
            }
        } else {
            return None;
        };
        if extinction == 0.0 {
            v.truncate(1);
        }
        Some(v)
    }))
}

/// Moves every photon in `from` to `to` (free propagation).
pub fn relabel(s: &PureState, from: Spatial, to: Spatial) -> Result<PureState> {
    if from != to && s.spatial_labels().contains(&to) {
        return Err(SimError::InvalidArgument(format!(
            "relabel target {to} already occupied"
        )));
    }
    Ok(s.transform_modes(|m| (m.spatial == from).then(|| vec![(m.with_spatial(to), re(1.0))])))
}

/// Temporal overlap `exp(−(d/L_c)²)` with `L_c = λ₀²/Δλ`.
///
/// This is the intensity-level (visibility) overlap: two-photon interference
/// through a beam splitter loses contrast by exactly this factor.
pub fn overlap(d: DelaySetting, f: FilterSpec) -> f64 {
    let x = d.path_offset / f.coherence_length();
    (-x * x).exp()
}

/// Splits every reference-time-bin photon in `spatial` into an overlapping
/// and a fresh, orthogonal time-bin:
/// `a†(0) → √γ a†(0) + √(1−γ) a†(fresh)`. Unitary.
pub fn apply_distinguishability(
    s: &PureState,
    spatial: Spatial,
    gamma: f64,
    fresh_tbin: u8,
) -> Result<PureState> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SimError::InvalidArgument(format!(
            "overlap {gamma} outside [0, 1]"
        )));
    }
    if fresh_tbin == 0 || s.tbins().contains(&fresh_tbin) {
        return Err(SimError::TbinCollision(fresh_tbin));
    }
    if gamma == 1.0 {
        return Ok(s.clone());
    }
    let keep = re(gamma.sqrt());
    let leak = re((1.0 - gamma).sqrt());
    Ok(s.transform_modes(|m| {
        (m.spatial == spatial && m.tbin == 0)
            .then(|| vec![(*m, keep), (m.with_tbin(fresh_tbin), leak)])
    }))
}

pub fn apply_delay(
    s: &PureState,
    spatial: Spatial,
    d: DelaySetting,
    f: FilterSpec,
    fresh_tbin: u8,
) -> Result<PureState> {
    apply_distinguishability(s, spatial, overlap(d, f), fresh_tbin)
}

/// Detector inefficiency as a beam splitter into `Loss(k)`:
/// `a†(m) → √η a†(m) + √(1−η) a†(loss)`.
pub fn apply_loss(s: &PureState, spatial: Spatial, efficiency: f64) -> Result<PureState> {
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(SimError::InvalidArgument(format!(
            "efficiency {efficiency} outside [0, 1]"
        )));
    }
    if efficiency == 1.0 {
        return Ok(s.clone());
    }
    let sink = match spatial {
        Spatial::Out(k) | Spatial::In(k) => Spatial::Loss(k),
        other => {
            return Err(SimError::InvalidArgument(format!(
                "no loss channel for mode {other}"
            )))
        }
    };
    let t = re(efficiency.sqrt());
    let r = re((1.0 - efficiency).sqrt());
    Ok(s.transform_modes(|m| {
        (m.spatial == spatial).then(|| vec![(*m, t), (m.with_spatial(sink), r)])
    }))
}

/// Creation-operator components of a photon with polarization `pol` in `spatial`.
pub fn pol_components(spatial: Spatial, pol: &PolKet) -> [(Mode, Complex64); 2] {
    [
        (Mode::new(spatial, Pol::H), pol.h),
        (Mode::new(spatial, Pol::V), pol.v),
    ]
}
