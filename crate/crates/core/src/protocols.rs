//! GHZ generation, Bell decomposition, Φ⁺ heralding and open-destination
//! teleportation, run through the simulated optical table.
//!
//! Labels: sources emit into `In(k)`; a beam splitter maps `In(a), In(b)` to
//! `Out(a), Out(b)`; untouched photons are relabeled to `Out(k)` before
//! detection. Delay 1 shifts photon 3 or 4 into fresh time-bin 1, Delay 2
//! shifts photon 1 or 2 into fresh time-bin 2 (configurable, photons 4 and 1
//! by default).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{DeviceConfig, SourceModel};
use crate::elements::{apply_distinguishability, apply_pbs, apply_pbs_incoherent_leak, relabel};
use crate::error::{Result, SimError};
use crate::fock::{
    extract_pol_qubit, normalize, tensor, Ket, Pol, PolKet, PolState, PureState, Spatial,
};
use crate::measurement::{detect_one_per_mode, project_outcomes, AnalysisBasis};
use crate::sources::{bell_pair, single_photon, spdc_state, weak_coherent, BellKind};

const TBIN_DELAY1: u8 = 1;
const TBIN_DELAY2: u8 = 2;
const LEAK_TAG34: u8 = 16;
const LEAK_TAG12: u8 = 64;

/// Emission terms with more than this many photons above the detected
/// number are dropped. Two extra photons is the first noise order in `p`
/// and `μ` (one extra pair, or a second laser photon).
pub const EXTRA_PHOTONS: usize = 2;

/// Drops source terms that cannot yield one photon per detector or exceed
/// the emission order kept. `groups` lists input labels feeding a set of
/// detectors together with that detector count. Returns the remaining
/// (unnormalized) state and its squared norm relative to the input.
fn truncate_sources(s: &PureState, detected: usize, groups: &[(&[u8], usize)]) -> (PureState, f64) {
    let before = s.norm_sqr();
    let kept = s.filter(|k| {
        k.photon_number() <= detected + EXTRA_PHOTONS
            && groups.iter().all(|(ins, need)| {
                ins.iter().map(|&i| k.photons_in(input(i))).sum::<usize>() >= *need
            })
    });
    let w = if before > 0.0 {
        kept.norm_sqr() / before
    } else {
        0.0
    };
    (kept, w)
}

pub fn input(k: u8) -> Spatial {
    Spatial::In(k)
}

pub fn output(k: u8) -> Spatial {
    Spatial::Out(k)
}

/// Entangled pair in `In(i)`, `In(j)`.
pub fn pair_source(cfg: &DeviceConfig, i: u8, j: u8) -> Result<PureState> {
    match cfg.source_model {
        SourceModel::Ideal => bell_pair(BellKind::PhiPlus, input(i), input(j)),
        SourceModel::Spdc => spdc_state(&cfg.source_config(), input(i), input(j)),
    }
}

/// Photon 1 in `In(1)` with polarization `pol`.
pub fn photon1_source(cfg: &DeviceConfig, pol: &PolKet) -> Result<PureState> {
    match cfg.source_model {
        SourceModel::Ideal => Ok(single_photon(input(1), pol)),
        SourceModel::Spdc => weak_coherent(&cfg.source_config(), input(1), pol),
    }
}

/// Delay 1 and the beam splitter joining photons 3 and 4.
pub fn pbs34(s: &PureState, cfg: &DeviceConfig) -> Result<PureState> {
    let s = apply_distinguishability(s, input(cfg.delay1_mode), cfg.gamma34(), TBIN_DELAY1)?;
    splitter(&s, 3, 4, cfg, LEAK_TAG34)
}

/// Delay 2 and the beam splitter joining photons 1 and 2.
pub fn pbs12(s: &PureState, cfg: &DeviceConfig) -> Result<PureState> {
    let s = apply_distinguishability(s, input(cfg.delay2_mode), cfg.gamma12(), TBIN_DELAY2)?;
    splitter(&s, 1, 2, cfg, LEAK_TAG12)
}

fn splitter(s: &PureState, a: u8, b: u8, cfg: &DeviceConfig, leak_tag: u8) -> Result<PureState> {
    let (ia, ib, oa, ob) = (input(a), input(b), output(a), output(b));
    if cfg.pbs_leak_coherent || cfg.pbs_extinction == 0.0 {
        apply_pbs(s, ia, ib, oa, ob, cfg.pbs_extinction)
    } else {
        apply_pbs_incoherent_leak(s, ia, ib, oa, ob, cfg.pbs_extinction, leak_tag)
    }
}

fn detect(s: &PureState, modes: &[u8], cfg: &DeviceConfig) -> Result<(PureState, f64)> {
    let labels: Vec<Spatial> = modes.iter().map(|&k| output(k)).collect();
    detect_one_per_mode(s, &labels, cfg.detector_efficiency)
}

fn nonzero(s: PureState, prob: f64) -> Result<(PureState, f64)> {
    if prob > 0.0 {
        Ok((s, prob))
    } else {
        Err(SimError::Annihilated)
    }
}

/// Conditional GHZ state on the detected outputs and its heralding
/// probability.
///
/// * `n = 3`: photon 1 and pair 2–3 through the 1–2 splitter, detect 1, 2, 3.
/// * `n = 4`: pairs 2–3 and 4–5 through the 3–4 splitter, detect 2..=5.
/// * `n = 5`: all sources and both splitters, detect 1..=5.
pub fn build_ghz(n: usize, cfg: &DeviceConfig) -> Result<(PureState, f64)> {
    cfg.validate()?;
    let (s, kept, modes): (PureState, f64, &[u8]) = match n {
        3 => {
            let s = tensor(
                &photon1_source(cfg, &PolKet::plus())?,
                &pair_source(cfg, 2, 3)?,
            )?;
            let (s, kept) = truncate_sources(&s, 3, &[(&[1, 2], 2), (&[3], 1)]);
            let s = pbs12(&s, cfg)?;
            (relabel(&s, input(3), output(3))?, kept, &[1, 2, 3])
        }
        4 => {
            let s = tensor(&pair_source(cfg, 2, 3)?, &pair_source(cfg, 4, 5)?)?;
            let (s, kept) = truncate_sources(&s, 4, &[(&[2], 1), (&[3, 4], 2), (&[5], 1)]);
            let s = pbs34(&s, cfg)?;
            let s = relabel(&s, input(2), output(2))?;
            (relabel(&s, input(5), output(5))?, kept, &[2, 3, 4, 5])
        }
        5 => {
            let s = five_photon_sources(&PolKet::plus(), cfg)?;
            let (s, kept) = truncate_sources(&s, 5, &[(&[1, 2], 2), (&[3, 4], 2), (&[5], 1)]);
            let s = relabel(&pbs34(&s, cfg)?, input(5), output(5))?;
            let (s, p345) = detect(&s, &[3, 4, 5], cfg)?;
            if p345 == 0.0 {
                return Err(SimError::Annihilated);
            }
            (pbs12(&s, cfg)?, kept * p345, &[1, 2])
        }
        _ => {
            return Err(SimError::InvalidArgument(format!(
                "GHZ size must be 3, 4 or 5, got {n}"
            )))
        }
    };
    let (s, prob) = detect(&s, modes, cfg)?;
    nonzero(s, kept * prob)
}

fn five_photon_sources(pol1: &PolKet, cfg: &DeviceConfig) -> Result<PureState> {
    let pairs = tensor(&pair_source(cfg, 2, 3)?, &pair_source(cfg, 4, 5)?)?;
    tensor(&photon1_source(cfg, pol1)?, &pairs)
}

/// Ideal `(|H…H⟩ + |V…V⟩)/√2` on the given modes.
pub fn ghz_target(modes: &[Spatial]) -> PureState {
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PureState::from_terms(Pol::BOTH.map(|p| {
        (
            Ket::from_photons(modes.iter().map(|&m| crate::fock::Mode::new(m, p))),
            amp,
        )
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellBranch {
    pub bell_kind: BellKind,
    /// Normalized state of the remaining modes (zero when `prob` is 0).
    pub branch_state: PureState,
    pub prob: f64,
}

/// Projects `m1`, `m2` onto each Bell state. Both modes must hold exactly one
/// time-bin-0 photon in every term.
pub fn bell_decompose(joint: &PureState, m1: Spatial, m2: Spatial) -> Result<[BellBranch; 4]> {
    if m1 == m2 {
        return Err(SimError::InvalidArgument("Bell modes must differ".into()));
    }
    let total = joint.norm_sqr();
    if total == 0.0 {
        return Err(SimError::Annihilated);
    }
    let mut split = Vec::with_capacity(joint.len());
    for (k, a) in joint.iter() {
        let mut pols = [Pol::H; 2];
        for (slot, m) in [m1, m2].into_iter().enumerate() {
            let found = k.photons_in(m);
            if found != 1 {
                return Err(SimError::PhotonNumber { spatial: m, found });
            }
            let mode = k
                .photons()
                .find(|x| x.spatial == m)
                .expect("photon present");
            if mode.tbin != 0 {
                return Err(SimError::InvalidArgument(
                    "Bell decomposition needs time-bin 0 photons".into(),
                ));
            }
            pols[slot] = mode.pol;
        }
        let (_, rest) = k.partition(|x| x.spatial == m1 || x.spatial == m2);
        split.push((pols[0].index() * 2 + pols[1].index(), rest, *a));
    }
    Ok(BellKind::ALL.map(|kind| {
        let bell = kind.amplitudes();
        let projected = PureState::from_terms(
            split
                .iter()
                .map(|(idx, rest, a)| (rest.clone(), a * bell[*idx])),
        );
        match normalize(&projected) {
            Ok((s, w)) => BellBranch {
                bell_kind: kind,
                branch_state: s.with_weight(w / total),
                prob: w / total,
            },
            Err(_) => BellBranch {
                bell_kind: kind,
                branch_state: PureState::zero(),
                prob: 0.0,
            },
        }
    }))
}

/// Φ⁺ identification on photons 1 and 2: beam splitter, one detection per
/// output, and a `++` or `−−` coincidence in the ± basis. The outcome is kept
/// as a record so the two accepted results add incoherently. Returns the
/// conditional state and the success probability (0 when nothing survives).
pub fn herald_phi_plus(s: &PureState, cfg: &DeviceConfig) -> Result<(PureState, f64)> {
    for k in [1, 2] {
        if s.iter().all(|(ket, _)| ket.photons_in(input(k)) == 0) {
            return Err(SimError::InvalidArgument(format!("no photon in input {k}")));
        }
    }
    herald(s, cfg, &[vec![0, 0], vec![1, 1]])
}

/// Same as [`herald_phi_plus`] with an arbitrary set of accepted ± outcomes
/// on outputs 1 and 2 (bit 0 = `+`).
pub fn herald(s: &PureState, cfg: &DeviceConfig, accepted: &[Vec<u8>]) -> Result<(PureState, f64)> {
    let routed = pbs12(s, cfg)?;
    let (det, p_det) = detect(&routed, &[1, 2], cfg)?;
    if p_det == 0.0 {
        return Ok((PureState::zero(), 0.0));
    }
    match project_outcomes(
        &det,
        &[output(1), output(2)],
        &[AnalysisBasis::PM; 2],
        accepted,
    ) {
        Ok((out, p)) => Ok((out, p_det * p)),
        Err(SimError::Annihilated) => Ok((PureState::zero(), 0.0)),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(SimError::InvalidArgument(format!("unknown sign {s:?}"))),
        }
    }
}

/// Output photon of the teleportation and the two photons read out in the
/// ± basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Destination {
    pub output: Spatial,
    pub readout_pair: [Spatial; 2],
}

impl Destination {
    pub fn new(k: u8) -> Result<Self> {
        let others: Vec<u8> = [3, 4, 5].into_iter().filter(|&x| x != k).collect();
        if others.len() != 2 {
            return Err(SimError::InvalidArgument(format!(
                "destination must be 3, 4 or 5, got {k}"
            )));
        }
        Ok(Destination {
            output: output(k),
            readout_pair: [output(others[0]), output(others[1])],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correction {
    I,
    Z,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Photon state before the correction.
    pub raw: PolState,
    pub correction: Correction,
    pub corrected: PolState,
    /// Probability of the requested readout outcome.
    pub prob: f64,
}

/// Reads out the two non-destination photons in the ± basis and returns the
/// destination photon. A `Z` correction is due iff the outcomes differ.
pub fn decode(s345: &PureState, dest: Destination, outcomes: (Sign, Sign)) -> Result<Decoded> {
    let bits = vec![outcomes.0.bit(), outcomes.1.bit()];
    let (s, prob) = project_outcomes(s345, &dest.readout_pair, &[AnalysisBasis::PM; 2], &[bits])?;
    let raw = extract_pol_qubit(&s, dest.output)?;
    let correction = if outcomes.0 == outcomes.1 {
        Correction::I
    } else {
        Correction::Z
    };
    let corrected = match correction {
        Correction::I => raw,
        Correction::Z => raw.phase_flipped(),
    };
    Ok(Decoded {
        raw,
        correction,
        corrected,
        prob,
    })
}

/// Resource for teleportation: pairs 2–3 and 4–5 joined at the 3–4 splitter,
/// one detection on each of outputs 3, 4, 5; photon 2 stays in `In(2)`.
pub fn teleport_resource(cfg: &DeviceConfig) -> Result<(PureState, f64)> {
    let s = tensor(&pair_source(cfg, 2, 3)?, &pair_source(cfg, 4, 5)?)?;
    let (s, kept) = truncate_sources(&s, 4, &[(&[2], 1), (&[3, 4], 2), (&[5], 1)]);
    let s = relabel(&pbs34(&s, cfg)?, input(5), output(5))?;
    let (s, prob) = detect(&s, &[3, 4, 5], cfg)?;
    nonzero(s, kept * prob)
}

/// Encoded state on outputs 3, 4, 5 (plus herald records) after Φ⁺
/// identification for an input polarization. All three sources are
/// truncated jointly before the optics.
pub fn encode(input_pol: &PolKet, cfg: &DeviceConfig) -> Result<(PureState, f64)> {
    let s = five_photon_sources(input_pol, cfg)?;
    let (s, kept) = truncate_sources(&s, 5, &[(&[1, 2], 2), (&[3, 4], 2), (&[5], 1)]);
    let s = relabel(&pbs34(&s, cfg)?, input(5), output(5))?;
    let (s, p_res) = detect(&s, &[3, 4, 5], cfg)?;
    if p_res == 0.0 {
        return Err(SimError::Annihilated);
    }
    let (s, p_her) = herald_phi_plus(&s, cfg)?;
    nonzero(s, kept * p_res * p_her)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Teleported {
    pub output: PolState,
    pub raw: PolState,
    pub correction: Correction,
    pub fidelity: f64,
    pub chain_prob: f64,
}

/// Full chain: resource, photon 1, Φ⁺ herald, readout of the two
/// non-destination photons with the given outcomes, correction.
pub fn open_destination_teleport(
    input_pol: &PolKet,
    dest: Destination,
    outcomes: (Sign, Sign),
    cfg: &DeviceConfig,
) -> Result<Teleported> {
    let (encoded, p_enc) = encode(input_pol, cfg)?;
    let d = decode(&encoded, dest, outcomes)?;
    Ok(Teleported {
        fidelity: crate::fock::fidelity(&d.corrected, input_pol),
        output: d.corrected,
        raw: d.raw,
        correction: d.correction,
        chain_prob: p_enc * d.prob,
    })
}

/// Critical GHZ visibility `2^((1−n)/2)` above which an n-party
/// correlation inequality is violated.
pub fn critical_visibility(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(SimError::InvalidArgument(
            "need at least two parties".into(),
        ));
    }
    Ok(2f64.powf((1.0 - n as f64) / 2.0))
}

pub fn violates_local_realism(visibility: f64, n: u32) -> Result<bool> {
    Ok(visibility > critical_visibility(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, inner};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_ghz_sizes() {
        let cfg = DeviceConfig::ideal();
        for (n, p, modes) in [
            (3, 0.5, vec![1, 2, 3]),
            (4, 0.5, vec![2, 3, 4, 5]),
            (5, 0.25, vec![1, 2, 3, 4, 5]),
        ] {
            let (s, prob) = build_ghz(n, &cfg).unwrap();
            assert_abs_diff_eq!(prob, p, epsilon = 1e-12);
            let target = ghz_target(&modes.into_iter().map(output).collect::<Vec<_>>());
            assert_abs_diff_eq!(inner(&target, &s).norm(), 1.0, epsilon = 1e-12);
        }
        assert!(build_ghz(6, &cfg).is_err());
    }

    #[test]
    fn herald_success_and_state() {
        let cfg = DeviceConfig::ideal();
        let (s, p) = encode(&PolKet::plus(), &cfg).unwrap();
        assert_abs_diff_eq!(p, 0.5 * 0.25, epsilon = 1e-12);
        let target = ghz_target(&[output(3), output(4), output(5)]);
        assert_abs_diff_eq!(
            crate::fock::projection_fidelity(&s, &target),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn herald_plus_minus_gives_phi_minus_branch() {
        let cfg = DeviceConfig::ideal();
        let (res, _) = teleport_resource(&cfg).unwrap();
        let pol = PolKet::real(0.6, 0.8).unwrap();
        let joint = tensor(&single_photon(input(1), &pol), &res).unwrap();
        let (s, p) = herald(&joint, &cfg, &[vec![0, 1]]).unwrap();
        assert_abs_diff_eq!(p, 0.125, epsilon = 1e-12);
        let d = decode(&s, Destination::new(3).unwrap(), (Sign::Plus, Sign::Plus)).unwrap();
        let flipped = PolKet::real(0.6, -0.8).unwrap();
        assert_abs_diff_eq!(fidelity(&d.raw, &flipped), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decode_examples() {
        let cfg = DeviceConfig::ideal();
        let pol = PolKet::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let (s, _) = encode(&pol, &cfg).unwrap();
        let d = decode(&s, Destination::new(3).unwrap(), (Sign::Plus, Sign::Minus)).unwrap();
        assert_eq!(d.correction, Correction::Z);
        let pre = PolKet::new(pol.h, -pol.v).unwrap();
        assert_abs_diff_eq!(fidelity(&d.raw, &pre), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&d.corrected, &pol), 1.0, epsilon = 1e-12);
        let d = decode(&s, Destination::new(4).unwrap(), (Sign::Minus, Sign::Minus)).unwrap();
        assert_eq!(d.correction, Correction::I);
        assert_abs_diff_eq!(fidelity(&d.corrected, &pol), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.prob, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn destination_validation() {
        assert!(Destination::new(2).is_err());
        let d = Destination::new(4).unwrap();
        assert_eq!(d.readout_pair, [output(3), output(5)]);
    }

    #[test]
    fn critical_visibility_values() {
        assert_abs_diff_eq!(
            critical_visibility(2).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(critical_visibility(5).unwrap(), 0.25);
        assert!(violates_local_realism(0.59, 5).unwrap());
        assert!(!violates_local_realism(0.25, 5).unwrap());
        assert!(critical_visibility(1).is_err());
    }
}
