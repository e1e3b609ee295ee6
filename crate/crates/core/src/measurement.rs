//! Polarization analysis, coincidence post-selection, outcome enumeration and
//! Poisson count generation.
//!
//! Detectors do not resolve time-bins or see loss/record modes, so every
//! probability here sums incoherently over those labels.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::elements::apply_qwp;
use crate::error::{Result, SimError};
use crate::fock::{normalize, Ket, Mode, Pol, PureState, Spatial};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnalysisBasis {
    /// H (bit 0) / V (bit 1)
    HV,
    /// + (bit 0) / − (bit 1)
    PM,
    /// R (bit 0) / L (bit 1), realized as a quarter-wave plate at 0 then PM
    RL,
}

impl AnalysisBasis {
    pub fn symbol(self, bit: u8) -> char {
        match (self, bit) {
            (AnalysisBasis::HV, 0) => 'H',
            (AnalysisBasis::HV, _) => 'V',
            (AnalysisBasis::PM, 0) => '+',
            (AnalysisBasis::PM, _) => '-',
            (AnalysisBasis::RL, 0) => 'R',
            (AnalysisBasis::RL, _) => 'L',
        }
    }

    /// `⟨outcome|pol⟩` after the analysis optics. Real in every basis since
    /// RL is reduced to PM by the wave plate.
    fn projection(self, bit: u8, pol: Pol) -> f64 {
        match self {
            AnalysisBasis::HV => {
                if bit as usize == pol.index() {
                    1.0
                } else {
                    0.0
                }
            }
            AnalysisBasis::PM | AnalysisBasis::RL => {
                if bit == 1 && pol == Pol::V {
                    -SQRT_HALF
                } else {
                    SQRT_HALF
                }
            }
        }
    }
}

impl fmt::Display for AnalysisBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnalysisBasis::HV => "HV",
            AnalysisBasis::PM => "PM",
            AnalysisBasis::RL => "RL",
        })
    }
}

impl FromStr for AnalysisBasis {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HV" => Ok(AnalysisBasis::HV),
            "PM" => Ok(AnalysisBasis::PM),
            "RL" => Ok(AnalysisBasis::RL),
            _ => Err(SimError::InvalidArgument(format!("unknown basis {s:?}"))),
        }
    }
}

fn basis_string(bases: &[AnalysisBasis]) -> String {
    bases
        .iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join(".")
}

fn parse_basis_string(s: &str) -> Result<Vec<AnalysisBasis>> {
    s.split('.').map(str::parse).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeEntry {
    pub outcome: String,
    pub probability: f64,
    pub count: Option<u64>,
}

/// Joint outcome probabilities for one analysis setting on a set of modes.
/// Entries cover all `2ⁿ` outcomes; mode 0 is the leftmost symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeTable {
    pub modes: Vec<Spatial>,
    pub bases: Vec<AnalysisBasis>,
    pub entries: Vec<OutcomeEntry>,
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    outcome: String,
    basis: String,
    probability: f64,
    count: Option<u64>,
}

impl OutcomeTable {
    pub fn label(bases: &[AnalysisBasis], index: usize) -> String {
        let n = bases.len();
        bases
            .iter()
            .enumerate()
            .map(|(k, b)| b.symbol(((index >> (n - 1 - k)) & 1) as u8))
            .collect()
    }

    pub fn index_of(&self, outcome: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.outcome == outcome)
    }

    pub fn probability(&self, outcome: &str) -> Option<f64> {
        self.index_of(outcome).map(|i| self.entries[i].probability)
    }

    pub fn count(&self, outcome: &str) -> Option<u64> {
        self.index_of(outcome).and_then(|i| self.entries[i].count)
    }

    pub fn total_probability(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn basis_string(&self) -> String {
        basis_string(&self.bases)
    }

    /// Marginal over the listed mode positions, keyed by the reduced label.
    pub fn marginal(&self, keep: &[usize]) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            let chars: Vec<char> = e.outcome.chars().collect();
            let key: String = keep.iter().map(|&k| chars[k]).collect();
            *out.entry(key).or_insert(0.0) += e.probability;
        }
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let basis = self.basis_string();
        for e in &self.entries {
            w.serialize(CsvRow {
                outcome: e.outcome.clone(),
                basis: basis.clone(),
                probability: e.probability,
                count: e.count,
            })
            .map_err(|e| SimError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| SimError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| SimError::Io(e.to_string()))
    }

    /// Inverse of [`OutcomeTable::to_csv`]; the mode labels are not part of
    /// the CSV and must be supplied.
    pub fn from_csv(text: &str, modes: Vec<Spatial>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut bases = None;
        for row in r.deserialize::<CsvRow>() {
            let row = row.map_err(|e| SimError::Io(e.to_string()))?;
            if bases.is_none() {
                bases = Some(parse_basis_string(&row.basis)?);
            }
            entries.push(OutcomeEntry {
                outcome: row.outcome,
                probability: row.probability,
                count: row.count,
            });
        }
        let bases = bases.ok_or_else(|| SimError::Io("empty outcome CSV".into()))?;
        if bases.len() != modes.len() {
            return Err(SimError::InvalidArgument(
                "mode/basis count mismatch".into(),
            ));
        }
        Ok(OutcomeTable {
            modes,
            bases,
            entries,
        })
    }
}

/// Expected event count and RNG seed for sampling an [`OutcomeTable`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountModel {
    pub expected_total: f64,
    pub rng_seed: u64,
}

fn check_distinct(modes: &[Spatial]) -> Result<()> {
    for (i, a) in modes.iter().enumerate() {
        if modes[i + 1..].contains(a) {
            return Err(SimError::InvalidArgument(format!("mode {a} listed twice")));
        }
    }
    Ok(())
}

/// Keeps the terms with exactly one photon (any polarization or time-bin) in
/// every listed mode. Returns the renormalized state, whose weight absorbs the
/// success probability, and that probability. Zero success gives
/// `(PureState::zero(), 0.0)`.
pub fn post_select_one_per_mode(s: &PureState, modes: &[Spatial]) -> Result<(PureState, f64)> {
    check_distinct(modes)?;
    let before = s.norm_sqr();
    let kept = s.filter(|k| modes.iter().all(|&m| k.photons_in(m) == 1));
    if kept.is_empty() || before == 0.0 {
        return Ok((PureState::zero(), 0.0));
    }
    let (n, after) = normalize(&kept)?;
    let prob = after / before;
    Ok((n.with_weight(s.weight() * prob), prob))
}

/// Detector efficiency followed by one-photon-per-mode post-selection.
///
/// Equivalent to [`apply_loss`] then [`post_select_one_per_mode`] on each
/// mode, computed directly: a mode holding `N` photons, `n_j` of them in
/// sub-mode `j`, keeps one photon of `j` with amplitude
/// `√n_j · √η · √(1−η)^(N−1)`; the others move to `Loss(k)`.
pub fn detect_one_per_mode(
    s: &PureState,
    modes: &[Spatial],
    efficiency: f64,
) -> Result<(PureState, f64)> {
    check_distinct(modes)?;
    if !(0.0..=1.0).contains(&efficiency) {
        return Err(SimError::InvalidArgument(format!(
            "efficiency {efficiency} outside [0, 1]"
        )));
    }
    let sinks = modes
        .iter()
        .map(|m| match *m {
            Spatial::Out(k) | Spatial::In(k) => Ok(Spatial::Loss(k)),
            other => Err(SimError::InvalidArgument(format!(
                "no loss channel for mode {other}"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let before = s.norm_sqr();
    if before == 0.0 {
        return Ok((PureState::zero(), 0.0));
    }
    let t = efficiency.sqrt();
    let r = (1.0 - efficiency).sqrt();
    let mut cur: Vec<(Ket, Complex64)> = s.iter().map(|(k, a)| (k.clone(), *a)).collect();
    for (&m, &sink) in modes.iter().zip(&sinks) {
        let mut next: BTreeMap<Ket, Complex64> = BTreeMap::new();
        for (k, a) in &cur {
            let (here, rest) = k.partition(|x| x.spatial == m);
            let total: usize = here.occupations().iter().map(|&(_, n)| n as usize).sum();
            if total == 0 || (r == 0.0 && total > 1) {
                continue;
            }
            let loss_factor = r.powi(total as i32 - 1);
            for (j, &(keep, nj)) in here.occupations().iter().enumerate() {
                let amp = a * ((nj as f64).sqrt() * t * loss_factor);
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let lost = here
                    .occupations()
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &(x, n))| {
                        let n = if i == j { n - 1 } else { n };
                        (n > 0).then_some((x.with_spatial(sink), n))
                    });
                let ket = Ket::from_occupations(
                    rest.occupations()
                        .iter()
                        .copied()
                        .chain(std::iter::once((keep, 1)))
                        .chain(lost),
                );
                *next.entry(ket).or_default() += amp;
            }
        }
        cur = next.into_iter().collect();
        if cur.is_empty() {
            return Ok((PureState::zero(), 0.0));
        }
    }
    let kept = PureState::from_terms(cur);
    if kept.is_empty() {
        return Ok((PureState::zero(), 0.0));
    }
    let (n, after) = normalize(&kept)?;
    let prob = after / before;
    Ok((n.with_weight(s.weight() * prob), prob))
}

fn rotate_rl(s: &PureState, modes: &[Spatial], bases: &[AnalysisBasis]) -> PureState {
    let mut cur = s.clone();
    for (m, b) in modes.iter().zip(bases) {
        if *b == AnalysisBasis::RL {
            cur = apply_qwp(&cur, *m, 0.0);
        }
    }
    cur
}

/// Measured photons of a term: (polarization bits, time-bins) and the
/// remaining environment ket.
fn split_measured(k: &Ket, modes: &[Spatial]) -> Result<(usize, Vec<u8>, Ket)> {
    let mut code = 0usize;
    let mut tbins = Vec::with_capacity(modes.len());
    for &m in modes {
        let found = k.photons_in(m);
        if found != 1 {
            return Err(SimError::PhotonNumber { spatial: m, found });
        }
        let (mode, _) = k
            .occupations()
            .iter()
            .find(|(x, _)| x.spatial == m)
            .copied()
            .expect("photon present");
        code = (code << 1) | mode.pol.index();
        tbins.push(mode.tbin);
    }
    let (_, env) = k.partition(|x| modes.contains(&x.spatial));
    Ok((code, tbins, env))
}

fn check_setup(modes: &[Spatial], bases: &[AnalysisBasis]) -> Result<()> {
    check_distinct(modes)?;
    if modes.len() != bases.len() || modes.is_empty() || modes.len() > 16 {
        return Err(SimError::InvalidArgument(
            "need one basis per mode and 1..=16 modes".into(),
        ));
    }
    Ok(())
}

/// Probability of every joint analysis outcome on `modes`.
///
/// Requires exactly one photon per listed mode in every term. Outcomes that
/// differ only in unresolved labels (time-bins, other modes) add
/// incoherently.
pub fn outcome_distribution(
    s: &PureState,
    modes: &[Spatial],
    bases: &[AnalysisBasis],
) -> Result<OutcomeTable> {
    check_setup(modes, bases)?;
    let n = modes.len();
    let rotated = rotate_rl(s, modes, bases);
    let norm = rotated.norm_sqr();
    if norm == 0.0 {
        return Err(SimError::Annihilated);
    }
    let mut groups: BTreeMap<(Vec<u8>, Ket), BTreeMap<usize, Complex64>> = BTreeMap::new();
    for (k, a) in rotated.iter() {
        let (code, tbins, env) = split_measured(k, modes)?;
        *groups
            .entry((tbins, env))
            .or_default()
            .entry(code)
            .or_default() += a;
    }
    let outcomes = 1usize << n;
    let mut probs = vec![0.0; outcomes];
    // per mode: matrix[bit][pol]
    let proj: Vec<[[f64; 2]; 2]> = bases
        .iter()
        .map(|b| {
            let mut m = [[0.0; 2]; 2];
            for (bit, row) in m.iter_mut().enumerate() {
                for (p, x) in row.iter_mut().enumerate() {
                    *x = b.projection(bit as u8, Pol::from_index(p));
                }
            }
            m
        })
        .collect();
    for codes in groups.values() {
        for (o, prob) in probs.iter_mut().enumerate() {
            let mut amp = Complex64::default();
            for (&code, &a) in codes {
                let mut f = 1.0;
                for (k, pm) in proj.iter().enumerate() {
                    let shift = n - 1 - k;
                    f *= pm[(o >> shift) & 1][(code >> shift) & 1];
                    if f == 0.0 {
                        break;
                    }
                }
                amp += a * f;
            }
            *prob += amp.norm_sqr();
        }
    }
    let entries = probs
        .into_iter()
        .enumerate()
        .map(|(i, p)| OutcomeEntry {
            outcome: OutcomeTable::label(bases, i),
            probability: p / norm,
            count: None,
        })
        .collect();
    Ok(OutcomeTable {
        modes: modes.to_vec(),
        bases: bases.to_vec(),
        entries,
    })
}

/// Projects the listed modes onto the accepted outcomes and keeps the
/// classical result in the state: each measured photon becomes a
/// `Record(k)` photon whose polarization encodes the outcome bit (H = 0) and
/// whose time-bin is unchanged. Different outcomes therefore stay mutually
/// incoherent. Returns the renormalized state and the acceptance
/// probability; errors with [`SimError::Annihilated`] when it is zero.
pub fn project_outcomes(
    s: &PureState,
    modes: &[Spatial],
    bases: &[AnalysisBasis],
    accepted: &[Vec<u8>],
) -> Result<(PureState, f64)> {
    check_setup(modes, bases)?;
    let records: Vec<Spatial> = modes
        .iter()
        .map(|m| match *m {
            Spatial::Out(k) | Spatial::In(k) => Ok(Spatial::Record(k)),
            other => Err(SimError::InvalidArgument(format!(
                "cannot measure mode {other}"
            ))),
        })
        .collect::<Result<_>>()?;
    let used = s.spatial_labels();
    if let Some(r) = records.iter().find(|r| used.contains(r)) {
        return Err(SimError::InvalidArgument(format!(
            "record {r} already present"
        )));
    }
    let rotated = rotate_rl(s, modes, bases);
    let before = rotated.norm_sqr();
    let mut out: Vec<(Ket, Complex64)> = Vec::new();
    for (k, a) in rotated.iter() {
        let (code, tbins, env) = split_measured(k, modes)?;
        for bits in accepted {
            if bits.len() != modes.len() {
                return Err(SimError::InvalidArgument("outcome length mismatch".into()));
            }
            let mut f = 1.0;
            for (idx, b) in bases.iter().enumerate() {
                let pol = Pol::from_index((code >> (modes.len() - 1 - idx)) & 1);
                f *= b.projection(bits[idx], pol);
            }
            if f == 0.0 {
                continue;
            }
            let rec =
                records.iter().zip(bits).zip(&tbins).map(|((r, &bit), &t)| {
                    Mode::new(*r, Pol::from_index(bit as usize)).with_tbin(t)
                });
            let ket = Ket::from_photons(env.photons().chain(rec));
            out.push((ket, a * f));
        }
    }
    let projected = PureState::from_terms(out);
    let (n, after) = normalize(&projected)?;
    let prob = if before > 0.0 { after / before } else { 0.0 };
    Ok((n.with_weight(s.weight() * prob), prob))
}

/// Poisson counts with mean `expected_total × probability`, one independent
/// ChaCha stream per outcome index.
pub fn sample_counts(t: &OutcomeTable, cm: &CountModel) -> Result<OutcomeTable> {
    if !(cm.expected_total >= 0.0 && cm.expected_total.is_finite()) {
        return Err(SimError::InvalidArgument(
            "expected_total must be finite and >= 0".into(),
        ));
    }
    let mut out = t.clone();
    for (idx, e) in out.entries.iter_mut().enumerate() {
        let mean = cm.expected_total * e.probability.max(0.0);
        let count = if mean > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cm.rng_seed);
            rng.set_stream(idx as u64);
            let d = Poisson::new(mean).map_err(|e| SimError::InvalidArgument(e.to_string()))?;
            d.sample(&mut rng) as u64
        } else {
            0
        };
        e.count = Some(count);
    }
    Ok(out)
}

/// Fringe contrast `(max − min)/(max + min)`.
pub fn visibility(n_max: f64, n_min: f64) -> Result<f64> {
    if n_max < 0.0 || n_min < 0.0 || n_max + n_min <= 0.0 || (n_max + n_min).is_nan() {
        return Err(SimError::InvalidArgument(
            "visibility needs non-negative counts with a positive sum".into(),
        ));
    }
    Ok((n_max - n_min) / (n_max + n_min))
}

/// Signal-to-noise ratio; `Infinite` when the noise floor is exactly zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Snr {
    Finite(f64),
    Infinite,
}

impl Snr {
    pub fn value(self) -> f64 {
        match self {
            Snr::Finite(x) => x,
            Snr::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Finite(x) => write!(f, "{x:.3}"),
            Snr::Infinite => f.write_str("inf"),
        }
    }
}

fn split_desired<'a>(
    values: impl Iterator<Item = (&'a str, f64)>,
    desired: &[&str],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut d, mut u) = (Vec::new(), Vec::new());
    for (label, v) in values {
        if desired.contains(&label) {
            d.push(v);
        } else {
            u.push(v);
        }
    }
    if d.is_empty() || u.is_empty() || d.len() != desired.len() {
        return Err(SimError::InvalidArgument(
            "desired set must be a nonempty proper subset of the outcomes".into(),
        ));
    }
    Ok((d, u))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ratio(num: f64, den: f64) -> Snr {
    if den == 0.0 {
        Snr::Infinite
    } else {
        Snr::Finite(num / den)
    }
}

/// Mean desired probability over mean non-desired probability.
pub fn snr(t: &OutcomeTable, desired: &[&str]) -> Result<Snr> {
    let (d, u) = split_desired(
        t.entries
            .iter()
            .map(|e| (e.outcome.as_str(), e.probability)),
        desired,
    )?;
    Ok(ratio(mean(&d), mean(&u)))
}

/// Same ratio of means computed from sampled counts.
pub fn snr_counts(t: &OutcomeTable, desired: &[&str]) -> Result<Snr> {
    let vals = t
        .entries
        .iter()
        .map(|e| {
            e.count
                .map(|c| (e.outcome.as_str(), c as f64))
                .ok_or_else(|| SimError::InvalidArgument("table has no counts".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (d, u) = split_desired(vals.into_iter(), desired)?;
    Ok(ratio(mean(&d), mean(&u)))
}

/// Worst-case variant: smallest desired over largest non-desired.
pub fn snr_min_max(t: &OutcomeTable, desired: &[&str]) -> Result<Snr> {
    let (d, u) = split_desired(
        t.entries
            .iter()
            .map(|e| (e.outcome.as_str(), e.probability)),
        desired,
    )?;
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(0.0, f64::max);
    Ok(ratio(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::apply_loss;
    use crate::sources::{bell_pair, BellKind};
    use approx::assert_abs_diff_eq;

    fn out(k: u8) -> Spatial {
        Spatial::Out(k)
    }

    #[test]
    fn bell_in_pm_basis() {
        let s = bell_pair(BellKind::PhiPlus, out(1), out(2)).unwrap();
        let t = outcome_distribution(&s, &[out(1), out(2)], &[AnalysisBasis::PM; 2]).unwrap();
        assert_abs_diff_eq!(t.probability("++").unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.probability("--").unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(t.probability("+-").unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn both_photons_in_one_port_fail_post_selection() {
        let s = PureState::basis(Ket::from_photons([
            Mode::new(out(3), Pol::H),
            Mode::new(out(3), Pol::V),
        ]));
        let (z, p) = post_select_one_per_mode(&s, &[out(3), out(4)]).unwrap();
        assert_eq!(p, 0.0);
        assert!(z.is_empty());
        assert!(post_select_one_per_mode(&s, &[out(3), out(3)]).is_err());
    }

    #[test]
    fn direct_detection_matches_loss_then_filter() {
        let s = crate::sources::spdc_state(
            &crate::sources::SourceConfig {
                p: 0.2,
                mu: 0.0,
                truncation_order: 2,
            },
            out(1),
            out(2),
        )
        .unwrap();
        let s = crate::elements::apply_distinguishability(&s, out(1), 0.6, 1).unwrap();
        for eta in [1.0, 0.7, 0.3] {
            let (a, pa) = detect_one_per_mode(&s, &[out(1), out(2)], eta).unwrap();
            let mut b = s.clone();
            for m in [out(1), out(2)] {
                b = apply_loss(&b, m, eta).unwrap();
            }
            let (b, pb) = post_select_one_per_mode(&b, &[out(1), out(2)]).unwrap();
            assert_abs_diff_eq!(pa, pb, epsilon = 1e-14);
            assert_eq!(a.len(), b.len());
            for (k, amp) in a.iter() {
                assert_abs_diff_eq!((amp - b.amplitude(k)).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn outcome_distribution_rejects_missing_photon() {
        let s = bell_pair(BellKind::PhiPlus, out(1), out(2)).unwrap();
        let e = outcome_distribution(&s, &[out(1), out(3)], &[AnalysisBasis::HV; 2]).unwrap_err();
        assert!(matches!(e, SimError::PhotonNumber { .. }));
    }

    #[test]
    fn circular_analysis() {
        let s = crate::sources::single_photon(out(1), &crate::fock::PolKet::right());
        let t = outcome_distribution(&s, &[out(1)], &[AnalysisBasis::RL]).unwrap();
        assert_abs_diff_eq!(t.probability("R").unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn records_keep_outcomes_incoherent() {
        let s = bell_pair(BellKind::PhiPlus, out(1), out(2)).unwrap();
        let (p, prob) =
            project_outcomes(&s, &[out(1)], &[AnalysisBasis::PM], &[vec![0], vec![1]]).unwrap();
        assert_abs_diff_eq!(prob, 1.0, epsilon = 1e-14);
        let q = crate::fock::extract_pol_qubit(&p, out(2)).unwrap();
        assert_abs_diff_eq!(q.purity(), 0.5, epsilon = 1e-14);
        let (only_plus, prob) =
            project_outcomes(&s, &[out(1)], &[AnalysisBasis::PM], &[vec![0]]).unwrap();
        assert_abs_diff_eq!(prob, 0.5, epsilon = 1e-14);
        let q = crate::fock::extract_pol_qubit(&only_plus, out(2)).unwrap();
        assert_abs_diff_eq!(
            crate::fock::fidelity(&q, &crate::fock::PolKet::plus()),
            1.0,
            epsilon = 1e-14
        );
        let hv = PureState::basis(Ket::from_photons([Mode::new(out(1), Pol::H)]));
        assert_eq!(
            project_outcomes(&hv, &[out(1)], &[AnalysisBasis::HV], &[vec![1]]).unwrap_err(),
            SimError::Annihilated
        );
    }

    #[test]
    fn sampling_zero_and_deterministic() {
        let s = bell_pair(BellKind::PhiPlus, out(1), out(2)).unwrap();
        let t = outcome_distribution(&s, &[out(1), out(2)], &[AnalysisBasis::HV; 2]).unwrap();
        let z = sample_counts(
            &t,
            &CountModel {
                expected_total: 0.0,
                rng_seed: 1,
            },
        )
        .unwrap();
        assert!(z.entries.iter().all(|e| e.count == Some(0)));
        let cm = CountModel {
            expected_total: 1e4,
            rng_seed: 42,
        };
        assert_eq!(
            sample_counts(&t, &cm).unwrap(),
            sample_counts(&t, &cm).unwrap()
        );
        let other = sample_counts(&t, &CountModel { rng_seed: 43, ..cm }).unwrap();
        assert_ne!(sample_counts(&t, &cm).unwrap(), other);
    }

    #[test]
    fn poisson_mean_over_seeds() {
        let t = OutcomeTable {
            modes: vec![out(1)],
            bases: vec![AnalysisBasis::HV],
            entries: vec![
                OutcomeEntry {
                    outcome: "H".into(),
                    probability: 1.0,
                    count: None,
                },
                OutcomeEntry {
                    outcome: "V".into(),
                    probability: 0.0,
                    count: None,
                },
            ],
        };
        let seeds = 400;
        let total: u64 = (0..seeds)
            .map(|seed| {
                sample_counts(
                    &t,
                    &CountModel {
                        expected_total: 100.0,
                        rng_seed: seed,
                    },
                )
                .unwrap()
                .count("H")
                .unwrap()
            })
            .sum();
        let m = total as f64 / seeds as f64;
        // standard error of the mean is 10/√400 = 0.5
        assert!((m - 100.0).abs() < 3.0 * 0.5, "mean {m}");
    }

    #[test]
    fn visibility_values() {
        assert_abs_diff_eq!(visibility(100.0, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(visibility(100.0, 100.0).unwrap(), 0.0);
        assert_abs_diff_eq!(visibility(100.0, 25.8).unwrap(), 0.59, epsilon = 0.005);
        assert!(visibility(0.0, 0.0).is_err());
    }

    #[test]
    fn snr_cases() {
        let mk = |ps: [f64; 4]| OutcomeTable {
            modes: vec![out(1), out(2)],
            bases: vec![AnalysisBasis::HV; 2],
            entries: ["HH", "HV", "VH", "VV"]
                .iter()
                .zip(ps)
                .map(|(o, p)| OutcomeEntry {
                    outcome: o.to_string(),
                    probability: p,
                    count: None,
                })
                .collect(),
        };
        assert_eq!(
            snr(&mk([0.5, 0.0, 0.0, 0.5]), &["HH", "VV"]).unwrap(),
            Snr::Infinite
        );
        assert_eq!(
            snr(&mk([0.25; 4]), &["HH", "VV"]).unwrap(),
            Snr::Finite(1.0)
        );
        let t = mk([0.45, 0.01, 0.03, 0.51]);
        assert_abs_diff_eq!(
            snr(&t, &["HH", "VV"]).unwrap().value(),
            0.48 / 0.02,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            snr_min_max(&t, &["HH", "VV"]).unwrap().value(),
            0.45 / 0.03,
            epsilon = 1e-12
        );
        assert!(snr(&t, &[]).is_err());
        assert!(snr(&t, &["HH", "HV", "VH", "VV"]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = bell_pair(BellKind::PsiMinus, out(1), out(2)).unwrap();
        let t = outcome_distribution(
            &s,
            &[out(1), out(2)],
            &[AnalysisBasis::PM, AnalysisBasis::RL],
        )
        .unwrap();
        let t = sample_counts(
            &t,
            &CountModel {
                expected_total: 1000.0,
                rng_seed: 7,
            },
        )
        .unwrap();
        let text = t.to_csv().unwrap();
        assert!(text.starts_with("outcome,basis,probability,count\n"));
        assert_eq!(OutcomeTable::from_csv(&text, t.modes.clone()).unwrap(), t);
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<OutcomeTable>(&json).unwrap(), t);
    }
}
