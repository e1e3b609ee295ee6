//! Experiment runners: rate model, delay scans, the five-photon H/V table,
//! the teleportation fidelity table, and the report type they share.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::DeviceConfig;
use crate::error::{Result, SimError};
use crate::fock::{fidelity, PolKet, PolState, Spatial};
use crate::measurement::{
    outcome_distribution, sample_counts, snr, snr_counts, snr_min_max, visibility, AnalysisBasis,
    CountModel, OutcomeEntry, OutcomeTable, Snr,
};
use crate::protocols::{
    build_ghz, critical_visibility, open_destination_teleport, output, Destination, Sign,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub twofold: f64,
    pub threefold: f64,
    pub fivefold: f64,
}

/// Coincidence rates per second: `rep·p·η²`, `rep·p·μ·η³·f₃`,
/// `rep·p²·μ·η⁵·f₅`, with `f₃`, `f₅` the ideal post-selection
/// probabilities of the three- and five-photon pipelines.
pub fn rate_model(cfg: &DeviceConfig) -> Result<Rates> {
    cfg.validate()?;
    let ideal = DeviceConfig::ideal();
    let f3 = build_ghz(3, &ideal)?.1;
    let f5 = build_ghz(5, &ideal)?.1;
    let (r, p, mu, eta) = (
        cfg.rep_rate_hz,
        cfg.pair_prob,
        cfg.mu,
        cfg.detector_efficiency,
    );
    Ok(Rates {
        twofold: r * p * eta.powi(2),
        threefold: r * p * mu * eta.powi(3) * f3,
        fivefold: r * p * p * mu * eta.powi(5) * f5,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Table1,
    Ghz,
    Teleport,
    Rates,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string tag"))
    }
}

/// Evenly spaced delay positions in micrometres, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    pub start_um: f64,
    pub stop_um: f64,
    pub points: usize,
}

impl Default for DelayScan {
    fn default() -> Self {
        DelayScan {
            start_um: -1200.0,
            stop_um: 1200.0,
            points: 41,
        }
    }
}

impl DelayScan {
    pub fn positions(&self) -> Result<Vec<f64>> {
        if self.points == 0 || !self.start_um.is_finite() || !self.stop_um.is_finite() {
            return Err(SimError::InvalidArgument(
                "scan needs finite bounds and >= 1 point".into(),
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.start_um]);
        }
        let step = (self.stop_um - self.start_um) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| self.start_um + step * i as f64)
            .collect())
    }
}

/// One delay position of a peak/dip scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delay_um: f64,
    pub gamma: f64,
    pub prob_desired: f64,
    pub prob_suppressed: f64,
    pub count_desired: u64,
    pub count_suppressed: u64,
    pub visibility: f64,
    pub visibility_mc: f64,
}

/// One cell of the teleportation fidelity table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCell {
    pub input: String,
    pub location: u8,
    pub fidelity: f64,
    pub fidelity_mc: f64,
    pub fidelity_mc_err: f64,
    pub count_same: u64,
    pub count_orthogonal: u64,
    pub chain_prob: f64,
    pub above_classical: bool,
}

pub const CLASSICAL_FIDELITY: f64 = 2.0 / 3.0;

/// Derived statistics; fields not produced by an experiment are omitted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility_mc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility_far: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_visibility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr: Option<Snr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_mc: Option<Snr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_min_max: Option<Snr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub herald_prob: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Rates>,
    /// Expected count of the strongest setting per integration window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_count_per_integration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_count_per_integration: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: Experiment,
    pub config: DeviceConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<OutcomeTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scan: Vec<ScanPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fidelities: Vec<FidelityCell>,
    pub summary: Summary,
}

fn csv_err(e: impl fmt::Display) -> SimError {
    SimError::Io(e.to_string())
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .map(|r| r.map_err(csv_err))
        .collect()
}

pub fn scan_to_csv(rows: &[ScanPoint]) -> Result<String> {
    to_csv(rows)
}

pub fn scan_from_csv(text: &str) -> Result<Vec<ScanPoint>> {
    from_csv(text)
}

pub fn fidelities_to_csv(rows: &[FidelityCell]) -> Result<String> {
    to_csv(rows)
}

pub fn fidelities_from_csv(text: &str) -> Result<Vec<FidelityCell>> {
    from_csv(text)
}

impl RunReport {
    fn new(experiment: Experiment, cfg: &DeviceConfig) -> Self {
        RunReport {
            experiment,
            config: cfg.clone(),
            tables: Vec::new(),
            scan: Vec::new(),
            fidelities: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(csv_err)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(csv_err)
    }

    /// The report's main data as CSV: scan rows, fidelity cells, or the
    /// outcome tables concatenated.
    pub fn to_csv(&self) -> Result<String> {
        if !self.scan.is_empty() {
            scan_to_csv(&self.scan)
        } else if !self.fidelities.is_empty() {
            fidelities_to_csv(&self.fidelities)
        } else if !self.tables.is_empty() {
            let mut out = String::new();
            for (i, t) in self.tables.iter().enumerate() {
                let csv = t.to_csv()?;
                out.push_str(if i == 0 {
                    &csv
                } else {
                    csv.split_once('\n').map_or("", |x| x.1)
                });
            }
            Ok(out)
        } else {
            to_csv(&[self.summary.rates.unwrap_or(Rates {
                twofold: 0.0,
                threefold: 0.0,
                fivefold: 0.0,
            })])
        }
    }

    /// Re-runs the experiment from the stored configuration.
    pub fn rerun(&self, scan: DelayScan) -> Result<RunReport> {
        match self.experiment {
            Experiment::Fig3a => run_fig3(Fig3::A, scan, &self.config),
            Experiment::Fig3b => run_fig3(Fig3::B, scan, &self.config),
            Experiment::Fig4a => run_fig4a(&self.config),
            Experiment::Fig4b => run_fig4b(scan, &self.config),
            Experiment::Table1 => run_table1(&self.config),
            Experiment::Rates => run_rates(&self.config),
            Experiment::Ghz | Experiment::Teleport => Err(SimError::InvalidArgument(
                "re-run these from their arguments".into(),
            )),
        }
    }
}

/// Seed for the `index`-th independent table of a run.
fn derive_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Interferometer {
    /// Four photons, Delay 1.
    Four,
    /// Three photons, Delay 2.
    Three,
    /// Five photons, Delay 1 with Delay 2 fixed.
    Five,
}

impl Interferometer {
    fn size(self) -> usize {
        match self {
            Interferometer::Four => 4,
            Interferometer::Three => 3,
            Interferometer::Five => 5,
        }
    }

    fn modes(self) -> Vec<Spatial> {
        let ks: &[u8] = match self {
            Interferometer::Four => &[2, 3, 4, 5],
            Interferometer::Three => &[1, 2, 3],
            Interferometer::Five => &[1, 2, 3, 4, 5],
        };
        ks.iter().map(|&k| output(k)).collect()
    }

    fn at_delay(self, cfg: &DeviceConfig, delay_um: f64) -> DeviceConfig {
        let mut c = cfg.clone();
        match self {
            Interferometer::Three => c.delay2_um = delay_um,
            _ => c.delay1_um = delay_um,
        }
        c
    }

    fn gamma(self, cfg: &DeviceConfig) -> f64 {
        match self {
            Interferometer::Three => cfg.gamma12(),
            _ => cfg.gamma34(),
        }
    }

    /// All `+`, and all `+` but the last.
    fn settings(self) -> (String, String) {
        let n = self.size();
        ("+".repeat(n), format!("{}-", "+".repeat(n - 1)))
    }
}

/// ± table of an interferometer and its heralding probability.
fn pm_table(which: Interferometer, cfg: &DeviceConfig) -> Result<(OutcomeTable, f64)> {
    let (s, prob) = build_ghz(which.size(), cfg)?;
    let modes = which.modes();
    let bases = vec![AnalysisBasis::PM; modes.len()];
    Ok((outcome_distribution(&s, &modes, &bases)?, prob))
}

fn scan_point(
    which: Interferometer,
    cfg: &DeviceConfig,
    delay_um: f64,
    index: usize,
) -> Result<ScanPoint> {
    let c = which.at_delay(cfg, delay_um);
    let (table, _) = pm_table(which, &c)?;
    let counts = sample_counts(
        &table,
        &CountModel {
            expected_total: cfg.samples_per_setting,
            rng_seed: derive_seed(cfg.seed, index),
        },
    )?;
    let (d, s) = which.settings();
    let prob_desired = table.probability(&d).expect("label");
    let prob_suppressed = table.probability(&s).expect("label");
    let count_desired = counts.count(&d).expect("sampled");
    let count_suppressed = counts.count(&s).expect("sampled");
    Ok(ScanPoint {
        delay_um,
        gamma: which.gamma(&c),
        prob_desired,
        prob_suppressed,
        count_desired,
        count_suppressed,
        visibility: visibility(prob_desired, prob_suppressed)?,
        visibility_mc: visibility(count_desired as f64, count_suppressed as f64).unwrap_or(0.0),
    })
}

fn run_scan(
    which: Interferometer,
    scan: DelayScan,
    cfg: &DeviceConfig,
    experiment: Experiment,
) -> Result<RunReport> {
    cfg.validate()?;
    let positions = scan.positions()?;
    // index 0 is the zero-delay reference; scan rows follow
    let points: Vec<ScanPoint> = std::iter::once(0.0)
        .chain(positions.iter().copied())
        .collect::<Vec<_>>()
        .par_iter()
        .enumerate()
        .map(|(i, &d)| scan_point(which, cfg, d, i))
        .collect::<Result<_>>()?;
    let zero = &points[0];
    let far = points[1..]
        .iter()
        .filter(|p| p.delay_um.abs() >= 5.0 * cfg.coherence_length_um())
        .map(|p| p.visibility.abs())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let mut report = RunReport::new(experiment, cfg);
    report.summary.visibility = Some(zero.visibility);
    report.summary.visibility_mc = Some(zero.visibility_mc);
    report.summary.visibility_far = far;
    if which == Interferometer::Five {
        let (table, herald) = pm_table(which, &which.at_delay(cfg, 0.0))?;
        let rates = rate_model(cfg)?;
        let per_window = rates.fivefold * cfg.integration_time_s;
        let (d, s) = which.settings();
        report.summary.herald_prob = Some(herald);
        report.summary.rates = Some(rates);
        report.summary.max_count_per_integration =
            Some(per_window * table.probability(&d).expect("label"));
        report.summary.min_count_per_integration =
            Some(per_window * table.probability(&s).expect("label"));
        report.summary.critical_visibility = Some(critical_visibility(5)?);
        report.summary.violation = Some(zero.visibility > critical_visibility(5)?);
    }
    report.scan = points[1..].to_vec();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fig3 {
    /// Four-photon peak/dip against Delay 1.
    A,
    /// Three-photon peak/dip against Delay 2.
    B,
}

pub fn run_fig3(which: Fig3, scan: DelayScan, cfg: &DeviceConfig) -> Result<RunReport> {
    match which {
        Fig3::A => run_scan(Interferometer::Four, scan, cfg, Experiment::Fig3a),
        Fig3::B => run_scan(Interferometer::Three, scan, cfg, Experiment::Fig3b),
    }
}

/// Five-photon peak/dip against Delay 1.
pub fn run_fig4b(scan: DelayScan, cfg: &DeviceConfig) -> Result<RunReport> {
    run_scan(Interferometer::Five, scan, cfg, Experiment::Fig4b)
}

pub const GHZ5_DESIRED: [&str; 2] = ["HHHHH", "VVVVV"];

/// Five-photon table in the H/V basis with its signal-to-noise ratio.
pub fn run_fig4a(cfg: &DeviceConfig) -> Result<RunReport> {
    let mut report = run_ghz(5, AnalysisBasis::HV, cfg)?;
    report.experiment = Experiment::Fig4a;
    let counts = &report.tables[0];
    report.summary.snr = Some(snr(counts, &GHZ5_DESIRED)?);
    report.summary.snr_mc = Some(snr_counts(counts, &GHZ5_DESIRED)?);
    report.summary.snr_min_max = Some(snr_min_max(counts, &GHZ5_DESIRED)?);
    Ok(report)
}

/// GHZ state of size `n` analyzed in one basis on every photon.
pub fn run_ghz(n: usize, basis: AnalysisBasis, cfg: &DeviceConfig) -> Result<RunReport> {
    let (s, prob) = build_ghz(n, cfg)?;
    let modes = match n {
        3 => Interferometer::Three.modes(),
        4 => Interferometer::Four.modes(),
        _ => Interferometer::Five.modes(),
    };
    let bases = vec![basis; modes.len()];
    let table = outcome_distribution(&s, &modes, &bases)?;
    let counts = sample_counts(
        &table,
        &CountModel {
            expected_total: cfg.samples_per_setting,
            rng_seed: derive_seed(cfg.seed, 0),
        },
    )?;
    let mut report = RunReport::new(Experiment::Ghz, cfg);
    report.summary.herald_prob = Some(prob);
    report.tables.push(counts);
    Ok(report)
}

/// The four teleported inputs in table order.
pub fn table1_inputs() -> [(&'static str, PolKet, AnalysisBasis); 4] {
    [
        ("+", PolKet::plus(), AnalysisBasis::PM),
        ("-", PolKet::minus(), AnalysisBasis::PM),
        ("R", PolKet::right(), AnalysisBasis::RL),
        ("L", PolKet::left(), AnalysisBasis::RL),
    ]
}

/// Outcome table of one photon measured in `basis`.
fn single_qubit_table(rho: &PolState, spatial: Spatial, basis: AnalysisBasis) -> OutcomeTable {
    let kets = match basis {
        AnalysisBasis::HV => [PolKet::horizontal(), PolKet::vertical()],
        AnalysisBasis::PM => [PolKet::plus(), PolKet::minus()],
        AnalysisBasis::RL => [PolKet::right(), PolKet::left()],
    };
    OutcomeTable {
        modes: vec![spatial],
        bases: vec![basis],
        entries: kets
            .iter()
            .enumerate()
            .map(|(bit, k)| OutcomeEntry {
                outcome: basis.symbol(bit as u8).to_string(),
                probability: fidelity(rho, k),
                count: None,
            })
            .collect(),
    }
}

fn teleport_cell(
    label: &str,
    pol: &PolKet,
    basis: AnalysisBasis,
    location: u8,
    cfg: &DeviceConfig,
    index: usize,
) -> Result<FidelityCell> {
    let dest = Destination::new(location)?;
    let t = open_destination_teleport(pol, dest, (Sign::Plus, Sign::Plus), cfg)?;
    let table = single_qubit_table(&t.output, dest.output, basis);
    let counts = sample_counts(
        &table,
        &CountModel {
            expected_total: cfg.samples_per_setting,
            rng_seed: derive_seed(cfg.seed, index),
        },
    )?;
    let same_bit = if fidelity(&PolState::from(*pol), &PolKet::plus()) > 0.99
        || fidelity(&PolState::from(*pol), &PolKet::right()) > 0.99
        || fidelity(&PolState::from(*pol), &PolKet::horizontal()) > 0.99
    {
        0
    } else {
        1
    };
    let c_same = counts.entries[same_bit].count.expect("sampled");
    let c_orth = counts.entries[1 - same_bit].count.expect("sampled");
    let n = (c_same + c_orth) as f64;
    let f_mc = if n > 0.0 { c_same as f64 / n } else { 0.0 };
    let err = if n > 0.0 {
        (f_mc * (1.0 - f_mc) / n).sqrt()
    } else {
        0.0
    };
    Ok(FidelityCell {
        input: label.to_string(),
        location,
        fidelity: t.fidelity,
        fidelity_mc: f_mc,
        fidelity_mc_err: err,
        count_same: c_same,
        count_orthogonal: c_orth,
        chain_prob: t.chain_prob,
        above_classical: t.fidelity > CLASSICAL_FIDELITY,
    })
}

/// Teleportation of ±, R, L to locations 4 and 5 with readout `++`.
pub fn run_table1(cfg: &DeviceConfig) -> Result<RunReport> {
    cfg.validate()?;
    let inputs = table1_inputs();
    let jobs: Vec<(usize, u8)> = (0..inputs.len())
        .flat_map(|i| [(i, 4u8), (i, 5u8)])
        .collect();
    let cells = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(i, loc))| {
            let (label, pol, basis) = &inputs[i];
            teleport_cell(label, pol, *basis, loc, cfg, idx)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = RunReport::new(Experiment::Table1, cfg);
    report.summary.fidelity =
        Some(cells.iter().map(|c| c.fidelity).sum::<f64>() / cells.len() as f64);
    report.fidelities = cells;
    Ok(report)
}

/// Single teleportation run with an arbitrary input and readout.
pub fn run_teleport(
    input: &PolKet,
    location: u8,
    outcomes: (Sign, Sign),
    cfg: &DeviceConfig,
) -> Result<RunReport> {
    let dest = Destination::new(location)?;
    let t = open_destination_teleport(input, dest, outcomes, cfg)?;
    let mut report = RunReport::new(Experiment::Teleport, cfg);
    report.summary.fidelity = Some(t.fidelity);
    report.summary.herald_prob = Some(t.chain_prob);
    for (i, basis) in [AnalysisBasis::HV, AnalysisBasis::PM, AnalysisBasis::RL]
        .into_iter()
        .enumerate()
    {
        let table = single_qubit_table(&t.output, dest.output, basis);
        report.tables.push(sample_counts(
            &table,
            &CountModel {
                expected_total: cfg.samples_per_setting,
                rng_seed: derive_seed(cfg.seed, i),
            },
        )?);
    }
    Ok(report)
}

pub fn run_rates(cfg: &DeviceConfig) -> Result<RunReport> {
    let mut report = RunReport::new(Experiment::Rates, cfg);
    report.summary.rates = Some(rate_model(cfg)?);
    Ok(report)
}

impl FromStr for Experiment {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| SimError::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

/// Zero-delay visibilities and H/V signal-to-noise, the quantities the
/// noise parameters are fitted to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub fig3a_visibility: f64,
    pub fig3b_visibility: f64,
    pub fig4b_visibility: f64,
    pub snr: f64,
}

pub fn observables(cfg: &DeviceConfig) -> Result<Observables> {
    let vis = |which: Interferometer| -> Result<f64> {
        let (t, _) = pm_table(which, &which.at_delay(cfg, 0.0))?;
        let (d, s) = which.settings();
        visibility(
            t.probability(&d).expect("label"),
            t.probability(&s).expect("label"),
        )
    };
    let (s5, _) = build_ghz(5, cfg)?;
    let modes = Interferometer::Five.modes();
    let hv = outcome_distribution(&s5, &modes, &[AnalysisBasis::HV; 5])?;
    Ok(Observables {
        fig3a_visibility: vis(Interferometer::Four)?,
        fig3b_visibility: vis(Interferometer::Three)?,
        fig4b_visibility: vis(Interferometer::Five)?,
        snr: snr(&hv, &GHZ5_DESIRED)?.value(),
    })
}

/// Targets for [`calibrate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub fig3a_visibility: f64,
    pub fig3b_visibility: f64,
    pub snr: f64,
    pub twofold_rate: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            fig3a_visibility: 0.82,
            fig3b_visibility: 0.68,
            snr: 40.0,
            twofold_rate: 2.4e4,
        }
    }
}

/// Root of a decreasing function on `[lo, hi]` by bisection.
fn bisect_decreasing(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<f64> {
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-7 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Fits pair probability (from the two-fold rate at the configured
/// efficiency), beam-splitter extinction (H/V signal-to-noise) and the two
/// zero-delay overlaps (three- and four-photon visibilities).
pub fn calibrate(base: &DeviceConfig, targets: &CalibrationTargets) -> Result<DeviceConfig> {
    let mut cfg = base.clone();
    cfg.delay1_um = 0.0;
    cfg.delay2_um = 0.0;
    cfg.pair_prob = targets.twofold_rate / (cfg.rep_rate_hz * cfg.detector_efficiency.powi(2));
    for _ in 0..3 {
        let c = cfg.clone();
        cfg.pbs_extinction = bisect_decreasing(0.0, 0.2, targets.snr, |e| {
            let mut t = c.clone();
            t.pbs_extinction = e;
            Ok(observables_hv_snr(&t)?.min(1e12))
        })?;
        let c = cfg.clone();
        cfg.overlap34 = 1.0
            - bisect_decreasing(0.0, 1.0, targets.fig3a_visibility, |x| {
                let mut t = c.clone();
                t.overlap34 = 1.0 - x;
                let (tab, _) = pm_table(Interferometer::Four, &t)?;
                let (d, s) = Interferometer::Four.settings();
                visibility(
                    tab.probability(&d).expect("label"),
                    tab.probability(&s).expect("label"),
                )
            })?;
        let c = cfg.clone();
        cfg.overlap12 = 1.0
            - bisect_decreasing(0.0, 1.0, targets.fig3b_visibility, |x| {
                let mut t = c.clone();
                t.overlap12 = 1.0 - x;
                let (tab, _) = pm_table(Interferometer::Three, &t)?;
                let (d, s) = Interferometer::Three.settings();
                visibility(
                    tab.probability(&d).expect("label"),
                    tab.probability(&s).expect("label"),
                )
            })?;
    }
    Ok(cfg)
}

fn observables_hv_snr(cfg: &DeviceConfig) -> Result<f64> {
    let (s5, _) = build_ghz(5, cfg)?;
    let hv = outcome_distribution(&s5, &Interferometer::Five.modes(), &[AnalysisBasis::HV; 5])?;
    Ok(snr(&hv, &GHZ5_DESIRED)?.value())
}
