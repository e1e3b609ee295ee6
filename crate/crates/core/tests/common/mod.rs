//! Helpers shared by the integration tests: random states and independent
//! reference constructions.

#![allow(dead_code)]

use std::collections::BTreeMap;

use fivephoton::fock::{normalize, Mode};
use fivephoton::{Ket, Pol, PolKet, PureState, Spatial};
use num_complex::Complex64;
use rand::Rng;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Random normalized superposition of up to `terms` kets with 1..=`max_photons`
/// photons spread over `Out(1..=modes)`, both polarizations, time-bins 0..=1.
pub fn random_state<R: Rng>(rng: &mut R, modes: u8, max_photons: usize, terms: usize) -> PureState {
    let mut out = Vec::new();
    for _ in 0..terms {
        let n = rng.random_range(1..=max_photons);
        let photons: Vec<Mode> = (0..n)
            .map(|_| {
                Mode::new(
                    Spatial::Out(rng.random_range(1..=modes)),
                    if rng.random_bool(0.5) { Pol::H } else { Pol::V },
                )
                .with_tbin(rng.random_range(0..=1))
            })
            .collect();
        let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        out.push((Ket::from_photons(photons), amp));
    }
    normalize(&PureState::from_terms(out)).expect("nonzero").0
}

/// Random state with exactly one photon in each of `Out(1..=modes)`.
pub fn random_one_per_mode<R: Rng>(rng: &mut R, modes: u8, terms: usize) -> PureState {
    let mut out = Vec::new();
    for _ in 0..terms {
        let photons: Vec<Mode> = (1..=modes)
            .map(|k| {
                Mode::new(
                    Spatial::Out(k),
                    if rng.random_bool(0.5) { Pol::H } else { Pol::V },
                )
                .with_tbin(rng.random_range(0..=1))
            })
            .collect();
        let amp = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        out.push((Ket::from_photons(photons), amp));
    }
    normalize(&PureState::from_terms(out)).expect("nonzero").0
}

pub fn random_pol<R: Rng>(rng: &mut R) -> PolKet {
    PolKet::new(
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    )
    .expect("nonzero")
}

pub fn ket(photons: &[(u8, Pol)]) -> Ket {
    Ket::from_photons(photons.iter().map(|&(k, p)| Mode::new(Spatial::Out(k), p)))
}

/// Ideal GHZ pipeline by direct enumeration of polarization assignments.
///
/// Each entry of `photons` is `(source amplitude over H/V choices)`; the
/// routing maps (photon index, polarization) to an output port. Returns the
/// unnormalized amplitudes of the kets with one photon per port, and the
/// total squared norm of those kets (the heralding probability).
pub fn brute_force_ghz(n: usize) -> (BTreeMap<Ket, Complex64>, f64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (photon label, source group); pairs share a polarization, photon 1 is |+⟩.
    let (photons, ports): (Vec<u8>, fn(u8, Pol) -> u8) = match n {
        3 => (vec![1, 2, 3], route12),
        4 => (vec![2, 3, 4, 5], route34),
        5 => (vec![1, 2, 3, 4, 5], route_both),
        _ => panic!("unsupported size"),
    };
    let mut amps: BTreeMap<Ket, Complex64> = BTreeMap::new();
    let has1 = photons.contains(&1);
    let pair_labels: Vec<(u8, u8)> = if photons.contains(&4) {
        vec![(2, 3), (4, 5)]
    } else {
        vec![(2, 3)]
    };
    let n_pairs = pair_labels.len();
    let choices = 1usize << (n_pairs + usize::from(has1));
    for bits in 0..choices {
        let pol = |b: usize| if (bits >> b) & 1 == 0 { Pol::H } else { Pol::V };
        let mut assign: Vec<(u8, Pol)> = Vec::new();
        let mut amp = 1.0;
        for (i, &(a, b)) in pair_labels.iter().enumerate() {
            assign.push((a, pol(i)));
            assign.push((b, pol(i)));
            amp *= h;
        }
        if has1 {
            assign.push((1, pol(n_pairs)));
            amp *= h;
        }
        let outs: Vec<(u8, Pol)> = assign.iter().map(|&(k, p)| (ports(k, p), p)).collect();
        let mut seen: Vec<u8> = outs.iter().map(|&(k, _)| k).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() == outs.len() {
            *amps.entry(ket(&outs)).or_default() += c(amp);
        }
    }
    let prob = amps.values().map(|a| a.norm_sqr()).sum();
    (amps, prob)
}

fn route12(k: u8, p: Pol) -> u8 {
    match (k, p) {
        (1, Pol::H) | (2, Pol::V) => 1,
        (1, Pol::V) | (2, Pol::H) => 2,
        _ => k,
    }
}

fn route34(k: u8, p: Pol) -> u8 {
    match (k, p) {
        (3, Pol::H) | (4, Pol::V) => 3,
        (3, Pol::V) | (4, Pol::H) => 4,
        _ => k,
    }
}

fn route_both(k: u8, p: Pol) -> u8 {
    match k {
        1 | 2 => route12(k, p),
        3 | 4 => route34(k, p),
        _ => k,
    }
}

/// Branch states of `(α|H⟩ + β|V⟩) ⊗ GHZ₄` under a Bell measurement on
/// photons 1 and 2, in the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻ (amplitudes before the
/// common factor 1/2).
pub fn eq4_branches(alpha: Complex64, beta: Complex64) -> [[(Ket, Complex64); 2]; 4] {
    let hhh = ket(&[(3, Pol::H), (4, Pol::H), (5, Pol::H)]);
    let vvv = ket(&[(3, Pol::V), (4, Pol::V), (5, Pol::V)]);
    [
        [(hhh.clone(), alpha), (vvv.clone(), beta)],
        [(hhh.clone(), alpha), (vvv.clone(), -beta)],
        [(vvv.clone(), alpha), (hhh.clone(), beta)],
        [(vvv, alpha), (hhh, -beta)],
    ]
}

/// Largest amplitude difference between two states.
pub fn max_amp_diff(a: &PureState, b: &PureState) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, x) in a.iter() {
        worst = worst.max((x - b.amplitude(k)).norm());
    }
    for (k, y) in b.iter() {
        worst = worst.max((a.amplitude(k) - y).norm());
    }
    worst
}
