use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pol {
    H,
    V,
}

impl Pol {
    pub const BOTH: [Pol; 2] = [Pol::H, Pol::V];

    pub fn index(self) -> usize {
        match self {
            Pol::H => 0,
            Pol::V => 1,
        }
    }

    pub fn from_index(i: usize) -> Pol {
        if i == 0 {
            Pol::H
        } else {
            Pol::V
        }
    }
}

/// Spatial mode label.
///
/// `Out(k)` are the detected modes 1..=5, `In(k)` the source-side arm of
/// photon k before any beam splitter, `Loss(k)` collects photons missed by
/// detector k and `Record(k)` holds the classical outcome of a measurement on
/// mode k (outcome bit stored as H/V, arrival time-bin kept).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    Out(u8),
    In(u8),
    Loss(u8),
    Record(u8),
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spatial::Out(k) => write!(f, "{k}"),
            Spatial::In(k) => write!(f, "in{k}"),
            Spatial::Loss(k) => write!(f, "loss{k}"),
            Spatial::Record(k) => write!(f, "rec{k}"),
        }
    }
}

impl FromStr for Spatial {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::InvalidArgument(format!("bad spatial label {s:?}"));
        let (ctor, digits): (fn(u8) -> Spatial, &str) = if let Some(d) = s.strip_prefix("in") {
            (Spatial::In, d)
        } else if let Some(d) = s.strip_prefix("loss") {
            (Spatial::Loss, d)
        } else if let Some(d) = s.strip_prefix("rec") {
            (Spatial::Record, d)
        } else {
            (Spatial::Out, s)
        };
        digits.parse::<u8>().map(ctor).map_err(|_| bad())
    }
}

impl Serialize for Spatial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Spatial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One optical mode: spatial path, polarization and temporal label.
/// `tbin == 0` is the reference wavepacket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub spatial: Spatial,
    pub pol: Pol,
    pub tbin: u8,
}

impl Mode {
    pub const fn new(spatial: Spatial, pol: Pol) -> Self {
        Mode {
            spatial,
            pol,
            tbin: 0,
        }
    }

    pub const fn with_tbin(self, tbin: u8) -> Self {
        Mode { tbin, ..self }
    }

    pub const fn with_pol(self, pol: Pol) -> Self {
        Mode { pol, ..self }
    }

    pub const fn with_spatial(self, spatial: Spatial) -> Self {
        Mode { spatial, ..self }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.pol, self.spatial)?;
        if self.tbin != 0 {
            write!(f, "@{}", self.tbin)?;
        }
        Ok(())
    }
}

const FACTORIAL: [f64; 13] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
];

pub(crate) fn factorial(n: usize) -> f64 {
    FACTORIAL
        .get(n)
        .copied()
        .unwrap_or_else(|| (1..=n).map(|k| k as f64).product())
}

/// Occupation-number basis ket. Occupations are kept sorted by mode with
/// nonzero counts, so equal kets compare and hash equal however they were
/// built.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ket {
    occ: Vec<(Mode, u8)>,
}

impl Ket {
    pub const fn vacuum() -> Self {
        Ket { occ: Vec::new() }
    }

    /// Builds a ket from a list of photons, one entry per photon.
    pub fn from_photons<I: IntoIterator<Item = Mode>>(photons: I) -> Self {
        let mut v: Vec<Mode> = photons.into_iter().collect();
        v.sort_unstable();
        Self::from_sorted_photons(&v)
    }

    pub(crate) fn from_sorted_photons(sorted: &[Mode]) -> Self {
        let mut occ: Vec<(Mode, u8)> = Vec::with_capacity(sorted.len());
        for &m in sorted {
            match occ.last_mut() {
                Some((last, n)) if *last == m => *n += 1,
                _ => occ.push((m, 1)),
            }
        }
        Ket { occ }
    }

    pub fn from_occupations<I: IntoIterator<Item = (Mode, u8)>>(occ: I) -> Self {
        let mut photons = Vec::new();
        for (m, n) in occ {
            photons.extend(std::iter::repeat_n(m, n as usize));
        }
        Self::from_photons(photons)
    }

    pub fn occupations(&self) -> &[(Mode, u8)] {
        &self.occ
    }

    pub fn photon_number(&self) -> usize {
        self.occ.iter().map(|&(_, n)| n as usize).sum()
    }

    pub fn count(&self, mode: &Mode) -> u8 {
        self.occ
            .binary_search_by(|(m, _)| m.cmp(mode))
            .map(|i| self.occ[i].1)
            .unwrap_or(0)
    }

    pub fn photons_in(&self, spatial: Spatial) -> usize {
        self.occ
            .iter()
            .filter(|(m, _)| m.spatial == spatial)
            .map(|&(_, n)| n as usize)
            .sum()
    }

    /// Expanded photon list in canonical order.
    pub fn photons(&self) -> impl Iterator<Item = Mode> + '_ {
        self.occ
            .iter()
            .flat_map(|&(m, n)| std::iter::repeat_n(m, n as usize))
    }

    pub fn is_vacuum(&self) -> bool {
        self.occ.is_empty()
    }

    /// `Π n!` over all occupied modes.
    pub(crate) fn factorial_product(&self) -> f64 {
        self.occ
            .iter()
            .map(|&(_, n)| factorial(n as usize))
            .product()
    }

    pub(crate) fn with_photon(&self, mode: Mode) -> Ket {
        let mut occ = self.occ.clone();
        match occ.binary_search_by(|(m, _)| m.cmp(&mode)) {
            Ok(i) => occ[i].1 += 1,
            Err(i) => occ.insert(i, (mode, 1)),
        }
        Ket { occ }
    }

    /// Splits into (modes matching `pred`, the rest).
    pub fn partition<F: Fn(&Mode) -> bool>(&self, pred: F) -> (Ket, Ket) {
        let (a, b): (Vec<_>, Vec<_>) = self.occ.iter().partition(|(m, _)| pred(m));
        (Ket { occ: a }, Ket { occ: b })
    }

    pub(crate) fn merged(&self, other: &Ket) -> Ket {
        Ket::from_photons(self.photons().chain(other.photons()))
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occ.is_empty() {
            return write!(f, "|vac>");
        }
        write!(f, "|")?;
        for (i, (m, n)) in self.occ.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *n > 1 {
                write!(f, "{n}")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ">")
    }
}
