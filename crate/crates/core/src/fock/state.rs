use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::ket::{Ket, Mode, Pol, Spatial};
use super::qubit::PolState;
use crate::error::{Result, SimError};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-14;
/// Default photon-number cap per ket.
pub const MAX_PHOTONS: usize = 10;
/// Cap on distinct modes in one state.
pub const MAX_MODES: usize = 64;

/// Sparse superposition of Fock basis kets.
///
/// `weight` is the cumulative probability of every post-selection this state
/// has been through (1 for a freshly prepared state). Values are immutable;
/// all operations return new states.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    terms: BTreeMap<Ket, Complex64>,
    weight: f64,
}

impl Default for PureState {
    fn default() -> Self {
        Self::vacuum()
    }
}

impl PureState {
    pub fn vacuum() -> Self {
        Self::basis(Ket::vacuum())
    }

    /// The empty (zero) vector, used as the annihilated-state marker.
    pub fn zero() -> Self {
        PureState {
            terms: BTreeMap::new(),
            weight: 0.0,
        }
    }

    pub fn basis(ket: Ket) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ket, Complex64::new(1.0, 0.0));
        PureState { terms, weight: 1.0 }
    }

    /// Sums amplitudes of repeated kets. The result is not renormalized.
    pub fn from_terms<I: IntoIterator<Item = (Ket, Complex64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (k, a) in terms {
            *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Self::pruned(map, 1.0)
    }

    fn pruned(mut terms: BTreeMap<Ket, Complex64>, weight: f64) -> Self {
        terms.retain(|_, a| a.norm() >= PRUNE_EPS);
        PureState { terms, weight }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ket, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, ket: &Ket) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_photon_number(&self) -> usize {
        self.terms.keys().map(Ket::photon_number).max().unwrap_or(0)
    }

    /// Spatial labels holding at least one photon in some term.
    pub fn spatial_labels(&self) -> BTreeSet<Spatial> {
        self.terms
            .keys()
            .flat_map(|k| k.occupations().iter().map(|(m, _)| m.spatial))
            .collect()
    }

    pub fn modes(&self) -> BTreeSet<Mode> {
        self.terms
            .keys()
            .flat_map(|k| k.occupations().iter().map(|(m, _)| *m))
            .collect()
    }

    pub fn tbins(&self) -> BTreeSet<u8> {
        self.modes().into_iter().map(|m| m.tbin).collect()
    }

    pub fn scaled(&self, c: Complex64) -> PureState {
        Self::pruned(
            self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect(),
            self.weight,
        )
    }

    /// Amplitude-wise sum; keeps `self`'s weight.
    pub fn plus(&self, other: &PureState) -> PureState {
        let mut terms = self.terms.clone();
        for (k, a) in &other.terms {
            *terms.entry(k.clone()).or_default() += a;
        }
        Self::pruned(terms, self.weight)
    }

    /// Applies the creation operator `Σ c_i a†(m_i)`, including the
    /// `√(n+1)` bosonic factor for already-occupied modes.
    pub fn create(&self, components: &[(Mode, Complex64)]) -> PureState {
        let mut out: BTreeMap<Ket, Complex64> = BTreeMap::new();
        for (k, a) in &self.terms {
            for &(m, c) in components {
                let n = k.count(&m) as f64;
                *out.entry(k.with_photon(m)).or_default() += a * c * (n + 1.0).sqrt();
            }
        }
        Self::pruned(out, self.weight)
    }

    /// Pushes every creation operator through a linear mode map.
    ///
    /// `map(m)` returns `None` to leave mode `m` untouched, or the expansion
    /// `a†(m) → Σ u_k a†(m_k)`. The map need not be unitary (polarizers).
    pub fn transform_modes<F>(&self, map: F) -> PureState
    where
        F: Fn(&Mode) -> Option<Vec<(Mode, Complex64)>>,
    {
        let mut cache: BTreeMap<Mode, Option<Vec<(Mode, Complex64)>>> = BTreeMap::new();
        let mut out: BTreeMap<Ket, Complex64> = BTreeMap::new();
        for (ket, &amp) in &self.terms {
            let mut kept: Vec<Mode> = Vec::new();
            let mut acted: Vec<(&[(Mode, Complex64)], u8)> = Vec::new();
            for (m, _) in ket.occupations() {
                if !cache.contains_key(m) {
                    cache.insert(*m, map(m));
                }
            }
            for (m, n) in ket.occupations() {
                match &cache[m] {
                    None => kept.extend(std::iter::repeat_n(*m, *n as usize)),
                    Some(targets) => acted.push((targets.as_slice(), *n)),
                }
            }
            let denom = ket.factorial_product().sqrt();
            // Photon-by-photon expansion; equal multisets merge, which
            // produces the multinomial coefficients.
            let mut partial: BTreeMap<Vec<Mode>, Complex64> = BTreeMap::new();
            partial.insert(kept, amp);
            for (targets, n) in acted {
                for _ in 0..n {
                    let mut next: BTreeMap<Vec<Mode>, Complex64> = BTreeMap::new();
                    for (modes, c) in &partial {
                        for &(t, u) in targets {
                            let mut nm = modes.clone();
                            let pos = nm.partition_point(|x| *x < t);
                            nm.insert(pos, t);
                            *next.entry(nm).or_default() += c * u;
                        }
                    }
                    partial = next;
                }
            }
            for (modes, c) in partial {
                let k = Ket::from_sorted_photons(&modes);
                let f = k.factorial_product().sqrt() / denom;
                *out.entry(k).or_default() += c * f;
            }
        }
        Self::pruned(out, self.weight)
    }

    /// Keeps only terms satisfying `pred`. No renormalization.
    pub fn filter<F: Fn(&Ket) -> bool>(&self, pred: F) -> PureState {
        PureState {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| pred(k))
                .map(|(k, a)| (k.clone(), *a))
                .collect(),
            weight: self.weight,
        }
    }

    /// Maps each ket to a new ket with the same amplitude (summing collisions).
    pub fn map_kets<F: Fn(&Ket) -> Ket>(&self, f: F) -> PureState {
        let mut out: BTreeMap<Ket, Complex64> = BTreeMap::new();
        for (k, a) in &self.terms {
            *out.entry(f(k)).or_default() += a;
        }
        Self::pruned(out, self.weight)
    }

    /// Drops the given spatial modes when they factor out of the state as a
    /// single common basis ket (e.g. measurement records of a deterministic
    /// outcome). Errors if they are entangled with the rest.
    pub fn discard_spatial(&self, labels: &[Spatial]) -> Result<PureState> {
        let mut common: Option<Ket> = None;
        let mut out = BTreeMap::new();
        for (k, a) in &self.terms {
            let (part, rest) = k.partition(|m| labels.contains(&m.spatial));
            match &common {
                None => common = Some(part),
                Some(c) if *c == part => {}
                Some(_) => {
                    return Err(SimError::InvalidArgument(
                        "discarded modes are not in a product state with the rest".into(),
                    ))
                }
            }
            *out.entry(rest).or_default() += a;
        }
        Ok(Self::pruned(out, self.weight))
    }

    /// Verifies the photon-number and mode-count caps.
    pub fn check_caps(&self, max_photons: usize) -> Result<()> {
        let n = self.max_photon_number();
        if n > max_photons {
            return Err(SimError::TooManyPhotons {
                found: n,
                cap: max_photons,
            });
        }
        let modes = self.modes().len();
        if modes > MAX_MODES {
            return Err(SimError::TooManyModes {
                found: modes,
                cap: MAX_MODES,
            });
        }
        Ok(())
    }
}

/// Product state of two states on disjoint spatial labels. Weights multiply.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let la = a.spatial_labels();
    if let Some(s) = b.spatial_labels().intersection(&la).next() {
        return Err(SimError::OverlappingSpatial(*s));
    }
    let mut terms = BTreeMap::new();
    for (ka, aa) in &a.terms {
        for (kb, ab) in &b.terms {
            *terms.entry(ka.merged(kb)).or_default() += aa * ab;
        }
    }
    let out = PureState::pruned(terms, a.weight * b.weight);
    out.check_caps(MAX_PHOTONS)?;
    Ok(out)
}

/// `⟨a|b⟩`.
pub fn inner(a: &PureState, b: &PureState) -> Complex64 {
    // iterate the smaller map
    if a.len() <= b.len() {
        a.terms.iter().map(|(k, x)| x.conj() * b.amplitude(k)).sum()
    } else {
        b.terms.iter().map(|(k, y)| a.amplitude(k).conj() * y).sum()
    }
}

/// Rescales to unit norm. Returns the normalized state (its weight field
/// multiplied by the squared norm) and the input squared norm.
pub fn normalize(s: &PureState) -> Result<(PureState, f64)> {
    let n = s.norm_sqr();
    if s.is_empty() || n < PRUNE_EPS * PRUNE_EPS {
        return Err(SimError::Annihilated);
    }
    let inv = 1.0 / n.sqrt();
    let terms = s.terms.iter().map(|(k, a)| (k.clone(), a * inv)).collect();
    Ok((
        PureState {
            terms,
            weight: s.weight * n,
        },
        n,
    ))
}

/// Reduced 2×2 polarization density matrix of the single photon in
/// `spatial`, tracing every other mode and the photon's own time-bin.
pub fn extract_pol_qubit(s: &PureState, spatial: Spatial) -> Result<PolState> {
    let mut groups: BTreeMap<(Ket, u8), [Complex64; 2]> = BTreeMap::new();
    for (k, a) in &s.terms {
        let found = k.photons_in(spatial);
        if found != 1 {
            return Err(SimError::PhotonNumber { spatial, found });
        }
        let (mine, rest) = k.partition(|m| m.spatial == spatial);
        let m = mine.occupations()[0].0;
        groups.entry((rest, m.tbin)).or_default()[m.pol.index()] += a;
    }
    if groups.is_empty() {
        return Err(SimError::Annihilated);
    }
    let mut rho = [[Complex64::default(); 2]; 2];
    for v in groups.values() {
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] += v[i] * v[j].conj();
            }
        }
    }
    let tr = rho[0][0].re + rho[1][1].re;
    if tr < PRUNE_EPS * PRUNE_EPS {
        return Err(SimError::Annihilated);
    }
    for row in rho.iter_mut() {
        for x in row.iter_mut() {
            *x /= tr;
        }
    }
    PolState::from_matrix(rho)
}

/// `⟨t|ρ_T|t⟩ / (‖s‖² ‖t‖²)`, where `ρ_T` is `s` reduced onto the spatial
/// modes that `target` occupies. Everything else in `s` is traced out.
pub fn projection_fidelity(s: &PureState, target: &PureState) -> f64 {
    let labels = target.spatial_labels();
    let mut per_env: BTreeMap<Ket, Complex64> = BTreeMap::new();
    for (k, a) in &s.terms {
        let (sys, env) = k.partition(|m| labels.contains(&m.spatial));
        let t = target.amplitude(&sys);
        if t != Complex64::default() {
            *per_env.entry(env).or_default() += t.conj() * a;
        }
    }
    let num: f64 = per_env.values().map(|x| x.norm_sqr()).sum();
    num / (s.norm_sqr() * target.norm_sqr())
}

impl PureState {
    /// Convenience: single photon in `spatial` with polarization amplitudes.
    pub fn single_photon(spatial: Spatial, h: Complex64, v: Complex64) -> PureState {
        PureState::vacuum().create(&[
            (Mode::new(spatial, Pol::H), h),
            (Mode::new(spatial, Pol::V), v),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn h(k: u8) -> Mode {
        Mode::new(Spatial::Out(k), Pol::H)
    }

    fn v(k: u8) -> Mode {
        Mode::new(Spatial::Out(k), Pol::V)
    }

    fn phi_plus(i: u8, j: u8) -> PureState {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        PureState::from_terms([
            (Ket::from_photons([h(i), h(j)]), c(r)),
            (Ket::from_photons([v(i), v(j)]), c(r)),
        ])
    }

    #[test]
    fn tensor_of_two_pairs_has_four_quarter_terms() {
        let s = tensor(&phi_plus(2, 3), &phi_plus(4, 5)).unwrap();
        assert_eq!(s.len(), 4);
        for (_, a) in s.iter() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn tensor_with_vacuum_is_identity() {
        let s = phi_plus(2, 3);
        assert_eq!(tensor(&PureState::vacuum(), &s).unwrap(), s);
    }

    #[test]
    fn tensor_rejects_shared_labels() {
        let e = tensor(&phi_plus(2, 3), &phi_plus(3, 4)).unwrap_err();
        assert_eq!(e, SimError::OverlappingSpatial(Spatial::Out(3)));
    }

    #[test]
    fn tensor_weights_multiply() {
        let a = phi_plus(1, 2).with_weight(0.5);
        let b = phi_plus(3, 4).with_weight(0.25);
        assert_abs_diff_eq!(tensor(&a, &b).unwrap().weight(), 0.125);
    }

    #[test]
    fn normalize_half_amplitudes() {
        let s = PureState::from_terms([
            (Ket::from_photons([h(1)]), c(0.5)),
            (Ket::from_photons([v(1)]), c(0.5)),
        ]);
        let (n, w) = normalize(&s).unwrap();
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-15);
        for (_, a) in n.iter() {
            assert_abs_diff_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        }
        let (again, w1) = normalize(&n).unwrap();
        assert_abs_diff_eq!(w1, 1.0, epsilon = 1e-15);
        assert_eq!(again.len(), 2);
        assert_eq!(
            normalize(&PureState::zero()).unwrap_err(),
            SimError::Annihilated
        );
    }

    #[test]
    fn creation_on_occupied_mode_has_bosonic_factor() {
        let s = PureState::vacuum().create(&[(h(1), c(1.0))]);
        let s2 = s.create(&[(h(1), c(1.0))]);
        let two = Ket::from_photons([h(1), h(1)]);
        assert_abs_diff_eq!(s2.amplitude(&two).re, 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn beam_splitter_on_two_photon_mode() {
        // |2⟩ through a†1 → (a†1 + a†2)/√2 gives (|2,0⟩ + √2|1,1⟩ + |0,2⟩)/2.
        let s = PureState::basis(Ket::from_photons([h(1), h(1)]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let out = s.transform_modes(|m| (*m == h(1)).then(|| vec![(h(1), c(r)), (h(2), c(r))]));
        assert_abs_diff_eq!(
            out.amplitude(&Ket::from_photons([h(1), h(1)])).re,
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            out.amplitude(&Ket::from_photons([h(1), h(2)])).re,
            r,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            out.amplitude(&Ket::from_photons([h(2), h(2)])).re,
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        // One photon in each input of a 50:50 splitter never exits one per port.
        let s = PureState::basis(Ket::from_photons([h(1), h(2)]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let out = s.transform_modes(|m| match m.spatial {
            Spatial::Out(1) => Some(vec![(h(3), c(r)), (h(4), c(r))]),
            Spatial::Out(2) => Some(vec![(h(3), c(r)), (h(4), c(-r))]),
            _ => None,
        });
        assert_eq!(
            out.amplitude(&Ket::from_photons([h(3), h(4)])),
            Complex64::default()
        );
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn extract_qubit_from_product() {
        let s = PureState::basis(Ket::from_photons([h(3), v(4)]));
        let q = extract_pol_qubit(&s, Spatial::Out(3)).unwrap();
        assert!(q.is_pure());
        assert_abs_diff_eq!(q.rho()[0][0].re, 1.0);
    }

    #[test]
    fn extract_qubit_traces_time_bins() {
        // |+⟩ photon whose H and V parts sit in orthogonal time-bins: maximally mixed.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::from_terms([
            (Ket::from_photons([h(3)]), c(r)),
            (Ket::from_photons([v(3).with_tbin(1)]), c(r)),
        ]);
        let q = extract_pol_qubit(&s, Spatial::Out(3)).unwrap();
        assert_abs_diff_eq!(q.purity(), 0.5, epsilon = 1e-15);
        assert!(!q.is_pure());
    }

    #[test]
    fn extract_qubit_requires_one_photon() {
        let s = PureState::basis(Ket::from_photons([h(3), v(3)]));
        assert_eq!(
            extract_pol_qubit(&s, Spatial::Out(3)).unwrap_err(),
            SimError::PhotonNumber {
                spatial: Spatial::Out(3),
                found: 2
            }
        );
    }

    #[test]
    fn discard_product_records() {
        let s = PureState::from_terms([
            (Ket::from_photons([h(1), h(9)]), c(0.6)),
            (Ket::from_photons([v(1), h(9)]), c(0.8)),
        ]);
        let d = s.discard_spatial(&[Spatial::Out(9)]).unwrap();
        assert_abs_diff_eq!(d.amplitude(&Ket::from_photons([v(1)])).re, 0.8);
        let ent = phi_plus(1, 9);
        assert!(ent.discard_spatial(&[Spatial::Out(9)]).is_err());
    }
}
