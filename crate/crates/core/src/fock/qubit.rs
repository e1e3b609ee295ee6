use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;
const PURE_TOL: f64 = 1e-10;

/// Pure single-photon polarization `h|H⟩ + v|V⟩`, unit norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolKet {
    pub h: Complex64,
    pub v: Complex64,
}

impl PolKet {
    pub fn new(h: Complex64, v: Complex64) -> Result<Self> {
        let n = (h.norm_sqr() + v.norm_sqr()).sqrt();
        if n < 1e-300 || !n.is_finite() {
            return Err(SimError::InvalidArgument("zero polarization vector".into()));
        }
        Ok(PolKet { h: h / n, v: v / n })
    }

    pub fn real(h: f64, v: f64) -> Result<Self> {
        Self::new(Complex64::new(h, 0.0), Complex64::new(v, 0.0))
    }

    pub fn horizontal() -> Self {
        PolKet {
            h: Complex64::new(1.0, 0.0),
            v: Complex64::default(),
        }
    }

    pub fn vertical() -> Self {
        PolKet {
            h: Complex64::default(),
            v: Complex64::new(1.0, 0.0),
        }
    }

    pub fn plus() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        PolKet {
            h: Complex64::new(r, 0.0),
            v: Complex64::new(r, 0.0),
        }
    }

    pub fn minus() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        PolKet {
            h: Complex64::new(r, 0.0),
            v: Complex64::new(-r, 0.0),
        }
    }

    /// `(|H⟩ + i|V⟩)/√2`
    pub fn right() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        PolKet {
            h: Complex64::new(r, 0.0),
            v: Complex64::new(0.0, r),
        }
    }

    /// `(|H⟩ − i|V⟩)/√2`
    pub fn left() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        PolKet {
            h: Complex64::new(r, 0.0),
            v: Complex64::new(0.0, -r),
        }
    }

    pub fn orthogonal(&self) -> Self {
        PolKet {
            h: -self.v.conj(),
            v: self.h.conj(),
        }
    }

    pub fn inner(&self, other: &PolKet) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }

    pub fn components(&self) -> [Complex64; 2] {
        [self.h, self.v]
    }
}

/// Single-qubit polarization density matrix (Hermitian, PSD, unit trace).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolState {
    rho: [[Complex64; 2]; 2],
}

impl From<PolKet> for PolState {
    fn from(k: PolKet) -> Self {
        let a = k.components();
        let mut rho = [[Complex64::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] = a[i] * a[j].conj();
            }
        }
        PolState { rho }
    }
}

impl PolState {
    pub fn from_matrix(rho: [[Complex64; 2]; 2]) -> Result<Self> {
        if (rho[0][1] - rho[1][0].conj()).norm() > HERMITIAN_TOL
            || rho[0][0].im.abs() > HERMITIAN_TOL
            || rho[1][1].im.abs() > HERMITIAN_TOL
        {
            return Err(SimError::InvalidArgument(
                "density matrix not Hermitian".into(),
            ));
        }
        let s = PolState { rho };
        if (s.trace() - 1.0).abs() > TRACE_TOL {
            return Err(SimError::InvalidArgument(format!(
                "density matrix trace {} != 1",
                s.trace()
            )));
        }
        if s.eigenvalues()[0] < -PSD_TOL {
            return Err(SimError::InvalidArgument("density matrix not PSD".into()));
        }
        Ok(s)
    }

    pub fn maximally_mixed() -> Self {
        let half = Complex64::new(0.5, 0.0);
        PolState {
            rho: [[half, Complex64::default()], [Complex64::default(), half]],
        }
    }

    pub fn rho(&self) -> &[[Complex64; 2]; 2] {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho[0][0].re + self.rho[1][1].re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.rho[0][0].re;
        let d = self.rho[1][1].re;
        let disc = ((a - d).powi(2) + 4.0 * self.rho[0][1].norm_sqr()).sqrt();
        [(a + d - disc) / 2.0, (a + d + disc) / 2.0]
    }

    pub fn purity(&self) -> f64 {
        self.rho[0][0].re.powi(2) + self.rho[1][1].re.powi(2) + 2.0 * self.rho[0][1].norm_sqr()
    }

    pub fn is_pure(&self) -> bool {
        self.purity() > 1.0 - PURE_TOL
    }

    /// Dominant eigenvector when the state is pure, phase fixed so the
    /// first nonzero component is real and positive.
    pub fn as_ket(&self) -> Option<PolKet> {
        if !self.is_pure() {
            return None;
        }
        let (h, v) = if self.rho[0][0].re >= self.rho[1][1].re {
            let n = self.rho[0][0].re.sqrt();
            (Complex64::new(n, 0.0), self.rho[1][0] / n)
        } else {
            let n = self.rho[1][1].re.sqrt();
            let h = self.rho[0][1] / n;
            // rotate global phase so h is real positive
            let ph = if h.norm() > 0.0 {
                h.conj() / h.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            (h * ph, Complex64::new(n, 0.0) * ph)
        };
        PolKet::new(h, v).ok()
    }

    /// `U ρ U†`.
    #[allow(clippy::needless_range_loop)]
    pub fn transformed(&self, u: &[[Complex64; 2]; 2]) -> PolState {
        let mut tmp = [[Complex64::default(); 2]; 2];
        let mut out = [[Complex64::default(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    tmp[i][j] += u[i][k] * self.rho[k][j];
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i][j] += tmp[i][k] * u[j][k].conj();
                }
            }
        }
        PolState { rho: out }
    }

    /// Phase flip `Z = diag(1, −1)`.
    pub fn phase_flipped(&self) -> PolState {
        let one = Complex64::new(1.0, 0.0);
        self.transformed(&[[one, Complex64::default()], [Complex64::default(), -one]])
    }
}

/// `⟨t|ρ|t⟩`, clamped to [0, 1].
pub fn fidelity(state: &PolState, target: &PolKet) -> f64 {
    let t = target.components();
    let mut f = Complex64::default();
    for i in 0..2 {
        for j in 0..2 {
            f += t[i].conj() * state.rho[i][j] * t[j];
        }
    }
    f.re.clamp(0.0, 1.0)
}
