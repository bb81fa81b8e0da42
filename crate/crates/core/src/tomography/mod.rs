//! Single-qubit polarization tomography from coincidence counts.
//!
//! Three analyzer settings (Z: H/V, X: D/A, Y: L/R) with two detectors each
//! give six count cells. States are reconstructed by maximizing an
//! independent-Poisson likelihood over `ρ = G†G / tr(G†G)`, `G` lower
//! triangular.

mod counts;
mod mle;
mod montecarlo;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::jones::{JonesMatrix, JonesVector, StateLabel, C64};

pub use counts::{simulate_counts, simulate_counts_with, CountRecord};
pub use mle::{mle_fit, mle_reconstruct, MleFit, MleSettings};
pub use montecarlo::{monte_carlo_uncertainty, FidelityEstimate};

/// Tolerance on Hermiticity, trace and positivity of a density matrix.
pub const DENSITY_TOL: f64 = 1e-10;

/// Best average fidelity of a measure-and-prepare memory.
pub const CLASSICAL_FIDELITY_BOUND: f64 = 2.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub(crate) fn index(self) -> usize {
        match self {
            Basis::Z => 0,
            Basis::X => 1,
            Basis::Y => 2,
        }
    }

    pub fn setting(self) -> ProjectorSetting {
        let (plus, minus) = match self {
            Basis::Z => (StateLabel::H, StateLabel::V),
            Basis::X => (StateLabel::D, StateLabel::A),
            Basis::Y => (StateLabel::L, StateLabel::R),
        };
        ProjectorSetting {
            basis: self,
            plus,
            minus,
        }
    }

    /// Detector labels `(plus, minus)` as used in count files.
    pub fn detector_labels(self) -> (&'static str, &'static str) {
        match self {
            Basis::Z => ("H", "V"),
            Basis::X => ("D", "A"),
            Basis::Y => ("L", "R"),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        })
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Z" | "z" => Ok(Basis::Z),
            "X" | "x" => Ok(Basis::X),
            "Y" | "y" => Ok(Basis::Y),
            other => Err(Error::invalid(format!(
                "unknown analyzer setting '{other}'"
            ))),
        }
    }
}

/// One analyzer setting: a polarizing beam splitter preceded by wave plates,
/// projecting onto two orthonormal states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectorSetting {
    pub basis: Basis,
    pub plus: StateLabel,
    pub minus: StateLabel,
}

impl ProjectorSetting {
    pub fn all() -> [ProjectorSetting; 3] {
        Basis::ALL.map(Basis::setting)
    }

    pub fn projector_plus(&self) -> JonesVector {
        self.plus.vector()
    }

    pub fn projector_minus(&self) -> JonesVector {
        self.minus.vector()
    }

    pub(crate) fn projectors(&self) -> [JonesVector; 2] {
        [self.projector_plus(), self.projector_minus()]
    }
}

/// Physical single-qubit state: Hermitian, positive, unit trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(JonesMatrix);

impl DensityMatrix {
    pub fn new(m: JonesMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::invalid("density matrix has non-finite entries"));
        }
        if !m.is_hermitian(DENSITY_TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        if (m.trace() - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix trace is {}, not 1",
                m.trace()
            )));
        }
        if m.hermitian_eigenvalues()[0] < -DENSITY_TOL {
            return Err(Error::invalid("density matrix has a negative eigenvalue"));
        }
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|` for the normalized direction of `psi`.
    pub fn pure(psi: &JonesVector) -> Result<Self> {
        let psi = psi
            .normalized()
            .ok_or_else(|| Error::invalid("cannot build a pure state from the zero vector"))?;
        let (a, b) = (psi.a1, psi.a2);
        Ok(Self(JonesMatrix::new(
            C64::new(a.norm_sqr(), 0.0),
            a * b.conj(),
            b * a.conj(),
            C64::new(b.norm_sqr(), 0.0),
        )))
    }

    pub fn maximally_mixed() -> Self {
        Self(JonesMatrix::scalar(C64::new(0.5, 0.0)))
    }

    /// `(I + r·σ)/2` for a Bloch vector with `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let [x, y, z] = r;
        Self::new(JonesMatrix::new(
            C64::new(0.5 * (1.0 + z), 0.0),
            C64::new(0.5 * x, -0.5 * y),
            C64::new(0.5 * x, 0.5 * y),
            C64::new(0.5 * (1.0 - z), 0.0),
        ))
    }

    pub fn matrix(&self) -> &JonesMatrix {
        &self.0
    }

    /// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` in the (D, L, H) convention.
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.0;
        [2.0 * m.m21.re, 2.0 * m.m21.im, (m.m11 - m.m22).re]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        self.0.hermitian_eigenvalues()
    }

    pub fn purity(&self) -> f64 {
        let [l0, l1] = self.eigenvalues();
        l0 * l0 + l1 * l1
    }

    /// `⟨p|ρ|p⟩` (not normalized by `⟨p|p⟩`).
    pub fn expectation(&self, p: &JonesVector) -> f64 {
        p.inner(&(self.0 * *p)).re
    }
}

/// Overlap `⟨ψ|ρ|ψ⟩` with the target pure state; `psi` is normalized first,
/// so the result ignores its global phase and scale.
pub fn fidelity(rho: &DensityMatrix, psi: &JonesVector) -> f64 {
    let n = psi.intensity();
    if n == 0.0 {
        return 0.0;
    }
    (rho.expectation(psi) / n).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Exceeds,
    NotExceeds,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub verdict: Verdict,
    /// `(f − 2/3)/σ` when an uncertainty was supplied.
    pub margin_sigma: Option<f64>,
}

/// Compare a fidelity against the 2/3 measure-and-prepare limit (strictly).
pub fn classical_bound_check(f: f64, sigma: Option<f64>) -> BoundCheck {
    let verdict = if f > CLASSICAL_FIDELITY_BOUND {
        Verdict::Exceeds
    } else {
        Verdict::NotExceeds
    };
    let margin_sigma = sigma
        .filter(|s| *s > 0.0)
        .map(|s| (f - CLASSICAL_FIDELITY_BOUND) / s);
    BoundCheck {
        verdict,
        margin_sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn settings_are_orthonormal() {
        for s in ProjectorSetting::all() {
            let [p, m] = s.projectors();
            assert_abs_diff_eq!(p.inner(&m).norm(), 0.0, epsilon = 1e-15);
            assert!(p.is_normalized() && m.is_normalized());
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(JonesMatrix::IDENTITY).is_err());
        assert!(
            DensityMatrix::new(JonesMatrix::diag(C64::new(1.5, 0.0), C64::new(-0.5, 0.0))).is_err()
        );
        let not_hermitian = JonesMatrix::new(
            C64::new(0.5, 0.0),
            C64::new(0.1, 0.0),
            C64::new(0.3, 0.0),
            C64::new(0.5, 0.0),
        );
        assert!(DensityMatrix::new(not_hermitian).is_err());
        assert!(DensityMatrix::from_bloch([0.0, 0.0, 1.0]).is_ok());
        assert!(DensityMatrix::from_bloch([0.0, 0.9, 0.9]).is_err());
    }

    #[test]
    fn bloch_matches_stokes_convention() {
        for label in StateLabel::ALL {
            let rho = DensityMatrix::pure(&label.vector()).unwrap();
            let s = crate::jones::jones_to_stokes(&label.vector());
            let [x, y, z] = rho.bloch();
            assert_abs_diff_eq!(x, s.s2, epsilon = 1e-15);
            assert_abs_diff_eq!(y, s.s3, epsilon = 1e-15);
            assert_abs_diff_eq!(z, s.s1, epsilon = 1e-15);
        }
    }

    #[test]
    fn fidelity_cases() {
        let h = StateLabel::H.vector();
        let v = StateLabel::V.vector();
        let rho_h = DensityMatrix::pure(&h).unwrap();
        assert_eq!(fidelity(&rho_h, &h), 1.0);
        assert_eq!(fidelity(&rho_h, &v), 0.0);
        let mixed = DensityMatrix::maximally_mixed();
        for label in StateLabel::ALL {
            assert_abs_diff_eq!(fidelity(&mixed, &label.vector()), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn bound_check_cases() {
        assert_eq!(classical_bound_check(0.975, None).verdict, Verdict::Exceeds);
        assert_eq!(
            classical_bound_check(2.0 / 3.0, None).verdict,
            Verdict::NotExceeds
        );
        assert_eq!(
            classical_bound_check(0.5, None).verdict,
            Verdict::NotExceeds
        );
        let c = classical_bound_check(0.975, Some(0.004));
        assert_abs_diff_eq!(
            c.margin_sigma.unwrap(),
            (0.975 - 2.0 / 3.0) / 0.004,
            epsilon = 1e-12
        );
    }

    fn arb_state() -> impl Strategy<Value = JonesVector> {
        proptest::array::uniform4(-1.0f64..1.0)
            .prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-3)
            .prop_map(|x| {
                JonesVector::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]))
                    .normalized()
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn fidelity_linear_in_rho(a in arb_state(), b in arb_state(), psi in arb_state(), w in 0.0f64..1.0) {
            let ra = DensityMatrix::pure(&a).unwrap();
            let rb = DensityMatrix::pure(&b).unwrap();
            let mix = DensityMatrix::new(
                ra.matrix().scale(C64::new(w, 0.0)) + rb.matrix().scale(C64::new(1.0 - w, 0.0)),
            ).unwrap();
            let lhs = fidelity(&mix, &psi);
            let rhs = w * fidelity(&ra, &psi) + (1.0 - w) * fidelity(&rb, &psi);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn fidelity_ignores_global_phase(a in arb_state(), psi in arb_state(), theta in 0.0f64..6.3) {
            let rho = DensityMatrix::pure(&a).unwrap();
            let rotated = psi.scale(C64::from_polar(1.0, theta));
            prop_assert!((fidelity(&rho, &psi) - fidelity(&rho, &rotated)).abs() < 1e-12);
        }
    }
}
