//! Birefringent, anisotropically absorbing crystals and the two-crystal
//! arrangements built from them.
//!
//! Each crystal is diagonal in its own (D1, D2) frame: `M = T·U` with
//! `T = diag(e^{−d1/2}, e^{−d2/2})` and `U = diag(1, e^{iφ})`. An arrangement
//! is flattened into an ordered list of optical elements (crystals at some
//! orientation, and thin plates such as a half-wave plate or cryostat
//! windows), which the analytic, layered and profile propagators all share.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jones::{pdl_matrix, pmd_matrix, retarder, JonesMatrix, JonesVector, C64};

/// Vacuum wavelength of the Nd³⁺ transition used by default (m).
pub const DEFAULT_WAVELENGTH: f64 = 883e-9;
/// Polarization beat length of the host crystal (m).
pub const DEFAULT_BEAT_LENGTH: f64 = 100e-6;
/// Length of each crystal (m).
pub const DEFAULT_CRYSTAL_LENGTH: f64 = 0.01;
/// Birefringence giving one full 2π beat per [`DEFAULT_BEAT_LENGTH`].
pub const DEFAULT_DELTA_N: f64 = DEFAULT_WAVELENGTH / DEFAULT_BEAT_LENGTH;

/// Fitted pair-total optical depth along D1 for the uncompensated pair.
pub const PAIR_DEPTH_D1: f64 = 2.70;
/// Fitted pair-total optical depth along D2 for the uncompensated pair.
pub const PAIR_DEPTH_D2: f64 = 0.99;

/// One crystal: absorption coefficients along D1/D2 (1/m), length (m),
/// birefringence `n2 − n1` and vacuum wavelength (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystalSpec {
    pub alpha1: f64,
    pub alpha2: f64,
    pub length: f64,
    pub delta_n: f64,
    pub wavelength: f64,
}

impl CrystalSpec {
    pub fn new(
        alpha1: f64,
        alpha2: f64,
        length: f64,
        delta_n: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let spec = Self {
            alpha1,
            alpha2,
            length,
            delta_n,
            wavelength,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Crystal of length `length` with optical depths `d1`, `d2` and the
    /// default birefringence and wavelength.
    pub fn from_depths(d1: f64, d2: f64, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::invalid(format!(
                "crystal length must be positive, got {length}"
            )));
        }
        Self::new(
            d1 / length,
            d2 / length,
            length,
            DEFAULT_DELTA_N,
            DEFAULT_WAVELENGTH,
        )
    }

    /// Same crystal with `delta_n` chosen so that the full-length
    /// birefringent phase equals `biref_phase`.
    pub fn with_biref_phase(self, biref_phase: f64) -> Result<Self> {
        if !biref_phase.is_finite() {
            return Err(Error::invalid("birefringent phase must be finite"));
        }
        let delta_n = biref_phase * self.wavelength / (2.0 * PI * self.length);
        Self::new(
            self.alpha1,
            self.alpha2,
            self.length,
            delta_n,
            self.wavelength,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha1,
            self.alpha2,
            self.length,
            self.delta_n,
            self.wavelength,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("crystal parameters must be finite"));
        }
        if self.alpha1 < 0.0 || self.alpha2 < 0.0 {
            return Err(Error::invalid(format!(
                "absorption coefficients must be non-negative, got ({}, {})",
                self.alpha1, self.alpha2
            )));
        }
        if self.length <= 0.0 {
            return Err(Error::invalid(format!(
                "crystal length must be positive, got {}",
                self.length
            )));
        }
        if self.wavelength <= 0.0 {
            return Err(Error::invalid(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        Ok(())
    }

    /// Optical depths `(d1, d2) = (α1·L, α2·L)`.
    pub fn depths(&self) -> (f64, f64) {
        (self.alpha1 * self.length, self.alpha2 * self.length)
    }

    /// Full-length birefringent phase `k·Δn·L`.
    pub fn biref_phase(&self) -> f64 {
        2.0 * PI / self.wavelength * self.delta_n * self.length
    }

    /// Same crystal with both absorption coefficients divided by `finesse`,
    /// i.e. the comb-averaged medium seen by an atomic frequency comb.
    pub fn comb_averaged(&self, finesse: f64) -> Self {
        Self {
            alpha1: self.alpha1 / finesse,
            alpha2: self.alpha2 / finesse,
            ..*self
        }
    }

    /// `T·U` for a slab of thickness `fraction·L`, in the crystal frame.
    pub(crate) fn slab(&self, fraction: f64) -> JonesMatrix {
        let (d1, d2) = self.depths();
        let t = JonesMatrix::diag(
            C64::new((-0.5 * d1 * fraction).exp(), 0.0),
            C64::new((-0.5 * d2 * fraction).exp(), 0.0),
        );
        let u = JonesMatrix::diag(
            C64::new(1.0, 0.0),
            C64::from_polar(1.0, self.biref_phase() * fraction),
        );
        t * u
    }
}

/// Full-length `T·U` of one crystal in its own frame.
pub fn transmission_matrix(c: &CrystalSpec) -> Result<JonesMatrix> {
    c.validate()?;
    let (d1, d2) = c.depths();
    Ok(pdl_matrix(d1, d2)? * pmd_matrix(c.biref_phase())?)
}

/// Optical depth seen by linear light at `pol_angle` from D1 through a
/// medium with principal depths `d1`, `d2`:
/// `−ln(e^{−d1}·cos²ψ + e^{−d2}·sin²ψ)`.
pub fn effective_optical_depth(d1: f64, d2: f64, pol_angle: f64) -> f64 {
    let (s, c) = pol_angle.sin_cos();
    -((-d1).exp() * c * c + (-d2).exp() * s * s).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrangementKind {
    /// One crystal.
    Single,
    /// Second crystal turned 90° about the propagation axis.
    RotatedPair,
    /// Parallel crystals with a half-wave plate at 45° between them.
    HwpPair,
    /// Parallel crystals, no plate: the uncompensated reference.
    AlignedPair,
}

impl ArrangementKind {
    pub fn is_pair(self) -> bool {
        self != ArrangementKind::Single
    }

    pub fn is_compensated(self) -> bool {
        matches!(
            self,
            ArrangementKind::RotatedPair | ArrangementKind::HwpPair
        )
    }
}

/// Deviations from the ideal mounting, all in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Imperfections {
    /// Half-wave plate retardance minus π.
    pub hwp_retardance_error: f64,
    /// Half-wave plate axis minus 45°.
    pub hwp_angle_error: f64,
    /// Extra rotation of the second crystal about z.
    pub misalignment: f64,
    /// Retardance of each cryostat window (entry and exit).
    pub window_retardance: f64,
    /// Slow axis of the windows, from D1.
    pub window_axis: f64,
}

impl Imperfections {
    pub const IDEAL: Self = Self {
        hwp_retardance_error: 0.0,
        hwp_angle_error: 0.0,
        misalignment: 0.0,
        window_retardance: 0.0,
        window_axis: 0.0,
    };

    /// Default imperfect mounting: half-wave plate retardance off by 2° and
    /// its axis by 4.5°, second crystal turned by 1°, no window
    /// birefringence. For the fitted depths this keeps the compensated
    /// optical depth between 1.72 and 1.97 over linear input angles.
    pub fn typical() -> Self {
        Self {
            hwp_retardance_error: 2f64.to_radians(),
            hwp_angle_error: 4.5f64.to_radians(),
            misalignment: 1f64.to_radians(),
            window_retardance: 0.0,
            window_axis: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.hwp_retardance_error == 0.0
            && self.hwp_angle_error == 0.0
            && self.misalignment == 0.0
            && self.window_retardance == 0.0
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.hwp_retardance_error,
            self.hwp_angle_error,
            self.misalignment,
            self.window_retardance,
            self.window_axis,
        ];
        if all.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("imperfection parameters must be finite"))
        }
    }
}

/// A single crystal or a two-crystal stack, plus mounting imperfections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrangement {
    pub kind: ArrangementKind,
    pub crystal_a: CrystalSpec,
    pub crystal_b: Option<CrystalSpec>,
    pub imperfections: Imperfections,
}

/// One optical element of a flattened arrangement.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Element {
    /// Crystal whose D1 axis sits at `orientation` from the laboratory D1.
    Crystal { spec: CrystalSpec, orientation: f64 },
    /// Zero-thickness lossless plate.
    Plate(JonesMatrix),
}

impl Element {
    /// Full-element matrix in the laboratory frame.
    pub(crate) fn matrix(&self) -> JonesMatrix {
        match self {
            Element::Crystal { spec, orientation } => spec.slab(1.0).rotated(*orientation),
            Element::Plate(m) => *m,
        }
    }
}

impl Arrangement {
    pub fn single(crystal: CrystalSpec) -> Self {
        Self {
            kind: ArrangementKind::Single,
            crystal_a: crystal,
            crystal_b: None,
            imperfections: Imperfections::IDEAL,
        }
    }

    pub fn pair(kind: ArrangementKind, a: CrystalSpec, b: CrystalSpec) -> Result<Self> {
        if !kind.is_pair() {
            return Err(Error::invalid("a pair arrangement needs a pair kind"));
        }
        let arrangement = Self {
            kind,
            crystal_a: a,
            crystal_b: Some(b),
            imperfections: Imperfections::IDEAL,
        };
        arrangement.validate()?;
        Ok(arrangement)
    }

    /// Two copies of `crystal` in the given pair geometry.
    pub fn identical_pair(kind: ArrangementKind, crystal: CrystalSpec) -> Result<Self> {
        Self::pair(kind, crystal, crystal)
    }

    pub fn with_imperfections(mut self, imperfections: Imperfections) -> Self {
        self.imperfections = imperfections;
        self
    }

    /// Same stack with every imperfection knob at zero.
    pub fn ideal(&self) -> Self {
        self.with_imperfections(Imperfections::IDEAL)
    }

    /// Same crystals rearranged as `kind`.
    pub fn with_kind(&self, kind: ArrangementKind) -> Result<Self> {
        match (kind.is_pair(), self.crystal_b) {
            (false, _) => Ok(Self::single(self.crystal_a).with_imperfections(self.imperfections)),
            (true, Some(b)) => {
                Ok(Self::pair(kind, self.crystal_a, b)?.with_imperfections(self.imperfections))
            }
            (true, None) => Err(Error::invalid("single arrangement has no second crystal")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.crystal_a.validate()?;
        match (self.kind.is_pair(), &self.crystal_b) {
            (true, Some(b)) => b.validate()?,
            (true, None) => return Err(Error::invalid("pair arrangement is missing crystal_b")),
            (false, Some(_)) => {
                return Err(Error::invalid("single arrangement must not have crystal_b"))
            }
            (false, None) => {}
        }
        self.imperfections.validate()
    }

    pub fn crystals(&self) -> impl Iterator<Item = &CrystalSpec> {
        std::iter::once(&self.crystal_a).chain(self.crystal_b.as_ref())
    }

    /// Total crystal length along z (m).
    pub fn total_length(&self) -> f64 {
        self.crystals().map(|c| c.length).sum()
    }

    /// Polarization mapping of the ideal arrangement, up to a scalar: the
    /// identity, except for the wave-plate pair which exchanges D1 and D2.
    pub fn expected_output(&self, input: &JonesVector) -> JonesVector {
        match self.kind {
            ArrangementKind::HwpPair => input.swapped(),
            _ => *input,
        }
    }

    fn window(&self) -> Option<JonesMatrix> {
        let imp = &self.imperfections;
        (imp.window_retardance != 0.0)
            .then(|| retarder(imp.window_retardance, imp.window_axis).expect("validated finite"))
    }

    fn half_wave_plate(&self) -> JonesMatrix {
        let imp = &self.imperfections;
        retarder(
            PI + imp.hwp_retardance_error,
            FRAC_PI_4 + imp.hwp_angle_error,
        )
        .expect("validated finite")
    }

    /// Ordered optical elements including windows.
    pub(crate) fn elements(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(5);
        let window = self.window();
        out.extend(window.map(Element::Plate));
        out.extend(self.crystal_elements());
        out.extend(window.map(Element::Plate));
        out
    }

    /// Ordered elements between the two windows.
    pub(crate) fn crystal_elements(&self) -> Vec<Element> {
        let a = Element::Crystal {
            spec: self.crystal_a,
            orientation: 0.0,
        };
        let Some(b) = self.crystal_b else {
            return vec![a];
        };
        let tilt = self.imperfections.misalignment;
        match self.kind {
            ArrangementKind::Single => vec![a],
            ArrangementKind::RotatedPair => vec![
                a,
                Element::Crystal {
                    spec: b,
                    orientation: FRAC_PI_2 + tilt,
                },
            ],
            ArrangementKind::AlignedPair => vec![
                a,
                Element::Crystal {
                    spec: b,
                    orientation: tilt,
                },
            ],
            ArrangementKind::HwpPair => vec![
                a,
                Element::Plate(self.half_wave_plate()),
                Element::Crystal {
                    spec: b,
                    orientation: tilt,
                },
            ],
        }
    }

    /// Jones matrix of the whole stack (any kind).
    pub fn transmission(&self) -> Result<JonesMatrix> {
        self.validate()?;
        Ok(self
            .elements()
            .iter()
            .fold(JonesMatrix::IDENTITY, |acc, e| e.matrix() * acc))
    }

    /// Optical depth `−ln P_out/P_in` for linear light at `pol_angle`.
    pub fn depth_for_linear(&self, pol_angle: f64) -> Result<f64> {
        let out = self.transmission()? * JonesVector::linear(pol_angle);
        Ok(-out.intensity().ln())
    }
}

/// Jones matrix of a two-crystal arrangement.
pub fn pair_transmission(a: &Arrangement) -> Result<JonesMatrix> {
    if !a.kind.is_pair() {
        return Err(Error::invalid(
            "pair_transmission needs a two-crystal arrangement",
        ));
    }
    a.transmission()
}

/// Propagate `input` through the arrangement, cutting every crystal into
/// `n_layers` equal slabs applied one after another.
pub fn layered_propagate(
    a: &Arrangement,
    input: &JonesVector,
    n_layers: usize,
) -> Result<JonesVector> {
    if n_layers == 0 {
        return Err(Error::invalid("n_layers must be at least 1"));
    }
    a.validate()?;
    let fraction = 1.0 / n_layers as f64;
    let mut v = *input;
    for element in a.elements() {
        match element {
            Element::Crystal { spec, orientation } => {
                let layer = spec.slab(fraction).rotated(orientation);
                for _ in 0..n_layers {
                    v = layer * v;
                }
            }
            Element::Plate(m) => v = m * v,
        }
    }
    Ok(v)
}

/// Field sample inside the crystal stack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileSample {
    /// Distance from the entrance face of the first crystal (m).
    pub z: f64,
    pub intensity_d1: f64,
    pub intensity_d2: f64,
    /// Phase accumulated by the D1 component since z = 0 (rad, unwrapped).
    pub phase_d1: f64,
    pub phase_d2: f64,
}

/// Largest phase step allowed between unwrapping updates.
const MAX_PHASE_STEP: f64 = PI / 8.0;

struct Tracker {
    v: JonesVector,
    phase: [f64; 2],
}

impl Tracker {
    fn push(&mut self, m: &JonesMatrix) {
        let next = *m * self.v;
        for (k, (old, new)) in [(self.v.a1, next.a1), (self.v.a2, next.a2)]
            .into_iter()
            .enumerate()
        {
            if old.norm() > 0.0 && new.norm() > 0.0 {
                self.phase[k] += (new / old).arg();
            }
        }
        self.v = next;
    }

    fn sample(&self, z: f64) -> ProfileSample {
        ProfileSample {
            z,
            intensity_d1: self.v.a1.norm_sqr(),
            intensity_d2: self.v.a2.norm_sqr(),
            phase_d1: self.phase[0],
            phase_d2: self.phase[1],
        }
    }
}

/// Per-component intensity and accumulated phase sampled at `n_samples`
/// evenly spaced positions from the entrance of the first crystal to the exit
/// of the last. Windows sit outside the sampled range; a sample landing
/// exactly on the boundary between crystals is taken before any plate there.
pub fn propagation_profile(
    a: &Arrangement,
    input: &JonesVector,
    n_samples: usize,
) -> Result<Vec<ProfileSample>> {
    if n_samples < 2 {
        return Err(Error::invalid("n_samples must be at least 2"));
    }
    a.validate()?;
    let total = a.total_length();
    let elements = a.crystal_elements();
    let mut tracker = Tracker {
        v: *input,
        phase: [0.0; 2],
    };
    let mut out = Vec::with_capacity(n_samples);
    out.push(tracker.sample(0.0));

    // Position of the front of the current crystal, and the index of the
    // next element still to be (fully) traversed.
    let mut idx = 0;
    let mut z_cur = 0.0;
    let mut crystal_start = 0.0;
    for j in 1..n_samples {
        let z_target = if j == n_samples - 1 {
            total
        } else {
            total * j as f64 / (n_samples - 1) as f64
        };
        while idx < elements.len() {
            match elements[idx] {
                Element::Plate(m) => {
                    if z_target > z_cur || j == n_samples - 1 {
                        tracker.push(&m);
                        idx += 1;
                    } else {
                        break;
                    }
                }
                Element::Crystal { spec, orientation } => {
                    let crystal_end = crystal_start + spec.length;
                    let stop = z_target.min(crystal_end);
                    if stop > z_cur {
                        let fraction = (stop - z_cur) / spec.length;
                        let steps = ((spec.biref_phase().abs() * fraction) / MAX_PHASE_STEP)
                            .ceil()
                            .max(1.0);
                        let step = spec.slab(fraction / steps).rotated(orientation);
                        for _ in 0..steps as usize {
                            tracker.push(&step);
                        }
                        z_cur = stop;
                    }
                    if z_target >= crystal_end && (z_target > crystal_end || j == n_samples - 1) {
                        idx += 1;
                        crystal_start = crystal_end;
                        z_cur = crystal_end;
                    } else {
                        break;
                    }
                }
            }
        }
        out.push(tracker.sample(z_target));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jones::{jones_to_stokes, StateLabel};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn crystal(d1: f64, d2: f64, phase: f64) -> CrystalSpec {
        CrystalSpec::from_depths(d1, d2, DEFAULT_CRYSTAL_LENGTH)
            .unwrap()
            .with_biref_phase(phase)
            .unwrap()
    }

    #[test]
    fn default_birefringence_gives_one_beat_per_beat_length() {
        let c = CrystalSpec::from_depths(1.0, 1.0, DEFAULT_BEAT_LENGTH).unwrap();
        assert_abs_diff_eq!(c.biref_phase(), 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn spec_validation() {
        assert!(CrystalSpec::new(-1.0, 0.0, 0.01, 0.0, 883e-9).is_err());
        assert!(CrystalSpec::new(1.0, 0.0, 0.0, 0.0, 883e-9).is_err());
        assert!(CrystalSpec::new(1.0, 0.0, 0.01, 0.0, 0.0).is_err());
        assert!(CrystalSpec::new(1.0, f64::NAN, 0.01, 0.0, 883e-9).is_err());
        let c = CrystalSpec::new(270.0, 99.0, 0.01, 1e-3, 883e-9).unwrap();
        let (d1, d2) = c.depths();
        assert_abs_diff_eq!(d1, 2.70, epsilon = 1e-12);
        assert_abs_diff_eq!(d2, 0.99, epsilon = 1e-12);
    }

    #[test]
    fn lossless_isotropic_crystal_is_identity() {
        let c = crystal(0.0, 0.0, 0.0);
        assert!(
            transmission_matrix(&c)
                .unwrap()
                .distance(&JonesMatrix::IDENTITY)
                < 1e-15
        );
    }

    #[test]
    fn h_transmission_through_fitted_depths() {
        let c = crystal(2.70, 0.99, 1.234);
        let m = transmission_matrix(&c).unwrap();
        let out = m * JonesVector::real(1.0, 0.0);
        assert_abs_diff_eq!(out.intensity(), (-2.70f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(out.intensity(), 0.0672, epsilon = 5e-5);
        // diagonal: (1,0) and (0,1) are eigenvectors
        assert_eq!(m.m12.norm(), 0.0);
        assert_eq!(m.m21.norm(), 0.0);
    }

    #[test]
    fn effective_depth_endpoints() {
        assert_eq!(effective_optical_depth(2.70, 0.99, 0.0), 2.70);
        assert_abs_diff_eq!(
            effective_optical_depth(2.70, 0.99, FRAC_PI_2),
            0.99,
            epsilon = 1e-15
        );
        // -ln((e^-2.70 + e^-0.99)/2)
        assert_abs_diff_eq!(
            effective_optical_depth(2.70, 0.99, FRAC_PI_4),
            1.516_899_288_568_290_4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rotated_pair_matches_closed_form() {
        // R(-90°)·TU·R(90°)·TU = e^{-(d1+d2)/2} e^{iφ} I
        let c = crystal(1.35, 0.495, 0.8);
        let tu = transmission_matrix(&c).unwrap();
        let r = |a: f64| crate::jones::rotation_matrix(a).unwrap();
        let explicit = r(-FRAC_PI_2) * tu * r(FRAC_PI_2) * tu;
        let pair = pair_transmission(
            &Arrangement::identical_pair(ArrangementKind::RotatedPair, c).unwrap(),
        )
        .unwrap();
        assert!(pair.distance(&explicit) < 1e-15);
        let expected = JonesMatrix::scalar(C64::from_polar((-(1.35 + 0.495) / 2.0f64).exp(), 0.8));
        assert!(pair.distance(&expected) < 1e-12);
        let intensity = (pair * JonesVector::real(1.0, 0.0)).intensity();
        assert_abs_diff_eq!(intensity, (-1.845f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn isotropic_rotated_pair() {
        let c = crystal(0.7, 0.7, 0.0);
        let pair = pair_transmission(
            &Arrangement::identical_pair(ArrangementKind::RotatedPair, c).unwrap(),
        )
        .unwrap();
        assert!(pair.distance(&JonesMatrix::scalar(C64::new((-0.7f64).exp(), 0.0))) < 1e-15);
    }

    #[test]
    fn single_rejected_by_pair_transmission() {
        let a = Arrangement::single(crystal(1.0, 0.5, 0.0));
        assert!(matches!(pair_transmission(&a), Err(Error::InvalidInput(_))));
        assert!(a.transmission().is_ok());
    }

    #[test]
    fn aligned_pair_reproduces_eq1_endpoints() {
        let c = crystal(PAIR_DEPTH_D1 / 2.0, PAIR_DEPTH_D2 / 2.0, 0.37);
        let a = Arrangement::identical_pair(ArrangementKind::AlignedPair, c).unwrap();
        assert_abs_diff_eq!(a.depth_for_linear(0.0).unwrap(), 2.70, epsilon = 1e-12);
        assert_abs_diff_eq!(
            a.depth_for_linear(FRAC_PI_2).unwrap(),
            0.99,
            epsilon = 1e-12
        );
    }

    #[test]
    fn hwp_pair_is_scalar_swap() {
        let c = crystal(1.35, 0.495, 2.1);
        let m =
            pair_transmission(&Arrangement::identical_pair(ArrangementKind::HwpPair, c).unwrap())
                .unwrap();
        let s = C64::from_polar((-1.845f64 / 2.0).exp(), 2.1);
        assert!(m.distance(&JonesMatrix::SWAP.scale(s)) < 1e-12);
    }

    #[test]
    fn layered_edge_cases() {
        let c = crystal(1.35, 0.495, 3.0);
        let a = Arrangement::single(c);
        let v = StateLabel::D.vector();
        assert!(layered_propagate(&a, &v, 0).is_err());
        let one = layered_propagate(&a, &v, 1).unwrap();
        let direct = transmission_matrix(&c).unwrap() * v;
        assert!((one.a1 - direct.a1).norm() < 1e-15 && (one.a2 - direct.a2).norm() < 1e-15);

        let pair = Arrangement::identical_pair(ArrangementKind::RotatedPair, c)
            .unwrap()
            .with_imperfections(Imperfections::typical());
        let many = layered_propagate(&pair, &v, 10_000).unwrap();
        let analytic = pair.transmission().unwrap() * v;
        assert!((many.a1 - analytic.a1).norm() < 1e-9 && (many.a2 - analytic.a2).norm() < 1e-9);

        let lossless =
            Arrangement::identical_pair(ArrangementKind::HwpPair, crystal(0.0, 0.0, 5.0)).unwrap();
        let out = layered_propagate(&lossless, &v, 333).unwrap();
        assert_abs_diff_eq!(out.intensity(), v.intensity(), epsilon = 1e-12);
    }

    #[test]
    fn windows_wrap_the_stack() {
        let c = crystal(1.35, 0.495, 1.1);
        let imp = Imperfections {
            window_retardance: 0.3,
            window_axis: 0.4,
            ..Imperfections::IDEAL
        };
        let bare = Arrangement::identical_pair(ArrangementKind::RotatedPair, c).unwrap();
        let windowed = bare.with_imperfections(imp);
        let w = retarder(0.3, 0.4).unwrap();
        let expected = w * bare.transmission().unwrap() * w;
        assert!(windowed.transmission().unwrap().distance(&expected) < 1e-14);
        assert!(!imp.is_ideal());

        let v = StateLabel::D.vector();
        let layered = layered_propagate(&windowed, &v, 50).unwrap();
        let direct = windowed.transmission().unwrap() * v;
        assert!((layered.a1 - direct.a1).norm() < 1e-12 && (layered.a2 - direct.a2).norm() < 1e-12);

        let inside = propagation_profile(&windowed, &v, 11).unwrap();
        let plain = propagation_profile(&bare, &v, 11).unwrap();
        assert_eq!(inside, plain);
    }

    #[test]
    fn profile_starts_at_input_and_ends_compensated() {
        let c = crystal(
            1.35,
            0.495,
            DEFAULT_DELTA_N * 2.0 * PI / DEFAULT_WAVELENGTH * DEFAULT_CRYSTAL_LENGTH + 0.3,
        );
        let a = Arrangement::identical_pair(ArrangementKind::RotatedPair, c).unwrap();
        let v = JonesVector::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8));
        let profile = propagation_profile(&a, &v, 101).unwrap();
        assert_eq!(profile.len(), 101);
        let first = profile[0];
        assert_eq!(first.z, 0.0);
        assert_abs_diff_eq!(first.intensity_d1, 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(first.intensity_d2, 0.64, epsilon = 1e-15);
        assert_eq!((first.phase_d1, first.phase_d2), (0.0, 0.0));

        let last = profile.last().unwrap();
        assert_abs_diff_eq!(last.z, 2.0 * DEFAULT_CRYSTAL_LENGTH, epsilon = 1e-18);
        let loss = (-1.845f64).exp();
        assert_abs_diff_eq!(last.intensity_d1, 0.36 * loss, epsilon = 1e-12);
        assert_abs_diff_eq!(last.intensity_d2, 0.64 * loss, epsilon = 1e-12);
        assert_abs_diff_eq!(last.phase_d1, last.phase_d2, epsilon = 1e-9);
        assert_abs_diff_eq!(last.phase_d1, c.biref_phase(), epsilon = 1e-9);

        // D1 decays as α1 in crystal A, as α2 in crystal B.
        let mid = profile[50];
        assert_abs_diff_eq!(mid.z, DEFAULT_CRYSTAL_LENGTH, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.intensity_d1, 0.36 * (-1.35f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(mid.phase_d2, c.biref_phase(), epsilon = 1e-9);
        assert_abs_diff_eq!(mid.phase_d1, 0.0, epsilon = 1e-12);

        for w in profile.windows(2) {
            assert!(w[1].intensity_d1 <= w[0].intensity_d1 + 1e-15);
            assert!(w[1].intensity_d2 <= w[0].intensity_d2 + 1e-15);
        }
        assert!(propagation_profile(&a, &v, 1).is_err());
    }

    #[test]
    fn profile_endpoint_matches_transmission_for_hwp_pair() {
        let c = crystal(1.35, 0.495, 0.9);
        let a = Arrangement::identical_pair(ArrangementKind::HwpPair, c).unwrap();
        let v = StateLabel::Elliptical.vector();
        for n in [2, 3, 10, 64] {
            let profile = propagation_profile(&a, &v, n).unwrap();
            let last = profile.last().unwrap();
            let out = a.transmission().unwrap() * v;
            assert_abs_diff_eq!(last.intensity_d1, out.a1.norm_sqr(), epsilon = 1e-12);
            assert_abs_diff_eq!(last.intensity_d2, out.a2.norm_sqr(), epsilon = 1e-12);
        }
    }

    #[test]
    fn compensation_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let d1 = rng.random_range(0.0..5.0);
            let d2 = rng.random_range(0.0..5.0);
            let phi = rng.random_range(0.0..2.0 * PI);
            let a = Arrangement::identical_pair(ArrangementKind::RotatedPair, crystal(d1, d2, phi))
                .unwrap();
            let (s, residual) = pair_transmission(&a).unwrap().scalar_part();
            assert!(residual < 1e-12);
            assert!((s.norm_sqr() - (-(d1 + d2)).exp()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn polarization_preserved(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, phi in 0.0f64..6.28,
                                  x in proptest::array::uniform4(-1.0f64..1.0)) {
            let v = JonesVector::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]));
            prop_assume!(v.intensity() > 1e-3);
            let a = Arrangement::identical_pair(ArrangementKind::RotatedPair, crystal(d1, d2, phi)).unwrap();
            let out = pair_transmission(&a).unwrap() * v;
            let din = jones_to_stokes(&v).direction().unwrap();
            let dout = jones_to_stokes(&out).direction().unwrap();
            for k in 0..3 {
                prop_assert!((din[k] - dout[k]).abs() < 1e-10);
            }
        }

        #[test]
        fn hwp_output_is_swapped_rotated_output(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, phi in 0.0f64..6.28,
                                                x in proptest::array::uniform4(-1.0f64..1.0)) {
            let v = JonesVector::new(C64::new(x[0], x[1]), C64::new(x[2], x[3]));
            let c = crystal(d1, d2, phi);
            let rot = pair_transmission(&Arrangement::identical_pair(ArrangementKind::RotatedPair, c).unwrap()).unwrap() * v;
            let hwp = pair_transmission(&Arrangement::identical_pair(ArrangementKind::HwpPair, c).unwrap()).unwrap() * v;
            let swapped = rot.swapped();
            // equal up to a global phase
            let overlap = swapped.inner(&hwp);
            let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
            let aligned = swapped.scale(phase);
            prop_assert!((aligned.a1 - hwp.a1).norm() < 1e-10 && (aligned.a2 - hwp.a2).norm() < 1e-10);
        }

        #[test]
        fn aligned_pair_follows_eq1(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, phi in 0.0f64..6.28, psi in 0.0f64..3.15) {
            let a = Arrangement::identical_pair(ArrangementKind::AlignedPair, crystal(d1 / 2.0, d2 / 2.0, phi)).unwrap();
            let intensity = (a.transmission().unwrap() * JonesVector::linear(psi)).intensity();
            prop_assert!((intensity - (-effective_optical_depth(d1, d2, psi)).exp()).abs() < 1e-12);
        }

        #[test]
        fn layering_is_layer_count_independent(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, phi in 0.0f64..30.0,
                                               n in 1usize..2000, mis in -0.1f64..0.1) {
            let a = Arrangement::identical_pair(ArrangementKind::RotatedPair, crystal(d1, d2, phi))
                .unwrap()
                .with_imperfections(Imperfections { misalignment: mis, ..Imperfections::IDEAL });
            let v = StateLabel::L.vector();
            let layered = layered_propagate(&a, &v, n).unwrap();
            let analytic = a.transmission().unwrap() * v;
            prop_assert!((layered.a1 - analytic.a1).norm() < 1e-9 && (layered.a2 - analytic.a2).norm() < 1e-9);
        }

        #[test]
        fn profile_total_intensity_nonincreasing(d1 in 0.0f64..5.0, d2 in 0.0f64..5.0, phi in 0.0f64..30.0) {
            let a = Arrangement::identical_pair(ArrangementKind::HwpPair, crystal(d1, d2, phi))
                .unwrap()
                .with_imperfections(Imperfections::typical());
            let profile = propagation_profile(&a, &StateLabel::D.vector(), 40).unwrap();
            for w in profile.windows(2) {
                prop_assert!(w[1].intensity_d1 + w[1].intensity_d2 <= w[0].intensity_d1 + w[0].intensity_d2 + 1e-14);
            }
        }
    }
}
