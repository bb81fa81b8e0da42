//! Jones calculus for polarization states and 2×2 channels.
//!
//! Basis convention used throughout the crate: component 1 is the crystal
//! axis D1, which coincides with laboratory H for the default mounting;
//! component 2 is D2 (laboratory V). Birefringent phase is referenced to D1,
//! so a retarder is `diag(1, e^{iφ})`. Circular states follow `L = (1, i)/√2`,
//! `R = (1, -i)/√2`, giving `s3 = +1` for L.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for exact algebraic identities (unitarity, commutation).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for decomposition round trips.
pub const DECOMPOSITION_TOL: f64 = 1e-10;

/// Complex polarization amplitude along (D1, D2). Not necessarily normalized:
/// the norm carries attenuation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesVector {
    pub a1: C64,
    pub a2: C64,
}

impl JonesVector {
    pub const fn new(a1: C64, a2: C64) -> Self {
        Self { a1, a2 }
    }

    pub fn real(a1: f64, a2: f64) -> Self {
        Self::new(C64::new(a1, 0.0), C64::new(a2, 0.0))
    }

    /// Linear polarization at `pol_angle` (radians) from D1.
    pub fn linear(pol_angle: f64) -> Self {
        let (s, c) = pol_angle.sin_cos();
        Self::real(c, s)
    }

    pub fn zero() -> Self {
        Self::new(ZERO, ZERO)
    }

    /// |a1|² + |a2|².
    pub fn intensity(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.intensity().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.intensity() - 1.0).abs() <= ALGEBRA_TOL
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.a1 * s, self.a2 * s)
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        self.a1.conj() * other.a1 + self.a2.conj() * other.a2
    }

    /// Exchange the D1 and D2 components.
    pub fn swapped(&self) -> Self {
        Self::new(self.a2, self.a1)
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite()
    }
}

/// Complex 2×2 channel acting on [`JonesVector`]s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JonesMatrix {
    pub m11: C64,
    pub m12: C64,
    pub m21: C64,
    pub m22: C64,
}

impl JonesMatrix {
    pub const IDENTITY: Self = Self::new(ONE, ZERO, ZERO, ONE);
    pub const ZERO: Self = Self::new(ZERO, ZERO, ZERO, ZERO);
    /// Component exchange D1 ↔ D2.
    pub const SWAP: Self = Self::new(ZERO, ONE, ONE, ZERO);

    pub const fn new(m11: C64, m12: C64, m21: C64, m22: C64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn diag(d1: C64, d2: C64) -> Self {
        Self::new(d1, ZERO, ZERO, d2)
    }

    pub fn scalar(s: C64) -> Self {
        Self::diag(s, s)
    }

    pub fn dagger(&self) -> Self {
        Self::new(
            self.m11.conj(),
            self.m21.conj(),
            self.m12.conj(),
            self.m22.conj(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn det(&self) -> C64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> C64 {
        self.m11 + self.m22
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.m11.norm_sqr() + self.m12.norm_sqr() + self.m21.norm_sqr() + self.m22.norm_sqr())
            .sqrt()
    }

    /// Frobenius distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).frobenius_norm()
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det.norm() == 0.0 || !det.is_finite() {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(
            self.m22 * inv,
            -self.m12 * inv,
            -self.m21 * inv,
            self.m11 * inv,
        ))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.dagger() * *self).distance(&Self::IDENTITY) <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.distance(&self.dagger()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.m11.re;
        let d = self.m22.re;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + self.m12.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// Conjugation by a rotation: the matrix of this element when its own
    /// axes are turned by `angle` about the propagation direction,
    /// `R(angle)·M·R(−angle)`. For a 90° turn this equals `R(−90°)·M·R(90°)`.
    pub fn rotated(&self, angle: f64) -> Self {
        let r = rotation_unchecked(angle);
        r * *self * rotation_unchecked(-angle)
    }

    /// Residual of the best fit `self ≈ s·I`, returning `(s, residual)` where
    /// the residual is the Frobenius norm of `self − s·I`.
    pub fn scalar_part(&self) -> (C64, f64) {
        let s = self.trace() * 0.5;
        (s, self.distance(&Self::scalar(s)))
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22]
            .iter()
            .all(|z| z.is_finite())
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, b: JonesMatrix) -> JonesMatrix {
        let a = self;
        JonesMatrix::new(
            a.m11 * b.m11 + a.m12 * b.m21,
            a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21,
            a.m21 * b.m12 + a.m22 * b.m22,
        )
    }
}

impl Mul<JonesVector> for JonesMatrix {
    type Output = JonesVector;

    fn mul(self, v: JonesVector) -> JonesVector {
        apply(&self, &v)
    }
}

impl Add for JonesMatrix {
    type Output = JonesMatrix;

    fn add(self, b: JonesMatrix) -> JonesMatrix {
        JonesMatrix::new(
            self.m11 + b.m11,
            self.m12 + b.m12,
            self.m21 + b.m21,
            self.m22 + b.m22,
        )
    }
}

impl Sub for JonesMatrix {
    type Output = JonesMatrix;

    fn sub(self, b: JonesMatrix) -> JonesMatrix {
        JonesMatrix::new(
            self.m11 - b.m11,
            self.m12 - b.m12,
            self.m21 - b.m21,
            self.m22 - b.m22,
        )
    }
}

/// Stokes parameters of a (possibly attenuated) pure polarization state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    /// Point on the unit Poincaré sphere, `None` when `s0` vanishes.
    pub fn direction(&self) -> Option<[f64; 3]> {
        let p = (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt();
        (p > 0.0).then(|| [self.s1 / p, self.s2 / p, self.s3 / p])
    }

    pub fn degree_of_polarization(&self) -> f64 {
        (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3).sqrt() / self.s0
    }
}

fn require_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{what} must be finite, got {value}"
        )))
    }
}

fn rotation_unchecked(angle: f64) -> JonesMatrix {
    let (s, c) = angle.sin_cos();
    JonesMatrix::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    )
}

/// `[[cos a, −sin a], [sin a, cos a]]`.
pub fn rotation_matrix(angle: f64) -> Result<JonesMatrix> {
    require_finite(angle, "rotation angle")?;
    Ok(rotation_unchecked(angle))
}

/// Polarization-dependent loss `diag(e^{−d1/2}, e^{−d2/2})` for optical
/// depths along D1 and D2.
pub fn pdl_matrix(d1: f64, d2: f64) -> Result<JonesMatrix> {
    for (d, name) in [(d1, "d1"), (d2, "d2")] {
        if !(d >= 0.0) || d.is_infinite() {
            return Err(Error::invalid(format!(
                "optical depth {name} must be finite and non-negative, got {d}"
            )));
        }
    }
    Ok(JonesMatrix::diag(
        C64::new((-d1 / 2.0).exp(), 0.0),
        C64::new((-d2 / 2.0).exp(), 0.0),
    ))
}

/// Birefringent retardation `diag(1, e^{iφ})`, phase referenced to D1.
pub fn pmd_matrix(biref_phase: f64) -> Result<JonesMatrix> {
    require_finite(biref_phase, "birefringent phase")?;
    Ok(JonesMatrix::diag(ONE, C64::from_polar(1.0, biref_phase)))
}

/// Linear retarder of retardance `retardance` whose slow axis sits at `axis`
/// from D1.
pub fn retarder(retardance: f64, axis: f64) -> Result<JonesMatrix> {
    require_finite(axis, "retarder axis")?;
    Ok(pmd_matrix(retardance)?.rotated(axis))
}

/// Polar decomposition `m = t·u` with `t` Hermitian positive definite and
/// `u` unitary.
///
/// `t = sqrt(m·m†)` is evaluated with the closed form for 2×2 positive
/// matrices, `sqrt(A) = (A + √det A · I) / sqrt(tr A + 2√det A)`.
pub fn tu_decompose(m: &JonesMatrix) -> Result<(JonesMatrix, JonesMatrix)> {
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let scale = m.frobenius_norm();
    let det = m.det().norm();
    if scale == 0.0 || det <= 1e-14 * scale * scale {
        return Err(Error::DecompositionFailed { det });
    }
    let mut gram = *m * m.dagger();
    // m·m† is Hermitian by construction; drop rounding noise on the diagonal.
    gram.m11.im = 0.0;
    gram.m22.im = 0.0;
    gram.m21 = gram.m12.conj();
    let sqrt_det = gram.det().re.max(0.0).sqrt();
    let denom = (gram.trace().re + 2.0 * sqrt_det).sqrt();
    let t = (gram + JonesMatrix::scalar(C64::new(sqrt_det, 0.0))).scale(C64::new(1.0 / denom, 0.0));
    let t_inv = t.inverse().ok_or(Error::DecompositionFailed { det })?;
    Ok((t, t_inv * *m))
}

/// Matrix-vector product `m·v`.
pub fn apply(m: &JonesMatrix, v: &JonesVector) -> JonesVector {
    JonesVector::new(m.m11 * v.a1 + m.m12 * v.a2, m.m21 * v.a1 + m.m22 * v.a2)
}

pub fn jones_to_stokes(v: &JonesVector) -> StokesVector {
    let i1 = v.a1.norm_sqr();
    let i2 = v.a2.norm_sqr();
    let cross = v.a1.conj() * v.a2;
    StokesVector {
        s0: i1 + i2,
        s1: i1 - i2,
        s2: 2.0 * cross.re,
        s3: 2.0 * cross.im,
    }
}

/// Named input states: the six cardinal Poincaré-sphere points plus the
/// elliptical state `α|H⟩ + β|V⟩` with `α = (1 + i√2)/2`, `β = 1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateLabel {
    H,
    V,
    D,
    A,
    L,
    R,
    Elliptical,
}

impl StateLabel {
    pub const ALL: [StateLabel; 7] = [
        StateLabel::H,
        StateLabel::V,
        StateLabel::D,
        StateLabel::A,
        StateLabel::L,
        StateLabel::R,
        StateLabel::Elliptical,
    ];

    pub fn vector(self) -> JonesVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            StateLabel::H => JonesVector::real(1.0, 0.0),
            StateLabel::V => JonesVector::real(0.0, 1.0),
            StateLabel::D => JonesVector::real(h, h),
            StateLabel::A => JonesVector::real(h, -h),
            StateLabel::L => JonesVector::new(C64::new(h, 0.0), C64::new(0.0, h)),
            StateLabel::R => JonesVector::new(C64::new(h, 0.0), C64::new(0.0, -h)),
            StateLabel::Elliptical => {
                JonesVector::new(C64::new(0.5, 0.5 * 2f64.sqrt()), C64::new(0.5, 0.0))
            }
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateLabel::H => "H",
            StateLabel::V => "V",
            StateLabel::D => "+",
            StateLabel::A => "-",
            StateLabel::L => "L",
            StateLabel::R => "R",
            StateLabel::Elliptical => "aH+bV",
        };
        f.write_str(s)
    }
}

impl FromStr for StateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" => Ok(StateLabel::H),
            "V" | "v" => Ok(StateLabel::V),
            "D" | "d" | "+" => Ok(StateLabel::D),
            "A" | "a" | "-" => Ok(StateLabel::A),
            "L" | "l" => Ok(StateLabel::L),
            "R" | "r" => Ok(StateLabel::R),
            "aH+bV" | "alpha" | "elliptical" => Ok(StateLabel::Elliptical),
            other => Err(Error::invalid(format!(
                "unknown polarization state '{other}'"
            ))),
        }
    }
}

/// Look up a named polarization state (H, V, D/+, A/-, L, R, aH+bV).
pub fn standard_state(name: &str) -> Result<JonesVector> {
    name.parse::<StateLabel>().map(StateLabel::vector)
}
