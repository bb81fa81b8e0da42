//! Atomic-frequency-comb echo model.
//!
//! The retrieved amplitude is a coherent sum over all trajectories: the photon
//! propagates to depth z, is absorbed and re-emitted there (amplitude α dz),
//! and propagates out. For a crystal diagonal in (D1, D2) the forward sum is
//! `M′ = diag(d̃1·e^{−d̃1/2}, e^{iφ}·d̃2·e^{−d̃2/2})` with comb depths
//! `d̃ = d/F`. A stack of crystals sums one such term per crystal, sandwiched
//! between the propagation matrices of the elements before and after it.
//!
//! `decoherence_factor` multiplies amplitudes, so efficiencies scale with
//! its square.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jones::{JonesMatrix, JonesVector, C64};
use crate::medium::{Arrangement, CrystalSpec, Element};

/// Peak forward efficiency `4/e²`, reached at comb depth 2.
pub const FORWARD_EFFICIENCY_MAX: f64 = 0.541_341_132_946_450_9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    #[default]
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfcSpec {
    pub finesse: f64,
    /// Amplitude multiplier in [0, 1].
    pub decoherence_factor: f64,
    pub readout: Readout,
}

impl Default for AfcSpec {
    fn default() -> Self {
        Self {
            finesse: 1.0,
            decoherence_factor: 1.0,
            readout: Readout::Forward,
        }
    }
}

impl AfcSpec {
    pub fn new(finesse: f64, decoherence_factor: f64, readout: Readout) -> Result<Self> {
        let spec = Self {
            finesse,
            decoherence_factor,
            readout,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.finesse >= 1.0) || !self.finesse.is_finite() {
            return Err(Error::invalid(format!(
                "finesse must be finite and >= 1, got {}",
                self.finesse
            )));
        }
        if !(0.0..=1.0).contains(&self.decoherence_factor) {
            return Err(Error::invalid(format!(
                "decoherence factor must lie in [0, 1], got {}",
                self.decoherence_factor
            )));
        }
        Ok(())
    }

    /// Forward-readout comb parameters reproducing an uncompensated
    /// polarization sweep whose efficiency runs from `eta_min` (light along
    /// D2) to `eta_max` (light along D1), for pair-total depths
    /// `d1_total > d2_total`.
    ///
    /// The extremes ratio `(d1/d2)²·e^{−(d1−d2)/F}` fixes the finesse, after
    /// which `eta_max` fixes the decoherence factor.
    pub fn fit_to_sweep_extremes(
        d1_total: f64,
        d2_total: f64,
        eta_max: f64,
        eta_min: f64,
    ) -> Result<Self> {
        if !(d1_total > d2_total && d2_total > 0.0) {
            return Err(Error::invalid("need d1_total > d2_total > 0"));
        }
        if !(eta_max > eta_min && eta_min > 0.0) {
            return Err(Error::invalid("need eta_max > eta_min > 0"));
        }
        let depth_ratio = d1_total / d2_total;
        let log_arg = eta_max / eta_min / (depth_ratio * depth_ratio);
        if log_arg >= 1.0 {
            return Err(Error::invalid(
                "efficiency ratio exceeds what these depths can produce for any finesse",
            ));
        }
        let finesse = -(d1_total - d2_total) / log_arg.ln();
        let afc = Self {
            finesse,
            decoherence_factor: 1.0,
            readout: Readout::Forward,
        };
        let bare = forward_efficiency(comb_depth(d1_total, &afc), &afc);
        let decoherence_factor = (eta_max / bare).sqrt();
        Self::new(finesse, decoherence_factor, Readout::Forward)
    }
}

/// Average optical depth of the comb, `d/F`.
pub fn comb_depth(d: f64, afc: &AfcSpec) -> f64 {
    d / afc.finesse
}

/// Square root of the single-mode forward efficiency, `d·e^{−d/2}`.
pub fn forward_echo_amplitude(d: f64) -> f64 {
    d * (-0.5 * d).exp()
}

/// `(d·e^{−d/2}·c)²` for comb depth `d` and decoherence factor `c`.
pub fn forward_efficiency(d: f64, afc: &AfcSpec) -> f64 {
    let amp = forward_echo_amplitude(d) * afc.decoherence_factor;
    amp * amp
}

/// `(1 − e^{−d})²`, the single-mode efficiency with phase-matched backward
/// re-emission.
pub fn backward_efficiency(d: f64) -> f64 {
    let amp = -(-d).exp_m1();
    amp * amp
}

/// Per-crystal echo amplitude in the crystal frame.
fn crystal_echo(spec: &CrystalSpec, readout: Readout) -> JonesMatrix {
    let (d1, d2) = spec.depths();
    match readout {
        Readout::Forward => JonesMatrix::diag(
            C64::new(forward_echo_amplitude(d1), 0.0),
            C64::from_polar(forward_echo_amplitude(d2), spec.biref_phase()),
        ),
        Readout::Backward => JonesMatrix::diag(
            C64::new(-(-d1).exp_m1(), 0.0),
            C64::new(-(-d2).exp_m1(), 0.0),
        ),
    }
}

/// Echo amplitude matrix of an arbitrary stack (single crystal or pair,
/// with any imperfections).
///
/// Forward: `Σ_k P_after(k)·M′_k·P_before(k)`. Backward: the echo leaves
/// through the entrance face, so `Σ_k P_before(k)ᵀ·B′_k·P_before(k)` with
/// `B′ = diag(1 − e^{−d̃1}, 1 − e^{−d̃2})`; only defined without
/// birefringence.
pub fn memory_matrix(a: &Arrangement, afc: &AfcSpec) -> Result<JonesMatrix> {
    afc.validate()?;
    a.validate()?;
    if afc.readout == Readout::Backward {
        if let Some(c) = a.crystals().find(|c| c.biref_phase() != 0.0) {
            return Err(Error::UnsupportedConfiguration(format!(
                "backward readout is only modelled without birefringence (phase {} rad)",
                c.biref_phase()
            )));
        }
    }
    let elements: Vec<Element> = a
        .elements()
        .into_iter()
        .map(|e| match e {
            Element::Crystal { spec, orientation } => Element::Crystal {
                spec: spec.comb_averaged(afc.finesse),
                orientation,
            },
            plate => plate,
        })
        .collect();
    let mats: Vec<JonesMatrix> = elements.iter().map(Element::matrix).collect();

    let mut total = JonesMatrix::ZERO;
    let mut before = JonesMatrix::IDENTITY;
    for (k, element) in elements.iter().enumerate() {
        if let Element::Crystal { spec, orientation } = element {
            let echo = crystal_echo(spec, afc.readout).rotated(*orientation);
            let term = match afc.readout {
                Readout::Forward => {
                    let after = mats[k + 1..]
                        .iter()
                        .fold(JonesMatrix::IDENTITY, |acc, m| *m * acc);
                    after * echo * before
                }
                Readout::Backward => before.transpose() * echo * before,
            };
            total = total + term;
        }
        before = mats[k] * before;
    }
    Ok(total.scale(C64::new(afc.decoherence_factor, 0.0)))
}

/// Echo matrix of one crystal:
/// `c·diag(d̃1·e^{−d̃1/2}, e^{iφ}·d̃2·e^{−d̃2/2})` (forward) or
/// `c·diag(1 − e^{−d̃1}, 1 − e^{−d̃2})` (backward, φ = 0 only).
pub fn memory_matrix_single(c: &CrystalSpec, afc: &AfcSpec) -> Result<JonesMatrix> {
    memory_matrix(&Arrangement::single(*c), afc)
}

/// Echo matrix of a two-crystal stack: the photon is stored in the first
/// crystal and crosses the second, or vice versa. For the ideal rotated pair
/// this is `c·e^{iφ}·(d̃1+d̃2)·e^{−(d̃1+d̃2)/2}·I`.
pub fn memory_matrix_pair(a: &Arrangement, afc: &AfcSpec) -> Result<JonesMatrix> {
    if !a.kind.is_pair() {
        return Err(Error::invalid(
            "memory_matrix_pair needs a two-crystal arrangement",
        ));
    }
    memory_matrix(a, afc)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryResult {
    /// Retrieved polarization, normalized; the zero vector when nothing is
    /// retrieved.
    pub output_state: JonesVector,
    pub efficiency: f64,
    /// Fraction of the input transmitted straight through the comb.
    pub transmitted_leakage: f64,
}

/// Store `input` in the arrangement and read it back out.
pub fn store_and_retrieve(
    input: &JonesVector,
    a: &Arrangement,
    afc: &AfcSpec,
) -> Result<MemoryResult> {
    if !input.is_normalized() {
        return Err(Error::invalid("input state must be normalized"));
    }
    let echo = memory_matrix(a, afc)? * *input;
    let comb_medium = Arrangement {
        crystal_a: a.crystal_a.comb_averaged(afc.finesse),
        crystal_b: a.crystal_b.map(|b| b.comb_averaged(afc.finesse)),
        ..*a
    };
    let leak = comb_medium.transmission()? * *input;
    let efficiency = echo.intensity();
    Ok(MemoryResult {
        output_state: echo.normalized().unwrap_or_else(JonesVector::zero),
        efficiency,
        transmitted_leakage: leak.intensity(),
    })
}
