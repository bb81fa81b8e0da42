//! Photon-number statistics of a two-mode squeezed state.
//!
//! Each mode is thermal, `P(n) = μⁿ/(1+μ)ⁿ⁺¹`, and signal and idler photon
//! numbers are perfectly correlated. Correlation functions are evaluated by
//! explicit sums over the truncated Fock distribution; the closed forms
//! (`g²_si = 2 + 1/μ`, `g²_s|i = (6μ² + 4μ)/(1 + 2μ)²`) are used only as test
//! oracles.
//!
//! Heralding follows the low-efficiency threshold-detector limit, where the
//! probability of a herald is proportional to the idler photon number, so the
//! heralded signal distribution is `P′(n) ∝ n·P(n)`.

use crate::error::{Error, Result};

/// Largest automatic Fock cutoff.
pub const MAX_CUTOFF: usize = 5000;
/// Maximum truncated tail probability tolerated.
pub const TAIL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmssSpec {
    pub mean_n: f64,
    pub cutoff: usize,
}

/// Probability mass beyond `cutoff`: `(μ/(1+μ))^{cutoff+1}`.
fn tail_mass(mean_n: f64, cutoff: usize) -> f64 {
    (mean_n / (1.0 + mean_n)).powf(cutoff as f64 + 1.0)
}

impl TmssSpec {
    /// Spec with an automatic cutoff: the smallest `N` whose truncated tail,
    /// weighted by `(N+1)³` so that third moments converge too, is below
    /// 1e-17.
    pub fn new(mean_n: f64) -> Result<Self> {
        validate_mean(mean_n)?;
        let r = mean_n / (1.0 + mean_n);
        let ln_r = r.ln();
        let cutoff = (1..=MAX_CUTOFF).find(|&n| {
            let m = n as f64 + 1.0;
            3.0 * m.ln() + m * ln_r < (1e-17f64).ln()
        });
        match cutoff {
            Some(cutoff) => Ok(Self { mean_n, cutoff }),
            None => Err(Error::CutoffTooSmall {
                cutoff: MAX_CUTOFF,
                tail: tail_mass(mean_n, MAX_CUTOFF),
            }),
        }
    }

    /// Spec with an explicit cutoff, rejected if the tail mass reaches 1e-12.
    pub fn with_cutoff(mean_n: f64, cutoff: usize) -> Result<Self> {
        validate_mean(mean_n)?;
        let tail = tail_mass(mean_n, cutoff);
        if tail >= TAIL_TOL {
            return Err(Error::CutoffTooSmall { cutoff, tail });
        }
        Ok(Self { mean_n, cutoff })
    }
}

fn validate_mean(mean_n: f64) -> Result<()> {
    if !(mean_n > 0.0) || !mean_n.is_finite() {
        return Err(Error::invalid(format!(
            "mean photon number must be positive, got {mean_n}"
        )));
    }
    Ok(())
}

/// Thermal marginal `P(0..=cutoff)`, renormalized over the truncation.
pub fn photon_number_dist(spec: &TmssSpec) -> Result<Vec<f64>> {
    let tail = tail_mass(spec.mean_n, spec.cutoff);
    if tail >= TAIL_TOL {
        return Err(Error::CutoffTooSmall {
            cutoff: spec.cutoff,
            tail,
        });
    }
    let r = spec.mean_n / (1.0 + spec.mean_n);
    let mut p = Vec::with_capacity(spec.cutoff + 1);
    let mut term = 1.0 / (1.0 + spec.mean_n);
    for _ in 0..=spec.cutoff {
        p.push(term);
        term *= r;
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Joint signal/idler distribution as `(n_s, n_i, probability)` triples with
/// nonzero weight; the TMSS only populates the diagonal.
fn joint_distribution(spec: &TmssSpec) -> Result<Vec<(usize, usize, f64)>> {
    Ok(photon_number_dist(spec)?
        .into_iter()
        .enumerate()
        .map(|(n, p)| (n, n, p))
        .collect())
}

/// `⟨n_s n_i⟩ / (⟨n_s⟩⟨n_i⟩)` summed over the joint distribution.
pub fn cross_correlation(spec: &TmssSpec) -> Result<f64> {
    let joint = joint_distribution(spec)?;
    let (mut ns, mut ni, mut nsi) = (0.0, 0.0, 0.0);
    for &(s, i, p) in &joint {
        let (s, i) = (s as f64, i as f64);
        ns += s * p;
        ni += i * p;
        nsi += s * i * p;
    }
    Ok(nsi / (ns * ni))
}

/// `⟨n(n−1)⟩′ / ⟨n⟩′²` for the heralded signal distribution `P′ ∝ n·P`.
pub fn heralded_auto_correlation(spec: &TmssSpec) -> Result<f64> {
    let p = photon_number_dist(spec)?;
    let (mut norm, mut first, mut second) = (0.0, 0.0, 0.0);
    for (n, pn) in p.iter().enumerate() {
        let n = n as f64;
        let heralded = n * pn;
        norm += heralded;
        first += n * heralded;
        second += n * (n - 1.0) * heralded;
    }
    let mean = first / norm;
    Ok(second / norm / (mean * mean))
}

/// Mean photon number whose TMSS cross-correlation equals `g2_si`, found by
/// bisection on `ln μ` over the brute-force [`cross_correlation`].
pub fn mean_n_from_cross(g2_si: f64) -> Result<f64> {
    if !(g2_si > 2.0) || !g2_si.is_finite() {
        return Err(Error::OutOfModel(format!(
            "g2_si = {g2_si} is not above 2; no two-mode squeezed state has it"
        )));
    }
    let g2 = |mu: f64| -> Result<f64> { cross_correlation(&TmssSpec::new(mu)?) };
    // Decreasing in μ; bracket around the closed-form guess.
    let guess = 1.0 / (g2_si - 2.0);
    let (mut lo, mut hi) = (guess.ln() - 1.0, guess.ln() + 1.0);
    while g2(lo.exp())? < g2_si {
        lo -= 1.0;
    }
    while g2(hi.exp())? > g2_si {
        hi += 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g2(mid.exp())? > g2_si {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Upper bound on the heralded auto-correlation implied by a measured
/// cross-correlation, assuming a pure TMSS source.
pub fn bound_from_cross(g2_si: f64) -> Result<f64> {
    heralded_auto_correlation(&TmssSpec::new(mean_n_from_cross(g2_si)?)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nonclassicality {
    Nonclassical,
    ClassicalCompatible,
}

/// `g2_si > 2` witnesses nonclassical signal–idler correlations when both
/// auto-correlations lie in [1, 2].
pub fn nonclassicality_check(g2_si: f64) -> Result<Nonclassicality> {
    if !(g2_si >= 0.0) {
        return Err(Error::invalid(format!(
            "g2_si must be non-negative, got {g2_si}"
        )));
    }
    Ok(if g2_si > 2.0 {
        Nonclassicality::Nonclassical
    } else {
        Nonclassicality::ClassicalCompatible
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn closed_form_heralded(mu: f64) -> f64 {
        (6.0 * mu * mu + 4.0 * mu) / (1.0 + 2.0 * mu).powi(2)
    }

    #[test]
    fn distribution_normalized_with_correct_mean() {
        for mu in [1e-4, 0.05, 0.25, 1.0, 3.0, 10.0] {
            let p = photon_number_dist(&TmssSpec::new(mu).unwrap()).unwrap();
            assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
            assert!((mean - mu).abs() < 1e-10 * mu.max(1.0), "{mu}: {mean}");
        }
        let tiny = photon_number_dist(&TmssSpec::new(1e-9).unwrap()).unwrap();
        assert!(tiny[0] > 1.0 - 1e-8);
    }

    #[test]
    fn cutoff_validation() {
        assert!(TmssSpec::with_cutoff(0.25, 5).is_err());
        assert!(TmssSpec::with_cutoff(0.25, 40).is_ok());
        assert!(matches!(
            TmssSpec::new(1e4),
            Err(Error::CutoffTooSmall { .. })
        ));
        assert!(TmssSpec::new(0.0).is_err());
        assert!(TmssSpec::new(-1.0).is_err());
        let spec = TmssSpec {
            mean_n: 1.0,
            cutoff: 3,
        };
        assert!(photon_number_dist(&spec).is_err());
    }

    #[test]
    fn cross_correlation_values() {
        let g = cross_correlation(&TmssSpec::new(0.25).unwrap()).unwrap();
        assert_abs_diff_eq!(g, 6.0, epsilon = 1e-9);
        let large = cross_correlation(&TmssSpec::new(50.0).unwrap()).unwrap();
        assert_abs_diff_eq!(large, 2.02, epsilon = 1e-9);
    }

    #[test]
    fn heralded_values() {
        let g = heralded_auto_correlation(&TmssSpec::new(0.25).unwrap()).unwrap();
        assert_abs_diff_eq!(g, 0.611, epsilon = 1e-3);
        assert_abs_diff_eq!(g, 11.0 / 18.0, epsilon = 1e-10);
        let small = heralded_auto_correlation(&TmssSpec::new(1e-6).unwrap()).unwrap();
        assert!(small < 1e-5);
    }

    #[test]
    fn sub_poissonian_whenever_cross_exceeds_four() {
        for k in 0..400 {
            let mu = 10f64.powf(-4.0 + 5.0 * k as f64 / 399.0);
            let spec = TmssSpec::new(mu).unwrap();
            if cross_correlation(&spec).unwrap() > 4.0 {
                assert!(heralded_auto_correlation(&spec).unwrap() < 1.0, "{mu}");
            }
        }
    }

    #[test]
    fn bound_values() {
        assert_abs_diff_eq!(bound_from_cross(6.0).unwrap(), 0.611, epsilon = 1e-3);
        let highest = bound_from_cross(9.4).unwrap();
        assert!(highest < bound_from_cross(6.0).unwrap());
        assert!(bound_from_cross(1e6).unwrap() < 1e-5);
        assert!(matches!(bound_from_cross(2.0), Err(Error::OutOfModel(_))));
        assert!(matches!(bound_from_cross(1.5), Err(Error::OutOfModel(_))));
    }

    #[test]
    fn nonclassicality_cases() {
        assert_eq!(
            nonclassicality_check(6.0).unwrap(),
            Nonclassicality::Nonclassical
        );
        assert_eq!(
            nonclassicality_check(2.0).unwrap(),
            Nonclassicality::ClassicalCompatible
        );
        assert_eq!(
            nonclassicality_check(1.0).unwrap(),
            Nonclassicality::ClassicalCompatible
        );
        assert!(nonclassicality_check(-1.0).is_err());
    }

    #[test]
    fn heralded_monotone_below_thermal_limit() {
        let mut prev = 0.0;
        for k in 0..300 {
            let mu = 10f64.powf(-4.0 + 5.0 * k as f64 / 299.0);
            let g = heralded_auto_correlation(&TmssSpec::new(mu).unwrap()).unwrap();
            assert!(g > prev && g < 1.5, "{mu}: {g}");
            prev = g;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn brute_force_matches_closed_forms(log_mu in -4.0f64..1.0) {
            let mu = 10f64.powf(log_mu);
            let spec = TmssSpec::new(mu).unwrap();
            let g = cross_correlation(&spec).unwrap();
            prop_assert!(g >= 2.0);
            prop_assert!((g - (2.0 + 1.0 / mu)).abs() < 1e-10 * (2.0 + 1.0 / mu));
            let h = heralded_auto_correlation(&spec).unwrap();
            prop_assert!((h - closed_form_heralded(mu)).abs() < 1e-10);
        }

        #[test]
        fn inversion_round_trip(log_mu in -4.0f64..1.0) {
            let mu = 10f64.powf(log_mu);
            let g = cross_correlation(&TmssSpec::new(mu).unwrap()).unwrap();
            let back = mean_n_from_cross(g).unwrap();
            prop_assert!((back - mu).abs() < 1e-8 * mu.max(1.0));
        }

        #[test]
        fn truncation_stable(log_mu in -4.0f64..1.0) {
            let mu = 10f64.powf(log_mu);
            let spec = TmssSpec::new(mu).unwrap();
            let doubled = TmssSpec::with_cutoff(mu, 2 * spec.cutoff).unwrap();
            let (g1, g2) = (cross_correlation(&spec).unwrap(), cross_correlation(&doubled).unwrap());
            prop_assert!((g1 - g2).abs() < 1e-10 * g1);
            let (h1, h2) = (heralded_auto_correlation(&spec).unwrap(), heralded_auto_correlation(&doubled).unwrap());
            prop_assert!((h1 - h2).abs() < 1e-10);
        }
    }
}
