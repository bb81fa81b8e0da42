use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{Basis, DensityMatrix, ProjectorSetting};
use crate::error::{Error, Result};

/// Coincidence counts for the three analyzer settings and two detectors,
/// plus the acquisition metadata needed to interpret them.
///
/// Text form, one row per cell after optional `#` metadata lines:
///
/// ```text
/// # n_per_setting = 1000
/// # seed = 7
/// # detector_efficiency = 1 1
/// setting,detector,count
/// Z,H,991
/// Z,V,9
/// ...
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    counts: [[u64; 2]; 3],
    pub n_per_setting: u64,
    pub seed: Option<u64>,
    /// Relative efficiency of the (plus, minus) detectors.
    pub detector_efficiency: [f64; 2],
}

impl CountRecord {
    /// Counts indexed by setting in Z, X, Y order, detectors (plus, minus).
    pub fn new(counts: [[u64; 2]; 3]) -> Self {
        Self {
            counts,
            n_per_setting: counts.iter().map(|c| c[0] + c[1]).max().unwrap_or(0),
            seed: None,
            detector_efficiency: [1.0, 1.0],
        }
    }

    /// Noise-free counts: expected values rounded to the nearest integer.
    pub fn expected(rho: &DensityMatrix, n_per_setting: u64) -> Self {
        let mut counts = [[0u64; 2]; 3];
        for setting in ProjectorSetting::all() {
            for (d, p) in setting.projectors().iter().enumerate() {
                counts[setting.basis.index()][d] =
                    (n_per_setting as f64 * rho.expectation(p)).round() as u64;
            }
        }
        Self {
            n_per_setting,
            ..Self::new(counts)
        }
    }

    pub fn get(&self, basis: Basis, detector: usize) -> u64 {
        self.counts[basis.index()][detector]
    }

    pub fn cells(&self) -> &[[u64; 2]; 3] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub(crate) fn with_counts(&self, counts: [[u64; 2]; 3]) -> Self {
        Self {
            counts,
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# n_per_setting = {}", self.n_per_setting).unwrap();
        if let Some(seed) = self.seed {
            writeln!(out, "# seed = {seed}").unwrap();
        }
        writeln!(
            out,
            "# detector_efficiency = {} {}",
            self.detector_efficiency[0], self.detector_efficiency[1]
        )
        .unwrap();
        out.push_str("setting,detector,count\n");
        for basis in Basis::ALL {
            let labels = basis.detector_labels();
            for (d, label) in [labels.0, labels.1].iter().enumerate() {
                writeln!(out, "{basis},{label},{}", self.get(basis, d)).unwrap();
            }
        }
        out
    }
}

fn line_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::invalid(format!("count record line {line}: {msg}"))
}

impl FromStr for CountRecord {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cells: [[Option<u64>; 2]; 3] = [[None; 2]; 3];
        let mut n_per_setting = None;
        let mut seed = None;
        let mut detector_efficiency = [1.0, 1.0];
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let Some((key, value)) = meta.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "n_per_setting" => {
                        n_per_setting = Some(value.parse().map_err(|e| line_err(lineno, e))?)
                    }
                    "seed" => seed = Some(value.parse().map_err(|e| line_err(lineno, e))?),
                    "detector_efficiency" => {
                        let parts: Vec<f64> = value
                            .split_whitespace()
                            .map(str::parse)
                            .collect::<std::result::Result<_, _>>()
                            .map_err(|e| line_err(lineno, e))?;
                        detector_efficiency = parts.try_into().map_err(|_| {
                            line_err(lineno, "detector_efficiency needs two values")
                        })?;
                    }
                    _ => {}
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields == ["setting", "detector", "count"] {
                continue;
            }
            let [setting, detector, count] = fields[..] else {
                return Err(line_err(lineno, "expected 'setting,detector,count'"));
            };
            let basis: Basis = setting.parse().map_err(|e| line_err(lineno, e))?;
            let (plus, minus) = basis.detector_labels();
            let d = if detector == plus {
                0
            } else if detector == minus {
                1
            } else {
                return Err(line_err(
                    lineno,
                    format!("detector '{detector}' does not belong to setting {basis}"),
                ));
            };
            let count: u64 = count.parse().map_err(|e| line_err(lineno, e))?;
            let cell = &mut cells[basis.index()][d];
            if cell.is_some() {
                return Err(line_err(
                    lineno,
                    format!("duplicate cell {basis},{detector}"),
                ));
            }
            *cell = Some(count);
        }
        let mut counts = [[0u64; 2]; 3];
        for basis in Basis::ALL {
            for d in 0..2 {
                counts[basis.index()][d] = cells[basis.index()][d].ok_or_else(|| {
                    let labels = basis.detector_labels();
                    Error::invalid(format!(
                        "count record is missing cell {basis},{}",
                        if d == 0 { labels.0 } else { labels.1 }
                    ))
                })?;
            }
        }
        let mut record = Self::new(counts);
        if let Some(n) = n_per_setting {
            record.n_per_setting = n;
        }
        record.seed = seed;
        record.detector_efficiency = detector_efficiency;
        Ok(record)
    }
}

pub(crate) fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as u64
}

/// Poisson counts with means `n_per_setting·⟨p|ρ|p⟩` for every cell,
/// deterministic in `seed`.
pub fn simulate_counts(rho: &DensityMatrix, n_per_setting: u64, seed: u64) -> Result<CountRecord> {
    simulate_counts_with(rho, n_per_setting, seed, [1.0, 1.0])
}

/// As [`simulate_counts`] with relative detector efficiencies scaling the
/// (plus, minus) means.
pub fn simulate_counts_with(
    rho: &DensityMatrix,
    n_per_setting: u64,
    seed: u64,
    detector_efficiency: [f64; 2],
) -> Result<CountRecord> {
    if n_per_setting == 0 {
        return Err(Error::invalid("n_per_setting must be at least 1"));
    }
    if detector_efficiency
        .iter()
        .any(|e| !(*e > 0.0) || !e.is_finite())
    {
        return Err(Error::invalid("detector efficiencies must be positive"));
    }
    // Re-validate: a DensityMatrix can only be built valid, but callers may
    // hand in one assembled from perturbed entries through `new`.
    let rho = DensityMatrix::new(*rho.matrix())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = [[0u64; 2]; 3];
    for setting in ProjectorSetting::all() {
        for (d, p) in setting.projectors().iter().enumerate() {
            let mean = n_per_setting as f64 * detector_efficiency[d] * rho.expectation(p).max(0.0);
            counts[setting.basis.index()][d] = poisson(mean, &mut rng);
        }
    }
    Ok(CountRecord {
        counts,
        n_per_setting,
        seed: Some(seed),
        detector_efficiency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jones::StateLabel;

    #[test]
    fn h_state_never_fires_v() {
        let rho = DensityMatrix::pure(&StateLabel::H.vector()).unwrap();
        let c = simulate_counts(&rho, 5000, 1).unwrap();
        assert_eq!(c.get(Basis::Z, 1), 0);
        assert!(c.get(Basis::Z, 0) > 4500);
    }

    #[test]
    fn empirical_means_within_three_sigma() {
        let rho = DensityMatrix::maximally_mixed();
        let n = 400u64;
        let draws = 10_000;
        let mut sums = [[0u64; 2]; 3];
        for seed in 0..draws {
            let c = simulate_counts(&rho, n, seed).unwrap();
            for b in 0..3 {
                for d in 0..2 {
                    sums[b][d] += c.cells()[b][d];
                }
            }
        }
        let mean_expected = n as f64 / 2.0;
        let sigma_of_mean = (mean_expected / draws as f64).sqrt();
        for row in sums {
            for s in row {
                let mean = s as f64 / draws as f64;
                assert!((mean - mean_expected).abs() < 3.0 * sigma_of_mean, "{mean}");
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let rho = DensityMatrix::pure(&StateLabel::Elliptical.vector()).unwrap();
        let a = simulate_counts(&rho, 1000, 99).unwrap();
        let b = simulate_counts(&rho, 1000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
        assert_ne!(a, simulate_counts(&rho, 1000, 100).unwrap());
    }

    #[test]
    fn invalid_inputs() {
        let rho = DensityMatrix::maximally_mixed();
        assert!(simulate_counts(&rho, 0, 1).is_err());
        assert!(simulate_counts_with(&rho, 10, 1, [1.0, 0.0]).is_err());
    }

    #[test]
    fn detector_efficiency_scales_means() {
        let rho = DensityMatrix::maximally_mixed();
        let c = simulate_counts_with(&rho, 100_000, 5, [1.0, 0.5]).unwrap();
        let ratio = c.get(Basis::X, 1) as f64 / c.get(Basis::X, 0) as f64;
        assert!((ratio - 0.5).abs() < 0.02);
    }

    #[test]
    fn text_round_trip() {
        let rho = DensityMatrix::pure(&StateLabel::L.vector()).unwrap();
        let c = simulate_counts_with(&rho, 777, 3, [1.0, 0.9]).unwrap();
        let parsed: CountRecord = c.to_text().parse().unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn text_errors() {
        let good = "Z,H,1\nZ,V,2\nX,D,3\nX,A,4\nY,L,5\nY,R,6\n";
        let parsed: CountRecord = good.parse().unwrap();
        assert_eq!(parsed.get(Basis::Y, 1), 6);
        assert_eq!(parsed.n_per_setting, 11);
        assert!("Z,H,1\n"
            .parse::<CountRecord>()
            .unwrap_err()
            .to_string()
            .contains("missing"));
        assert!(format!("{good}Z,H,3\n")
            .parse::<CountRecord>()
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert!(good.replace("X,D", "X,H").parse::<CountRecord>().is_err());
        assert!(good
            .replace("Y,R,6", "Y,R,-6")
            .parse::<CountRecord>()
            .is_err());
        assert!(good
            .replace("Z,H,1", "Q,H,1")
            .parse::<CountRecord>()
            .is_err());
        assert!(good.replace("Z,H,1", "Z,H").parse::<CountRecord>().is_err());
    }
}
