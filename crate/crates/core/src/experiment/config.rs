use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::afc::{AfcSpec, Readout};
use crate::error::{Error, Result};
use crate::jones::StateLabel;
use crate::medium::{
    Arrangement, ArrangementKind, CrystalSpec, Imperfections, DEFAULT_CRYSTAL_LENGTH,
    DEFAULT_DELTA_N, DEFAULT_WAVELENGTH, PAIR_DEPTH_D1, PAIR_DEPTH_D2,
};
use crate::tomography::MleSettings;

/// Everything a run needs, as read from a TOML file.
///
/// Every section and key is optional; missing values take the defaults
/// shown by [`ExperimentConfig::to_toml`] on `ExperimentConfig::default()`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub crystal: CrystalSection,
    pub arrangement: ArrangementSection,
    pub afc: AfcSection,
    pub sweep: SweepSection,
    pub profile: ProfileSection,
    pub tomography: TomographySection,
    pub source: SourceSection,
}

/// Absorption is given either as total optical depths of the whole stack
/// (`d1`, `d2`, shared evenly between crystals) or as per-metre
/// coefficients (`alpha1_per_m`, `alpha2_per_m`) of each crystal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2_per_m: Option<f64>,
    pub length_m: f64,
    pub delta_n: f64,
    pub wavelength_m: f64,
}

impl Default for CrystalSection {
    fn default() -> Self {
        Self {
            d1: None,
            d2: None,
            alpha1_per_m: None,
            alpha2_per_m: None,
            length_m: DEFAULT_CRYSTAL_LENGTH,
            delta_n: DEFAULT_DELTA_N,
            wavelength_m: DEFAULT_WAVELENGTH,
        }
    }
}

/// Stack geometry and mounting errors, angles in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrangementSection {
    pub kind: ArrangementKind,
    pub hwp_retardance_error_deg: f64,
    pub hwp_angle_error_deg: f64,
    pub misalignment_deg: f64,
    pub window_retardance_deg: f64,
    pub window_axis_deg: f64,
}

impl Default for ArrangementSection {
    fn default() -> Self {
        Self {
            kind: ArrangementKind::HwpPair,
            hwp_retardance_error_deg: 0.0,
            hwp_angle_error_deg: 0.0,
            misalignment_deg: 0.0,
            window_retardance_deg: 0.0,
            window_axis_deg: 0.0,
        }
    }
}

/// Comb parameters. Leave `finesse` and `decoherence_factor` unset to fit
/// them to the uncompensated efficiency extremes `fit_efficiency_extremes`
/// (max, min).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AfcSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finesse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoherence_factor: Option<f64>,
    pub readout: Readout,
    pub fit_efficiency_extremes: [f64; 2],
}

impl Default for AfcSection {
    fn default() -> Self {
        Self {
            finesse: None,
            decoherence_factor: None,
            readout: Readout::Forward,
            fit_efficiency_extremes: [0.13, 0.03],
        }
    }
}

/// Linear input polarization angles `start_deg..=stop_deg`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            stop_deg: 180.0,
            step_deg: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    pub n_samples: usize,
    pub input_state: String,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            n_samples: 201,
            input_state: "D".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TomographySection {
    pub states: Vec<String>,
    pub n_per_setting: u64,
    pub mc_trials: usize,
    pub detector_efficiency: [f64; 2],
    /// Iteration cap of the maximum-likelihood fit.
    pub max_iterations: usize,
}

impl Default for TomographySection {
    fn default() -> Self {
        Self {
            states: ["H", "V", "+", "L", "aH+bV"].map(String::from).to_vec(),
            n_per_setting: 1000,
            mc_trials: 200,
            detector_efficiency: [1.0, 1.0],
            max_iterations: MleSettings::default().max_iterations,
        }
    }
}

/// Photon-pair source. `mean_n_per_state`, when set, gives one mean pair
/// number per tomography state instead of the shared `mean_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    pub mean_n: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_n_per_state: Option<Vec<f64>>,
    pub g2_si_values: Vec<f64>,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            mean_n: 0.25,
            mean_n_per_state: None,
            g2_si_values: vec![7.6, 6.0, 9.4, 8.0, 9.2],
        }
    }
}

fn at(key: &str) -> Option<String> {
    Some(key.to_string())
}

fn parse_error(e: toml::de::Error) -> Error {
    Error::config(None, e.to_string().trim_end().to_string())
}

/// Split a `section.key=value` override.
fn parse_override(text: &str) -> Result<(Vec<String>, toml::Value)> {
    let (path, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(at(text), "override must look like key=value"))?;
    let path: Vec<String> = path
        .trim()
        .split('.')
        .map(|s| s.trim().to_string())
        .collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::config(at(text), "empty key in override"));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((path, value))
}

fn apply_override(table: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = table;
    for (i, key) in parents.iter().enumerate() {
        let entry = node
            .entry(key.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(at(&path[..=i].join(".")), "not a table"))?;
    }
    node.insert(last.clone(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parse `text`, then apply `key=value` overrides such as
    /// `arrangement.misalignment_deg=1.5` or `seed=9`.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(parse_error)?;
        if overrides.is_empty() {
            config.validate()?;
            return Ok(config);
        }
        let mut table: toml::Table = toml::from_str(text).map_err(parse_error)?;
        for o in overrides {
            let (path, value) = parse_override(o)?;
            apply_override(&mut table, &path, value)?;
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| {
            Error::config(Some("--set".into()), e.message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(Some(path.display().to_string()), e.to_string()))?;
        Self::from_toml_with_overrides(&text, overrides).map_err(|e| match e {
            Error::Config { location, message } => Error::Config {
                location: Some(match location {
                    Some(l) => format!("{}: {l}", path.display()),
                    None => path.display().to_string(),
                }),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Check every value and the consistency between sections.
    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::config(
                at("seed"),
                "must fit in a signed 64-bit integer",
            ));
        }
        self.compensated_arrangement()?;
        self.afc_spec()?;
        self.sweep_angles()?;
        self.profile_input()?;
        self.tomography_states()?;
        self.mean_n_for_states()?;
        let t = &self.tomography;
        if t.n_per_setting == 0 {
            return Err(Error::config(
                at("tomography.n_per_setting"),
                "must be at least 1",
            ));
        }
        if t.max_iterations == 0 {
            return Err(Error::config(
                at("tomography.max_iterations"),
                "must be at least 1",
            ));
        }
        if t.mc_trials < 2 {
            return Err(Error::config(
                at("tomography.mc_trials"),
                "must be at least 2",
            ));
        }
        if t.detector_efficiency
            .iter()
            .any(|e| !(*e > 0.0 && e.is_finite()))
        {
            return Err(Error::config(
                at("tomography.detector_efficiency"),
                "values must be positive",
            ));
        }
        if self.profile.n_samples < 2 {
            return Err(Error::config(at("profile.n_samples"), "must be at least 2"));
        }
        if self
            .source
            .g2_si_values
            .iter()
            .any(|g| !(*g > 2.0 && g.is_finite()))
        {
            return Err(Error::config(
                at("source.g2_si_values"),
                "values must be finite and above 2",
            ));
        }
        Ok(())
    }

    fn crystal(&self, n_crystals: usize) -> Result<CrystalSpec> {
        let c = &self.crystal;
        let spec = match (c.d1, c.d2, c.alpha1_per_m, c.alpha2_per_m) {
            (None, None, Some(a1), Some(a2)) => {
                CrystalSpec::new(a1, a2, c.length_m, c.delta_n, c.wavelength_m)
            }
            (d1, d2, None, None) => {
                let share = n_crystals as f64;
                CrystalSpec::new(
                    d1.unwrap_or(PAIR_DEPTH_D1) / share / c.length_m,
                    d2.unwrap_or(PAIR_DEPTH_D2) / share / c.length_m,
                    c.length_m,
                    c.delta_n,
                    c.wavelength_m,
                )
            }
            _ => {
                return Err(Error::config(
                    at("crystal"),
                    "give either d1 and d2, or alpha1_per_m and alpha2_per_m",
                ))
            }
        };
        spec.map_err(|e| Error::config(at("crystal"), e.to_string()))
    }

    fn imperfections(&self) -> Imperfections {
        let a = &self.arrangement;
        Imperfections {
            hwp_retardance_error: a.hwp_retardance_error_deg.to_radians(),
            hwp_angle_error: a.hwp_angle_error_deg.to_radians(),
            misalignment: a.misalignment_deg.to_radians(),
            window_retardance: a.window_retardance_deg.to_radians(),
            window_axis: a.window_axis_deg.to_radians(),
        }
    }

    fn arrangement_of(&self, kind: ArrangementKind) -> Result<Arrangement> {
        let built = if kind.is_pair() {
            Arrangement::identical_pair(kind, self.crystal(2)?)
        } else {
            Ok(Arrangement::single(self.crystal(1)?))
        };
        let a = built
            .map_err(|e| Error::config(at("arrangement.kind"), e.to_string()))?
            .with_imperfections(self.imperfections());
        a.validate()
            .map_err(|e| Error::config(at("arrangement"), e.to_string()))?;
        Ok(a)
    }

    /// The configured arrangement.
    pub fn compensated_arrangement(&self) -> Result<Arrangement> {
        self.arrangement_of(self.arrangement.kind)
    }

    /// Reference stack with no compensation: parallel crystals carrying the
    /// same misalignment and windows, or the single crystal itself.
    pub fn uncompensated_arrangement(&self) -> Result<Arrangement> {
        if self.arrangement.kind.is_pair() {
            self.arrangement_of(ArrangementKind::AlignedPair)
        } else {
            self.arrangement_of(ArrangementKind::Single)
        }
    }

    pub fn afc_spec(&self) -> Result<AfcSpec> {
        let s = &self.afc;
        let spec = match (s.finesse, s.decoherence_factor) {
            (Some(f), Some(c)) => AfcSpec::new(f, c, s.readout),
            (None, None) => {
                let (d1, d2) = self
                    .compensated_arrangement()?
                    .crystals()
                    .map(CrystalSpec::depths)
                    .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
                let [hi, lo] = s.fit_efficiency_extremes;
                AfcSpec::fit_to_sweep_extremes(d1, d2, hi, lo).map(|fit| AfcSpec {
                    readout: s.readout,
                    ..fit
                })
            }
            _ => {
                return Err(Error::config(
                    at("afc"),
                    "set both finesse and decoherence_factor, or neither",
                ))
            }
        };
        spec.map_err(|e| Error::config(at("afc"), e.to_string()))
    }

    /// Sweep angles in degrees.
    pub fn sweep_angles(&self) -> Result<Vec<f64>> {
        let s = &self.sweep;
        if !(s.step_deg > 0.0 && s.step_deg.is_finite()) {
            return Err(Error::config(at("sweep.step_deg"), "must be positive"));
        }
        if !(s.stop_deg >= s.start_deg && s.start_deg.is_finite() && s.stop_deg.is_finite()) {
            return Err(Error::config(
                at("sweep"),
                "need finite start_deg <= stop_deg",
            ));
        }
        let n = ((s.stop_deg - s.start_deg) / s.step_deg + 1e-9).floor() as usize;
        if n > 1_000_000 {
            return Err(Error::config(at("sweep.step_deg"), "too many sweep points"));
        }
        Ok((0..=n)
            .map(|k| s.start_deg + k as f64 * s.step_deg)
            .collect())
    }

    pub fn profile_input(&self) -> Result<StateLabel> {
        self.profile
            .input_state
            .parse()
            .map_err(|e: Error| Error::config(at("profile.input_state"), e.to_string()))
    }

    pub fn tomography_states(&self) -> Result<Vec<StateLabel>> {
        if self.tomography.states.is_empty() {
            return Err(Error::config(
                at("tomography.states"),
                "list at least one state",
            ));
        }
        self.tomography
            .states
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|e: Error| Error::config(at("tomography.states"), e.to_string()))
            })
            .collect()
    }

    pub fn mle_settings(&self) -> MleSettings {
        MleSettings {
            max_iterations: self.tomography.max_iterations,
            ..MleSettings::default()
        }
    }

    /// Mean pair number used for each tomography state.
    pub fn mean_n_for_states(&self) -> Result<Vec<f64>> {
        let n_states = self.tomography.states.len();
        let values = match &self.source.mean_n_per_state {
            Some(v) if v.len() != n_states => {
                return Err(Error::config(
                    at("source.mean_n_per_state"),
                    format!("has {} entries for {n_states} states", v.len()),
                ))
            }
            Some(v) => v.clone(),
            None => vec![self.source.mean_n; n_states],
        };
        if values.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(Error::config(
                at("source"),
                "mean pair numbers must be positive",
            ));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_file_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let a = c.compensated_arrangement().unwrap();
        assert_eq!(a.kind, ArrangementKind::HwpPair);
        let (d1, d2) = a.crystal_a.depths();
        assert_relative_eq!(d1, 1.35, max_relative = 1e-12);
        assert_relative_eq!(d2, 0.495, max_relative = 1e-12);
        assert_eq!(c.sweep_angles().unwrap().len(), 37);
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.seed = 42;
        c.arrangement.misalignment_deg = 1.5;
        c.afc.finesse = Some(3.0);
        c.afc.decoherence_factor = Some(0.6);
        c.source.mean_n_per_state = Some(vec![0.2, 0.3, 0.1, 0.25, 0.15]);
        let back = ExperimentConfig::from_toml_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 16);
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn unknown_key_reports_line() {
        let err =
            ExperimentConfig::from_toml_str("seed = 1\n[crystal]\nlenght_m = 0.01\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("lenght_m"), "{msg}");
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "seed = -1",
            "[crystal]\nd1 = -1.0",
            "[crystal]\nd1 = 1.0\nalpha1_per_m = 3.0",
            "[arrangement]\nkind = \"triple\"",
            "[afc]\nfinesse = 2.0",
            "[afc]\nfinesse = 0.5\ndecoherence_factor = 1.0",
            "[sweep]\nstep_deg = 0",
            "[profile]\ninput_state = \"Q\"",
            "[tomography]\nstates = []",
            "[tomography]\nmc_trials = 1",
            "[source]\nmean_n_per_state = [0.1]",
            "[source]\ng2_si_values = [1.5]",
        ] {
            let err = ExperimentConfig::from_toml_str(text).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{text}: {err}");
        }
    }

    #[test]
    fn overrides() {
        let c = ExperimentConfig::from_toml_with_overrides(
            "[arrangement]\nkind = \"rotated_pair\"\n",
            &[
                "seed=9".into(),
                "arrangement.misalignment_deg = 2".into(),
                "profile.input_state=L".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.arrangement.kind, ArrangementKind::RotatedPair);
        assert_eq!(c.arrangement.misalignment_deg, 2.0);
        assert_eq!(c.profile.input_state, "L");
        assert!(ExperimentConfig::from_toml_with_overrides("", &["nonsense".into()]).is_err());
        assert!(ExperimentConfig::from_toml_with_overrides("", &["seed.x=1".into()]).is_err());
    }

    #[test]
    fn fitted_comb_reproduces_extremes() {
        let c = ExperimentConfig::default();
        let afc = c.afc_spec().unwrap();
        assert_relative_eq!(afc.finesse, 3.165, max_relative = 1e-3);
        let u = c.uncompensated_arrangement().unwrap();
        assert_eq!(u.kind, ArrangementKind::AlignedPair);
    }

    #[test]
    fn alpha_form() {
        let c = ExperimentConfig::from_toml_str(
            "[crystal]\nalpha1_per_m = 100.0\nalpha2_per_m = 40.0\n",
        )
        .unwrap();
        let (d1, _) = c.compensated_arrangement().unwrap().crystal_a.depths();
        assert_relative_eq!(d1, 1.0, max_relative = 1e-12);
    }
}
