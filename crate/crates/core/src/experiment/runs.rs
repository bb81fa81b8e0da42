use std::f64::consts::PI;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::plot::{line_chart, Series};
use super::report::{Cell, RunReport, Table};
use crate::afc::{memory_matrix, store_and_retrieve};
use crate::error::Result;
use crate::jones::{tu_decompose, JonesMatrix, JonesVector, StateLabel, C64};
use crate::medium::{
    effective_optical_depth, layered_propagate, propagation_profile, Arrangement, ArrangementKind,
    CrystalSpec,
};
use crate::photon_stats::{
    bound_from_cross, cross_correlation, heralded_auto_correlation, mean_n_from_cross,
    nonclassicality_check, Nonclassicality, TmssSpec,
};
use crate::tomography::{
    classical_bound_check, fidelity, mle_fit, mle_reconstruct, monte_carlo_uncertainty,
    simulate_counts_with, CountRecord, DensityMatrix, MleSettings, Verdict,
};

/// The experiments a run can perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    DepthSweep,
    EfficiencySweep,
    Profile,
    Tomography,
    Stats,
    Selfcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::DepthSweep,
        Experiment::EfficiencySweep,
        Experiment::Profile,
        Experiment::Tomography,
        Experiment::Stats,
        Experiment::Selfcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DepthSweep => "depth_sweep",
            Experiment::EfficiencySweep => "efficiency_sweep",
            Experiment::Profile => "profile",
            Experiment::Tomography => "tomography",
            Experiment::Stats => "stats",
            Experiment::Selfcheck => "selfcheck",
        }
    }

    pub fn run(self, config: &ExperimentConfig) -> Result<RunReport> {
        match self {
            Experiment::DepthSweep => run_depth_sweep(config),
            Experiment::EfficiencySweep => run_efficiency_sweep(config),
            Experiment::Profile => run_profile(config),
            Experiment::Tomography => run_tomography(config),
            Experiment::Stats => run_stats(config),
            Experiment::Selfcheck => run_selfcheck(config),
        }
    }
}

fn report(config: &ExperimentConfig, experiment: Experiment) -> RunReport {
    RunReport::new(experiment.name(), config.hash(), config.seed)
}

/// `n` independent seeds drawn from a ChaCha stream keyed by `master`.
pub fn derive_seeds(master: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..n).map(|_| rng.next_u64()).collect()
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Optical depth against linear input angle for the uncompensated reference
/// stack and the configured one.
pub fn run_depth_sweep(config: &ExperimentConfig) -> Result<RunReport> {
    let plain = config.uncompensated_arrangement()?;
    let compensated = config.compensated_arrangement()?;
    let mut table = Table::new(
        Experiment::DepthSweep.name(),
        &["angle_deg", "depth_uncompensated", "depth_compensated"],
    );
    for angle in config.sweep_angles()? {
        let theta = angle.to_radians();
        table.push(vec![
            angle.into(),
            plain.depth_for_linear(theta)?.into(),
            compensated.depth_for_linear(theta)?.into(),
        ]);
    }
    let mut out = report(config, Experiment::DepthSweep);
    for (col, label) in [
        ("depth_uncompensated", "uncompensated"),
        ("depth_compensated", "compensated"),
    ] {
        let (lo, hi) = min_max(&table.column(col).expect("numeric column"));
        out.summary
            .push(format!("{label} optical depth: {lo:.4} to {hi:.4}"));
    }
    out.tables.push(table);
    Ok(out)
}

/// Storage efficiency against linear input angle.
pub fn run_efficiency_sweep(config: &ExperimentConfig) -> Result<RunReport> {
    let plain = config.uncompensated_arrangement()?;
    let compensated = config.compensated_arrangement()?;
    let afc = config.afc_spec()?;
    let mut table = Table::new(
        Experiment::EfficiencySweep.name(),
        &[
            "angle_deg",
            "efficiency_uncompensated",
            "efficiency_compensated",
        ],
    );
    for angle in config.sweep_angles()? {
        let psi = JonesVector::linear(angle.to_radians());
        table.push(vec![
            angle.into(),
            store_and_retrieve(&psi, &plain, &afc)?.efficiency.into(),
            store_and_retrieve(&psi, &compensated, &afc)?
                .efficiency
                .into(),
        ]);
    }
    let mut out = report(config, Experiment::EfficiencySweep);
    out.summary.push(format!(
        "comb finesse {:.4}, decoherence factor {:.4}",
        afc.finesse, afc.decoherence_factor
    ));
    for (col, label) in [
        ("efficiency_uncompensated", "uncompensated"),
        ("efficiency_compensated", "compensated"),
    ] {
        let (lo, hi) = min_max(&table.column(col).expect("numeric column"));
        out.summary.push(format!(
            "{label} efficiency: {:.2}% to {:.2}% (max/min {:.3})",
            100.0 * lo,
            100.0 * hi,
            hi / lo
        ));
    }
    out.tables.push(table);
    Ok(out)
}

/// Per-component intensity and phase inside the configured stack.
pub fn run_profile(config: &ExperimentConfig) -> Result<RunReport> {
    let a = config.compensated_arrangement()?;
    let input = config.profile_input()?;
    let samples = propagation_profile(&a, &input.vector(), config.profile.n_samples)?;
    let mut table = Table::new(
        Experiment::Profile.name(),
        &[
            "z_m",
            "intensity_d1",
            "intensity_d2",
            "phase_d1",
            "phase_d2",
        ],
    );
    for s in &samples {
        table.push(vec![
            s.z.into(),
            s.intensity_d1.into(),
            s.intensity_d2.into(),
            s.phase_d1.into(),
            s.phase_d2.into(),
        ]);
    }
    let last = samples.last().expect("at least two samples");
    let mut out = report(config, Experiment::Profile);
    out.summary.push(format!(
        "input {input} through {:?}: exit intensities D1 {:.4}, D2 {:.4}",
        a.kind, last.intensity_d1, last.intensity_d2
    ));
    out.tables.push(table);
    Ok(out)
}

/// One tomography table row and its bound margin.
pub struct TomographyRow {
    pub label: StateLabel,
    pub fidelity: f64,
    pub sigma: f64,
    pub g2_si: f64,
    pub exceeds: bool,
    pub margin_sigma: Option<f64>,
}

impl TomographyRow {
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.label.to_string().into(),
            self.fidelity.into(),
            self.sigma.into(),
            self.g2_si.into(),
            self.exceeds.into(),
        ]
    }
}

/// Settings shared by every reconstruction of a run.
#[derive(Clone, Copy, Debug)]
pub struct Analysis {
    pub mle: MleSettings,
    pub mc_trials: usize,
}

impl Analysis {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            mle: config.mle_settings(),
            mc_trials: config.tomography.mc_trials,
        }
    }
}

/// Reconstruct `counts`, score it against `target` and attach a Monte-Carlo
/// uncertainty and the source cross-correlation for `mean_n`.
pub fn analyze_counts(
    label: StateLabel,
    counts: &CountRecord,
    target: &JonesVector,
    analysis: &Analysis,
    mc_seed: u64,
    mean_n: f64,
) -> Result<TomographyRow> {
    let rho = mle_fit(counts, &analysis.mle)?.rho;
    let f = fidelity(&rho, target);
    let mc = monte_carlo_uncertainty(counts, target, analysis.mc_trials, mc_seed)?;
    let check = classical_bound_check(f, Some(mc.std));
    Ok(TomographyRow {
        label,
        fidelity: f,
        sigma: mc.std,
        g2_si: cross_correlation(&TmssSpec::new(mean_n)?)?,
        exceeds: check.verdict == Verdict::Exceeds,
        margin_sigma: check.margin_sigma,
    })
}

fn tomography_table() -> Table {
    Table::new(
        Experiment::Tomography.name(),
        &[
            "state_label",
            "fidelity",
            "fidelity_sigma",
            "g2_si",
            "exceeds_classical_bound",
        ],
    )
}

fn file_stem(label: StateLabel) -> &'static str {
    match label {
        StateLabel::D => "D",
        StateLabel::A => "A",
        StateLabel::Elliptical => "aHbV",
        StateLabel::H => "H",
        StateLabel::V => "V",
        StateLabel::L => "L",
        StateLabel::R => "R",
    }
}

fn summarize_tomography(out: &mut RunReport, rows: &[TomographyRow]) {
    for r in rows {
        out.summary.push(format!(
            "{:>6}: F = {:.4} ± {:.4}{}",
            r.label.to_string(),
            r.fidelity,
            r.sigma,
            r.margin_sigma
                .map(|m| format!(", {m:.1}σ above 2/3"))
                .unwrap_or_default()
        ));
    }
    let mean = rows.iter().map(|r| r.fidelity).sum::<f64>() / rows.len() as f64;
    out.summary.push(format!("average fidelity {mean:.4}"));
}

/// Simulated storage of every configured state followed by tomography of
/// the retrieved photon. Count records are attached to the report.
pub fn run_tomography(config: &ExperimentConfig) -> Result<RunReport> {
    let a = config.compensated_arrangement()?;
    let afc = config.afc_spec()?;
    let states = config.tomography_states()?;
    let mean_ns = config.mean_n_for_states()?;
    let t = &config.tomography;
    let seeds = derive_seeds(config.seed, 2 * states.len());
    let analysis = Analysis::from_config(config);
    let mut out = report(config, Experiment::Tomography);
    let mut table = tomography_table();
    let mut rows = Vec::new();
    for (i, (&label, &mean_n)) in states.iter().zip(&mean_ns).enumerate() {
        let psi = label.vector();
        let retrieved = store_and_retrieve(&psi, &a, &afc)?;
        let rho = DensityMatrix::pure(&retrieved.output_state)?;
        let counts =
            simulate_counts_with(&rho, t.n_per_setting, seeds[2 * i], t.detector_efficiency)?;
        let row = analyze_counts(
            label,
            &counts,
            &a.expected_output(&psi),
            &analysis,
            seeds[2 * i + 1],
            mean_n,
        )?;
        table.push(row.cells());
        out.attachments
            .push((format!("counts_{}.txt", file_stem(label)), counts.to_text()));
        rows.push(row);
    }
    summarize_tomography(&mut out, &rows);
    out.tables.push(table);
    Ok(out)
}

/// Tomography of externally supplied count records, scored against the
/// configured arrangement's ideal output for each labelled input.
pub fn run_tomography_on_counts(
    config: &ExperimentConfig,
    records: &[(StateLabel, CountRecord)],
) -> Result<RunReport> {
    let a = config.compensated_arrangement()?;
    let seeds = derive_seeds(config.seed, records.len());
    let analysis = Analysis::from_config(config);
    let mut out = report(config, Experiment::Tomography);
    let mut table = tomography_table();
    let mut rows = Vec::new();
    for (i, (label, counts)) in records.iter().enumerate() {
        let target = a.expected_output(&label.vector());
        let row = analyze_counts(
            *label,
            counts,
            &target,
            &analysis,
            seeds[i],
            config.source.mean_n,
        )?;
        table.push(row.cells());
        rows.push(row);
    }
    summarize_tomography(&mut out, &rows);
    out.tables.push(table);
    Ok(out)
}

/// Heralded auto-correlation bounds implied by measured cross-correlations.
pub fn run_stats(config: &ExperimentConfig) -> Result<RunReport> {
    let mut table = Table::new(
        Experiment::Stats.name(),
        &["g2_si", "mean_n", "g2_s_given_i", "nonclassical"],
    );
    let mut out = report(config, Experiment::Stats);
    for &g in &config.source.g2_si_values {
        let mu = mean_n_from_cross(g)?;
        let bound = heralded_auto_correlation(&TmssSpec::new(mu)?)?;
        let nonclassical = nonclassicality_check(g)? == Nonclassicality::Nonclassical;
        table.push(vec![g.into(), mu.into(), bound.into(), nonclassical.into()]);
    }
    if let Some(&worst) = config
        .source
        .g2_si_values
        .iter()
        .min_by(|a, b| a.total_cmp(b))
    {
        out.summary.push(format!(
            "lowest g2_si {worst} bounds the heralded g2 at {:.4}",
            bound_from_cross(worst)?
        ));
    }
    out.tables.push(table);
    Ok(out)
}

struct Check {
    name: &'static str,
    worst: f64,
    tolerance: f64,
}

fn random_crystal(rng: &mut ChaCha8Rng) -> CrystalSpec {
    CrystalSpec::from_depths(rng.random_range(0.0..5.0), rng.random_range(0.0..5.0), 0.01)
        .and_then(|c| c.with_biref_phase(rng.random_range(0.0..2.0 * PI)))
        .expect("valid random crystal")
}

fn random_state(rng: &mut ChaCha8Rng) -> JonesVector {
    let v = JonesVector::new(
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    );
    v.normalized().unwrap_or_else(|| StateLabel::H.vector())
}

/// Residual of `out` being parallel to `expected` (both nonzero).
fn misalignment(out: &JonesVector, expected: &JonesVector) -> f64 {
    let overlap = out.inner(expected).norm_sqr() / (out.intensity() * expected.intensity());
    1.0 - overlap
}

fn checks(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws = 200;
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for _ in 0..draws {
        let m = JonesMatrix {
            m11: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            m12: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            m21: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            m22: C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        };
        if m.det().norm() < 1e-3 {
            continue;
        }
        let (t, u) = tu_decompose(&m)?;
        worst = worst.max((t * u).distance(&m) / m.frobenius_norm());
    }
    out.push(Check {
        name: "polar_decomposition",
        worst,
        tolerance: 1e-10,
    });

    let (mut scalar, mut preserve) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let c = random_crystal(&mut rng);
        let kind = if rng.random_range(0.0..1.0) < 0.5 {
            ArrangementKind::RotatedPair
        } else {
            ArrangementKind::HwpPair
        };
        let a = Arrangement::identical_pair(kind, c)?;
        let m = a.transmission()?;
        let psi = random_state(&mut rng);
        if kind == ArrangementKind::RotatedPair {
            let (s, residual) = m.scalar_part();
            scalar = scalar.max(residual / s.norm().max(1e-300));
        }
        preserve = preserve.max(misalignment(&(m * psi), &a.expected_output(&psi)));
    }
    out.push(Check {
        name: "compensation_identity",
        worst: scalar,
        tolerance: 1e-12,
    });
    out.push(Check {
        name: "polarization_preservation",
        worst: preserve,
        tolerance: 1e-12,
    });

    let mut worst = 0.0f64;
    for _ in 0..draws {
        let c = random_crystal(&mut rng);
        let theta = rng.random_range(0.0..PI);
        let (d1, d2) = c.depths();
        let got = Arrangement::single(c).depth_for_linear(theta)?;
        worst = worst.max((got - effective_optical_depth(d1, d2, theta)).abs());
    }
    out.push(Check {
        name: "single_crystal_depth",
        worst,
        tolerance: 1e-12,
    });

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = Arrangement::pair(
            ArrangementKind::HwpPair,
            random_crystal(&mut rng),
            random_crystal(&mut rng),
        )?;
        let psi = random_state(&mut rng);
        let whole = a.transmission()? * psi;
        let layered = layered_propagate(&a, &psi, 64)?;
        worst = worst.max(((whole.a1 - layered.a1).norm()).max((whole.a2 - layered.a2).norm()));
    }
    out.push(Check {
        name: "layered_propagation",
        worst,
        tolerance: 1e-10,
    });

    let mut worst = 0.0f64;
    let afc = crate::afc::AfcSpec::new(3.0, 0.8, crate::afc::Readout::Forward)?;
    for _ in 0..draws {
        let a =
            Arrangement::identical_pair(ArrangementKind::RotatedPair, random_crystal(&mut rng))?;
        let (s, residual) = memory_matrix(&a, &afc)?.scalar_part();
        if s.norm() > 1e-12 {
            worst = worst.max(residual / s.norm());
        }
    }
    out.push(Check {
        name: "echo_polarization_independence",
        worst,
        tolerance: 1e-12,
    });

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let psi = random_state(&mut rng);
        let rho = DensityMatrix::pure(&psi)?;
        let counts = simulate_counts_with(&rho, 100_000, rng.next_u64(), [1.0, 1.0])?;
        worst = worst.max(1.0 - fidelity(&mle_reconstruct(&counts)?, &psi));
    }
    out.push(Check {
        name: "tomography_round_trip",
        worst,
        tolerance: 1e-2,
    });

    let mut worst = 0.0f64;
    for mu in [1e-3, 0.05, 0.25, 1.0, 5.0] {
        let g = cross_correlation(&TmssSpec::new(mu)?)?;
        worst = worst.max((mean_n_from_cross(g)? / mu - 1.0).abs());
    }
    worst = worst.max((bound_from_cross(6.0)? - 11.0 / 18.0).abs());
    out.push(Check {
        name: "photon_statistics_inversion",
        worst,
        tolerance: 1e-8,
    });

    Ok(out)
}

/// Quick numerical health checks; every row must pass.
pub fn run_selfcheck(config: &ExperimentConfig) -> Result<RunReport> {
    let mut table = Table::new(
        Experiment::Selfcheck.name(),
        &["check", "passed", "worst_residual", "tolerance"],
    );
    let mut out = report(config, Experiment::Selfcheck);
    let mut failed = 0;
    for c in checks(config.seed)? {
        let passed = c.worst <= c.tolerance;
        failed += usize::from(!passed);
        out.summary.push(format!(
            "{} {:<32} worst {:.3e} (tol {:.0e})",
            if passed { "ok  " } else { "FAIL" },
            c.name,
            c.worst,
            c.tolerance
        ));
        table.push(vec![
            c.name.into(),
            passed.into(),
            c.worst.into(),
            c.tolerance.into(),
        ]);
    }
    out.summary.push(format!("{failed} check(s) failed"));
    out.tables.push(table);
    Ok(out)
}

/// Whether every row of a selfcheck report passed.
pub fn selfcheck_passed(report: &RunReport) -> bool {
    report
        .table(Experiment::Selfcheck.name())
        .is_some_and(|t| t.rows.iter().all(|r| r[1] == Cell::Bool(true)))
}

/// SVG charts for the tables of a report, as (file name, contents).
pub fn render_plots(report: &RunReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for table in &report.tables {
        let (x, ys, y_label): (&str, &[&str], &str) = match table.name.as_str() {
            "depth_sweep" => (
                "angle_deg",
                &["depth_uncompensated", "depth_compensated"],
                "optical depth",
            ),
            "efficiency_sweep" => (
                "angle_deg",
                &["efficiency_uncompensated", "efficiency_compensated"],
                "efficiency",
            ),
            "profile" => ("z_m", &["intensity_d1", "intensity_d2"], "intensity"),
            "stats" => ("g2_si", &["g2_s_given_i"], "heralded g2 bound"),
            _ => continue,
        };
        let xs = table.column(x).expect("numeric x column");
        let series: Vec<Series<'_>> = ys
            .iter()
            .map(|name| Series {
                name,
                points: xs
                    .iter()
                    .copied()
                    .zip(table.column(name).expect("numeric column"))
                    .collect(),
            })
            .collect();
        out.push((
            format!("{}.svg", table.name),
            line_chart(&table.name.replace('_', " "), x, y_label, &series),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quick() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.tomography.mc_trials = 8;
        c
    }

    #[test]
    fn depth_sweep_endpoints() {
        let c = quick();
        let r = run_depth_sweep(&c).unwrap();
        let t = r.table("depth_sweep").unwrap();
        let plain = t.column("depth_uncompensated").unwrap();
        let comp = t.column("depth_compensated").unwrap();
        assert_relative_eq!(plain[0], 2.70, max_relative = 1e-12);
        assert_relative_eq!(plain[18], 0.99, max_relative = 1e-12);
        assert_relative_eq!(
            plain[9],
            effective_optical_depth(2.70, 0.99, PI / 4.0),
            max_relative = 1e-12
        );
        for d in comp {
            assert_relative_eq!(d, 1.845, max_relative = 1e-12);
        }
    }

    #[test]
    fn efficiency_extremes_match_fit() {
        let r = run_efficiency_sweep(&quick()).unwrap();
        let t = r.table("efficiency_sweep").unwrap();
        let (lo, hi) = min_max(&t.column("efficiency_uncompensated").unwrap());
        assert_relative_eq!(hi, 0.13, max_relative = 1e-9);
        assert_relative_eq!(lo, 0.03, max_relative = 1e-9);
        let (lo, hi) = min_max(&t.column("efficiency_compensated").unwrap());
        assert_relative_eq!(lo, hi, max_relative = 1e-12);
    }

    #[test]
    fn tomography_is_reproducible() {
        let c = quick();
        let a = run_tomography(&c).unwrap();
        let b = run_tomography(&c).unwrap();
        assert_eq!(a, b);
        let t = a.table("tomography").unwrap();
        assert_eq!(t.rows.len(), 5);
        assert_eq!(a.attachments.len(), 5);
        for f in t.column("fidelity").unwrap() {
            assert!(f > 0.9, "{f}");
        }
    }

    #[test]
    fn counts_round_trip_through_text() {
        let c = quick();
        let r = run_tomography(&c).unwrap();
        let (name, text) = &r.attachments[0];
        assert_eq!(name, "counts_H.txt");
        let counts: CountRecord = text.parse().unwrap();
        let again = run_tomography_on_counts(&c, &[(StateLabel::H, counts)]).unwrap();
        assert_eq!(
            again.table("tomography").unwrap().rows[0][1],
            r.table("tomography").unwrap().rows[0][1]
        );
    }

    #[test]
    fn stats_table() {
        let r = run_stats(&quick()).unwrap();
        let t = r.table("stats").unwrap();
        let mu = t.column("mean_n").unwrap();
        assert_relative_eq!(mu[1], 0.25, max_relative = 1e-8);
        assert_relative_eq!(
            t.column("g2_s_given_i").unwrap()[1],
            11.0 / 18.0,
            max_relative = 1e-8
        );
    }

    #[test]
    fn selfcheck_passes() {
        let r = run_selfcheck(&quick()).unwrap();
        assert!(selfcheck_passed(&r), "{:#?}", r.summary);
    }

    #[test]
    fn profile_ends_at_transmission() {
        let mut c = quick();
        c.arrangement.kind = ArrangementKind::RotatedPair;
        let r = run_profile(&c).unwrap();
        let t = r.table("profile").unwrap();
        let i1 = t.column("intensity_d1").unwrap();
        let i2 = t.column("intensity_d2").unwrap();
        let out =
            c.compensated_arrangement().unwrap().transmission().unwrap() * StateLabel::D.vector();
        assert_relative_eq!(*i1.last().unwrap(), out.a1.norm_sqr(), max_relative = 1e-10);
        assert_relative_eq!(*i2.last().unwrap(), out.a2.norm_sqr(), max_relative = 1e-10);
        assert_relative_eq!(
            t.column("z_m").unwrap().last().copied().unwrap(),
            0.02,
            max_relative = 1e-12
        );
    }

    #[test]
    fn plots_for_numeric_tables() {
        let r = run_depth_sweep(&quick()).unwrap();
        let plots = render_plots(&r);
        assert_eq!(plots.len(), 1);
        assert_eq!(plots[0].0, "depth_sweep.svg");
    }

    #[test]
    fn seeds_are_distinct_and_stable() {
        let s = derive_seeds(7, 10);
        assert_eq!(s, derive_seeds(7, 10));
        let mut sorted = s.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
    }
}
