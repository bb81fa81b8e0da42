//! Simulate coincidence counts for a retrieved qubit, reconstruct it by
//! maximum likelihood and attach a Monte-Carlo error bar.

use polmem::afc::{store_and_retrieve, AfcSpec};
use polmem::jones::StateLabel;
use polmem::medium::{Arrangement, ArrangementKind, CrystalSpec, Imperfections};
use polmem::tomography::{
    classical_bound_check, fidelity, mle_fit, monte_carlo_uncertainty, simulate_counts,
    DensityMatrix, MleSettings,
};

fn main() -> polmem::Result<()> {
    let afc = AfcSpec::fit_to_sweep_extremes(2.70, 0.99, 0.13, 0.03)?;
    let stack = Arrangement::identical_pair(
        ArrangementKind::HwpPair,
        CrystalSpec::from_depths(1.35, 0.495, 0.01)?,
    )?
    .with_imperfections(Imperfections::typical());

    for (i, label) in [
        StateLabel::H,
        StateLabel::V,
        StateLabel::L,
        StateLabel::D,
        StateLabel::Elliptical,
    ]
    .into_iter()
    .enumerate()
    {
        let psi = label.vector();
        let retrieved = store_and_retrieve(&psi, &stack, &afc)?;
        let counts = simulate_counts(
            &DensityMatrix::pure(&retrieved.output_state)?,
            1000,
            i as u64,
        )?;
        let fit = mle_fit(&counts, &MleSettings::default())?;
        let target = stack.expected_output(&psi);
        let f = fidelity(&fit.rho, &target);
        let mc = monte_carlo_uncertainty(&counts, &target, 200, 100 + i as u64)?;
        let check = classical_bound_check(f, Some(mc.std));
        println!(
            "{label:>6}: F = {:.1}({:.0})%  purity {:.4}  {} iterations  {:.0}σ above 2/3",
            100.0 * f,
            1000.0 * mc.std,
            fit.rho.purity(),
            fit.iterations,
            check.margin_sigma.unwrap_or(f64::NAN)
        );
    }

    let counts = simulate_counts(&DensityMatrix::pure(&StateLabel::L.vector())?, 500, 9)?;
    print!("\ncount record as written to disk:\n{}", counts.to_text());
    Ok(())
}
