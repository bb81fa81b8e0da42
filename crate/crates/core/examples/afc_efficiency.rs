//! Fit the comb to the uncompensated efficiency extremes, then compare
//! storage efficiency with and without compensation.

use polmem::afc::{store_and_retrieve, AfcSpec};
use polmem::jones::{JonesVector, StateLabel};
use polmem::medium::{Arrangement, ArrangementKind, CrystalSpec, Imperfections};

fn main() -> polmem::Result<()> {
    let afc = AfcSpec::fit_to_sweep_extremes(2.70, 0.99, 0.13, 0.03)?;
    println!(
        "finesse {:.3}, decoherence factor {:.3}",
        afc.finesse, afc.decoherence_factor
    );

    let crystal = CrystalSpec::from_depths(1.35, 0.495, 0.01)?;
    let plain = Arrangement::identical_pair(ArrangementKind::AlignedPair, crystal)?;
    let hwp = Arrangement::identical_pair(ArrangementKind::HwpPair, crystal)?;
    let real = hwp.with_imperfections(Imperfections::typical());

    println!(
        "{:>5} {:>9} {:>9} {:>9}",
        "angle", "plain", "hwp", "hwp+err"
    );
    for step in 0..=12 {
        let deg = 15.0 * step as f64;
        let psi = JonesVector::linear(deg.to_radians());
        println!(
            "{deg:>5} {:>8.2}% {:>8.2}% {:>8.2}%",
            100.0 * store_and_retrieve(&psi, &plain, &afc)?.efficiency,
            100.0 * store_and_retrieve(&psi, &hwp, &afc)?.efficiency,
            100.0 * store_and_retrieve(&psi, &real, &afc)?.efficiency,
        );
    }

    let r = store_and_retrieve(&StateLabel::L.vector(), &hwp, &afc)?;
    println!(
        "L input: efficiency {:.2}%, leakage {:.2}%, output overlap with swapped input {:.6}",
        100.0 * r.efficiency,
        100.0 * r.transmitted_leakage,
        r.output_state
            .inner(&hwp.expected_output(&StateLabel::L.vector()))
            .norm_sqr()
    );
    Ok(())
}
