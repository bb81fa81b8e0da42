//! Field components along the rotated-crystal pair for diagonal input, and
//! the layered propagator converging to the closed form.

use polmem::jones::StateLabel;
use polmem::medium::{
    layered_propagate, propagation_profile, Arrangement, ArrangementKind, CrystalSpec,
};

fn main() -> polmem::Result<()> {
    let crystal = CrystalSpec::from_depths(1.35, 0.495, 0.01)?;
    let pair = Arrangement::identical_pair(ArrangementKind::RotatedPair, crystal)?;
    let input = StateLabel::D.vector();

    println!(
        "{:>8} {:>8} {:>8} {:>10} {:>10}",
        "z (mm)", "I_D1", "I_D2", "phase_D1", "phase_D2"
    );
    for s in propagation_profile(&pair, &input, 21)? {
        println!(
            "{:>8.2} {:>8.4} {:>8.4} {:>10.2} {:>10.2}",
            s.z * 1e3,
            s.intensity_d1,
            s.intensity_d2,
            s.phase_d1,
            s.phase_d2
        );
    }

    let exact = pair.transmission()? * input;
    for layers in [1, 10, 100, 1000] {
        let v = layered_propagate(&pair, &input, layers)?;
        let err = (v.a1 - exact.a1).norm().max((v.a2 - exact.a2).norm());
        println!("{layers:>5} layers: deviation {err:.1e}");
    }
    Ok(())
}
