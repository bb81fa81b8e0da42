//! Optical depth against linear input polarization for one crystal, two
//! parallel crystals, and the two compensated stacks.

use polmem::medium::{
    effective_optical_depth, Arrangement, ArrangementKind, CrystalSpec, Imperfections,
};

fn main() -> polmem::Result<()> {
    let crystal = CrystalSpec::from_depths(1.35, 0.495, 0.01)?;
    let stacks = [
        (
            "aligned",
            Arrangement::identical_pair(ArrangementKind::AlignedPair, crystal)?,
        ),
        (
            "rotated",
            Arrangement::identical_pair(ArrangementKind::RotatedPair, crystal)?,
        ),
        (
            "hwp",
            Arrangement::identical_pair(ArrangementKind::HwpPair, crystal)?,
        ),
        (
            "hwp+errors",
            Arrangement::identical_pair(ArrangementKind::HwpPair, crystal)?
                .with_imperfections(Imperfections::typical()),
        ),
    ];

    print!("{:>5} {:>9}", "angle", "formula");
    for (name, _) in &stacks {
        print!(" {name:>11}");
    }
    println!();
    for step in 0..=12 {
        let deg = 15.0 * step as f64;
        let theta = deg.to_radians();
        print!(
            "{deg:>5} {:>9.4}",
            effective_optical_depth(2.70, 0.99, theta)
        );
        for (_, a) in &stacks {
            print!(" {:>11.4}", a.depth_for_linear(theta)?);
        }
        println!();
    }

    let (s, residual) = stacks[1].1.transmission()?.scalar_part();
    println!("rotated pair = {s:.4}·I (residual {residual:.1e})");
    Ok(())
}
