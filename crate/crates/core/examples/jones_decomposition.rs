//! Split a crystal's Jones matrix into its loss and retardation parts and
//! follow a few standard states through it.

use polmem::jones::{jones_to_stokes, tu_decompose, StateLabel};
use polmem::medium::{transmission_matrix, CrystalSpec};

fn main() -> polmem::Result<()> {
    let crystal = CrystalSpec::from_depths(1.35, 0.495, 0.01)?.with_biref_phase(0.7)?;
    let m = transmission_matrix(&crystal)?;
    let (t, u) = tu_decompose(&m)?;
    println!("M = T·U reconstructed to {:.1e}", (t * u).distance(&m));
    println!("T eigenvalues {:?}", t.hermitian_eigenvalues());
    println!("U unitary: {}", u.is_unitary(1e-12));

    for label in StateLabel::ALL {
        let out = m * label.vector();
        let s = jones_to_stokes(&out);
        println!(
            "{label:>6}: transmitted {:.4}, Stokes direction {:?}",
            out.intensity(),
            s.direction().map(|d| d.map(|x| (x * 1e4).round() / 1e4))
        );
    }
    Ok(())
}
