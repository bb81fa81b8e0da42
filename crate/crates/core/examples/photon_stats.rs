//! Two-mode squeezed state correlations: cross-correlation against mean
//! photon number, and the heralded auto-correlation bound implied by each
//! measured cross-correlation.

use polmem::photon_stats::{
    bound_from_cross, cross_correlation, heralded_auto_correlation, mean_n_from_cross,
    nonclassicality_check, TmssSpec,
};

fn main() -> polmem::Result<()> {
    println!(
        "{:>8} {:>8} {:>12} {:>8}",
        "mean_n", "cutoff", "g2_si", "g2_s|i"
    );
    for mu in [0.01, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let spec = TmssSpec::new(mu)?;
        println!(
            "{mu:>8} {:>8} {:>12.4} {:>8.4}",
            spec.cutoff,
            cross_correlation(&spec)?,
            heralded_auto_correlation(&spec)?
        );
    }
    println!();
    for g in [7.6, 6.0, 9.4, 8.0, 9.2] {
        println!(
            "g2_si {g:>4}: mean_n {:.4}, g2_s|i ≤ {:.3}, {:?}",
            mean_n_from_cross(g)?,
            bound_from_cross(g)?,
            nonclassicality_check(g)?
        );
    }
    Ok(())
}
