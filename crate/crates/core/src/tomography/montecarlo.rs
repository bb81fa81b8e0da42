use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::counts::poisson;
use super::{fidelity, mle_reconstruct, CountRecord};
use crate::error::{Error, Result};
use crate::jones::JonesVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    /// Sample standard deviation over successful trials.
    pub std: f64,
    pub trials: usize,
    pub failed_trials: usize,
}

/// Resample every count cell from a Poisson law centred on the observed
/// count, reconstruct each replica and collect the fidelity spread.
///
/// Trial `k` draws from its own ChaCha stream `k` of `seed`, so results do
/// not depend on how trials are scheduled across threads.
pub fn monte_carlo_uncertainty(
    counts: &CountRecord,
    psi: &JonesVector,
    trials: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    if trials < 2 {
        return Err(Error::invalid("Monte-Carlo needs at least 2 trials"));
    }
    let outcomes: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let cells = counts
                .cells()
                .map(|row| row.map(|n| poisson(n as f64, &mut rng)));
            mle_reconstruct(&counts.with_counts(cells))
                .ok()
                .map(|rho| fidelity(&rho, psi))
        })
        .collect();

    let good: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failed_trials = trials - good.len();
    if good.len() < 2 {
        return Err(Error::DegenerateData(format!(
            "only {} of {trials} Monte-Carlo trials reconstructed",
            good.len()
        )));
    }
    let n = good.len() as f64;
    let mean = good.iter().sum::<f64>() / n;
    let var = good.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FidelityEstimate {
        mean,
        std: var.sqrt(),
        trials,
        failed_trials,
    })
}
