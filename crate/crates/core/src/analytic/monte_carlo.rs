use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::ActivationModelParams;
use crate::error::ModelError;
use crate::scalar::Real;

/// Trials are split over this many independently seeded streams, whatever
/// the worker count, so estimates do not depend on parallelism.
const SHARDS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    /// Standardised distance of `reference` from the estimate.
    ///
    /// The standard error is floored at `1 / trials`, the resolution of a
    /// mean of integer counts, so a zero-variance estimate is not held to
    /// exact equality.
    pub fn z_score(&self, reference: f64) -> f64 {
        let resolution = 1.0 / self.trials.max(1) as f64;
        (self.mean - reference) / self.std_error.max(resolution)
    }
}

/// Monte Carlo estimate of the distinct beams occupied over `N_a` cycles.
///
/// Each trial draws `N_a` independent cycles; a cycle has Poisson(lambda)
/// UEs, each on a uniformly chosen beam. Deterministic in `seed`.
pub fn monte_carlo_unique_beams<T: Real>(
    params: &ActivationModelParams<T>,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, ModelError> {
    params.validate()?;
    if trials == 0 {
        return Err(ModelError::InvalidParameter {
            field: "trials",
            reason: "must be at least 1".into(),
        });
    }
    let lambda = params.ue_density.to_f64().unwrap_or(0.0);
    let beams = params.total_beams;
    let cycles = params.activation_cycles;

    let sums: Vec<(u64, u64)> = (0..SHARDS)
        .into_par_iter()
        .map(|shard| {
            let n = trials / SHARDS + u64::from(shard < trials % SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let poisson = (lambda > 0.0).then(|| Poisson::new(lambda).expect("positive mean"));
            let mut seen = vec![false; beams];
            let (mut s, mut s2) = (0u64, 0u64);
            for _ in 0..n {
                seen.iter_mut().for_each(|x| *x = false);
                let mut distinct = 0u64;
                for _ in 0..cycles {
                    let ues = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
                    for _ in 0..ues {
                        let b = rng.random_range(0..beams);
                        if !seen[b] {
                            seen[b] = true;
                            distinct += 1;
                        }
                    }
                }
                s += distinct;
                s2 += distinct * distinct;
            }
            (s, s2)
        })
        .collect();

    let (s, s2) = sums
        .iter()
        .fold((0u64, 0u64), |(a, b), &(x, y)| (a + x, b + y));
    let n = trials as f64;
    let mean = s as f64 / n;
    let var = if trials > 1 {
        ((s2 as f64 - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}
