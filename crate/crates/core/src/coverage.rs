//! Frequentist coverage of the limit recipe.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub n_trials: u64,
    pub covered: u64,
    /// β²/2 bound of every trial, in trial order.
    pub bounds: Vec<f64>,
}

impl CoverageResult {
    pub fn fraction(&self) -> f64 {
        self.covered as f64 / self.n_trials as f64
    }
}

/// Fraction of synthetic runs at `true_beta2_half` whose bound is at least the
/// true value. Trial `t` draws from stream `t` of `seed`.
pub fn coverage_study(
    scenario: &Scenario,
    true_beta2_half: f64,
    n_trials: u64,
    cl: f64,
    seed: u64,
) -> Result<CoverageResult> {
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "must be >= 1"));
    }
    let mut settings = scenario.limit_settings();
    settings.cl = cl;
    let expected = scenario.expected_pair(true_beta2_half)?;
    let bounds = (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, trial);
            let (on, off) = expected.sample(&mut rng, scenario.name())?;
            let (_, result) = scenario.analyze(&on, &off, &settings)?;
            Ok(result.beta2_half_bound)
        })
        .collect::<Result<Vec<f64>>>()?;
    let covered = bounds.iter().filter(|&&b| b >= true_beta2_half).count() as u64;
    Ok(CoverageResult {
        n_trials,
        covered,
        bounds,
    })
}
