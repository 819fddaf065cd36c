//! Parallel Monte-Carlo driver. Trials are independent work items on
//! counter-based RNG streams, collected in trial-index order, so the output
//! is identical for any worker count. THERMOQFI_THREADS caps the pool.

use rayon::prelude::*;

use thermoqfi::estimate::{mle_estimate, simulate_counts_for_trial, ExperimentPlan, MleEstimate};

use crate::CliError;

/// Number of workers: THERMOQFI_THREADS when set, otherwise rayon's default.
pub fn thread_cap() -> Option<usize> {
    std::env::var("THERMOQFI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Run `trials` independent experiments and return the estimates in trial
/// order.
pub fn run_trials_parallel(
    plan: &ExperimentPlan,
    trials: u64,
    bracket: (f64, f64),
) -> Result<Vec<MleEstimate>, CliError> {
    let pool = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(threads) = thread_cap() {
            builder = builder.num_threads(threads);
        }
        builder
            .build()
            .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?
    };
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|k| {
                let counts = simulate_counts_for_trial(plan, k)?;
                let est = mle_estimate(counts, &plan.setup, &plan.law, &plan.channel, bracket)?;
                Ok(est)
            })
            .collect::<Result<Vec<_>, thermoqfi::Error>>()
    })
    .map_err(CliError::from)
}
