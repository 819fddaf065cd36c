//! Monte-Carlo validation of the precision bounds: simulate Ramsey counts,
//! estimate the temperature by maximum likelihood, and compare the sample
//! variance against 1 / (shots * Fisher information).
//!
//! Randomness comes from a counter-based stream cipher keyed by
//! (seed, trial index), so trial-level parallelism cannot change any
//! result: trial k always consumes stream k regardless of which worker
//! runs it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::channel::EnvironmentChannel;
use crate::dephasing::DephasingLaw;
use crate::error::{Error, Result};
use crate::ramsey::{classical_fisher, ramsey_probabilities, RamseySetup};

/// One simulated experiment: `shots` Ramsey cycles at fixed settings.
#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub true_temp: f64,
    pub setup: RamseySetup,
    pub law: DephasingLaw,
    pub channel: EnvironmentChannel,
    pub shots: u64,
    pub seed: u64,
}

impl ExperimentPlan {
    fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::domain("plan needs at least one shot"));
        }
        Ok(())
    }
}

/// Outcome counts (n0, n1) of one experiment, drawn from the binomial law
/// of the Ramsey probabilities on stream `trial` of the plan's seed.
pub fn simulate_counts_for_trial(plan: &ExperimentPlan, trial: u64) -> Result<(u64, u64)> {
    plan.validate()?;
    let (p0, _) = ramsey_probabilities(&plan.setup, &plan.law, &plan.channel, plan.true_temp)?;
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidProbability(format!("p0 = {p0} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(trial);
    let n0 = Binomial::new(plan.shots, p0)
        .map_err(|e| Error::domain(format!("binomial setup: {e}")))?
        .sample(&mut rng);
    Ok((n0, plan.shots - n0))
}

/// Counts on stream 0.
pub fn simulate_counts(plan: &ExperimentPlan) -> Result<(u64, u64)> {
    simulate_counts_for_trial(plan, 0)
}

/// Maximum-likelihood temperature estimate from observed counts.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MleEstimate {
    pub t_hat: f64,
    /// True when the counts were degenerate (all zeros or all ones) and the
    /// estimate is a bracket endpoint.
    pub saturated: bool,
}

/// Maximize n0 log p0(T) + n1 log p1(T) over `bracket` by golden-section
/// search on log T, refined to relative 1e-10.
pub fn mle_estimate(
    counts: (u64, u64),
    setup: &RamseySetup,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    bracket: (f64, f64),
) -> Result<MleEstimate> {
    let (n0, n1) = counts;
    let shots = n0 + n1;
    if shots == 0 {
        return Err(Error::domain("no counts to estimate from"));
    }
    if !(bracket.0 > 0.0) || !(bracket.1 > bracket.0) {
        return Err(Error::domain("bracket must satisfy 0 < lo < hi"));
    }
    let saturated = n0 == 0 || n0 == shots;
    // deviance form of the negative log-likelihood: same minimizer, but the
    // large count-entropy constant cancels, keeping the objective well
    // conditioned even at huge shot numbers
    let nll = |temp: f64| -> f64 {
        match ramsey_probabilities(setup, law, channel, temp) {
            Ok((p0, p1)) => {
                let mut acc = 0.0;
                for (n, p) in [(n0, p0), (n1, p1)] {
                    if n > 0 {
                        let f = n as f64 / shots as f64;
                        acc += n as f64 * (f / p.clamp(1e-300, 1.0)).ln();
                    }
                }
                acc
            }
            Err(_) => f64::INFINITY,
        }
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut lo = bracket.0.ln();
    let mut hi = bracket.1.ln();
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = nll(x1.exp());
    let mut f2 = nll(x2.exp());
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = nll(x1.exp());
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = nll(x2.exp());
        }
    }
    let mut t_hat = if f1 <= f2 { x1.exp() } else { x2.exp() };
    if saturated {
        // snap to the bracket endpoint the search drifted towards
        let mid = 0.5 * (bracket.0.ln() + bracket.1.ln());
        t_hat = if t_hat.ln() < mid { bracket.0 } else { bracket.1 };
    }
    Ok(MleEstimate { t_hat, saturated })
}

/// Aggregate of a Monte-Carlo run.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub t_hat_mean: f64,
    pub sample_variance: f64,
    /// 1 / (shots * per-shot Fisher information) at the true temperature.
    pub crb: f64,
    pub variance_to_crb: f64,
    pub trials: u64,
    pub saturated_trials: u64,
}

/// Results of the independent trials, reduced in trial-index order.
pub fn run_trials(
    plan: &ExperimentPlan,
    trials: u64,
    bracket: (f64, f64),
) -> Result<Vec<MleEstimate>> {
    (0..trials)
        .map(|k| {
            let counts = simulate_counts_for_trial(plan, k)?;
            mle_estimate(counts, &plan.setup, &plan.law, &plan.channel, bracket)
        })
        .collect()
}

/// Trial estimates summarized against the precision bound.
pub fn summarize(plan: &ExperimentPlan, estimates: &[MleEstimate]) -> Result<EstimateReport> {
    if estimates.len() < 2 {
        return Err(Error::domain("need at least two trials to form a variance"));
    }
    let trials = estimates.len() as f64;
    let mean = estimates.iter().map(|e| e.t_hat).sum::<f64>() / trials;
    let var = estimates.iter().map(|e| (e.t_hat - mean).powi(2)).sum::<f64>() / (trials - 1.0);
    let per_shot = classical_fisher(&plan.setup, &plan.law, &plan.channel, plan.true_temp)?
        .fisher_per_shot;
    let crb = 1.0 / (plan.shots as f64 * per_shot);
    Ok(EstimateReport {
        t_hat_mean: mean,
        sample_variance: var,
        crb,
        variance_to_crb: var / crb,
        trials: estimates.len() as u64,
        saturated_trials: estimates.iter().filter(|e| e.saturated).count() as u64,
    })
}

/// Convenience wrapper: simulate, estimate, and summarize in one call.
pub fn run_monte_carlo(
    plan: &ExperimentPlan,
    trials: u64,
    bracket: (f64, f64),
) -> Result<EstimateReport> {
    let estimates = run_trials(plan, trials, bracket)?;
    summarize(plan, &estimates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{ProbeEnsemble, StateKind};
    use crate::temperature::TemperatureModel;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn linear_law(nu: f64) -> DephasingLaw {
        DephasingLaw::new(nu, TemperatureModel::linear(1.0).unwrap()).unwrap()
    }

    fn plan(phase: f64, shots: u64, seed: u64) -> ExperimentPlan {
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        ExperimentPlan {
            true_temp: 0.5,
            setup: RamseySetup::new(ens, phase, 1.0, 1.0).unwrap(),
            law: linear_law(1.0),
            channel: EnvironmentChannel::None,
            shots,
            seed,
        }
    }

    #[test]
    fn unbiased_coin_at_quarter_phase() {
        let p = plan(FRAC_PI_2, 100_000, 11);
        let (n0, n1) = simulate_counts(&p).unwrap();
        assert_eq!(n0 + n1, 100_000);
        let sigma = (0.25f64 / 100_000.0).sqrt();
        assert!((n0 as f64 / 100_000.0 - 0.5).abs() <= 4.0 * sigma);
    }

    #[test]
    fn counts_concentrate_on_the_signal() {
        // phase=pi, gamma=0.5: p0 = (1 - e^{-0.5})/2 = 0.19673...
        let p = plan(PI, 1_000_000, 5);
        let (n0, _) = simulate_counts(&p).unwrap();
        let p0 = 0.5 * (1.0 - (-0.5f64).exp());
        let sigma = (p0 * (1.0 - p0) / 1e6).sqrt();
        assert!((n0 as f64 / 1e6 - p0).abs() <= 4.0 * sigma);
    }

    #[test]
    fn fixed_seed_replays_identically() {
        let p = plan(PI, 50_000, 42);
        assert_eq!(simulate_counts(&p).unwrap(), simulate_counts(&p).unwrap());
        // distinct trials see distinct streams
        let a = simulate_counts_for_trial(&p, 1).unwrap();
        let b = simulate_counts_for_trial(&p, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn noiseless_inversion_recovers_the_temperature() {
        let p = plan(PI, 10_000_000_000, 0);
        let (p0, _) = ramsey_probabilities(&p.setup, &p.law, &p.channel, 0.5).unwrap();
        let n0 = (p0 * p.shots as f64).round() as u64;
        let est = mle_estimate((n0, p.shots - n0), &p.setup, &p.law, &p.channel, (0.1, 2.5))
            .unwrap();
        assert!(!est.saturated);
        assert_abs_diff_eq!(est.t_hat, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn saturated_counts_land_on_bracket_endpoints() {
        let p = plan(PI, 1000, 0);
        let all_zero = mle_estimate((0, 1000), &p.setup, &p.law, &p.channel, (0.1, 2.5)).unwrap();
        assert!(all_zero.saturated);
        // p0 grows with T, so zero n0 pulls the estimate to the cold end
        assert_eq!(all_zero.t_hat, 0.1);
        let all_one = mle_estimate((1000, 0), &p.setup, &p.law, &p.channel, (0.1, 2.5)).unwrap();
        assert!(all_one.saturated);
        assert_eq!(all_one.t_hat, 2.5);
    }

    #[test]
    fn variance_tracks_the_bound() {
        // a light version of the full acceptance run
        let p = plan(PI, 20_000, 20260810);
        let report = run_monte_carlo(&p, 150, (0.1, 2.5)).unwrap();
        assert!(report.saturated_trials == 0);
        assert!(
            (0.75..=1.25).contains(&report.variance_to_crb),
            "variance/CRB = {}",
            report.variance_to_crb
        );
        let bias_bound = 3.0 * (report.crb / 150.0).sqrt();
        assert!((report.t_hat_mean - 0.5).abs() <= bias_bound);
    }

    #[test]
    fn ghz_protocol_variance_tracks_the_bound() {
        let ens = ProbeEnsemble::new(3, StateKind::Ghz).unwrap();
        let p = ExperimentPlan {
            true_temp: 0.5,
            setup: RamseySetup::new(ens, PI, 1.0, 1.0).unwrap(),
            law: linear_law(1.0),
            channel: EnvironmentChannel::None,
            shots: 20_000,
            seed: 7,
        };
        let report = run_monte_carlo(&p, 150, (0.1, 2.5)).unwrap();
        assert!(
            (0.75..=1.25).contains(&report.variance_to_crb),
            "variance/CRB = {}",
            report.variance_to_crb
        );
    }

    #[test]
    fn rejects_empty_plans() {
        let mut p = plan(PI, 0, 0);
        assert!(simulate_counts(&p).is_err());
        p.shots = 10;
        assert!(mle_estimate((0, 0), &p.setup, &p.law, &p.channel, (0.1, 2.5)).is_err());
        assert!(mle_estimate((5, 5), &p.setup, &p.law, &p.channel, (2.5, 0.1)).is_err());
    }
}
