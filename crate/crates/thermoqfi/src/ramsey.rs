//! Ramsey signals and their classical Fisher information for temperature.
//!
//! A Ramsey cycle of duration t accumulates phase = w t and reads out one
//! binary outcome per probe (product preparation) or one parity outcome per
//! ensemble (GHZ preparation). Within a total time budget tau the cycle
//! repeats N = tau / t times; N is treated as a real number throughout.

use serde::{Deserialize, Serialize};

use crate::channel::EnvironmentChannel;
use crate::density::DensityMatrix;
use crate::dephasing::DephasingLaw;
use crate::ensemble::{ProbeEnsemble, StateKind};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// One Ramsey configuration: ensemble, accumulated phase (w t, directly
/// settable), interrogation time t, and total time budget tau.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RamseySetup {
    pub ensemble: ProbeEnsemble,
    /// Accumulated single-particle phase w t at readout.
    pub phase: f64,
    /// Interrogation time of one cycle.
    pub t: f64,
    /// Total time budget; the cycle repeats N = tau / t times.
    pub tau: f64,
}

impl RamseySetup {
    pub fn new(ensemble: ProbeEnsemble, phase: f64, t: f64, tau: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::domain("interrogation time must be positive"));
        }
        if !(tau >= t) {
            return Err(Error::domain("total time tau must be at least t"));
        }
        Ok(RamseySetup { ensemble, phase, t, tau })
    }

    /// Number of repetitions N = tau / t (real-valued).
    pub fn repetitions(&self) -> f64 {
        self.tau / self.t
    }
}

/// Fisher information of one configuration, per shot and per time budget,
/// with the temperature uncertainty it implies.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FisherResult {
    pub fisher_per_shot: f64,
    pub fisher_total: f64,
    pub delta_t: f64,
}

impl FisherResult {
    fn from_per_shot(per_shot: f64, repetitions: f64) -> Self {
        let total = per_shot * repetitions;
        let delta_t = if total > 0.0 { total.powf(-0.5) } else { f64::INFINITY };
        FisherResult { fisher_per_shot: per_shot, fisher_total: total, delta_t }
    }
}

/// Signal visibility: e^(-gamma-kappa) sqrt(lambda) per particle, raised to
/// the n-th power for the GHZ parity signal.
fn visibility(
    setup: &RamseySetup,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    temp: f64,
) -> Result<f64> {
    let gamma = law.gamma(setup.t, temp)?;
    let kappa = channel.kappa(setup.t)?;
    let lambda = channel.lambda(setup.t)?;
    let v1 = (-(gamma + kappa)).exp() * lambda.sqrt();
    Ok(match setup.ensemble.state_kind {
        StateKind::Product => v1,
        StateKind::Ghz => v1.powi(setup.ensemble.n as i32),
    })
}

/// Effective cosine of the readout: cos(phase) for product probes,
/// cos(n phase) for the GHZ parity signal.
fn signal_cos(setup: &RamseySetup) -> f64 {
    match setup.ensemble.state_kind {
        StateKind::Product => setup.phase.cos(),
        StateKind::Ghz => (setup.ensemble.n as f64 * setup.phase).cos(),
    }
}

/// Two-outcome Ramsey probabilities (p0, p1).
///
/// Product probes: p0 = (1 + cos(phase) V) / 2 per particle.
/// GHZ probes: parity signal with cos(n phase) and the n-fold visibility.
pub fn ramsey_probabilities(
    setup: &RamseySetup,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    temp: f64,
) -> Result<(f64, f64)> {
    let v = visibility(setup, law, channel, temp)?;
    let p0 = 0.5 * (1.0 + signal_cos(setup) * v);
    Ok((p0, 1.0 - p0))
}

/// Classical Fisher information of the Ramsey readout, in closed form.
///
/// Product probes contribute n independent binary outcomes per shot; the
/// GHZ parity readout carries an n^2 prefactor together with n-fold decay
/// exponents. A vanishing denominator with nonvanishing signal derivative
/// is reported as divergent (infinite) information.
pub fn classical_fisher(
    setup: &RamseySetup,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    temp: f64,
) -> Result<FisherResult> {
    let v = visibility(setup, law, channel, temp)?;
    let cos = signal_cos(setup);
    let dgamma = law.dgamma_dt_temp(setup.t, temp)?;
    let n = setup.ensemble.n as f64;
    // dV/dT = -mult * dgamma * V; `count` independent outcomes per shot.
    let (mult, count) = match setup.ensemble.state_kind {
        StateKind::Product => (1.0, n),
        StateKind::Ghz => (n, 1.0),
    };
    let num = count * mult * mult * cos * cos * v * v * dgamma * dgamma;
    let den = 1.0 - cos * cos * v * v;
    let per_shot = if num == 0.0 {
        0.0
    } else if den <= f64::EPSILON {
        f64::INFINITY
    } else {
        num / den
    };
    Ok(FisherResult::from_per_shot(per_shot, setup.repetitions()))
}

/// Which closed-form uncertainty to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    /// Product probes at the optimal phase (cos^2 = 1).
    ProductOpt,
    /// GHZ probes at the optimal phase.
    GhzOpt,
    /// Product probes at the suboptimal phase (cos^2 = 1/2).
    ProductSub,
    /// GHZ probes at the suboptimal phase.
    GhzSub,
}

impl ClosedFormKind {
    pub fn state_kind(self) -> StateKind {
        match self {
            ClosedFormKind::ProductOpt | ClosedFormKind::ProductSub => StateKind::Product,
            ClosedFormKind::GhzOpt | ClosedFormKind::GhzSub => StateKind::Ghz,
        }
    }
}

/// Closed-form temperature uncertainty delta T of the four standard
/// configurations, for a general dephasing law (two-phase laws included).
///
/// With x = gamma (product) or x = n gamma (GHZ), the optimal-phase forms
/// read delta T^2 = (1 - e^(-2x)) / (N m e^(-2x) (dx/dT)^2 / mult^2) with
/// m = n or n^2; the suboptimal-phase forms replace the numerator by
/// 2 - e^(-2x). For the single-phase power law these reduce to the familiar
/// t^(2 nu - 1) expressions.
pub fn delta_t_closed_form(
    kind: ClosedFormKind,
    n: usize,
    tau: f64,
    law: &DephasingLaw,
    t: f64,
    temp: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("interrogation time must be positive"));
    }
    if !(tau > 0.0) {
        return Err(Error::domain("time budget must be positive"));
    }
    let gamma = law.gamma(t, temp)?;
    let dgamma = law.dgamma_dt_temp(t, temp)?;
    let nf = n as f64;
    let reps = tau / t;
    let (mult, count, suboptimal) = match kind {
        ClosedFormKind::ProductOpt => (1.0, nf, false),
        ClosedFormKind::GhzOpt => (nf, 1.0, false),
        ClosedFormKind::ProductSub => (1.0, nf, true),
        ClosedFormKind::GhzSub => (nf, 1.0, true),
    };
    if dgamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    let e2 = (-2.0 * mult * gamma).exp();
    // 1 - e^(-2x) via expm1 keeps full precision at short times
    let one_minus_e2 = -(-2.0 * mult * gamma).exp_m1();
    let numerator = if suboptimal { 1.0 + one_minus_e2 } else { one_minus_e2 };
    let fisher_total = reps * count * mult * mult * dgamma * dgamma * e2;
    Ok((numerator / fisher_total).sqrt())
}

/// Generic k-outcome Fisher information sum_k (dp_k/dT)^2 / p_k from
/// probabilities and their derivatives.
///
/// Outcomes with p = 0 and nonzero derivative make the information diverge;
/// that is reported as +inf rather than an error.
pub fn fisher_from_probabilities(probs: &[f64], dprobs: &[f64]) -> Result<f64> {
    if probs.len() != dprobs.len() {
        return Err(Error::DimensionMismatch { expected: probs.len(), got: dprobs.len() });
    }
    if probs.iter().any(|&p| p < -1e-12) {
        return Err(Error::InvalidProbability("negative probability".into()));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbability(format!("probabilities sum to {total}")));
    }
    let mut fi = 0.0;
    for (&p, &dp) in probs.iter().zip(dprobs) {
        if p <= 0.0 {
            if dp.abs() > 1e-12 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        fi += dp * dp / p;
    }
    Ok(fi)
}

/// Same information with the derivative taken by a 5-point central finite
/// difference at relative step 1e-5.
pub fn fisher_from_probability_fn(
    p: impl Fn(f64) -> Result<Vec<f64>>,
    temp: f64,
) -> Result<f64> {
    let h = 1e-5 * temp;
    let pm2 = p(temp - 2.0 * h)?;
    let pm1 = p(temp - h)?;
    let pc = p(temp)?;
    let pp1 = p(temp + h)?;
    let pp2 = p(temp + 2.0 * h)?;
    let dprobs: Vec<f64> = (0..pc.len())
        .map(|k| (pm2[k] - 8.0 * pm1[k] + 8.0 * pp1[k] - pp2[k]) / (12.0 * h))
        .collect();
    fisher_from_probabilities(&pc, &dprobs)
}

/// Readout probabilities extracted from an evolved density matrix: the
/// X-basis outcome of one reduced qubit for product probes, the parity
/// outcome of the full register for GHZ probes.
pub fn measured_probabilities_from_state(
    rho: &DensityMatrix,
    kind: StateKind,
) -> Result<(f64, f64)> {
    match kind {
        StateKind::Product => {
            let reduced = rho.matrix().partial_trace_keep(rho.qubits(), &[0]);
            let p0 = 0.5 * (1.0 + 2.0 * reduced.get(0, 1).re);
            Ok((p0, 1.0 - p0))
        }
        StateKind::Ghz => {
            let n = rho.qubits();
            let x = CMatrix::from_rows(&[
                &[crate::linalg::ZERO, crate::linalg::ONE],
                &[crate::linalg::ONE, crate::linalg::ZERO],
            ]);
            let mut parity = x.clone();
            for _ in 1..n {
                parity = parity.kron(&x);
            }
            let expect = rho.matrix().mul(&parity).trace().re;
            let p0 = 0.5 * (1.0 + expect);
            Ok((p0, 1.0 - p0))
        }
    }
}
