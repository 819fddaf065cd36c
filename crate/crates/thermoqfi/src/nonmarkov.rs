//! Non-Markovianity of an external environment, quantified through the
//! temperature quantum Fisher information of a single reference probe.
//!
//! A fixed reference dephasing law and temperature define the information
//! trajectory F(t) of a probe qubit; the external channel under test turns
//! it into F_E(t). With D(t) = d/dt (F_E - F), the measure is the positive
//! part integral of D maximized over the initial pure probe state:
//! memoryless (nonnegative-rate) channels give zero, while an interval of
//! negative decoherence or damping rate produces a matching interval of
//! positive D. The reference dephasing acts in the probe's quantization
//! basis; initial states are searched over the whole Bloch sphere.

use serde::Serialize;

use crate::channel::{EnvironmentChannel, RateFunction};
use crate::dephasing::DephasingLaw;
use crate::ensemble::bloch_state;
use crate::error::{Error, Result};
use crate::qfi::{sld_qfi, state_and_derivative_from};

/// Which decay mechanism a sampled rate drives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    DephasingRate,
    DampingRate,
}

/// A decay rate sampled on a time grid; values may be negative (that is the
/// whole point). At least 200 samples covering [0, t_end].
#[derive(Clone, Debug)]
pub struct RateTrajectory {
    pub times: Vec<f64>,
    pub rates: Vec<f64>,
    pub kind: RateKind,
}

impl RateTrajectory {
    pub fn new(times: Vec<f64>, rates: Vec<f64>, kind: RateKind) -> Result<Self> {
        if times.len() < 200 {
            return Err(Error::domain(format!(
                "rate trajectory needs at least 200 samples, got {}",
                times.len()
            )));
        }
        if times.len() != rates.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), got: rates.len() });
        }
        if times[0] != 0.0 {
            return Err(Error::domain("rate trajectory must start at t = 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("rate trajectory times must be strictly increasing"));
        }
        Ok(RateTrajectory { times, rates, kind })
    }

    /// Wrap as an environment channel (integrated on the sample grid).
    pub fn to_channel(&self) -> Result<EnvironmentChannel> {
        let points: Vec<(f64, f64)> =
            self.times.iter().copied().zip(self.rates.iter().copied()).collect();
        let rate = RateFunction::table(points)?;
        Ok(match self.kind {
            RateKind::DephasingRate => EnvironmentChannel::ExtraDephasingRate { rate },
            RateKind::DampingRate => EnvironmentChannel::AmplitudeDamping { rate },
        })
    }
}

/// Information trajectories (F_E, F) of a pure initial probe state on the
/// given grid: F under the reference dephasing alone, F_E with the external
/// channel applied on top.
pub fn fisher_trajectories(
    law: &DephasingLaw,
    temp: f64,
    channel: &EnvironmentChannel,
    state0: &[crate::linalg::C64],
    grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if grid.len() < 50 {
        return Err(Error::domain(format!("time grid too coarse: {} points", grid.len())));
    }
    let reference = EnvironmentChannel::None;
    let mut f_env = Vec::with_capacity(grid.len());
    let mut f_ref = Vec::with_capacity(grid.len());
    for &t in grid {
        let (rho, drho) = state_and_derivative_from(state0, 1, law, channel, t, temp, 0.0)?;
        f_env.push(sld_qfi(&rho, &drho)?);
        let (rho, drho) = state_and_derivative_from(state0, 1, law, &reference, t, temp, 0.0)?;
        f_ref.push(sld_qfi(&rho, &drho)?);
    }
    Ok((f_env, f_ref))
}

/// Central-difference derivative of (F_E - F) on the grid; one-sided at the
/// endpoints.
pub fn information_flow(grid: &[f64], f_env: &[f64], f_ref: &[f64]) -> Vec<f64> {
    let m = grid.len();
    let g: Vec<f64> = f_env.iter().zip(f_ref).map(|(a, b)| a - b).collect();
    let mut d = vec![0.0; m];
    for i in 0..m {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == m - 1 {
            (m - 2, m - 1)
        } else {
            (i - 1, i + 1)
        };
        d[i] = (g[hi] - g[lo]) / (grid[hi] - grid[lo]);
    }
    d
}

fn positive_part_integral(grid: &[f64], d: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.len() - 1 {
        let a = d[i].max(0.0);
        let b = d[i + 1].max(0.0);
        acc += 0.5 * (a + b) * (grid[i + 1] - grid[i]);
    }
    acc
}

fn positive_intervals(grid: &[f64], d: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for (i, &v) in d.iter().enumerate() {
        if v > 0.0 {
            if start.is_none() {
                start = Some(grid[i]);
            }
            if i == d.len() - 1 {
                out.push((start.take().unwrap(), grid[i]));
            }
        } else if let Some(s) = start.take() {
            out.push((s, grid[i - 1]));
        }
    }
    out
}

/// Maximal intervals of strictly negative rate on a sample grid.
pub fn negativity_witness(times: &[f64], rates: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    for (i, &r) in rates.iter().enumerate() {
        if r < 0.0 {
            if start.is_none() {
                start = Some(times[i]);
            }
            if i == rates.len() - 1 {
                out.push((start.take().unwrap(), times[i]));
            }
        } else if let Some(s) = start.take() {
            out.push((s, times[i - 1]));
        }
    }
    out
}

/// Result of the state-optimized measure.
#[derive(Clone, Debug, Serialize)]
pub struct NonMarkovReport {
    /// Positive-part integral of D at the optimizing state.
    pub measure: f64,
    /// Bloch angles of the optimizing initial state.
    pub theta: f64,
    pub phi: f64,
    /// Intervals where D > 0 for the optimizing state.
    pub positive_intervals: Vec<(f64, f64)>,
    /// False when the local refinement ran out of budget.
    pub refinement_converged: bool,
    /// Reference metadata.
    pub reference_nu: f64,
    pub reference_temp: f64,
}

/// Eq.-of-motion-free non-Markovianity measure: maximize the positive-part
/// integral of D(t) over initial pure states.
///
/// The search runs over an equatorial ring plus a Fibonacci lattice
/// (136 points total) and then refines around the best point by compass
/// search; ties keep the lowest lattice index. `budget` caps the number of
/// objective evaluations in the refinement stage.
pub fn nonmarkov_measure(
    law: &DephasingLaw,
    temp: f64,
    channel: &EnvironmentChannel,
    grid: &[f64],
    budget: usize,
) -> Result<NonMarkovReport> {
    if law.dalpha_dt(temp)? == 0.0 {
        return Err(Error::domain(
            "reference law carries no temperature dependence (d alpha/dT = 0)",
        ));
    }
    let objective = |theta: f64, phi: f64| -> Result<f64> {
        let state = bloch_state(theta, phi);
        let (f_env, f_ref) = fisher_trajectories(law, temp, channel, &state, grid)?;
        let d = information_flow(grid, &f_env, &f_ref);
        Ok(positive_part_integral(grid, &d))
    };

    // equatorial ring first so that ties prefer it, then a Fibonacci lattice
    let mut lattice: Vec<(f64, f64)> = (0..8)
        .map(|k| (std::f64::consts::FRAC_PI_2, 2.0 * std::f64::consts::PI * k as f64 / 8.0))
        .collect();
    let n_fib = 128;
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    for i in 0..n_fib {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_fib as f64;
        lattice.push((z.acos(), golden_angle * i as f64));
    }

    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &(theta, phi)) in lattice.iter().enumerate() {
        let v = objective(theta, phi)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let (mut theta, mut phi) = lattice[best.0];
    let mut value = best.1;

    // compass refinement
    let mut step = 0.3;
    let mut evals = 0usize;
    while step >= 1e-3 && evals + 4 <= budget {
        let candidates = [
            ((theta + step).clamp(0.0, std::f64::consts::PI), phi),
            ((theta - step).clamp(0.0, std::f64::consts::PI), phi),
            (theta, phi + step),
            (theta, phi - step),
        ];
        let mut improved = false;
        for &(th, ph) in &candidates {
            let v = objective(th, ph)?;
            evals += 1;
            if v > value * (1.0 + 1e-12) + 1e-15 {
                theta = th;
                phi = ph;
                value = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let refinement_converged = step < 1e-3;

    let state = bloch_state(theta, phi);
    let (f_env, f_ref) = fisher_trajectories(law, temp, channel, &state, grid)?;
    let d = information_flow(grid, &f_env, &f_ref);
    Ok(NonMarkovReport {
        measure: value,
        theta,
        phi,
        positive_intervals: positive_intervals(grid, &d),
        refinement_converged,
        reference_nu: law.nu,
        reference_temp: temp,
    })
}

/// Overlap |A ∩ B| / |A ∪ B| of two interval unions, measured in total
/// length. Used to compare positive-D intervals against negative-rate ones.
pub fn interval_jaccard(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let length = |set: &[(f64, f64)]| -> f64 { set.iter().map(|(s, e)| e - s).sum() };
    let mut inter = 0.0;
    for &(s1, e1) in a {
        for &(s2, e2) in b {
            inter += (e1.min(e2) - s1.max(s2)).max(0.0);
        }
    }
    let union = length(a) + length(b) - inter;
    if union <= 0.0 {
        if inter == 0.0 { 1.0 } else { 0.0 }
    } else {
        inter / union
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temperature::TemperatureModel;
    use approx::assert_relative_eq;

    fn linear_law(nu: f64) -> DephasingLaw {
        DephasingLaw::new(nu, TemperatureModel::linear(1.0).unwrap()).unwrap()
    }

    fn grid(points: usize, t_end: f64) -> Vec<f64> {
        (0..points).map(|i| t_end * (i as f64 + 1.0) / points as f64).collect()
    }

    /// rate c outside (a, b), -c inside; keeps the integral nonnegative when
    /// b <= 2a
    fn dip_rates(times: &[f64], c: f64, a: f64, b: f64) -> Vec<f64> {
        times.iter().map(|&t| if t > a && t < b { -c } else { c }).collect()
    }

    fn sample_times(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn no_environment_means_zero_measure() {
        let law = linear_law(1.0);
        let g = grid(200, 1.0);
        let state = bloch_state(std::f64::consts::FRAC_PI_2, 0.0);
        let (f_env, f_ref) =
            fisher_trajectories(&law, 0.5, &EnvironmentChannel::None, &state, &g).unwrap();
        for (a, b) in f_env.iter().zip(&f_ref) {
            assert_eq!(a, b);
        }
        let report =
            nonmarkov_measure(&law, 0.5, &EnvironmentChannel::None, &g, 200).unwrap();
        assert!(report.measure.abs() <= 1e-10);
        assert!(report.positive_intervals.is_empty());
    }

    #[test]
    fn constant_extra_rate_only_destroys_information() {
        let law = linear_law(1.0);
        let g = grid(200, 1.0);
        let state = bloch_state(std::f64::consts::FRAC_PI_2, 0.0);
        let ch = EnvironmentChannel::ExtraDephasingRate { rate: RateFunction::constant(0.5) };
        let (f_env, f_ref) = fisher_trajectories(&law, 0.5, &ch, &state, &g).unwrap();
        for (i, (a, b)) in f_env.iter().zip(&f_ref).enumerate() {
            assert!(a < b, "F_E should stay below F at grid index {i}");
        }
        let d = information_flow(&g, &f_env, &f_ref);
        assert!(d.iter().all(|&x| x < 0.0), "D should be negative on the window");
        let report = nonmarkov_measure(&law, 0.5, &ch, &g, 200).unwrap();
        assert!(report.measure.abs() <= 1e-10, "measure {}", report.measure);
    }

    /// steady rate c_out with a strong dip to -c_in on (a, b); the dip must
    /// not drive the cumulative integral negative
    fn strong_dip(times: &[f64], c_out: f64, c_in: f64, a: f64, b: f64) -> Vec<f64> {
        assert!(c_out * a >= c_in * (b - a));
        times.iter().map(|&t| if t > a && t < b { -c_in } else { c_out }).collect()
    }

    #[test]
    fn negative_rate_window_restores_information() {
        let law = linear_law(1.0);
        let times = sample_times(400, 1.0);
        let rates = strong_dip(&times, 1.0, 4.0, 0.7, 0.85);
        let traj = RateTrajectory::new(times.clone(), rates.clone(), RateKind::DephasingRate)
            .unwrap();
        let ch = traj.to_channel().unwrap();
        let g = grid(400, 1.0);
        let report = nonmarkov_measure(&law, 0.5, &ch, &g, 400).unwrap();
        assert!(report.measure > 1e-4, "measure {} should be positive", report.measure);
        // positive-D intervals line up with the negative-rate window
        let witness = negativity_witness(&times, &rates);
        assert_eq!(witness.len(), 1);
        let jac = interval_jaccard(&report.positive_intervals, &witness);
        assert!(jac >= 0.9, "jaccard {jac}");
        // optimizing state sits on the equator
        assert!((report.theta - std::f64::consts::FRAC_PI_2).abs() < 0.2);
    }

    #[test]
    fn damping_rate_window_also_detected() {
        let law = linear_law(1.0);
        let times = sample_times(400, 1.0);
        let rates = strong_dip(&times, 1.0, 4.0, 0.7, 0.85);
        let traj = RateTrajectory::new(times, rates, RateKind::DampingRate).unwrap();
        let ch = traj.to_channel().unwrap();
        let g = grid(400, 1.0);
        let report = nonmarkov_measure(&law, 0.5, &ch, &g, 400).unwrap();
        assert!(report.measure > 1e-5, "measure {}", report.measure);
        let mid = report
            .positive_intervals
            .iter()
            .any(|&(s, e)| s >= 0.65 && e <= 0.9);
        assert!(mid, "positive interval should sit inside the dip: {:?}", report.positive_intervals);
    }

    #[test]
    fn nested_negative_windows_order_the_measure() {
        let law = linear_law(1.0);
        let g = grid(400, 1.0);
        let mut values = Vec::new();
        for &(a, b) in &[(0.72, 0.84), (0.7, 0.85)] {
            let times = sample_times(400, 1.0);
            let rates = strong_dip(&times, 1.0, 4.0, a, b);
            let ch = RateTrajectory::new(times, rates, RateKind::DephasingRate)
                .unwrap()
                .to_channel()
                .unwrap();
            values.push(nonmarkov_measure(&law, 0.5, &ch, &g, 100).unwrap().measure);
        }
        assert!(values[1] > values[0], "wider dip must score higher: {values:?}");
    }

    #[test]
    fn witness_trivial_cases() {
        let times = sample_times(300, 1.0);
        let nonneg: Vec<f64> = times.iter().map(|&t| t * t).collect();
        assert!(negativity_witness(&times, &nonneg).is_empty());
        let sine: Vec<f64> = times.iter().map(|&t| (2.0 * std::f64::consts::PI * t).sin()).collect();
        let w = negativity_witness(&times, &sine);
        assert_eq!(w.len(), 1);
        assert_relative_eq!(w[0].0, 0.5, epsilon = 0.01);
        assert_relative_eq!(w[0].1, 1.0, epsilon = 0.01);
    }

    #[test]
    fn rejects_bad_inputs() {
        let law = linear_law(1.0);
        // coarse grid
        let g = grid(20, 1.0);
        let state = bloch_state(1.0, 0.0);
        assert!(fisher_trajectories(&law, 0.5, &EnvironmentChannel::None, &state, &g).is_err());
        // flat reference
        let flat = TemperatureModel::custom_table(vec![(0.1, 0.3), (1.0, 0.3)]).unwrap();
        let flat_law = DephasingLaw::new(1.0, flat).unwrap();
        assert!(nonmarkov_measure(&flat_law, 0.5, &EnvironmentChannel::None, &grid(100, 1.0), 50)
            .is_err());
        // short trajectory
        assert!(RateTrajectory::new(vec![0.0, 0.1], vec![1.0, 1.0], RateKind::DephasingRate)
            .is_err());
    }

    #[test]
    fn measure_stable_under_grid_refinement() {
        // a C^1 rate profile; jump-rate channels converge only first-order
        // at the jump cells
        let law = linear_law(1.0);
        let times = sample_times(2001, 1.0);
        let (a, b) = (0.7, 0.85);
        let rates: Vec<f64> = times
            .iter()
            .map(|&t| {
                let s = if t > a && t < b {
                    0.5 * (1.0 - (2.0 * std::f64::consts::PI * (t - a) / (b - a)).cos())
                } else {
                    0.0
                };
                1.0 - 5.0 * s
            })
            .collect();
        let ch = RateTrajectory::new(times, rates, RateKind::DephasingRate)
            .unwrap()
            .to_channel()
            .unwrap();
        let n1 = nonmarkov_measure(&law, 0.5, &ch, &grid(1000, 1.0), 60).unwrap().measure;
        let n2 = nonmarkov_measure(&law, 0.5, &ch, &grid(2000, 1.0), 60).unwrap().measure;
        assert_relative_eq!(n1, n2, max_relative = 1e-3);
    }

    #[test]
    fn zero_nonzero_status_stable_across_references() {
        let g = grid(300, 1.0);
        let times = sample_times(300, 1.0);
        let dip = RateTrajectory::new(
            times.clone(),
            dip_rates(&times, 1.0, 0.4, 0.7),
            RateKind::DephasingRate,
        )
        .unwrap()
        .to_channel()
        .unwrap();
        let steady = EnvironmentChannel::ExtraDephasingRate { rate: RateFunction::constant(0.6) };
        for nu in [0.5, 1.0, 2.0] {
            let law = linear_law(nu);
            let with_dip = nonmarkov_measure(&law, 0.5, &dip, &g, 60).unwrap().measure;
            let without = nonmarkov_measure(&law, 0.5, &steady, &g, 60).unwrap().measure;
            assert!(with_dip > 1e-6, "nu={nu}: dip not detected");
            assert!(without.abs() <= 1e-10, "nu={nu}: false positive {without}");
        }
    }
}
