//! Browser demo bindings: precision curves, information-vs-time curves with
//! an external channel, and the non-Markovianity trajectory of a rate dip.
//!
//! Curves come back as flat Float64Arrays (column-major records) so the
//! page can plot them without any glue. All functions are plain Rust and
//! compile natively too, which is how the tests drive them.

use wasm_bindgen::prelude::*;

use thermoqfi::dephasing::DephasingLaw;
use thermoqfi::ensemble::{bloch_state, StateKind};
use thermoqfi::nonmarkov::{fisher_trajectories, information_flow, RateKind, RateTrajectory};
use thermoqfi::qfi::{probe_state_and_derivative, sld_qfi};
use thermoqfi::ramsey::{classical_fisher, delta_t_closed_form, ClosedFormKind, RamseySetup};
use thermoqfi::regime::{optimize_time, PhaseKind, RegimeSpec};
use thermoqfi::temperature::TemperatureModel;
use thermoqfi::{EnvironmentChannel, ProbeEnsemble};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn build_law(nu: f64, gain: f64, t_cha: f64) -> Result<DephasingLaw, String> {
    let model = TemperatureModel::linear(gain).map_err(err)?;
    if t_cha > 0.0 {
        DephasingLaw::with_onset(nu, model, t_cha).map_err(err)
    } else {
        DephasingLaw::new(nu, model).map_err(err)
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let ratio = hi / lo;
    (0..points)
        .map(|i| lo * ratio.powf(i as f64 / (points - 1) as f64))
        .collect()
}

fn closed_kind(ghz: bool, suboptimal: bool) -> ClosedFormKind {
    match (ghz, suboptimal) {
        (false, false) => ClosedFormKind::ProductOpt,
        (true, false) => ClosedFormKind::GhzOpt,
        (false, true) => ClosedFormKind::ProductSub,
        (true, true) => ClosedFormKind::GhzSub,
    }
}

/// delta T over a log-spaced time grid; returns records [t, delta_t] * points.
#[wasm_bindgen]
pub fn precision_curve(
    nu: f64,
    gain: f64,
    temperature: f64,
    n: usize,
    tau: f64,
    t_cha: f64,
    ghz: bool,
    suboptimal: bool,
    t_lo: f64,
    t_hi: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(t_lo > 0.0) || !(t_hi > t_lo) || points < 2 {
        return Err("need 0 < t_lo < t_hi and at least 2 points".to_string());
    }
    let law = build_law(nu, gain, t_cha)?;
    let kind = closed_kind(ghz, suboptimal);
    let mut out = Vec::with_capacity(2 * points);
    for t in log_grid(t_lo, t_hi, points) {
        let dt = delta_t_closed_form(kind, n, tau, &law, t, temperature).map_err(err)?;
        out.push(t);
        out.push(dt);
    }
    Ok(out)
}

/// Optimal interrogation time for the same configuration:
/// [t_star, delta_t_star, boundary_code] with boundary_code 0 = interior,
/// 1 = pinned to the onset time, 2 = short-time limit.
#[wasm_bindgen]
pub fn optimal_point(
    nu: f64,
    gain: f64,
    temperature: f64,
    n: usize,
    tau: f64,
    t_cha: f64,
    ghz: bool,
    suboptimal: bool,
) -> Result<Vec<f64>, String> {
    let law = build_law(nu, gain, t_cha)?;
    let spec = RegimeSpec {
        n,
        tau,
        law,
        temp: temperature,
        state_kind: if ghz { StateKind::Ghz } else { StateKind::Product },
        phase_kind: if suboptimal { PhaseKind::Suboptimal } else { PhaseKind::Optimal },
    };
    let report = optimize_time(&spec).map_err(err)?;
    let code = match report.boundary_flag {
        thermoqfi::regime::BoundaryFlag::Interior => 0.0,
        thermoqfi::regime::BoundaryFlag::AtOnset => 1.0,
        thermoqfi::regime::BoundaryFlag::TimeToZero => 2.0,
    };
    Ok(vec![report.t_star, report.delta_t_star, code])
}

/// Per-shot information against time: records
/// [t, readout_fi_clean, readout_fi_noisy, qfi_clean] * points.
/// The noisy column adds extra dephasing kappa t^nu_prime.
#[wasm_bindgen]
pub fn information_curves(
    nu: f64,
    gain: f64,
    temperature: f64,
    n: usize,
    ghz: bool,
    kappa: f64,
    nu_prime: f64,
    t_lo: f64,
    t_hi: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(t_lo > 0.0) || !(t_hi > t_lo) || points < 2 {
        return Err("need 0 < t_lo < t_hi and at least 2 points".to_string());
    }
    let law = build_law(nu, gain, 0.0)?;
    let kind = if ghz { StateKind::Ghz } else { StateKind::Product };
    let noisy = if kappa > 0.0 {
        EnvironmentChannel::extra_dephasing(kappa, nu_prime).map_err(err)?
    } else {
        EnvironmentChannel::None
    };
    let clean = EnvironmentChannel::None;
    let mut out = Vec::with_capacity(4 * points);
    for t in log_grid(t_lo, t_hi, points) {
        let ens = ProbeEnsemble::new(n, kind).map_err(err)?;
        let setup =
            RamseySetup::new(ens.clone(), std::f64::consts::PI, t, t.max(1.0)).map_err(err)?;
        let fi_clean =
            classical_fisher(&setup, &law, &clean, temperature).map_err(err)?.fisher_per_shot;
        let fi_noisy =
            classical_fisher(&setup, &law, &noisy, temperature).map_err(err)?.fisher_per_shot;
        let (rho, drho) =
            probe_state_and_derivative(&ens, &law, &clean, t, temperature).map_err(err)?;
        let qfi = sld_qfi(&rho, &drho).map_err(err)?;
        out.extend_from_slice(&[t, fi_clean, fi_noisy, qfi]);
    }
    Ok(out)
}

fn dip_channel(
    rate_out: f64,
    rate_in: f64,
    window_a: f64,
    window_b: f64,
    t_end: f64,
) -> Result<EnvironmentChannel, String> {
    if !(0.0 < window_a && window_a < window_b && window_b <= t_end) {
        return Err("need 0 < a < b <= t_end".to_string());
    }
    if rate_out * window_a < rate_in * (window_b - window_a) {
        return Err("dip too deep: the integrated rate would go negative".to_string());
    }
    let samples = 2001usize;
    let times: Vec<f64> =
        (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let rates: Vec<f64> = times
        .iter()
        .map(|&t| if t > window_a && t < window_b { -rate_in } else { rate_out })
        .collect();
    let traj = RateTrajectory::new(times, rates, RateKind::DephasingRate).map_err(err)?;
    traj.to_channel().map_err(err)
}

/// Information trajectories of an equatorial probe under a decoherence-rate
/// dip: records [t, f_reference, f_environment, d] * points, where d is the
/// derivative of (f_environment - f_reference).
#[wasm_bindgen]
pub fn nonmarkov_trajectory(
    nu: f64,
    gain: f64,
    temperature: f64,
    rate_out: f64,
    rate_in: f64,
    window_a: f64,
    window_b: f64,
    t_end: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if points < 50 {
        return Err("need at least 50 points".to_string());
    }
    let law = build_law(nu, gain, 0.0)?;
    let channel = dip_channel(rate_out, rate_in, window_a, window_b, t_end)?;
    let grid: Vec<f64> =
        (0..points).map(|i| t_end * (i as f64 + 1.0) / points as f64).collect();
    let state = bloch_state(std::f64::consts::FRAC_PI_2, 0.0);
    let (f_env, f_ref) =
        fisher_trajectories(&law, temperature, &channel, &state, &grid).map_err(err)?;
    let d = information_flow(&grid, &f_env, &f_ref);
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        out.extend_from_slice(&[grid[i], f_ref[i], f_env[i], d[i]]);
    }
    Ok(out)
}

/// Positive-part integral of d for the equatorial probe (the demo's
/// non-Markovianity readout; the CLI runs the full state search).
#[wasm_bindgen]
pub fn nonmarkov_value(
    nu: f64,
    gain: f64,
    temperature: f64,
    rate_out: f64,
    rate_in: f64,
    window_a: f64,
    window_b: f64,
    t_end: f64,
    points: usize,
) -> Result<f64, String> {
    let data = nonmarkov_trajectory(
        nu, gain, temperature, rate_out, rate_in, window_a, window_b, t_end, points,
    )?;
    let mut acc = 0.0;
    for w in data.chunks(4).collect::<Vec<_>>().windows(2) {
        let (t0, d0) = (w[0][0], w[0][3].max(0.0));
        let (t1, d1) = (w[1][0], w[1][3].max(0.0));
        acc += 0.5 * (d0 + d1) * (t1 - t0);
    }
    Ok(acc)
}
