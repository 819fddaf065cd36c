//! External noise channels acting on the probes in addition to the sample.
//!
//! Two mechanisms are supported: extra dephasing with exponent
//! kappa(t) = kappa t^nu' and amplitude damping with a decay rate eta(t),
//! survival lambda(t) = exp(-2 ∫ eta ds). Rates can be closed-form or
//! tabulated on a time grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonnegative-time rate function, either a closed form or a table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum RateFunction {
    /// Constant rate.
    Constant { value: f64 },
    /// Tabulated (t, rate) samples with strictly increasing t starting at 0.
    /// Linear interpolation between samples; constant extrapolation beyond.
    Table { points: Vec<(f64, f64)> },
}

impl RateFunction {
    pub fn constant(value: f64) -> Self {
        RateFunction::Constant { value }
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("rate table needs at least two points"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain("rate table times must be strictly increasing"));
            }
        }
        if points[0].0 < 0.0 {
            return Err(Error::domain("rate table times must be nonnegative"));
        }
        Ok(RateFunction::Table { points })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant { value } => *value,
            RateFunction::Table { points } => {
                if t <= points[0].0 {
                    return points[0].1;
                }
                if t >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let k = points.partition_point(|&(x, _)| x <= t) - 1;
                let (x0, y0) = points[k];
                let (x1, y1) = points[k + 1];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    /// ∫_0^t rate ds, by the trapezoid rule on the table (exact for the
    /// piecewise-linear interpolant) or exactly for the constant form.
    pub fn integral(&self, t: f64) -> f64 {
        match self {
            RateFunction::Constant { value } => value * t,
            RateFunction::Table { points } => {
                let mut acc = 0.0;
                // leading segment from 0 to the first sample (constant rate)
                let mut prev_t = 0.0;
                let mut prev_v = points[0].1;
                for &(x, y) in points {
                    if x >= t {
                        let v_t = self.value(t);
                        acc += 0.5 * (prev_v + v_t) * (t - prev_t);
                        return acc;
                    }
                    acc += 0.5 * (prev_v + y) * (x - prev_t);
                    prev_t = x;
                    prev_v = y;
                }
                acc + prev_v * (t - prev_t)
            }
        }
    }
}

/// Extra environments acting on each probe independently.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvironmentChannel {
    /// No external environment.
    None,
    /// Additional dephasing kappa(t) = kappa t^nu'.
    ExtraDephasing { kappa: f64, nu_prime: f64 },
    /// Additional dephasing with a tabulated or constant decoherence rate;
    /// kappa(t) = ∫_0^t rate ds.
    ExtraDephasingRate { rate: RateFunction },
    /// Amplitude damping with decay rate eta(t); survival
    /// lambda(t) = exp(-2 ∫_0^t eta ds).
    AmplitudeDamping { rate: RateFunction },
}

impl EnvironmentChannel {
    pub fn extra_dephasing(kappa: f64, nu_prime: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(nu_prime > 0.0) {
            return Err(Error::domain("extra dephasing requires kappa > 0 and nu' > 0"));
        }
        Ok(EnvironmentChannel::ExtraDephasing { kappa, nu_prime })
    }

    /// Dephasing exponent kappa(t) contributed by the channel.
    pub fn kappa(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain("time must be nonnegative"));
        }
        Ok(match self {
            EnvironmentChannel::None | EnvironmentChannel::AmplitudeDamping { .. } => 0.0,
            EnvironmentChannel::ExtraDephasing { kappa, nu_prime } => {
                if t == 0.0 {
                    0.0
                } else {
                    kappa * t.powf(*nu_prime)
                }
            }
            EnvironmentChannel::ExtraDephasingRate { rate } => rate.integral(t),
        })
    }

    /// Amplitude-damping survival probability lambda(t) in [0, 1].
    pub fn lambda(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::domain("time must be nonnegative"));
        }
        match self {
            EnvironmentChannel::AmplitudeDamping { rate } => {
                let l = (-2.0 * rate.integral(t)).exp();
                if l > 1.0 + 1e-12 {
                    return Err(Error::domain(format!(
                        "damping rate integral went negative at t={t}: lambda={l}"
                    )));
                }
                Ok(l.min(1.0))
            }
            _ => Ok(1.0),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, EnvironmentChannel::None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn kappa_power_law() {
        let ch = EnvironmentChannel::extra_dephasing(0.3, 2.0).unwrap();
        assert_eq!(ch.kappa(0.0).unwrap(), 0.0);
        assert_relative_eq!(ch.kappa(2.0).unwrap(), 1.2);
        assert_eq!(ch.lambda(5.0).unwrap(), 1.0);
    }

    #[test]
    fn lambda_of_constant_rate() {
        let ch = EnvironmentChannel::AmplitudeDamping { rate: RateFunction::constant(0.25) };
        assert_eq!(ch.lambda(0.0).unwrap(), 1.0);
        assert_relative_eq!(ch.lambda(2.0).unwrap(), (-1.0f64).exp());
    }

    #[test]
    fn table_integral_matches_closed_form() {
        // rate(t) = t on [0, 1] sampled densely: integral = t^2/2
        let pts: Vec<(f64, f64)> = (0..=400).map(|i| (i as f64 / 400.0, i as f64 / 400.0)).collect();
        let rate = RateFunction::table(pts).unwrap();
        for &t in &[0.1, 0.33, 0.5, 0.99] {
            assert_abs_diff_eq!(rate.integral(t), 0.5 * t * t, epsilon = 1e-5);
        }
    }

    #[test]
    fn negative_rate_grows_lambda_but_never_above_one() {
        // rate negative from the start would push lambda above 1 -> error
        let bad = EnvironmentChannel::AmplitudeDamping { rate: RateFunction::constant(-0.1) };
        assert!(bad.lambda(1.0).is_err());
        // dip that keeps the integral nonnegative is fine
        let pts = vec![(0.0, 1.0), (0.4, 1.0), (0.4001, -1.0), (0.7, -1.0), (0.7001, 1.0), (1.0, 1.0)];
        let ch = EnvironmentChannel::AmplitudeDamping { rate: RateFunction::table(pts).unwrap() };
        let l_mid = ch.lambda(0.55).unwrap();
        let l_a = ch.lambda(0.4).unwrap();
        assert!(l_mid > l_a, "survival should recover inside the negative-rate window");
        assert!(ch.lambda(0.7).unwrap() <= 1.0);
    }

    #[test]
    fn table_rejects_bad_grids() {
        assert!(RateFunction::table(vec![(0.0, 1.0)]).is_err());
        assert!(RateFunction::table(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }
}
