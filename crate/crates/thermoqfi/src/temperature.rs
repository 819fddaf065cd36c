//! Temperature dependence of the dephasing strength.
//!
//! The sample temperature enters the dynamics only through a differentiable
//! coefficient alpha(T) > 0. Three families are built in: `linear`
//! (alpha = g T), `power` (alpha = g T^p), and `custom-table` (monotone
//! cubic interpolation of tabulated points). Units use hbar = k_B = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differentiable model of alpha(T).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TemperatureModel {
    /// alpha(T) = g T
    Linear { g: f64 },
    /// alpha(T) = g T^p
    Power { g: f64, p: f64 },
    /// Tabulated (T, alpha) points, interpolated by a monotone cubic.
    CustomTable { points: Vec<(f64, f64)> },
}

impl TemperatureModel {
    pub fn linear(g: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::domain("linear model requires gain g > 0"));
        }
        Ok(TemperatureModel::Linear { g })
    }

    pub fn power(g: f64, p: f64) -> Result<Self> {
        if !(g > 0.0) || !(p > 0.0) {
            return Err(Error::domain("power model requires g > 0 and p > 0"));
        }
        Ok(TemperatureModel::Power { g, p })
    }

    /// Build a tabulated model. Requires at least two points, strictly
    /// increasing in T, with alpha > 0 everywhere.
    pub fn custom_table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::domain("table needs at least two points"));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain("table temperatures must be strictly increasing"));
            }
        }
        if points.iter().any(|&(t, a)| !(t > 0.0) || !(a > 0.0)) {
            return Err(Error::domain("table requires T > 0 and alpha > 0"));
        }
        Ok(TemperatureModel::CustomTable { points })
    }

    fn check_t(&self, temp: f64) -> Result<()> {
        if !(temp > 0.0) || !temp.is_finite() {
            return Err(Error::domain(format!("temperature must be positive, got {temp}")));
        }
        if let TemperatureModel::CustomTable { points } = self {
            let lo = points.first().unwrap().0;
            let hi = points.last().unwrap().0;
            if temp < lo || temp > hi {
                return Err(Error::domain(format!(
                    "temperature {temp} outside table range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// alpha(T).
    pub fn alpha(&self, temp: f64) -> Result<f64> {
        self.check_t(temp)?;
        Ok(match self {
            TemperatureModel::Linear { g } => g * temp,
            TemperatureModel::Power { g, p } => g * temp.powf(*p),
            TemperatureModel::CustomTable { points } => monotone_cubic(points, temp),
        })
    }

    /// d alpha / dT. Analytic for the closed-form families; central finite
    /// difference on the interpolant (step 1e-6 T) for the tabulated one.
    pub fn dalpha_dt(&self, temp: f64) -> Result<f64> {
        self.check_t(temp)?;
        Ok(match self {
            TemperatureModel::Linear { g } => *g,
            TemperatureModel::Power { g, p } => g * p * temp.powf(p - 1.0),
            TemperatureModel::CustomTable { points } => {
                let lo = points.first().unwrap().0;
                let hi = points.last().unwrap().0;
                let h = (1e-6 * temp).min(0.5 * (hi - lo));
                let tp = (temp + h).min(hi);
                let tm = (temp - h).max(lo);
                (monotone_cubic(points, tp) - monotone_cubic(points, tm)) / (tp - tm)
            }
        })
    }
}

/// Fritsch-Carlson monotone cubic interpolation.
fn monotone_cubic(points: &[(f64, f64)], x: f64) -> f64 {
    let n = points.len();
    let mut secants = Vec::with_capacity(n - 1);
    for w in points.windows(2) {
        secants.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
    }
    let mut slopes = vec![0.0; n];
    slopes[0] = secants[0];
    slopes[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        if secants[i - 1] * secants[i] <= 0.0 {
            slopes[i] = 0.0;
        } else {
            slopes[i] = 0.5 * (secants[i - 1] + secants[i]);
        }
    }
    // Limit slopes so the interpolant cannot overshoot.
    for i in 0..n - 1 {
        if secants[i] == 0.0 {
            slopes[i] = 0.0;
            slopes[i + 1] = 0.0;
            continue;
        }
        let a = slopes[i] / secants[i];
        let b = slopes[i + 1] / secants[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            slopes[i] = tau * a * secants[i];
            slopes[i + 1] = tau * b * secants[i];
        }
    }
    // Locate the segment and evaluate the Hermite cubic.
    let k = match points.binary_search_by(|&(t, _)| t.total_cmp(&x)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    };
    let (x0, y0) = points[k];
    let (x1, y1) = points[k + 1];
    let h = x1 - x0;
    let t = (x - x0) / h;
    // y0 + (y1-y0) h01 + h (m0 h10 + m1 h11); exact for constant data
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    y0 + (y1 - y0) * h01 + h * (slopes[k] * h10 + slopes[k + 1] * h11)
}
