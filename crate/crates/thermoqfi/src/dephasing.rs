//! Power-law dephasing of a probe qubit in contact with the sample.
//!
//! The dephasing exponent gamma(t, T) follows alpha(T) t^nu, optionally with
//! a quadratic onset below a characteristic time `t_cha`:
//!
//! ```text
//! gamma(t, T) = alpha(T) t_cha^(nu-2) t^2   for t <= t_cha
//!             = alpha(T) t^nu               for t >  t_cha
//! ```
//!
//! Both branches agree at t = t_cha, so gamma is continuous there (the
//! derivative in t is not, which is accepted and documented). nu = 1 is the
//! Markovian case; nu = 2 the Zeno regime.
//!
//! Convention: a single-qubit coherence evolves by the factor e^(-gamma(t)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temperature::TemperatureModel;

/// gamma(t, T) = alpha(T) * (time factor), with optional quadratic onset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DephasingLaw {
    /// Power nu of the time dependence beyond the onset window.
    pub nu: f64,
    /// Temperature model supplying alpha(T) and d alpha/dT.
    pub temp_model: TemperatureModel,
    /// Characteristic quadratic-onset time; `None` selects the single-phase
    /// pure power law.
    pub t_cha: Option<f64>,
}

impl DephasingLaw {
    pub fn new(nu: f64, temp_model: TemperatureModel) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain("dephasing exponent nu must be positive"));
        }
        Ok(DephasingLaw { nu, temp_model, t_cha: None })
    }

    pub fn with_onset(nu: f64, temp_model: TemperatureModel, t_cha: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::domain("dephasing exponent nu must be positive"));
        }
        if !(t_cha >= 0.0) {
            return Err(Error::domain("t_cha must be nonnegative"));
        }
        let t_cha = if t_cha == 0.0 { None } else { Some(t_cha) };
        Ok(DephasingLaw { nu, temp_model, t_cha })
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("time must be nonnegative, got {t}")));
        }
        Ok(())
    }

    /// Time factor f(t) with gamma = alpha(T) f(t).
    pub fn time_factor(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.t_cha {
            Some(tc) if t <= tc => tc.powf(self.nu - 2.0) * t * t,
            _ => t.powf(self.nu),
        })
    }

    /// gamma(t, T).
    pub fn gamma(&self, t: f64, temp: f64) -> Result<f64> {
        Ok(self.temp_model.alpha(temp)? * self.time_factor(t)?)
    }

    /// d gamma / dT at fixed t.
    pub fn dgamma_dt_temp(&self, t: f64, temp: f64) -> Result<f64> {
        Ok(self.temp_model.dalpha_dt(temp)? * self.time_factor(t)?)
    }

    pub fn alpha(&self, temp: f64) -> Result<f64> {
        self.temp_model.alpha(temp)
    }

    pub fn dalpha_dt(&self, temp: f64) -> Result<f64> {
        self.temp_model.dalpha_dt(temp)
    }

    pub fn is_two_phase(&self) -> bool {
        self.t_cha.is_some()
    }

    /// Reference time scale (1/alpha)^(1/nu), used to bracket optimizations.
    pub fn reference_time(&self, temp: f64) -> Result<f64> {
        Ok((1.0 / self.alpha(temp)?).powf(1.0 / self.nu))
    }
}
