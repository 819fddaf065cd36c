//! Probe ensembles: n qubits prepared in a product or maximally entangled
//! state, read out by Ramsey interferometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};

/// Initial preparation of the probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    /// (|0> + |1>)^(x n) / 2^(n/2)
    Product,
    /// (|0...0> + |1...1>) / sqrt(2)
    Ghz,
}

impl StateKind {
    pub fn label(self) -> &'static str {
        match self {
            StateKind::Product => "product",
            StateKind::Ghz => "ghz",
        }
    }
}

/// An ensemble of n probe qubits with level splitting omega0. The Ramsey
/// signal oscillates at `ramsey_phase_rate` (the detuning w in cos(w t)).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeEnsemble {
    pub n: usize,
    pub state_kind: StateKind,
    pub omega0: f64,
    pub ramsey_phase_rate: f64,
}

impl ProbeEnsemble {
    pub fn new(n: usize, state_kind: StateKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("ensemble needs at least one qubit"));
        }
        if n > 8 {
            return Err(Error::domain("ensembles beyond n = 8 are not supported"));
        }
        Ok(ProbeEnsemble { n, state_kind, omega0: 0.0, ramsey_phase_rate: 0.0 })
    }

    pub fn with_phase_rate(mut self, w: f64) -> Self {
        self.ramsey_phase_rate = w;
        self
    }

    pub fn with_omega0(mut self, w0: f64) -> Self {
        self.omega0 = w0;
        self
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    /// State vector of the initial preparation in the computational basis.
    pub fn initial_state(&self) -> Vec<C64> {
        let dim = self.dim();
        let mut psi = vec![ZERO; dim];
        match self.state_kind {
            StateKind::Product => {
                let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
                psi.iter_mut().for_each(|a| *a = amp);
            }
            StateKind::Ghz => {
                let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                psi[0] = amp;
                psi[dim - 1] = amp;
            }
        }
        psi
    }

}

/// Mean of sum_i Z_i / n for an arbitrary n-qubit pure state.
pub fn mean_z_of_state(psi: &[C64], n: usize) -> f64 {
    let mut acc = 0.0;
    for (idx, amp) in psi.iter().enumerate() {
        let pops = idx.count_ones() as f64;
        let z_sum = 2.0 * pops - n as f64;
        acc += amp.norm_sqr() * z_sum;
    }
    acc / n as f64
}

/// Single-qubit pure state with ⟨Z⟩ = z and real amplitudes:
/// sqrt((1-z)/2)|0> + sqrt((1+z)/2)|1>.
pub fn qubit_state_with_mean_z(z: f64) -> Result<Vec<C64>> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::domain("mean z must lie in [-1, 1]"));
    }
    Ok(vec![
        C64::new(((1.0 - z) / 2.0).sqrt(), 0.0),
        C64::new(((1.0 + z) / 2.0).sqrt(), 0.0),
    ])
}

/// Bloch-sphere pure state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
pub fn bloch_state(theta: f64, phi: f64) -> Vec<C64> {
    vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vnorm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn built_in_states_are_normalized_with_zero_mean_z() {
        for kind in [StateKind::Product, StateKind::Ghz] {
            for n in 1..=4 {
                let ens = ProbeEnsemble::new(n, kind).unwrap();
                let psi = ens.initial_state();
                assert_abs_diff_eq!(vnorm(&psi), 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(mean_z_of_state(&psi, n), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn mean_z_state_has_requested_moment() {
        for &z in &[-0.8, 0.0, 0.5, 1.0] {
            let psi = qubit_state_with_mean_z(z).unwrap();
            assert_abs_diff_eq!(mean_z_of_state(&psi, 1), z, epsilon = 1e-14);
        }
        assert!(qubit_state_with_mean_z(1.5).is_err());
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(ProbeEnsemble::new(0, StateKind::Product).is_err());
        assert!(ProbeEnsemble::new(9, StateKind::Ghz).is_err());
    }
}
