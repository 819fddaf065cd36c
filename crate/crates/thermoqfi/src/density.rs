//! Density matrices of 1..n qubits and their exact evolution under
//! independent dephasing, optional extra channels, and free precession.
//!
//! Independent per-qubit dephasing multiplies the coherence between basis
//! strings s and s' by e^(-(gamma + kappa) * d), where d is the Hamming
//! distance between the strings. That single rule reproduces both the
//! single-qubit coherence factor e^(-gamma-kappa) and the n-fold decay of
//! the extreme GHZ coherence. Amplitude damping is applied per qubit as the
//! Kraus pair E0 = diag(1, sqrt(lambda)), E1 = sqrt(1-lambda) |0><1|.

use num_complex::Complex64;

use crate::channel::EnvironmentChannel;
use crate::dephasing::DephasingLaw;
use crate::ensemble::ProbeEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Validated n-qubit density matrix: Hermitian, unit trace, positive
/// semidefinite, dimension a power of two.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    mat: CMatrix,
    qubits: usize,
}

impl DensityMatrix {
    /// Validate and wrap a raw matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let dim = mat.nrows();
        if dim == 0 || mat.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::InvalidDensityMatrix(format!(
                "dimension must be a power of two, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm = mat.hermiticity_defect();
        if herm > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!(
                "hermiticity defect {herm:.3e} exceeds 1e-12"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} is not 1")));
        }
        let (eigs, _) = mat.hermitian_eigen()?;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "minimum eigenvalue {min_eig:.3e} below -1e-10"
            )));
        }
        Ok(DensityMatrix { mat, qubits: dim.trailing_zeros() as usize })
    }

    /// |psi><psi| of a normalized state vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm = crate::linalg::vnorm(psi);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDensityMatrix(format!("state norm {norm} is not 1")));
        }
        DensityMatrix::new(CMatrix::outer(psi, psi))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.mat.hermitian_eigen()?.0)
    }
}

/// Evolve `rho0` for time t: free precession at the ensemble's Ramsey phase
/// rate, sample dephasing per `law`, plus the external `channel`.
pub fn evolve(
    rho0: &DensityMatrix,
    ensemble: &ProbeEnsemble,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    t: f64,
    temp: f64,
) -> Result<DensityMatrix> {
    if rho0.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: ensemble.dim(), got: rho0.dim() });
    }
    let gamma = law.gamma(t, temp)?;
    let kappa = channel.kappa(t)?;
    let lambda = channel.lambda(t)?;
    let w = ensemble.ramsey_phase_rate;
    let dim = rho0.dim();

    let mut out = rho0.matrix().clone();
    // Dephasing + precession act entrywise.
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let hamming = (i ^ j).count_ones() as f64;
            let decay = (-(gamma + kappa) * hamming).exp();
            let pop_diff = i.count_ones() as f64 - j.count_ones() as f64;
            let phase = Complex64::from_polar(1.0, -w * t * pop_diff);
            out.set(i, j, out.get(i, j) * decay * phase);
        }
    }
    // Amplitude damping, one qubit at a time.
    if lambda < 1.0 {
        for q in 0..ensemble.n {
            out = apply_damping(&out, q, lambda);
        }
    }
    DensityMatrix::new(out)
}

/// Analytic temperature derivative of [`evolve`] at fixed t.
///
/// Only the dephasing factor depends on T, so each coherence picks up an
/// extra -dgamma/dT * hamming weight before the (T-independent, linear)
/// damping map is applied.
pub fn evolve_temperature_derivative(
    rho0: &DensityMatrix,
    ensemble: &ProbeEnsemble,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    t: f64,
    temp: f64,
) -> Result<CMatrix> {
    if rho0.dim() != ensemble.dim() {
        return Err(Error::DimensionMismatch { expected: ensemble.dim(), got: rho0.dim() });
    }
    let gamma = law.gamma(t, temp)?;
    let dgamma = law.dgamma_dt_temp(t, temp)?;
    let kappa = channel.kappa(t)?;
    let lambda = channel.lambda(t)?;
    let w = ensemble.ramsey_phase_rate;
    let dim = rho0.dim();

    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let hamming = (i ^ j).count_ones() as f64;
            let decay = (-(gamma + kappa) * hamming).exp();
            let pop_diff = i.count_ones() as f64 - j.count_ones() as f64;
            let phase = Complex64::from_polar(1.0, -w * t * pop_diff);
            out.set(i, j, rho0.matrix().get(i, j) * decay * phase * (-dgamma * hamming));
        }
    }
    if lambda < 1.0 {
        for q in 0..ensemble.n {
            out = apply_damping(&out, q, lambda);
        }
    }
    Ok(out)
}

/// Kraus map of single-qubit amplitude damping on qubit `q`.
fn apply_damping(rho: &CMatrix, q: usize, lambda: f64) -> CMatrix {
    let dim = rho.nrows();
    let bit = 1usize << q;
    let sqrt_l = lambda.sqrt();
    let mut out = CMatrix::zeros(dim, dim);
    // E0 rho E0^dag: entry (i, j) scaled by sqrt(lambda)^(bit_q(i) + bit_q(j))
    for i in 0..dim {
        let fi = if i & bit != 0 { sqrt_l } else { 1.0 };
        for j in 0..dim {
            let fj = if j & bit != 0 { sqrt_l } else { 1.0 };
            out.set(i, j, rho.get(i, j) * (fi * fj));
        }
    }
    // E1 rho E1^dag: population flows from bit set to bit clear
    for i in 0..dim {
        if i & bit != 0 {
            continue;
        }
        for j in 0..dim {
            if j & bit != 0 {
                continue;
            }
            let v = out.get(i, j) + (1.0 - lambda) * rho.get(i | bit, j | bit);
            out.set(i, j, v);
        }
    }
    out
}

/// Coherence factor of the extreme GHZ matrix element after time t:
/// e^(-n (gamma + kappa)) lambda^(n/2).
pub fn ghz_signal_coherence(
    n: usize,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    t: f64,
    temp: f64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let gamma = law.gamma(t, temp)?;
    let kappa = channel.kappa(t)?;
    let lambda = channel.lambda(t)?;
    Ok((-(gamma + kappa) * n as f64).exp() * lambda.powf(n as f64 / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RateFunction;
    use crate::ensemble::StateKind;
    use crate::linalg::{ONE, ZERO};
    use crate::temperature::TemperatureModel;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn linear_law(nu: f64) -> DephasingLaw {
        DephasingLaw::new(nu, TemperatureModel::linear(1.0).unwrap()).unwrap()
    }

    fn plus_state() -> DensityMatrix {
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        DensityMatrix::from_pure(&ens.initial_state()).unwrap()
    }

    #[test]
    fn validation_catches_bad_matrices() {
        // non-unit trace
        let m = CMatrix::identity(2);
        assert!(DensityMatrix::new(m).is_err());
        // negative eigenvalue
        let m = CMatrix::from_rows(&[
            &[C64::new(1.2, 0.0), ZERO],
            &[ZERO, C64::new(-0.2, 0.0)],
        ]);
        assert!(DensityMatrix::new(m).is_err());
        // dimension 3 is not a power of two
        let mut m = CMatrix::zeros(3, 3);
        for i in 0..3 {
            m.set(i, i, C64::new(1.0 / 3.0, 0.0));
        }
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn full_dephasing_kills_coherence() {
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        let law = linear_law(1.0);
        // gamma = T * t with t huge
        let rho = evolve(&plus_state(), &ens, &law, &EnvironmentChannel::None, 1e6, 1.0).unwrap();
        assert_abs_diff_eq!(rho.matrix().get(0, 1).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.matrix().get(0, 0).re, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn markovian_coherence_factor() {
        // nu=1, alpha=T, T=0.5, t=1: off-diagonal = 0.5 e^{-0.5}
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        let law = linear_law(1.0);
        let rho = evolve(&plus_state(), &ens, &law, &EnvironmentChannel::None, 1.0, 0.5).unwrap();
        assert_relative_eq!(
            rho.matrix().get(0, 1).re,
            0.5 * (-0.5f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn markovian_evolution_composes() {
        // evolve(t1+t2) == evolve(t2) o evolve(t1) for nu=1, constant damping
        let ens = ProbeEnsemble::new(2, StateKind::Ghz).unwrap().with_phase_rate(0.7);
        let law = linear_law(1.0);
        let ch = EnvironmentChannel::AmplitudeDamping { rate: RateFunction::constant(0.2) };
        let rho0 = DensityMatrix::from_pure(&ens.initial_state()).unwrap();
        let one_shot = evolve(&rho0, &ens, &law, &ch, 1.0, 0.4).unwrap();
        let mut stepped = rho0;
        for _ in 0..10 {
            stepped = evolve(&stepped, &ens, &law, &ch, 0.1, 0.4).unwrap();
        }
        let dev = one_shot.matrix().sub(stepped.matrix()).max_abs_entry();
        assert!(dev <= 1e-10, "markovian composability broken: {dev:.3e}");
    }

    #[test]
    fn non_markovian_evolution_does_not_compose() {
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        let law = linear_law(2.0);
        let one_shot =
            evolve(&plus_state(), &ens, &law, &EnvironmentChannel::None, 1.0, 0.4).unwrap();
        let half = evolve(&plus_state(), &ens, &law, &EnvironmentChannel::None, 0.5, 0.4).unwrap();
        let stepped = evolve(&half, &ens, &law, &EnvironmentChannel::None, 0.5, 0.4).unwrap();
        let dev = one_shot.matrix().sub(stepped.matrix()).max_abs_entry();
        assert!(dev > 1e-6, "nu=2 should be time-inhomogeneous, got dev {dev:.3e}");
    }

    #[test]
    fn damping_moves_population_like_the_kraus_pair() {
        // |1><1| under lambda = 0.25 -> diag(0.75, 0.25); oracle: explicit
        // Kraus matrices multiplied out.
        let ens = ProbeEnsemble::new(1, StateKind::Product).unwrap();
        let law = linear_law(1.0);
        // lambda(t) = e^{-2 eta t} = 0.25 at t = 1
        let eta = 0.25f64.ln() / -2.0;
        let ch = EnvironmentChannel::AmplitudeDamping { rate: RateFunction::constant(eta) };
        let one = DensityMatrix::new(CMatrix::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]])).unwrap();
        let rho = evolve(&one, &ens, &law, &ch, 1.0, 0.5).unwrap();
        assert_relative_eq!(rho.matrix().get(0, 0).re, 0.75, max_relative = 1e-12);
        assert_relative_eq!(rho.matrix().get(1, 1).re, 0.25, max_relative = 1e-12);

        let lam: f64 = 0.25;
        let e0 = CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, C64::new(lam.sqrt(), 0.0)]]);
        let e1 = CMatrix::from_rows(&[&[ZERO, C64::new((1.0 - lam).sqrt(), 0.0)], &[ZERO, ZERO]]);
        let oracle = e0
            .mul(one.matrix())
            .mul(&e0.adjoint())
            .add(&e1.mul(one.matrix()).mul(&e1.adjoint()));
        assert!(rho.matrix().sub(&oracle).max_abs_entry() < 1e-13);
    }

    #[test]
    fn ghz_coherence_exponent_additivity() {
        // n=3, gamma=0.5: e^{-1.5}; oracle via 8x8 matrix evolution
        let law = linear_law(1.0);
        let ch = EnvironmentChannel::None;
        let c = ghz_signal_coherence(3, &law, &ch, 1.0, 0.5).unwrap();
        assert_relative_eq!(c, (-1.5f64).exp(), max_relative = 1e-12);

        let ens = ProbeEnsemble::new(3, StateKind::Ghz).unwrap();
        let rho0 = DensityMatrix::from_pure(&ens.initial_state()).unwrap();
        let rho = evolve(&rho0, &ens, &law, &ch, 1.0, 0.5).unwrap();
        let ratio = rho.matrix().get(0, 7).norm() / rho0.matrix().get(0, 7).norm();
        assert_relative_eq!(c, ratio, max_relative = 1e-12);
    }

    #[test]
    fn ghz_coherence_with_both_channels() {
        // n=2, gamma=0.25, kappa=0.25: e^{-1}
        let law = linear_law(1.0);
        let ch = EnvironmentChannel::extra_dephasing(0.25, 1.0).unwrap();
        let c = ghz_signal_coherence(2, &law, &ch, 1.0, 0.25).unwrap();
        assert_relative_eq!(c, (-1.0f64).exp(), max_relative = 1e-12);

        let ens = ProbeEnsemble::new(2, StateKind::Ghz).unwrap();
        let rho0 = DensityMatrix::from_pure(&ens.initial_state()).unwrap();
        let rho = evolve(&rho0, &ens, &law, &ch, 1.0, 0.25).unwrap();
        let ratio = rho.matrix().get(0, 3).norm() / rho0.matrix().get(0, 3).norm();
        assert_relative_eq!(c, ratio, max_relative = 1e-12);
    }

    #[test]
    fn ghz_coherence_trivial_cases() {
        let law = linear_law(1.0);
        assert_eq!(ghz_signal_coherence(1, &law, &EnvironmentChannel::None, 0.0, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn evolve_checks_dimensions() {
        let ens = ProbeEnsemble::new(2, StateKind::Product).unwrap();
        let law = linear_law(1.0);
        let rho = plus_state();
        assert!(evolve(&rho, &ens, &law, &EnvironmentChannel::None, 1.0, 0.5).is_err());
    }
}
