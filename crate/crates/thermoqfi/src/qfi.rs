//! Quantum Fisher information by three independent routes.
//!
//! * [`pure_qfi`] — the pure-state variance formula
//!   4 (<dpsi|dpsi> - |<psi|dpsi>|^2).
//! * [`sld_qfi`] — the spectral formula built on the symmetric logarithmic
//!   derivative: with rho = sum_i l_i |i><i|,
//!   F = 2 sum_{l_i + l_j > eps} |<i|drho|j>|^2 / (l_i + l_j).
//! * [`variational_qfi`] — minimization of the enlarged-space information
//!   over a symmetric single-ancilla Hermitian ansatz applied to an explicit
//!   purification of the dephased probe state.
//!
//! The three routes agree on every family where the ansatz is complete;
//! where it is not (entangled preparations at finite dephasing), the
//! variational value stays above the SLD value and [`optimality_residual`]
//! reports the defect of the stationarity condition.

use serde::{Deserialize, Serialize};

use crate::channel::EnvironmentChannel;
use crate::density::{evolve, evolve_temperature_derivative, DensityMatrix};
use crate::dephasing::DephasingLaw;
use crate::ensemble::ProbeEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{vaxpy, vdot, vnorm, CMatrix, C64, ZERO};

const EIGENVALUE_CUTOFF: f64 = 1e-12;
/// Relative step for 5-point temperature derivatives.
const FD_REL_STEP: f64 = 1e-5;

/// QFI of a pure state from the state and its temperature derivative.
pub fn pure_qfi(psi: &[C64], dpsi: &[C64]) -> Result<f64> {
    let norm = vnorm(psi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("pure_qfi needs a unit vector, norm {norm}")));
    }
    if psi.len() != dpsi.len() {
        return Err(Error::DimensionMismatch { expected: psi.len(), got: dpsi.len() });
    }
    let dd = vdot(dpsi, dpsi).re;
    let overlap = vdot(psi, dpsi);
    Ok(4.0 * (dd - overlap.norm_sqr()))
}

/// [`pure_qfi`] with the derivative taken by a 5-point central difference.
pub fn pure_qfi_fd(family: impl Fn(f64) -> Result<Vec<C64>>, temp: f64) -> Result<f64> {
    let h = FD_REL_STEP * temp;
    let psi = family(temp)?;
    let m2 = family(temp - 2.0 * h)?;
    let m1 = family(temp - h)?;
    let p1 = family(temp + h)?;
    let p2 = family(temp + 2.0 * h)?;
    let dpsi: Vec<C64> = (0..psi.len())
        .map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h))
        .collect();
    pure_qfi(&psi, &dpsi)
}

/// QFI of a mixed state from the spectral SLD formula.
///
/// Eigenvalue pairs with l_i + l_j <= 1e-12 are skipped, which is exact
/// whenever the derivative has no support there.
pub fn sld_qfi(rho: &DensityMatrix, drho: &CMatrix) -> Result<f64> {
    let dim = rho.dim();
    if drho.nrows() != dim || drho.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: drho.nrows() });
    }
    let (eigs, v) = rho.matrix().hermitian_eigen()?;
    let m = v.adjoint().mul(drho).mul(&v);
    let mut fi = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let denom = eigs[i] + eigs[j];
            if denom <= EIGENVALUE_CUTOFF {
                continue;
            }
            fi += m.get(i, j).norm_sqr() / denom;
        }
    }
    Ok(2.0 * fi)
}

/// [`sld_qfi`] with the derivative taken by a 5-point central difference on
/// the density-matrix family.
pub fn sld_qfi_fd(family: impl Fn(f64) -> Result<DensityMatrix>, temp: f64) -> Result<f64> {
    let h = FD_REL_STEP * temp;
    let rho = family(temp)?;
    let m2 = family(temp - 2.0 * h)?.into_matrix();
    let m1 = family(temp - h)?.into_matrix();
    let p1 = family(temp + h)?.into_matrix();
    let p2 = family(temp + 2.0 * h)?.into_matrix();
    let drho = m2
        .sub(&m1.scale(C64::new(8.0, 0.0)))
        .add(&p1.scale(C64::new(8.0, 0.0)))
        .sub(&p2)
        .scale(C64::new(1.0 / (12.0 * h), 0.0));
    sld_qfi(&rho, &drho)
}

/// Dephased probe state and its analytic temperature derivative, ready for
/// [`sld_qfi`].
pub fn probe_state_and_derivative(
    ensemble: &ProbeEnsemble,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    t: f64,
    temp: f64,
) -> Result<(DensityMatrix, CMatrix)> {
    let rho0 = DensityMatrix::from_pure(&ensemble.initial_state())?;
    let rho = evolve(&rho0, ensemble, law, channel, t, temp)?;
    let drho = evolve_temperature_derivative(&rho0, ensemble, law, channel, t, temp)?;
    Ok((rho, drho))
}

/// Same for an arbitrary initial pure state of `n` qubits.
pub fn state_and_derivative_from(
    psi0: &[C64],
    n: usize,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    t: f64,
    temp: f64,
    phase_rate: f64,
) -> Result<(DensityMatrix, CMatrix)> {
    let ensemble = ProbeEnsemble::new(n, crate::ensemble::StateKind::Product)?
        .with_phase_rate(phase_rate);
    let rho0 = DensityMatrix::from_pure(psi0)?;
    let rho = evolve(&rho0, &ensemble, law, channel, t, temp)?;
    let drho = evolve_temperature_derivative(&rho0, &ensemble, law, channel, t, temp)?;
    Ok((rho, drho))
}

/// Explicit purification of the dephased probe state on 2n qubits
/// (system bits 0..n, environment bits n..2n).
///
/// Each pair is entangled by e^(-i theta Z_i Y_i^E) with
/// theta = arccos(sqrt(P)), P = (1 + e^(-gamma)) / 2, after a free phase
/// rotation e^(-i phase Z_i / 2) of the system qubit. Tracing out the
/// environment reproduces the dephased state exactly.
#[derive(Clone, Debug)]
pub struct Purification {
    n: usize,
    state: Vec<C64>,
    /// d theta / dT; the only temperature dependence of the state.
    dtheta: f64,
}

impl Purification {
    /// Purify an arbitrary initial pure system state under `law` at (t, T),
    /// with a per-qubit phase rotation by `phase` (= w t).
    pub fn new(psi0: &[C64], law: &DephasingLaw, t: f64, temp: f64, phase: f64) -> Result<Self> {
        let dim_s = psi0.len();
        if !dim_s.is_power_of_two() || dim_s < 2 {
            return Err(Error::domain("system dimension must be a power of two"));
        }
        let n = dim_s.trailing_zeros() as usize;
        if n > 8 {
            return Err(Error::domain("purifications beyond n = 8 are not supported"));
        }
        if (vnorm(psi0) - 1.0).abs() > 1e-10 {
            return Err(Error::domain("initial state must be normalized"));
        }
        let gamma = law.gamma(t, temp)?;
        let dgamma = law.dgamma_dt_temp(t, temp)?;
        let eg = (-gamma).exp();
        let p = 0.5 * (1.0 + eg);
        let theta = p.sqrt().min(1.0).acos();
        // d theta/dT = dgamma e^(-gamma) / (2 sqrt(1 - e^(-2 gamma)));
        // the time factor cancels in dgamma/gamma, so this limit is 0 at t=0.
        let one_minus_e2g = -(-2.0 * gamma).exp_m1();
        let dtheta = if one_minus_e2g <= 0.0 {
            0.0
        } else {
            dgamma * eg / (2.0 * one_minus_e2g.sqrt())
        };

        let dim = 1usize << (2 * n);
        let mut state = vec![ZERO; dim];
        // embed psi0 with the environment in |0...0>
        for (idx, &amp) in psi0.iter().enumerate() {
            state[idx] = amp;
        }
        let (c, s) = (theta.cos(), theta.sin());
        for i in 0..n {
            let sbit = 1usize << i;
            let ebit = 1usize << (n + i);
            let rot_0 = C64::from_polar(1.0, phase / 2.0);
            let rot_1 = rot_0.conj();
            let mut next = vec![ZERO; dim];
            for (idx, &amp) in state.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                // free phase on the system qubit
                let amp = if idx & sbit == 0 { amp * rot_0 } else { amp * rot_1 };
                let z = if idx & sbit == 0 { -1.0 } else { 1.0 };
                if idx & ebit == 0 {
                    next[idx] += c * amp;
                    next[idx | ebit] += z * s * amp;
                } else {
                    next[idx] += c * amp;
                    next[idx & !ebit] += -z * s * amp;
                }
            }
            state = next;
        }
        Ok(Purification { n, state, dtheta })
    }

    pub fn for_ensemble(
        ensemble: &ProbeEnsemble,
        law: &DephasingLaw,
        t: f64,
        temp: f64,
    ) -> Result<Self> {
        Purification::new(
            &ensemble.initial_state(),
            law,
            t,
            temp,
            ensemble.ramsey_phase_rate * t,
        )
    }

    pub fn qubit_pairs(&self) -> usize {
        self.n
    }

    pub fn state(&self) -> &[C64] {
        &self.state
    }

    /// |d Phi / dT> = (d theta/dT) sum_i (-i Z_i Y_i^E) |Phi>.
    pub fn derivative(&self) -> Vec<C64> {
        let mut out = vec![ZERO; self.state.len()];
        for i in 0..self.n {
            let sbit = 1usize << i;
            let ebit = 1usize << (self.n + i);
            for (idx, &amp) in self.state.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let z = if idx & sbit == 0 { -1.0 } else { 1.0 };
                if idx & ebit == 0 {
                    out[idx | ebit] += z * amp;
                } else {
                    out[idx & !ebit] += -z * amp;
                }
            }
        }
        out.iter_mut().for_each(|a| *a *= self.dtheta);
        out
    }

    /// Reduced system state Tr_E |Phi><Phi|.
    pub fn reduced_system(&self) -> CMatrix {
        let keep: Vec<usize> = (0..self.n).collect();
        CMatrix::outer(&self.state, &self.state).partial_trace_keep(2 * self.n, &keep)
    }

    /// Reduced environment state Tr_S |Phi><Phi|.
    pub fn environment_state(&self) -> CMatrix {
        let keep: Vec<usize> = (self.n..2 * self.n).collect();
        CMatrix::outer(&self.state, &self.state).partial_trace_keep(2 * self.n, &keep)
    }
}

/// Symmetric variational ansatz sum_i (zeta X_i^E + eta Y_i^E + delta Z_i^E)
/// on the environment qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalOperator {
    pub zeta: f64,
    pub eta_v: f64,
    pub delta: f64,
}

impl VariationalOperator {
    pub fn zero() -> Self {
        VariationalOperator { zeta: 0.0, eta_v: 0.0, delta: 0.0 }
    }

    fn from_params(p: [f64; 3]) -> Self {
        VariationalOperator { zeta: p[0], eta_v: p[1], delta: p[2] }
    }

    /// Apply to an enlarged-space vector (environment bits are n..2n).
    pub fn apply_enlarged(&self, state: &[C64], n: usize) -> Vec<C64> {
        let mut out = vec![ZERO; state.len()];
        for i in 0..n {
            let ebit = 1usize << (n + i);
            for (idx, &amp) in state.iter().enumerate() {
                if amp == ZERO {
                    continue;
                }
                let set = idx & ebit != 0;
                let zsign = if set { 1.0 } else { -1.0 };
                out[idx] += self.delta * zsign * amp;
                // X and Y both flip the environment bit
                let yfac = if set { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
                out[idx ^ ebit] += (C64::new(self.zeta, 0.0) + self.eta_v * yfac) * amp;
            }
        }
        out
    }

    /// Dense matrix on the n environment qubits.
    pub fn matrix(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..n {
            let bit = 1usize << i;
            for idx in 0..dim {
                let set = idx & bit != 0;
                let zsign = if set { 1.0 } else { -1.0 };
                m.set(idx, idx, m.get(idx, idx) + C64::new(self.delta * zsign, 0.0));
                let yfac = if set { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
                let v = m.get(idx ^ bit, idx) + C64::new(self.zeta, 0.0) + self.eta_v * yfac;
                m.set(idx ^ bit, idx, v);
            }
        }
        m
    }
}

/// Enlarged-space information 4 [ <v|v> - |<Phi|v>|^2 ] with
/// v = |dPhi> + i h |Phi>.
fn enlarged_information(
    purification: &Purification,
    dphi: &[C64],
    h: &VariationalOperator,
) -> f64 {
    let n = purification.qubit_pairs();
    let hphi = h.apply_enlarged(purification.state(), n);
    let v = vaxpy(dphi, C64::i(), &hphi);
    let vv = vdot(&v, &v).re;
    let overlap = vdot(purification.state(), &v);
    4.0 * (vv - overlap.norm_sqr())
}

/// Result of the variational minimization.
#[derive(Clone, Copy, Debug)]
pub struct VariationalOutcome {
    pub qfi: f64,
    pub argmin: VariationalOperator,
    pub converged: bool,
    pub gradient_norm: f64,
    pub evaluations: usize,
}

/// Minimize the enlarged-space information over the symmetric ansatz by
/// multi-start conjugate descent with finite-difference gradients.
///
/// Eight starts on the corners of a coarse cube; a start is converged when
/// its gradient norm drops below 1e-9. `budget` caps the number of objective
/// evaluations per start. On a blown budget the best point so far is
/// returned with `converged: false`.
pub fn variational_qfi(purification: &Purification, budget: usize) -> VariationalOutcome {
    let dphi = purification.derivative();
    let f = |p: [f64; 3], evals: &mut usize| -> f64 {
        *evals += 1;
        enlarged_information(purification, &dphi, &VariationalOperator::from_params(p))
    };

    let mut best_val = f64::INFINITY;
    let mut best_p = [0.0; 3];
    let mut best_grad = f64::INFINITY;
    let mut converged = false;
    let mut total_evals = 0usize;

    let corners: Vec<[f64; 3]> = (0..8)
        .map(|k| {
            [
                if k & 1 == 0 { -0.5 } else { 0.5 },
                if k & 2 == 0 { -0.5 } else { 0.5 },
                if k & 4 == 0 { -0.5 } else { 0.5 },
            ]
        })
        .collect();

    for start in corners {
        let mut evals = 0usize;
        let mut x = start;
        let mut fx = f(x, &mut evals);
        let mut dir = [0.0; 3];
        let mut g_prev = [0.0; 3];
        let mut gnorm = f64::INFINITY;
        let mut step = 1.0;

        for iter in 0..200 {
            if evals + 8 > budget {
                break;
            }
            // central-difference gradient; exact for a quadratic objective
            let mut g = [0.0; 3];
            for k in 0..3 {
                let h = 1e-6 * (1.0 + x[k].abs());
                let mut xp = x;
                xp[k] += h;
                let mut xm = x;
                xm[k] -= h;
                g[k] = (f(xp, &mut evals) - f(xm, &mut evals)) / (2.0 * h);
            }
            gnorm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
            if gnorm < 1e-9 {
                converged = true;
                break;
            }
            // Polak-Ribiere conjugate direction
            let beta = if iter == 0 {
                0.0
            } else {
                let num: f64 = (0..3).map(|k| g[k] * (g[k] - g_prev[k])).sum();
                let den: f64 = (0..3).map(|k| g_prev[k] * g_prev[k]).sum();
                (num / den.max(1e-300)).max(0.0)
            };
            for k in 0..3 {
                dir[k] = -g[k] + beta * dir[k];
            }
            g_prev = g;
            // parabolic line search along dir (objective is quadratic in the
            // parameters, so three samples pin the vertex)
            let probe = |s: f64, evals: &mut usize| {
                f([x[0] + s * dir[0], x[1] + s * dir[1], x[2] + s * dir[2]], evals)
            };
            let f1 = probe(step, &mut evals);
            let f2 = probe(2.0 * step, &mut evals);
            let denom = fx - 2.0 * f1 + f2;
            let s_star = if denom.abs() > 1e-300 {
                step * (4.0 * f1 - 3.0 * fx - f2) / (-2.0 * denom)
            } else {
                step
            };
            let s_star = if s_star.is_finite() && s_star > 0.0 { s_star } else { step * 0.5 };
            let f_star = probe(s_star, &mut evals);
            let (s_take, f_take) = [(s_star, f_star), (step, f1), (2.0 * step, f2)]
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if f_take < fx {
                for k in 0..3 {
                    x[k] += s_take * dir[k];
                }
                fx = f_take;
                step = (s_take.abs()).clamp(1e-8, 10.0);
            } else {
                step *= 0.25;
                if step < 1e-12 {
                    break;
                }
            }
        }
        total_evals += evals;
        if fx < best_val || (fx == best_val && gnorm < best_grad) {
            best_val = fx;
            best_p = x;
            best_grad = gnorm;
        }
    }

    VariationalOutcome {
        qfi: best_val,
        argmin: VariationalOperator::from_params(best_p),
        converged,
        gradient_norm: best_grad,
        evaluations: total_evals,
    }
}

/// Frobenius norm of h rho_E + rho_E h - i Tr_S(|dPhi><Phi| - |Phi><dPhi|),
/// the stationarity defect of the enlarged-space minimization. Near zero at
/// an unconstrained optimum.
pub fn optimality_residual(h: &VariationalOperator, purification: &Purification) -> f64 {
    let n = purification.qubit_pairs();
    let keep: Vec<usize> = (n..2 * n).collect();
    let dphi = purification.derivative();
    let rho_e = purification.environment_state();
    let cross = CMatrix::outer(&dphi, purification.state());
    let m = cross
        .sub(&cross.adjoint())
        .partial_trace_keep(2 * n, &keep)
        .scale(C64::i());
    let h_mat = h.matrix(n);
    h_mat.mul(&rho_e).add(&rho_e.mul(&h_mat)).sub(&m).frobenius_norm()
}

/// Side-by-side comparison of the amplitude-damping information routes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DampingInformationDiagnostic {
    /// Closed form with the e^(-2 int eta) visibility, per shot.
    pub ramsey_closed_form: f64,
    /// Ramsey readout information of the actual Kraus-evolved state, per
    /// shot. Matches the closed form: the readout only sees the transverse
    /// Bloch components.
    pub ramsey_from_state: f64,
    /// SLD information of the Kraus-evolved state, per shot.
    pub qfi: f64,
    /// qfi - ramsey_closed_form: the population-bias term the visibility
    /// closed form does not capture. Zero without damping.
    pub population_bias_gap: f64,
}

/// Evaluate all three information routes for a damped, dephased probe at
/// the setup's phase.
pub fn damping_information_diagnostic(
    setup: &crate::ramsey::RamseySetup,
    law: &DephasingLaw,
    channel: &EnvironmentChannel,
    temp: f64,
) -> Result<DampingInformationDiagnostic> {
    let closed = crate::ramsey::classical_fisher(setup, law, channel, temp)?.fisher_per_shot;
    let ensemble =
        setup.ensemble.clone().with_phase_rate(setup.phase / setup.t);
    let kind = setup.ensemble.state_kind;
    let n = setup.ensemble.n as f64;
    let count = match kind {
        crate::ensemble::StateKind::Product => n,
        crate::ensemble::StateKind::Ghz => 1.0,
    };
    let from_state = count
        * crate::ramsey::fisher_from_probability_fn(
            |tt| {
                let rho0 = DensityMatrix::from_pure(&ensemble.initial_state())?;
                let rho = evolve(&rho0, &ensemble, law, channel, setup.t, tt)?;
                let (p0, p1) = crate::ramsey::measured_probabilities_from_state(&rho, kind)?;
                Ok(vec![p0, p1])
            },
            temp,
        )?;
    let (rho, drho) = probe_state_and_derivative(&ensemble, law, channel, setup.t, temp)?;
    let qfi = sld_qfi(&rho, &drho)?;
    Ok(DampingInformationDiagnostic {
        ramsey_closed_form: closed,
        ramsey_from_state: from_state,
        qfi,
        population_bias_gap: qfi - closed,
    })
}

/// Closed-form optimal-measurement precision with the initial-state bias
/// factor (1 - <sum Z_i / n>):
/// delta T^2 = (1 - e^(-2 gamma)) / (N n e^(-2 gamma) (dgamma/dT)^2 (1 - z)).
///
/// For mean_z = 0 this coincides with the product-state optimal-phase
/// closed form; mean_z = 1 carries no coherence and yields infinity.
pub fn optimal_precision(
    n: usize,
    tau: f64,
    law: &DephasingLaw,
    t: f64,
    temp: f64,
    mean_z: f64,
) -> Result<f64> {
    if !(-1.0..=1.0).contains(&mean_z) {
        return Err(Error::domain("mean_z must lie in [-1, 1]"));
    }
    let base = crate::ramsey::delta_t_closed_form(
        crate::ramsey::ClosedFormKind::ProductOpt,
        n,
        tau,
        law,
        t,
        temp,
    )?;
    if mean_z >= 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(base / (1.0 - mean_z).sqrt())
}
