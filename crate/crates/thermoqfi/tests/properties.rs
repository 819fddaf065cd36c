//! Property tests over randomized laws, channels, states, and times.

use proptest::prelude::*;
use std::f64::consts::PI;

use thermoqfi::density::{evolve, DensityMatrix};
use thermoqfi::ensemble::bloch_state;
use thermoqfi::qfi::{sld_qfi, state_and_derivative_from};
use thermoqfi::ramsey::{classical_fisher, ramsey_probabilities, RamseySetup};
use thermoqfi::{
    DephasingLaw, EnvironmentChannel, ProbeEnsemble, RateFunction, StateKind, TemperatureModel,
};

fn law_strategy() -> impl Strategy<Value = DephasingLaw> {
    (0.5f64..2.5, 0.2f64..3.0, proptest::option::of(1e-4f64..0.5)).prop_map(|(nu, g, t_cha)| {
        let model = TemperatureModel::linear(g).unwrap();
        match t_cha {
            Some(tc) => DephasingLaw::with_onset(nu, model, tc).unwrap(),
            None => DephasingLaw::new(nu, model).unwrap(),
        }
    })
}

fn channel_strategy() -> impl Strategy<Value = EnvironmentChannel> {
    prop_oneof![
        Just(EnvironmentChannel::None),
        (0.05f64..1.0, 0.5f64..2.5)
            .prop_map(|(k, np)| EnvironmentChannel::extra_dephasing(k, np).unwrap()),
        (0.01f64..0.5).prop_map(|eta| EnvironmentChannel::AmplitudeDamping {
            rate: RateFunction::constant(eta)
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// evolve keeps states Hermitian, unit-trace, positive semidefinite.
    #[test]
    fn evolve_preserves_density_matrix_invariants(
        law in law_strategy(),
        channel in channel_strategy(),
        n in 1usize..=3,
        ghz in any::<bool>(),
        w in -2.0f64..2.0,
        t in 0.0f64..3.0,
        temp in 0.1f64..2.0,
    ) {
        let kind = if ghz { StateKind::Ghz } else { StateKind::Product };
        let ens = ProbeEnsemble::new(n, kind).unwrap().with_phase_rate(w);
        let rho0 = DensityMatrix::from_pure(&ens.initial_state()).unwrap();
        // DensityMatrix::new revalidates everything on construction, so a
        // successful evolve is itself the assertion.
        let rho = evolve(&rho0, &ens, &law, &channel, t, temp).unwrap();
        prop_assert!(rho.matrix().hermiticity_defect() <= 1e-12);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() <= 1e-12);
    }

    /// The closed-form readout information equals the generic probability
    /// route everywhere, not just at special phases.
    #[test]
    fn closed_form_fisher_matches_generic_route(
        law in law_strategy(),
        channel in channel_strategy(),
        n in 1usize..=6,
        ghz in any::<bool>(),
        phase in 0.0f64..PI,
        t in 0.05f64..2.0,
        temp in 0.2f64..1.5,
    ) {
        let kind = if ghz { StateKind::Ghz } else { StateKind::Product };
        let ens = ProbeEnsemble::new(n, kind).unwrap();
        let setup = RamseySetup::new(ens, phase, t, 4.0).unwrap();
        let closed = classical_fisher(&setup, &law, &channel, temp).unwrap().fisher_per_shot;
        let count = if ghz { 1.0 } else { n as f64 };
        let generic = count * thermoqfi::ramsey::fisher_from_probability_fn(
            |tt| ramsey_probabilities(&setup, &law, &channel, tt).map(|(a, b)| vec![a, b]),
            temp,
        ).unwrap();
        // error model for the 5-point difference at step 1e-5 T: the noise
        // on dp is ~1e-11 absolute, which enters the information as
        // ~1e-10 sqrt(FI); the dense well-conditioned grid in oracles.rs
        // holds the strict 1e-8 relative bound
        let tol = 1e-7 * closed + 1e-9 * closed.max(0.0).sqrt() + 1e-14;
        prop_assert!(
            (closed - generic).abs() <= tol,
            "closed {closed} vs generic {generic} (tol {tol:.3e})"
        );
    }

    /// No measurement beats the SLD value; the phase-pi Ramsey readout
    /// attains it for the pure-dephasing family.
    #[test]
    fn sld_dominates_any_phase_readout(
        law in law_strategy(),
        n in 1usize..=3,
        ghz in any::<bool>(),
        phase in 0.0f64..PI,
        t in 0.05f64..2.0,
        temp in 0.2f64..1.5,
    ) {
        let kind = if ghz { StateKind::Ghz } else { StateKind::Product };
        let ens = ProbeEnsemble::new(n, kind).unwrap();
        let (rho, drho) = thermoqfi::qfi::probe_state_and_derivative(
            &ens, &law, &EnvironmentChannel::None, t, temp).unwrap();
        let qfi = sld_qfi(&rho, &drho).unwrap();
        let setup = RamseySetup::new(ens, phase, t, 4.0).unwrap();
        let fi = classical_fisher(&setup, &law, &EnvironmentChannel::None, temp)
            .unwrap().fisher_per_shot;
        prop_assert!(fi <= qfi * (1.0 + 1e-9) + 1e-12, "fi {fi} beats qfi {qfi}");
    }

    /// Extra dephasing can only destroy information, pointwise.
    #[test]
    fn extra_dephasing_is_monotone_harmful(
        law in law_strategy(),
        kappa in 0.01f64..1.0,
        nu_prime in 0.5f64..2.5,
        n in 1usize..=4,
        ghz in any::<bool>(),
        t in 0.05f64..2.0,
        temp in 0.2f64..1.5,
    ) {
        let kind = if ghz { StateKind::Ghz } else { StateKind::Product };
        let ens = ProbeEnsemble::new(n, kind).unwrap();
        let setup = RamseySetup::new(ens, PI, t, 4.0).unwrap();
        let clean = classical_fisher(&setup, &law, &EnvironmentChannel::None, temp)
            .unwrap().fisher_per_shot;
        let noisy = classical_fisher(
            &setup,
            &law,
            &EnvironmentChannel::extra_dephasing(kappa, nu_prime).unwrap(),
            temp,
        ).unwrap().fisher_per_shot;
        prop_assert!(noisy <= clean * (1.0 + 1e-12));
    }

    /// States with the same polar angle carry the same information under
    /// dephasing regardless of their azimuth.
    #[test]
    fn equal_mean_z_means_equal_information(
        law in law_strategy(),
        theta in 0.1f64..3.0,
        phi1 in 0.0f64..(2.0 * PI),
        phi2 in 0.0f64..(2.0 * PI),
        t in 0.05f64..2.0,
        temp in 0.2f64..1.5,
    ) {
        let mut vals = Vec::new();
        for phi in [phi1, phi2] {
            let psi = bloch_state(theta, phi);
            let (rho, drho) = state_and_derivative_from(
                &psi, 1, &law, &EnvironmentChannel::None, t, temp, 0.0).unwrap();
            vals.push(sld_qfi(&rho, &drho).unwrap());
        }
        let scale = vals[0].abs().max(1e-12);
        prop_assert!(((vals[0] - vals[1]) / scale).abs() <= 1e-9);
    }

    /// Laws and channels survive a JSON round trip.
    #[test]
    fn serde_round_trips(law in law_strategy(), channel in channel_strategy()) {
        let doc = serde_json::to_string(&law).unwrap();
        let law2: DephasingLaw = serde_json::from_str(&doc).unwrap();
        prop_assert_eq!(law.gamma(0.7, 0.5).unwrap(), law2.gamma(0.7, 0.5).unwrap());
        let doc = serde_json::to_string(&channel).unwrap();
        let ch2: EnvironmentChannel = serde_json::from_str(&doc).unwrap();
        prop_assert_eq!(channel.kappa(0.7).unwrap(), ch2.kappa(0.7).unwrap());
        prop_assert_eq!(channel.lambda(0.7).unwrap(), ch2.lambda(0.7).unwrap());
    }
}
