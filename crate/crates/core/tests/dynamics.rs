use core::f64::consts::{FRAC_1_SQRT_2, PI};

use hybridmem_core::hamiltonian::{h_multi, h_resonant, hybrid_layout, multi_layout};
use hybridmem_core::hilbert::{fidelity, Ket};
use hybridmem_core::linalg::max_abs;
use hybridmem_core::lindblad::{
    evolve_exact_at, evolve_rk4, evolve_rk4_at, standard_channels, DecoherenceRates, EvolutionConfig, RenormPolicy,
};
use hybridmem_core::protocols::{
    ri_transfer, w_closed_fidelity, w_state_prepare, Sampling, TransferMode, TransferSpec, WStateSpec,
};
use hybridmem_core::{DensityMatrix, C64};
use proptest::prelude::*;

fn ri_spec(rates: DecoherenceRates) -> TransferSpec {
    let mut s = TransferSpec::new(
        C64::from(FRAC_1_SQRT_2),
        C64::from(FRAC_1_SQRT_2),
        TransferMode::Resonant,
    )
    .unwrap();
    s.rates = rates;
    s
}

#[test]
fn closed_ri_fidelity_is_periodic() {
    let period = 2.0 * PI * 2f64.sqrt();
    let mut spec = ri_spec(DecoherenceRates::zero());
    spec.sampling = Some(Sampling::new(2.0 * period, 201).unwrap());
    let r = ri_transfer(&spec).unwrap();
    // samples 0..100 and 100..200 are one period apart
    for i in 0..=100 {
        assert!(
            (r.fidelities[i] - r.fidelities[i + 100]).abs() < 1e-7,
            "t = {}",
            r.times[i]
        );
    }
}

#[test]
fn closed_w_fidelity_follows_sine() {
    for n in 2..=4 {
        let mut spec = WStateSpec::new(n, DecoherenceRates::zero()).unwrap();
        spec.sampling = Some(Sampling::new(3.0, 61).unwrap());
        let r = w_state_prepare(&spec).unwrap();
        for (t, f) in r.unconditional.times.iter().zip(&r.unconditional.fidelities) {
            assert!((f - w_closed_fidelity(n, 1.0, *t)).abs() < 1e-8);
        }
        let c = r.conditional.unwrap();
        for f in c.fidelities.iter().flatten() {
            assert!((f - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn ri_fidelity_non_increasing_in_each_rate() {
    let base = [0.0, 0.0, 0.0, 0.0];
    for axis in 0..4 {
        let mut last = f64::INFINITY;
        for step in 0..5 {
            let mut r = base;
            r[axis] = 0.025 * step as f64;
            let rates = DecoherenceRates::new(r[0], r[1], r[2], r[3]).unwrap();
            let f = ri_transfer(&ri_spec(rates)).unwrap().fidelity_at_protocol_time;
            assert!(f <= last + 1e-12, "axis {axis}, step {step}");
            last = f;
        }
    }
}

#[test]
fn cbjj_decoherence_dominates_resonator_loss() {
    let r = 0.05;
    let tlr = ri_transfer(&ri_spec(DecoherenceRates::new(r, 0.0, 0.0, 0.0).unwrap())).unwrap();
    let cbjj = ri_transfer(&ri_spec(DecoherenceRates::cbjj_uniform(0.0, r).unwrap())).unwrap();
    assert!(tlr.fidelity_at_protocol_time > cbjj.fidelity_at_protocol_time);
}

#[test]
fn rk4_matches_exact_on_w_space() {
    let layout = multi_layout(3).unwrap();
    let h = h_multi(&[1.0; 3], 3).unwrap();
    let rates = DecoherenceRates::new(0.0, 0.02, 0.01, 0.03).unwrap();
    let ch = standard_channels(&rates, &layout).unwrap();
    let rho0 = DensityMatrix::pure(&Ket::basis(&layout, &[0, 1, 1, 1]).unwrap());
    let times = [0.3, 0.9, 1.7];
    let rk = evolve_rk4_at(&rho0, &h, &ch, &times, 0.001, RenormPolicy::Off).unwrap();
    let ex = evolve_exact_at(&rho0, &h, &ch, &times).unwrap();
    for (a, b) in rk.states.iter().zip(&ex) {
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-8);
    }
}

#[test]
fn halving_the_step_barely_moves_ri_fidelity() {
    let rates = DecoherenceRates::new(0.01, 0.01, 0.01, 0.01).unwrap();
    let mut coarse = ri_spec(rates);
    coarse.sampling = Some(Sampling::new(3.0 * coarse.protocol_time().unwrap(), 121).unwrap());
    let mut fine = coarse.clone();
    fine.max_dt = coarse.max_dt / 2.0;
    let a = ri_transfer(&coarse).unwrap();
    let b = ri_transfer(&fine).unwrap();
    for (x, y) in a.fidelities.iter().zip(&b.fidelities) {
        assert!((x - y).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn open_evolution_stays_physical(
        kappa in 0.0..0.1f64,
        g10 in 0.0..0.1f64,
        g1 in 0.0..0.1f64,
        gphi in 0.0..0.1f64,
        re in -1.0..1.0f64,
        im in -1.0..1.0f64,
    ) {
        let layout = hybrid_layout(2).unwrap();
        let h = h_resonant(1.0, 1.1, 2).unwrap();
        let rates = DecoherenceRates::new(kappa, g10, g1, gphi).unwrap();
        let ch = standard_channels(&rates, &layout).unwrap();
        let psi = Ket::superposition(&layout, &[(C64::new(1.0, 0.0), &[0, 0, 0]), (C64::new(re, im), &[1, 0, 0])]).unwrap();
        let rho0 = DensityMatrix::pure(&psi);
        let target = Ket::basis(&layout, &[0, 0, 1]).unwrap();
        let traj = evolve_rk4(&rho0, &h, &ch, &EvolutionConfig::new(0.002, 3.0, 100)).unwrap();
        for (state, d) in traj.states.iter().zip(&traj.diagnostics) {
            prop_assert!(d.trace_error <= 1e-9);
            prop_assert!(d.hermiticity_error <= 1e-9);
            prop_assert!(d.min_eigenvalue >= -1e-8);
            prop_assert!(fidelity(&target, state).unwrap() <= 1.0 + 1e-9);
        }
    }
}
