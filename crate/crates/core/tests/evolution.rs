use std::f64::consts::{E, PI};

use proptest::prelude::*;
use sta_core::evolution::{propagate_lindblad, propagate_pure, propagate_pure_sampled};
use sta_core::quantum::DensityMatrix;
use sta_core::{Complex64, DissipationParams, FieldSource, FieldVector, PropagatorConfig, PureState, StandardSchedule};

fn plus_x() -> PureState {
    PureState::normalized(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap()
}

#[test]
fn excited_population_decays_to_one_over_e_at_t1() {
    let t1 = 2000.0;
    let diss = DissipationParams::new(t1, 1e9).unwrap();
    let sch = StandardSchedule::standard(t1).unwrap();
    let source = FieldSource::Constant(FieldVector::new(0.0, 0.0, 0.05));
    let rho = propagate_lindblad(
        &sch,
        source,
        0.0,
        t1,
        &PureState::spin_down().to_density(),
        &PropagatorConfig::with_dt(0.1),
        &diss,
    )
    .unwrap();
    assert!((rho.p_down() - 1.0 / E).abs() < 1e-9, "{}", rho.p_down());
}

#[test]
fn coherence_decays_at_t2() {
    let diss = DissipationParams::new(3000.0, 1500.0).unwrap();
    let t2 = 1.0 / (1.0 / 6000.0 + 1.0 / 1500.0);
    assert!((diss.t2() - t2).abs() < 1e-9);
    let sch = StandardSchedule::standard(t2).unwrap();
    let rho = propagate_lindblad(
        &sch,
        FieldSource::Constant(FieldVector::zero()),
        0.0,
        t2,
        &plus_x().to_density(),
        &PropagatorConfig::with_dt(0.1),
        &diss,
    )
    .unwrap();
    assert!((rho.coherence().norm() - 0.5 / E).abs() < 1e-9);
}

#[test]
fn ground_state_is_a_fixed_point() {
    let diss = DissipationParams::measured_device();
    let sch = StandardSchedule::standard(500.0).unwrap();
    let rho0 = PureState::spin_up().to_density();
    let rho = propagate_lindblad(
        &sch,
        FieldSource::Constant(FieldVector::new(0.0, 0.0, 0.2)),
        0.0,
        500.0,
        &rho0,
        &PropagatorConfig::default(),
        &diss,
    )
    .unwrap();
    assert!((*rho.matrix() - *rho0.matrix()).max_abs() < 1e-14);
}

#[test]
fn lindblad_without_dissipation_reproduces_pure_evolution() {
    let sch = StandardSchedule::standard(25.0).unwrap();
    let cfg = PropagatorConfig::with_dt(0.002);
    let s0 = plus_x();
    let psi = propagate_pure(&sch, FieldSource::Total, 0.0, 25.0, &s0, &cfg).unwrap();
    let rho = propagate_lindblad(
        &sch,
        FieldSource::Total,
        0.0,
        25.0,
        &s0.to_density(),
        &cfg,
        &DissipationParams::disabled(),
    )
    .unwrap();
    assert!((*rho.matrix() - psi.projector()).max_abs() < 1e-8);
    assert!((rho.population_of(&psi) - 1.0).abs() < 1e-8);
}

#[test]
fn dissipative_runs_stay_physical() {
    let sch = StandardSchedule::standard(500.0).unwrap();
    let diss = DissipationParams::new(300.0, 200.0).unwrap();
    let rho = propagate_lindblad(
        &sch,
        FieldSource::Total,
        0.0,
        500.0,
        &plus_x().to_density(),
        &PropagatorConfig::with_dt(0.05),
        &diss,
    )
    .unwrap();
    let (lo, hi) = rho.eigenvalues();
    assert!(lo >= -1e-12 && hi <= 1.0 + 1e-12);
    assert!((rho.trace() - 1.0).abs() < 1e-12);
    assert!(DensityMatrix::new(*rho.matrix()).is_ok());
}

#[test]
fn rates_too_fast_for_the_step_are_rejected() {
    let sch = StandardSchedule::standard(25.0).unwrap();
    let diss = DissipationParams::new(1.0, 1.0).unwrap();
    let r = propagate_lindblad(
        &sch,
        FieldSource::Total,
        0.0,
        25.0,
        &PureState::spin_up().to_density(),
        &PropagatorConfig::default(),
        &diss,
    );
    assert!(matches!(r, Err(sta_core::StaError::Config(_))));
}

#[test]
fn midpoint_propagator_is_second_order() {
    let sch = StandardSchedule::standard(25.0).unwrap();
    let run = |dt: f64| {
        propagate_pure(
            &sch,
            FieldSource::Total,
            0.0,
            25.0,
            &plus_x(),
            &PropagatorConfig::with_dt(dt),
        )
        .unwrap()
    };
    let reference = run(0.0005);
    let err = |s: PureState| ((s.up - reference.up).norm_sqr() + (s.down - reference.down).norm_sqr()).sqrt();
    let errs: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| err(run(dt))).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.15, "{errs:?}");
    }
}

#[test]
fn sampled_and_direct_propagation_agree() {
    let sch = StandardSchedule::standard(50.0).unwrap();
    let cfg = PropagatorConfig::default();
    let times = [0.0, 7.3, 20.0, 50.0];
    let sampled = propagate_pure_sampled(&sch, FieldSource::Total, &times, &PureState::spin_up(), &cfg).unwrap();
    let direct = propagate_pure(&sch, FieldSource::Total, 0.0, 50.0, &PureState::spin_up(), &cfg).unwrap();
    assert!(sampled[3].fidelity(&direct) > 1.0 - 1e-12);
    assert_eq!(sampled[0], PureState::spin_up());
}

#[test]
fn adiabatic_limit_follows_the_reference_eigenstate() {
    // without the CD term a slow sweep still tracks the eigenstate
    let slow = StandardSchedule::standard(2000.0).unwrap();
    let s = propagate_pure(
        &slow,
        FieldSource::Reference,
        0.0,
        2000.0,
        &PureState::spin_up(),
        &PropagatorConfig::with_dt(0.05),
    )
    .unwrap();
    let target = sta_core::protocol::reference_eigenstate(sta_core::Branch::Up, PI / 3.0, PI);
    assert!(s.fidelity(&target) > 0.999);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn global_phase_commutes_with_propagation(alpha in -PI..PI, t_end in 1.0f64..25.0) {
        let sch = StandardSchedule::standard(25.0).unwrap();
        let cfg = PropagatorConfig::default();
        let a = propagate_pure(&sch, FieldSource::Total, 0.0, t_end, &plus_x().with_phase(alpha), &cfg).unwrap();
        let b = propagate_pure(&sch, FieldSource::Total, 0.0, t_end, &plus_x(), &cfg).unwrap().with_phase(alpha);
        prop_assert!((a.up - b.up).norm() + (a.down - b.down).norm() < 1e-12);
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-13);
    }
}
