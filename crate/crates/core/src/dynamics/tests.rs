use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::field::Grid;
use crate::kernel::Kernel;
use crate::krylov::GmresOptions;
use crate::moduli::Moduli;
use crate::state::{Model, State};

fn model(n: usize) -> Model {
    Model::new(
        Grid::new(n, std::f64::consts::PI).unwrap(),
        Moduli::default(),
        Kernel::exponential(0.5, 2.0).unwrap(),
    )
    .unwrap()
}

fn diff_norm(model: &Model, a: &State, b: &State) -> f64 {
    let mut d = a.clone();
    d.axpy(-1.0, b);
    model.norm(&d)
}

#[test]
fn generator_on_zero_and_on_positions_only() {
    let m = model(6);
    let z = apply_generator(&m, &m.zero_state());
    assert_eq!(z.max_abs(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut s = m.zero_state();
    s.u = m.grid.random_vector(&mut rng);
    s.phi = m.grid.random_vector(&mut rng);
    s.theta = m.grid.random_scalar(&mut rng);
    let a = apply_generator(&m, &s);
    assert_eq!(a.u.max_abs(), 0.0);
    assert_eq!(a.phi.max_abs(), 0.0);
    assert_eq!(a.theta.max_abs(), 0.0);
}

#[test]
fn generator_is_linear() {
    let m = model(6);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = m.random_state(&mut rng);
    let y = m.random_state(&mut rng);
    let mut comb = x.scaled(0.7);
    comb.axpy(-1.3, &y);
    let lhs = apply_generator(&m, &comb);
    let mut rhs = apply_generator(&m, &x).scaled(0.7);
    rhs.axpy(-1.3, &apply_generator(&m, &y));
    assert!(diff_norm(&m, &lhs, &rhs) <= 1e-12 * m.norm(&lhs));
}

#[test]
fn dissipativity_without_memory_is_exact() {
    let m = model(8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut s = m.random_state(&mut rng);
        s.eta.scale(0.0);
        let r = dissipativity_report(&m, &s);
        let scale = m.inner(&s, &s);
        assert!(r.direct_value <= 0.0 && r.formula_value <= 0.0);
        assert!(r.gap <= 1e-10 * scale, "gap {} scale {}", r.gap, scale);
    }
    let r = dissipativity_report(&m, &m.zero_state());
    assert_eq!((r.formula_value, r.direct_value, r.gap), (0.0, 0.0, 0.0));
}

#[test]
fn scheme_dissipation_matches_direct_with_memory() {
    let m = model(6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = m.random_state(&mut rng);
    let direct = m.inner(&apply_generator(&m, &s), &s);
    let scheme = damping_rate(&m, &s) + crate::history::transport_dissipation(&m.grid, &s.eta);
    assert!(direct < 0.0);
    assert!((direct - scheme).abs() <= 1e-10 * m.inner(&s, &s));
}

#[test]
fn resolvent_solves_and_vanishes_on_zero() {
    let m = model(6);
    let (u, rep) = resolvent_solve(&m, &m.zero_state(), 1.0, None, GmresOptions::default()).unwrap();
    assert_eq!(u.max_abs(), 0.0);
    assert_eq!(rep.iterations, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for lambda in [0.5, 1.0, 50.0] {
        let f = m.random_state(&mut rng);
        let (_, rep) = resolvent_solve(&m, &f, lambda, None, GmresOptions::default()).unwrap();
        assert!(rep.defect <= DEFECT_BOUND, "λ = {lambda}: {rep:?}");
    }
    assert!(resolvent_solve(&m, &m.zero_state(), 0.0, None, GmresOptions::default()).is_err());
}

#[test]
fn resolvent_weight_approaches_closed_form() {
    let m = model(6);
    let k = Kernel::exponential(0.5, 2.0).unwrap();
    let discrete = discrete_resolvent_weight(&m, 1.0);
    assert!((discrete - k.g1()).abs() <= 2e-2 * k.g1(), "{discrete} vs {}", k.g1());
}

#[test]
fn implicit_step_does_not_increase_energy() {
    let m = model(6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut st = Stepper::new(&m, Scheme::ImplicitEuler, 2e-2).unwrap();
    for _ in 0..5 {
        let s = m.random_state(&mut rng);
        let next = st.step(&m, &s).unwrap();
        assert!(m.inner(&next, &next) <= m.inner(&s, &s));
    }
    let z = st.step(&m, &m.zero_state()).unwrap();
    assert_eq!(z.max_abs(), 0.0);
}

#[test]
fn explicit_bound_rejects_large_steps() {
    let m = model(6);
    let bound = explicit_step_bound(&m);
    assert!(bound > 0.0 && bound <= m.sgrid.min_step());
    assert!(matches!(
        Stepper::new(&m, Scheme::Rk4Explicit, 10.0 * bound),
        Err(crate::error::Error::StepTooLarge { .. })
    ));
    let z = step(&m, &m.zero_state(), 0.5 * bound, Scheme::Rk4Explicit).unwrap();
    assert_eq!(z.max_abs(), 0.0);
}

#[test]
fn thermal_abscissa_matches_closed_form() {
    let m = model(8);
    let est = spectral_abscissa_estimate(&m, Subsystem::Thermal, SpectralOptions::default()).unwrap();
    let exact = thermal_abscissa_closed_form(&m);
    assert!((est.sigma - exact).abs() <= 1e-6, "{} vs {exact}", est.sigma);
}

