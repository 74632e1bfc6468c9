//! Randomized invariants of the operators, the generator and the energy.

use micropolar::dynamics::{apply_generator, dissipativity_report, resolvent_solve, DEFECT_BOUND};
use micropolar::energy::{energy_components, equivalence_constants, lyapunov_values, LyapunovParams};
use micropolar::field::Grid;
use micropolar::kernel::{ConvexGauge, Kernel};
use micropolar::krylov::GmresOptions;
use micropolar::moduli::Moduli;
use micropolar::state::Model;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid_strategy() -> impl Strategy<Value = (Grid, u64)> {
    (prop::sample::select(vec![4usize, 6, 8, 10]), 0.5f64..4.0, any::<u64>())
        .prop_map(|(n, l, seed)| (Grid::new(n, l).unwrap(), seed))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn integration_by_parts((grid, seed) in grid_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = grid.random_scalar(&mut rng);
        let w = grid.random_vector(&mut rng);
        let lhs = grid.l2(&grid.grad(&f), &w);
        let rhs = -grid.l2_scalar(&f, &grid.div(&w));
        let scale = (grid.l2_scalar(&f, &f) * grid.l2(&w, &w)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn curl_is_self_adjoint((grid, seed) in grid_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = grid.random_vector(&mut rng);
        let b = grid.random_vector(&mut rng);
        let lhs = grid.l2(&grid.curl(&a), &b);
        let rhs = grid.l2(&a, &grid.curl(&b));
        let scale = (grid.l2(&a, &a) * grid.l2(&b, &b)).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn vector_identity((grid, seed) in grid_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = grid.random_vector(&mut rng);
        prop_assert!(grid.vector_identity_residual(&u) <= 1e-12 * u.max_abs());
    }

    #[test]
    fn discrete_poincare((grid, seed) in grid_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = grid.random_vector(&mut rng);
        let lhs = grid.l2(&w, &w);
        let rhs = grid.discrete_poincare_constant() * grid.h1_semi(&w, &w);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn divergence_of_curl_vanishes((grid, seed) in grid_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = grid.random_vector(&mut rng);
        let dc = grid.div(&grid.curl(&w));
        prop_assert!(dc.max_abs() <= 1e-12 * w.max_abs() / (grid.spacing() * grid.spacing()));
    }
}

fn small_model(amplitude: f64, rate: f64, xi: f64) -> Model {
    let moduli = Moduli {
        xi,
        ..Moduli::default()
    };
    Model::new(Grid::new(4, 2.0).unwrap(), moduli, Kernel::exponential(amplitude, rate).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generator_is_dissipative(g0 in 0.05f64..0.9, rate in 0.5f64..5.0, xi in 0.0f64..2.0, seed in any::<u64>()) {
        // Amplitude chosen so that the total mass g0 stays below γ = 1.
        let model = small_model(g0 * rate, rate, xi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = model.random_state(&mut rng);
        let r = dissipativity_report(&model, &s);
        prop_assert!(r.direct_value <= 0.0);
        prop_assert!(r.formula_value <= 0.0);
        let direct = model.inner(&apply_generator(&model, &s), &s);
        prop_assert!((direct - r.direct_value).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn energy_is_half_the_norm_and_lyapunov_is_equivalent(seed in any::<u64>()) {
        let model = small_model(0.5, 2.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = model.random_state(&mut rng);
        let e = energy_components(&model, &s);
        prop_assert!((e.e - 0.5 * model.inner(&s, &s)).abs() <= 1e-12 * e.e);
        let eq = equivalence_constants(&model).unwrap();
        let p = LyapunovParams::defaults(&eq, ConvexGauge::Linear);
        let ly = lyapunov_values(&model, &s, &p);
        prop_assert!(ly.f.abs() <= eq.mu0 * e.e);
        prop_assert!(ly.l >= (1.0 - p.eps * eq.mu0) * e.e && ly.l <= (1.0 + p.eps * eq.mu0) * e.e);
    }

    #[test]
    fn resolvent_defect_is_small(lambda in 0.3f64..60.0, seed in any::<u64>()) {
        let model = small_model(0.5, 2.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = model.random_state(&mut rng);
        let (_, rep) = resolvent_solve(&model, &f, lambda, None, GmresOptions::default()).unwrap();
        prop_assert!(rep.defect <= DEFECT_BOUND);
    }
}
