// Solving (λ − A)U = F with the reduced elliptic system.

use micropolar::dynamics::{discrete_resolvent_weight, resolvent_solve};
use micropolar::field::Grid;
use micropolar::kernel::Kernel;
use micropolar::krylov::GmresOptions;
use micropolar::moduli::Moduli;
use micropolar::state::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let kernel = Kernel::exponential(0.5, 2.0)?;
    let model = Model::new(Grid::new(8, std::f64::consts::PI)?, Moduli::default(), kernel.clone())?;
    println!(
        "memory weight at lambda = 1: grid {:.6}, exact g1 {:.6}",
        discrete_resolvent_weight(&model, 1.0),
        kernel.g1()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = model.random_state(&mut rng);
    for lambda in [0.5, 1.0, 50.0] {
        let (u, rep) = resolvent_solve(&model, &f, lambda, None, GmresOptions::default())?;
        println!(
            "lambda {lambda:>4}: {:>3} GMRES iterations, defect {:.2e}, |U|/|F| = {:.4}",
            rep.iterations,
            rep.defect,
            model.norm(&u) / model.norm(&f)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
