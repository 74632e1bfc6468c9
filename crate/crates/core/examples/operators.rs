// Difference operators on the box grid and their exact discrete identities.

use micropolar::field::{write_scalar_csv, Grid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(16, std::f64::consts::PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = grid.random_vector(&mut rng);
    let f = grid.random_scalar(&mut rng);

    // Δu = ∇div u − ∇×∇×u holds to rounding.
    println!("vector identity residual: {:.2e}", grid.vector_identity_residual(&u) / u.max_abs());

    // ⟨∇f, u⟩ = −⟨f, div u⟩ under the zero extension.
    let lhs = grid.l2(&grid.grad(&f), &u);
    let rhs = -grid.l2_scalar(&f, &grid.div(&u));
    println!("integration by parts: {lhs:.12} vs {rhs:.12}");

    println!(
        "Poincare constants: continuum {:.5}, grid {:.5}",
        grid.poincare_constant(),
        grid.discrete_poincare_constant()
    );

    // Snapshot of the lowest sine mode, x fastest.
    let mode = grid.scalar_from(|x| x[0].sin() * x[1].sin() * x[2].sin());
    let mut csv = Vec::new();
    write_scalar_csv(&grid, &mode, &mut csv)?;
    let text = String::from_utf8(csv)?;
    for line in text.lines().take(3) {
        println!("{line}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
