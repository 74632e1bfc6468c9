// Explicit RK4 and implicit Euler on the same initial data.

use micropolar::dynamics::{explicit_step_bound, Scheme, Stepper};
use micropolar::energy::energy_components;
use micropolar::field::Grid;
use micropolar::kernel::Kernel;
use micropolar::moduli::Moduli;
use micropolar::simulation::{initial_state, HistoryPreset, InitialPreset};
use micropolar::state::Model;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::new(Grid::new(8, std::f64::consts::PI)?, Moduli::default(), Kernel::exponential(0.5, 2.0)?)?;
    let u0 = initial_state(&model, InitialPreset::Eigenmode, HistoryPreset::Decaying, 0);
    let bound = explicit_step_bound(&model);
    println!("explicit step bound {bound:.4e}");

    for (scheme, dt) in [(Scheme::Rk4Explicit, 0.005), (Scheme::ImplicitEuler, 0.02)] {
        let mut stepper = Stepper::new(&model, scheme, dt)?;
        let mut s = u0.clone();
        let steps = (0.5 / dt).round() as usize;
        for _ in 0..steps {
            s = stepper.step(&model, &s)?;
        }
        println!(
            "{scheme:<15} dt {dt}: E(0) = {:.6}, E(0.5) = {:.6}",
            energy_components(&model, &u0).e,
            energy_components(&model, &s).e
        );
    }
    // Steps beyond the bound are refused.
    assert!(Stepper::new(&model, Scheme::Rk4Explicit, 10.0 * bound).is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
