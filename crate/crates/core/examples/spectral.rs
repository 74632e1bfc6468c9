// Spectral abscissa from Arnoldi on the resolvent, checked on the thermal
// subsystem where the characteristic roots are known.

use micropolar::dynamics::{spectral_abscissa_estimate, thermal_abscissa_closed_form, SpectralOptions, Subsystem};
use micropolar::field::Grid;
use micropolar::kernel::Kernel;
use micropolar::moduli::Moduli;
use micropolar::state::Model;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::new(Grid::new(6, std::f64::consts::PI)?, Moduli::default(), Kernel::exponential(0.5, 2.0)?)?;
    let thermal = spectral_abscissa_estimate(&model, Subsystem::Thermal, SpectralOptions::default())?;
    println!(
        "thermal: Arnoldi {:.10}, closed form {:.10}",
        thermal.sigma,
        thermal_abscissa_closed_form(&model)
    );
    let full = spectral_abscissa_estimate(&model, Subsystem::Full, SpectralOptions::default())?;
    println!(
        "full system: sigma = {:.6} (+/- {:.4}i), predicted energy decay rate 2|sigma| = {:.4}",
        full.sigma,
        full.imag,
        -2.0 * full.sigma
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
