// Relaxation functions: integrals, hypothesis checks and decay envelopes.

use micropolar::kernel::{decay_envelope, Kernel};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let gamma = 1.0;
    let kernels = [
        Kernel::exponential(0.5, 2.0)?,
        Kernel::polynomial(0.5, 2.0)?,
        Kernel::tabulated(
            vec![0.0, 0.5, 1.0, 2.0, 4.0],
            vec![0.4, 0.3, 0.2, 0.1, 0.02],
            vec![-0.2, -0.2, -0.2, -0.1, -0.05],
        )?,
    ];
    println!("{:<26} {:>10} {:>10} {:>8}  hypothesis", "kernel", "g0", "g1", "d0");
    for k in &kernels {
        let g1 = k.check_g1(gamma);
        let g2 = k.check_g2()?;
        println!(
            "{:<26} {:>10.6} {:>10.6} {:>8.3}  pass={} {:?}",
            k.id(),
            k.g0(),
            k.g1(),
            k.d0(),
            g1.pass,
            g2.mode
        );
    }

    // Envelopes c2·G1⁻¹(c1·t) for the linear and a power gauge.
    let poly = &kernels[1];
    let gauge = poly.default_gauge();
    println!("\npolynomial kernel default gauge: {gauge:?}");
    for t in [0.0, 1.0, 10.0, 100.0] {
        let lin = decay_envelope(kernels[0].default_gauge(), 1.0, 1.0, t)?;
        let pow = decay_envelope(gauge, 1.0, 1.0, t)?;
        println!("t = {t:>5}: exponential {lin:.3e}  power {pow:.3e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
