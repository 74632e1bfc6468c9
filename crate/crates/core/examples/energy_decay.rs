// Energy ledger, decay fit, envelope and Lyapunov functionals for a short run.

use micropolar::dynamics::Scheme;
use micropolar::energy::{decay_fit, envelope_check, equivalence_constants, DecayModel, LyapunovParams};
use micropolar::field::Grid;
use micropolar::kernel::{ConvexGauge, Kernel};
use micropolar::moduli::Moduli;
use micropolar::simulation::{initial_state, simulate, HistoryPreset, InitialPreset, RunSpec};
use micropolar::state::Model;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::new(Grid::new(8, std::f64::consts::PI)?, Moduli::default(), Kernel::exponential(0.5, 2.0)?)?;
    let eq = equivalence_constants(&model)?;
    let lyap = LyapunovParams::defaults(&eq, ConvexGauge::Linear);
    let spec = RunSpec {
        scheme: Scheme::ImplicitEuler,
        dt: 0.02,
        t_end: 5.0,
        output_every: 25,
    };
    let u0 = initial_state(&model, InitialPreset::RandomSmooth, HistoryPreset::Decaying, 1);
    let out = simulate(&model, u0, 0.0, &spec, &lyap, |_, _, _| {})?;
    let mut ledger = out.ledger;
    ledger.fill_residuals()?;
    println!("mu0 = {:.4}, eps = {:.4}", eq.mu0, lyap.eps);
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "E", "L", "R");
    for r in &ledger.records {
        println!("{:>5.2} {:>12.5e} {:>12.5e} {:>12.5e}", r.t, r.e, r.l, r.r);
    }
    let fit = decay_fit(&ledger.times(), &ledger.energies(), DecayModel::Exponential, (1.0, 5.0))?;
    let env = envelope_check(&ledger.times(), &ledger.energies(), ConvexGauge::Linear, fit.rate);
    println!("fitted rate {:.4} (R^2 {:.5}); envelope holds: {} with c2 = {:.4}", fit.rate, fit.r_squared, env.holds, env.c2_min);
    println!("ledger invariant violations: {}", ledger.invariant_violations(1e-10).len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
