// The history variable on the s-grid: initialization, upwind transport and
// the memory integral.

use std::sync::Arc;

use micropolar::field::Grid;
use micropolar::history::{self, SGrid};
use micropolar::kernel::Kernel;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(8, 1.0)?;
    let kernel = Kernel::exponential(0.5, 2.0)?;
    let sgrid = Arc::new(SGrid::for_kernel(&kernel, history::DEFAULT_NODES, history::DEFAULT_FIRST_STEP)?);
    println!(
        "{} nodes on [0, {:.3}], steps {:.1e}..{:.3}",
        sgrid.len(),
        sgrid.nodes()[sgrid.len() - 1],
        sgrid.min_step(),
        sgrid.max_step()
    );

    // φ(−s) = e^{−s}·w, so η(s) = (1 − e^{−s})·w.
    let w = grid.vector_from(|x| [0.0, (3.0 * x[0]).sin() * x[1].sin() * x[2].sin(), 0.0]);
    let mut eta = history::init_separable(sgrid.clone(), &w, |s| (-s).exp());
    let energy = history::history_energy(&grid, &eta);
    println!("history energy {energy:.6e}, dissipation {:.6e}", history::history_dissipation(&grid, &eta));

    // Transport with ψ = 0 drains the buffer through s = 0.
    let psi = grid.zero_vector();
    for _ in 0..100 {
        history::advance_history(&mut eta, &psi, sgrid.min_step())?;
    }
    let mem = history::memory_integral(&grid, &eta);
    println!(
        "after t = {:.2}: energy {:.6e}, |memory integral| {:.3e}, eta(0) = {}",
        100.0 * sgrid.min_step(),
        history::history_energy(&grid, &eta),
        mem.max_abs(),
        eta.nodes()[0].max_abs()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
