// ⟨AU, U⟩_H against its closed form, and how the memory gap closes under
// s-grid refinement.

use micropolar::dynamics::dissipativity_report;
use micropolar::field::Grid;
use micropolar::history::HistoryBuffer;
use micropolar::kernel::Kernel;
use micropolar::moduli::Moduli;
use micropolar::state::Model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(8, std::f64::consts::PI)?;
    let kernel = Kernel::exponential(0.5, 2.0)?;
    let model = Model::new(grid, Moduli::default(), kernel.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let mut s = model.random_state(&mut rng);
    s.eta.scale(0.0);
    let r = dissipativity_report(&model, &s);
    println!("no history: direct {:.10} formula {:.10}", r.direct_value, r.formula_value);

    let w1 = grid.random_vector(&mut rng);
    let w2 = grid.random_vector(&mut rng);
    let mut sgrid = (*model.sgrid).clone();
    for _ in 0..3 {
        let m = Model::with_sgrid(grid, Moduli::default(), kernel.clone(), sgrid.clone())?;
        let eta = sgrid.nodes().iter().map(|&x| w1.combine(1.0 - (-x).exp(), &w2, x * (-x).exp())).collect();
        let mut t = s.clone();
        t.eta = HistoryBuffer::from_nodes(m.sgrid.clone(), eta)?;
        let r = dissipativity_report(&m, &t);
        println!(
            "{:>4} s-nodes: <AU,U> = {:.6}, gap/|U|^2 = {:.3e}",
            sgrid.len(),
            r.direct_value,
            r.gap / m.inner(&t, &t)
        );
        sgrid = sgrid.refined(&kernel)?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
