// Checkpoint a run halfway and resume it; the resumed ledger matches.

use micropolar::cli::{self, RunConfig};

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::parse("grid.n = 6\ntime.T = 1\ntime.output_every = 5")?;
    let model = cfg.validate()?;
    let full = cli::run(&cfg, &model, "full", dir.path(), None)?;

    cfg.apply_override("time.T=0.5")?;
    let half = cli::run(&cfg, &model, "half", dir.path(), None)?;
    cfg.apply_override("time.T=1")?;
    let rest = cli::run(&cfg, &model, "rest", dir.path(), Some(&half.checkpoint))?;

    let a = full.ledger_data.records.last().unwrap();
    let b = rest.ledger_data.records.last().unwrap();
    println!("E(1) straight through {:e}, resumed {:e}", a.e, b.e);
    assert_eq!(a.e.to_bits(), b.e.to_bits());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run().unwrap();
}
