//! Command-line front end: configuration files, runs with their ledger,
//! checkpoint and summary, verification suites, and plot data.
//!
//! Outputs go to the directory named by `MICROPOLAR_OUTPUT_DIR`, or `out`
//! when unset. A run of `configs/default.cfg` produces
//!
//! * `default.resolved.cfg`: the configuration with every key filled in,
//! * `default.ledger.csv`: the energy ledger,
//! * `default.ckpt`: the final state (see [`checkpoint`]),
//! * `default.summary.json`: decay fit, envelope check and audits.

pub mod checkpoint;
pub mod config;
pub mod plot;
pub mod verify;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{load_config, KernelKind, KernelSpec, RunConfig};
pub use plot::{emit_plotdata, PlotKind};
pub use verify::{resolvent_check, verify, Check, ResolventRow, Suite};

use crate::dynamics::dissipativity_report;
use crate::energy::{decay_fit, envelope_check, DecayFit, DecayModel, EnergyLedger};
use crate::error::{Error, Result};
use crate::kernel::ConvexGauge;
use crate::simulation::{initial_state, simulate};
use crate::state::Model;

/// Environment variable naming the output directory.
pub const OUTPUT_DIR_VAR: &str = "MICROPOLAR_OUTPUT_DIR";

pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Base name for outputs derived from an input path.
pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeSummary {
    pub gauge: ConvexGauge,
    pub c1: f64,
    pub holds: bool,
    pub c2_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub kernel: String,
    pub scheme: String,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub steps: usize,
    pub records: usize,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub fit_window: (f64, f64),
    /// `None` when the window holds a nonpositive energy.
    pub fit: Option<DecayFit>,
    pub envelope: Option<EnvelopeSummary>,
    /// Largest `|dE/dt + D|` over interior records.
    pub max_energy_rate_residual: Option<f64>,
    /// Largest formula-versus-direct gap of `⟨AU, U⟩_H` over recorded states.
    pub max_dissipativity_gap: f64,
    pub max_resolvent_defect: f64,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub echo: PathBuf,
    pub ledger: PathBuf,
    pub checkpoint: PathBuf,
    pub summary_path: PathBuf,
    pub summary: RunSummary,
    pub ledger_data: EnergyLedger,
}

/// Runs a validated configuration and writes its outputs to `out_dir` under
/// `name`. With `resume`, the run continues from that checkpoint.
pub fn run(cfg: &RunConfig, model: &Model, name: &str, out_dir: &Path, resume: Option<&Path>) -> Result<RunArtifacts> {
    std::fs::create_dir_all(out_dir)?;
    let echo = out_dir.join(format!("{name}.resolved.cfg"));
    std::fs::write(&echo, cfg.echo())?;

    let lyap = cfg.lyapunov(model)?;
    let spec = cfg.run_spec();
    let total = spec.steps()?;
    let (initial, t0) = match resume {
        Some(path) => {
            let c = checkpoint::read_checkpoint(model, BufReader::new(open(path)?))?;
            if c.time > spec.t_end {
                return Err(Error::InvalidInput(format!(
                    "checkpoint time {} is past the horizon {}",
                    c.time, spec.t_end
                )));
            }
            (c.state, c.time)
        }
        None => (initial_state(model, cfg.initial, cfg.history, cfg.seed), 0.0),
    };

    let mut max_gap: f64 = 0.0;
    let every = spec.output_every;
    let out = simulate(model, initial, t0, &spec, &lyap, |step, _, s| {
        if step % every == 0 || step == total {
            max_gap = max_gap.max(dissipativity_report(model, s).gap);
        }
    })?;
    let mut ledger = out.ledger;
    if ledger.len() >= 3 {
        ledger.fill_residuals()?;
    }
    let violations = ledger.invariant_violations(cfg.ledger_slack);
    if let Some(first) = violations.first() {
        return Err(Error::LedgerInvariant(format!("{first} ({} violations)", violations.len())));
    }

    let ledger_path = out_dir.join(format!("{name}.ledger.csv"));
    let mut w = create(&ledger_path)?;
    ledger.write_csv(&mut w)?;
    w.flush()?;

    let ckpt = out_dir.join(format!("{name}.ckpt"));
    checkpoint::write_checkpoint(model, &out.final_state, out.final_time, total, create(&ckpt)?)?;

    let summary = summarize(cfg, &lyap.gauge, &ledger, out.steps, max_gap, out.max_defect, t0);
    let summary_path = out_dir.join(format!("{name}.summary.json"));
    let mut w = create(&summary_path)?;
    serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| Error::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;

    Ok(RunArtifacts {
        echo,
        ledger: ledger_path,
        checkpoint: ckpt,
        summary_path,
        summary,
        ledger_data: ledger,
    })
}

fn summarize(
    cfg: &RunConfig,
    gauge: &ConvexGauge,
    ledger: &EnergyLedger,
    steps: usize,
    max_gap: f64,
    max_defect: f64,
    t0: f64,
) -> RunSummary {
    let times = ledger.times();
    let energies = ledger.energies();
    let window = (cfg.fit_from.unwrap_or(0.2 * cfg.t_end).max(t0), cfg.t_end);
    let model = match gauge {
        ConvexGauge::Linear => DecayModel::Exponential,
        ConvexGauge::Power(_) => DecayModel::Power,
    };
    let fit = decay_fit(&times, &energies, model, window).ok();
    let c1 = match (gauge, cfg.envelope_c1) {
        (_, Some(c1)) => Some(c1),
        (ConvexGauge::Linear, None) => fit.map(|f| f.rate).filter(|r| *r > 0.0),
        (ConvexGauge::Power(r), None) => Some(1.0 / (r * (r - 1.0))),
    };
    let envelope = c1.map(|c1| {
        let check = envelope_check(&times, &energies, *gauge, c1);
        EnvelopeSummary {
            gauge: *gauge,
            c1,
            holds: check.holds,
            c2_min: check.c2_min,
        }
    });
    let residual = ledger
        .records
        .iter()
        .map(|r| r.residual)
        .filter(|r| r.is_finite())
        .map(f64::abs)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    RunSummary {
        kernel: cfg.effective_kernel().map(|k| k.id()).unwrap_or_default(),
        scheme: cfg.scheme.to_string(),
        dt: cfg.dt,
        t_start: t0,
        t_end: cfg.t_end,
        steps,
        records: ledger.len(),
        energy_initial: energies.first().copied().unwrap_or(0.0),
        energy_final: energies.last().copied().unwrap_or(0.0),
        fit_window: window,
        fit,
        envelope,
        max_energy_rate_residual: residual,
        max_dissipativity_gap: max_gap,
        max_resolvent_defect: max_defect,
    }
}

/// Opens a file, naming it in the error.
pub(crate) fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Reads a ledger CSV.
pub fn read_ledger(path: &Path) -> Result<EnergyLedger> {
    EnergyLedger::read_csv(BufReader::new(open(path)?))
}

/// Writes plot data for `ledger_path` into `out_dir`; returns the file path.
pub fn plot(ledger_path: &Path, kind: PlotKind, out_dir: &Path) -> Result<PathBuf> {
    let ledger = read_ledger(ledger_path)?;
    let text = emit_plotdata(&ledger, kind)?;
    std::fs::create_dir_all(out_dir)?;
    let base = stem(ledger_path);
    let base = base.strip_suffix(".ledger").unwrap_or(&base);
    let path = out_dir.join(format!("{base}.{kind}.dat"));
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Writes `name,value,bound,pass` lines.
pub fn write_report<W: Write>(checks: &[Check], mut w: W) -> Result<()> {
    writeln!(w, "check,value,bound,pass")?;
    for c in checks {
        writeln!(w, "{},{:e},{:e},{}", c.name, c.value, c.bound, c.pass)?;
    }
    Ok(())
}
