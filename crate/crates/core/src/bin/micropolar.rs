use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use micropolar::cli::{self, PlotKind, Suite};
use micropolar::error::Result;

/// Micropolar thermoelasticity with frictional damping and infinite memory.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write ledger, checkpoint and summary.
    Run {
        config: PathBuf,
        /// Override a configuration key.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a property suite at the configuration's scale.
    Verify {
        config: PathBuf,
        /// operators, dissipativity, history-oracle, resolvent or energy-law
        #[arg(long)]
        suite: Suite,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Turn a ledger into plot data.
    Plot {
        ledger: PathBuf,
        /// semilog-energy, loglog-energy or dissipation-budget
        #[arg(long)]
        kind: PlotKind,
    },
    /// Solve the resolvent equation for random right-hand sides.
    ResolventCheck {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,50")]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

fn execute(cmd: Command) -> Result<()> {
    let out = cli::output_dir();
    match cmd {
        Command::Run { config, set, resume } => {
            let (cfg, model) = cli::load_config(&config, &set)?;
            let art = cli::run(&cfg, &model, &cli::stem(&config), &out, resume.as_deref())?;
            println!("ledger     {}", art.ledger.display());
            println!("checkpoint {}", art.checkpoint.display());
            println!("summary    {}", art.summary_path.display());
            let s = &art.summary;
            println!("E: {:e} -> {:e} over {} steps", s.energy_initial, s.energy_final, s.steps);
            if let Some(fit) = s.fit {
                println!("fit: {:?} rate {:.6} (R^2 {:.5})", fit.model, fit.rate, fit.r_squared);
            }
        }
        Command::Verify { config, suite, set } => {
            let (cfg, model) = cli::load_config(&config, &set)?;
            let checks = cli::verify(&cfg, &model, suite)?;
            cli::write_report(&checks, std::io::stdout().lock())?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("{}.verify-{suite}.csv", cli::stem(&config)));
            cli::write_report(&checks, std::fs::File::create(path)?)?;
        }
        Command::Plot { ledger, kind } => {
            let path = cli::plot(&ledger, kind, &out)?;
            println!("{}", path.display());
        }
        Command::ResolventCheck {
            config,
            set,
            lambda,
            samples,
        } => {
            let (cfg, model) = cli::load_config(&config, &set)?;
            let rows = cli::resolvent_check(&model, &lambda, samples, cfg.seed)?;
            println!("lambda,sample,iterations,value,bound,pass");
            let mut failed = 0;
            for r in rows {
                let (sample, bound) = match r.sample {
                    Some(i) => (i.to_string(), micropolar::dynamics::DEFECT_BOUND),
                    None => ("zero".to_string(), 1e-12),
                };
                let pass = r.defect <= bound;
                failed += usize::from(!pass);
                println!("{},{},{},{:e},{:e},{}", r.lambda, sample, r.iterations, r.defect, bound, pass);
            }
            if failed > 0 {
                eprintln!("{failed} resolvent solves exceeded their bound");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
