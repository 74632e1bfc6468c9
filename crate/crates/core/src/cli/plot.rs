//! Plain-text plot data from an energy ledger. Lines starting with `#` are
//! comments; the last comment line names the columns.

use std::fmt::Write as _;

use crate::energy::EnergyLedger;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// `(t, ln E)`
    SemilogEnergy,
    /// `(ln(1 + t), ln E)`
    LoglogEnergy,
    /// The five dissipation channels and `−dE/dt` at interior records.
    DissipationBudget,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<PlotKind> {
        match s {
            "semilog-energy" => Ok(PlotKind::SemilogEnergy),
            "loglog-energy" => Ok(PlotKind::LoglogEnergy),
            "dissipation-budget" => Ok(PlotKind::DissipationBudget),
            other => Err(Error::InvalidInput(format!("unknown plot kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for PlotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlotKind::SemilogEnergy => "semilog-energy",
            PlotKind::LoglogEnergy => "loglog-energy",
            PlotKind::DissipationBudget => "dissipation-budget",
        })
    }
}

pub fn emit_plotdata(ledger: &EnergyLedger, kind: PlotKind) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# {kind}");
    match kind {
        PlotKind::SemilogEnergy | PlotKind::LoglogEnergy => {
            let kept: Vec<_> = ledger.records.iter().filter(|r| r.e > 0.0).collect();
            let _ = writeln!(out, "# dropped {} records with nonpositive E", ledger.len() - kept.len());
            let x_name = if kind == PlotKind::SemilogEnergy { "t" } else { "ln(1+t)" };
            let _ = writeln!(out, "# {x_name} ln(E)");
            for r in kept {
                let x = if kind == PlotKind::SemilogEnergy { r.t } else { r.t.ln_1p() };
                let _ = writeln!(out, "{:e} {:e}", x, r.e.ln());
            }
        }
        PlotKind::DissipationBudget => {
            if ledger.len() < 3 {
                return Err(Error::InvalidInput("dissipation budget needs at least 3 records".into()));
            }
            let _ = writeln!(out, "# dropped 0 records with nonpositive E");
            let _ = writeln!(out, "# t D_u D_phi D_gradtheta D_Theta D_memory -dE/dt");
            for w in ledger.records.windows(3) {
                let r = &w[1];
                let rate = -(w[2].e - w[0].e) / (w[2].t - w[0].t);
                let _ = writeln!(
                    out,
                    "{:e} {:e} {:e} {:e} {:e} {:e} {:e}",
                    r.t, r.d_u, r.d_phi, r.d_gradtheta, r.d_theta, r.d_memory, rate
                );
            }
        }
    }
    Ok(out)
}
