//! Initial-data presets and the time loop that fills an energy ledger.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Scheme, Stepper};
use crate::energy::{self, EnergyLedger, LyapunovParams};
use crate::error::{Error, Result};
use crate::history;
use crate::state::{Model, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPreset {
    /// Lowest sine mode in every displacement, microrotation and temperature component.
    Eigenmode,
    /// Random combination of the lowest 2³ sine modes in every field.
    RandomSmooth,
    /// Gaussian temperature bump at the box center, everything else at rest.
    ThermalPulse,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryPreset {
    /// `φ(−s) = φ(0)`: no history.
    Static,
    /// `φ(−s) = e^{−s}φ(0)`
    Decaying,
    /// `φ(−s) = cos(s)·φ(0)`
    Cosine,
}

impl HistoryPreset {
    /// Profile `p(s)` with `φ(x, −s) = p(s)·φ(x, 0)`.
    pub fn profile(self, s: f64) -> f64 {
        match self {
            HistoryPreset::Static => 1.0,
            HistoryPreset::Decaying => (-s).exp(),
            HistoryPreset::Cosine => s.cos(),
        }
    }
}

macro_rules! preset_names {
    ($ty:ty { $($variant:ident => $name:literal),* $(,)? }) => {
        impl std::str::FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(<$ty>::$variant),)*
                    other => Err(Error::InvalidInput(format!("unknown preset '{other}'"))),
                }
            }
        }
        impl std::fmt::Display for $ty {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name,)* })
            }
        }
    };
}

preset_names!(InitialPreset {
    Eigenmode => "eigenmode",
    RandomSmooth => "random-smooth",
    ThermalPulse => "thermal-pulse",
    Zero => "zero",
});

preset_names!(HistoryPreset {
    Static => "static",
    Decaying => "decaying",
    Cosine => "cosine",
});

/// Builds `U(0)` from a preset; the history is derived from `φ(0)`.
pub fn initial_state(model: &Model, preset: InitialPreset, hist: HistoryPreset, seed: u64) -> State {
    let g = &model.grid;
    let k = std::f64::consts::PI / g.length();
    let mode = |x: [f64; 3]| (k * x[0]).sin() * (k * x[1]).sin() * (k * x[2]).sin();
    let mut s = model.zero_state();
    match preset {
        InitialPreset::Eigenmode => {
            s.u = g.vector_from(|x| [mode(x), 0.0, 0.0]);
            s.phi = g.vector_from(|x| [0.0, 0.5 * mode(x), 0.0]);
            s.theta = g.scalar_from(mode);
        }
        InitialPreset::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            s.u = g.random_smooth_vector(&mut rng, 2);
            s.v = g.random_smooth_vector(&mut rng, 2);
            s.phi = g.random_smooth_vector(&mut rng, 2);
            s.psi = g.random_smooth_vector(&mut rng, 2);
            s.theta = g.random_smooth_scalar(&mut rng, 2);
            s.big_theta = g.random_smooth_scalar(&mut rng, 2);
        }
        InitialPreset::ThermalPulse => {
            let c = 0.5 * g.length();
            let w = 0.15 * g.length();
            s.theta = g.scalar_from(|x| {
                let r2 = (x[0] - c).powi(2) + (x[1] - c).powi(2) + (x[2] - c).powi(2);
                (-r2 / (w * w)).exp()
            });
        }
        InitialPreset::Zero => {}
    }
    s.eta = history::init_separable(model.sgrid.clone(), &s.phi, |x| hist.profile(x));
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSpec {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Record every this many steps.
    pub output_every: usize,
}

impl RunSpec {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || self.output_every == 0 {
            return Err(Error::InvalidInput(
                "time settings need dt > 0, T >= 0 and output_every >= 1".into(),
            ));
        }
        let steps = (self.t_end / self.dt).round();
        if (steps * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "horizon {} is not a whole number of steps of {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: State,
    pub final_time: f64,
    pub ledger: EnergyLedger,
    pub steps: usize,
    /// Worst resolvent defect over the implicit steps.
    pub max_defect: f64,
}

/// Advances `initial` from `t0` to `spec.t_end`, recording the ledger every
/// `output_every` steps (and at both ends). `observer` sees every state.
pub fn simulate<O>(
    model: &Model,
    initial: State,
    t0: f64,
    spec: &RunSpec,
    lyap: &LyapunovParams,
    mut observer: O,
) -> Result<RunOutput>
where
    O: FnMut(usize, f64, &State),
{
    let total = spec.steps()?;
    let first = (t0 / spec.dt).round() as usize;
    let mut stepper = Stepper::new(model, spec.scheme, spec.dt)?;
    let mut ledger = EnergyLedger::new();
    let mut s = initial;
    observer(first, t0, &s);
    ledger.push(energy::record(model, &s, t0, lyap));
    for step in first + 1..=total {
        s = stepper.step(model, &s).map_err(|e| Error::AtStep {
            step,
            source: Box::new(e),
        })?;
        let t = step as f64 * spec.dt;
        observer(step, t, &s);
        if step % spec.output_every == 0 || step == total {
            ledger.push(energy::record(model, &s, t, lyap));
        }
    }
    Ok(RunOutput {
        final_time: total as f64 * spec.dt,
        final_state: s,
        ledger,
        steps: total.saturating_sub(first),
        max_defect: stepper.max_defect,
    })
}

