//! Plain-text run configuration: one `dotted.key = value` per line, `#`
//! starts a comment, blank lines are ignored. Every key has a default, so an
//! empty file is a valid configuration.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dynamics::{Scheme, Stepper};
use crate::energy::{equivalence_constants, LyapunovParams};
use crate::error::{Error, Result};
use crate::field::Grid;
use crate::history::{self, SGrid};
use crate::kernel::{ConvexGauge, Kernel, KernelFamily};
use crate::moduli::Moduli;
use crate::simulation::{HistoryPreset, InitialPreset, RunSpec};
use crate::state::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Exponential,
    Polynomial,
    Tabulated,
    Zero,
}

impl std::str::FromStr for KernelKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exponential" => Ok(KernelKind::Exponential),
            "polynomial" => Ok(KernelKind::Polynomial),
            "tabulated" => Ok(KernelKind::Tabulated),
            "zero" => Ok(KernelKind::Zero),
            other => Err(format!("unknown kernel family '{other}'")),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Exponential => "exponential",
            KernelKind::Polynomial => "polynomial",
            KernelKind::Tabulated => "tabulated",
            KernelKind::Zero => "zero",
        })
    }
}

/// The relaxation function as written in the file. Only the parameters of
/// the selected family are used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSpec {
    pub family: KernelKind,
    pub amplitude: f64,
    /// Exponential decay rate.
    pub rate: f64,
    /// Polynomial exponent `q`.
    pub exponent: f64,
    pub s: Vec<f64>,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec {
            family: KernelKind::Exponential,
            amplitude: 0.5,
            rate: 2.0,
            exponent: 2.0,
            s: Vec::new(),
            g: Vec::new(),
            dg: Vec::new(),
        }
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self.family {
            KernelKind::Exponential => Kernel::exponential(self.amplitude, self.rate),
            KernelKind::Polynomial => Kernel::polynomial(self.amplitude, self.exponent),
            KernelKind::Tabulated => Kernel::new(KernelFamily::Tabulated {
                s: self.s.clone(),
                g: self.g.clone(),
                dg: self.dg.clone(),
            }),
            KernelKind::Zero => Ok(Kernel::zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub length: f64,
    pub moduli: Moduli,
    pub kernel: KernelSpec,
    /// Number of `s` nodes and the first interval of the geometric grid.
    pub s_nodes: usize,
    pub s_first_step: f64,
    /// Power-gauge exponent override.
    pub gauge_r: Option<f64>,
    pub initial: InitialPreset,
    pub history: HistoryPreset,
    pub seed: u64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    /// Drops the memory term: the kernel becomes `g ≡ 0`.
    pub memory_off: bool,
    /// Drops the frictional damping of the microrotation: `ξ = 0`.
    pub friction_phi_off: bool,
    /// Lyapunov weights; `None` picks the defaults derived from `μ₀`.
    pub eps: Option<f64>,
    pub eps0: Option<f64>,
    pub tau0: f64,
    pub c0c: f64,
    /// Start of the decay-fit window; `None` means `0.2·T`.
    pub fit_from: Option<f64>,
    /// Envelope rate for the power gauge; `None` means `1/(r(r−1))`.
    pub envelope_c1: Option<f64>,
    /// Allowed energy increase between consecutive ledger records.
    pub ledger_slack: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 16,
            length: std::f64::consts::PI,
            moduli: Moduli::default(),
            kernel: KernelSpec::default(),
            s_nodes: history::DEFAULT_NODES,
            s_first_step: history::DEFAULT_FIRST_STEP,
            gauge_r: None,
            initial: InitialPreset::RandomSmooth,
            history: HistoryPreset::Decaying,
            seed: 1,
            scheme: Scheme::ImplicitEuler,
            dt: 2e-2,
            t_end: 20.0,
            output_every: 10,
            memory_off: false,
            friction_phi_off: false,
            eps: None,
            eps0: None,
            tau0: 1.0,
            c0c: 1.0,
            fit_from: None,
            envelope_c1: None,
            ledger_slack: 1e-10,
        }
    }
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("'{v}' is not finite"))
    }
}

fn parse_opt_f64(v: &str) -> std::result::Result<Option<f64>, String> {
    if v == "auto" || v == "none" {
        Ok(None)
    } else {
        parse_f64(v).map(Some)
    }
}

fn parse_list(v: &str) -> std::result::Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| parse_f64(x.trim())).collect()
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

fn parse_usize(v: &str) -> std::result::Result<usize, String> {
    v.parse().map_err(|_| format!("'{v}' is not a nonnegative integer"))
}

fn opt_to_string(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

fn list_to_string(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Every recognized key in echo order.
    pub const KEYS: [&'static str; 37] = [
        "grid.n",
        "grid.L",
        "moduli.mu",
        "moduli.kappa",
        "moduli.lambda",
        "moduli.gamma",
        "moduli.alpha",
        "moduli.beta",
        "moduli.d",
        "moduli.k",
        "moduli.b",
        "moduli.alpha0",
        "moduli.xi",
        "moduli.xi0",
        "kernel.family",
        "kernel.amplitude",
        "kernel.rate",
        "kernel.exponent",
        "kernel.s",
        "kernel.g",
        "kernel.dg",
        "history.nodes",
        "history.first_step",
        "gauge.r",
        "initial.preset",
        "initial.history",
        "initial.seed",
        "time.scheme",
        "time.dt",
        "time.T",
        "time.output_every",
        "scenario.memory_off",
        "scenario.friction_phi_off",
        "lyapunov.eps",
        "lyapunov.eps0",
        "lyapunov.tau0",
        "lyapunov.c0c",
    ];

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        let m = &mut self.moduli;
        match key {
            "grid.n" => self.n = parse_usize(v)?,
            "grid.L" => self.length = parse_f64(v)?,
            "moduli.mu" => m.mu = parse_f64(v)?,
            "moduli.kappa" => m.kappa = parse_f64(v)?,
            "moduli.lambda" => m.lambda = parse_f64(v)?,
            "moduli.gamma" => m.gamma = parse_f64(v)?,
            "moduli.alpha" => m.alpha = parse_f64(v)?,
            "moduli.beta" => m.beta = parse_f64(v)?,
            "moduli.d" => m.d = parse_f64(v)?,
            "moduli.k" => m.k = parse_f64(v)?,
            "moduli.b" => m.b = parse_f64(v)?,
            "moduli.alpha0" => m.alpha0 = parse_f64(v)?,
            "moduli.xi" => m.xi = parse_f64(v)?,
            "moduli.xi0" => m.xi0 = parse_f64(v)?,
            "kernel.family" => self.kernel.family = v.parse()?,
            "kernel.amplitude" => self.kernel.amplitude = parse_f64(v)?,
            "kernel.rate" => self.kernel.rate = parse_f64(v)?,
            "kernel.exponent" => self.kernel.exponent = parse_f64(v)?,
            "kernel.s" => self.kernel.s = parse_list(v)?,
            "kernel.g" => self.kernel.g = parse_list(v)?,
            "kernel.dg" => self.kernel.dg = parse_list(v)?,
            "history.nodes" => self.s_nodes = parse_usize(v)?,
            "history.first_step" => self.s_first_step = parse_f64(v)?,
            "gauge.r" => self.gauge_r = parse_opt_f64(v)?,
            "initial.preset" => self.initial = v.parse().map_err(|e: Error| e.to_string())?,
            "initial.history" => self.history = v.parse().map_err(|e: Error| e.to_string())?,
            "initial.seed" => self.seed = v.parse().map_err(|_| format!("'{v}' is not a seed"))?,
            "time.scheme" => self.scheme = v.parse().map_err(|e: Error| e.to_string())?,
            "time.dt" => self.dt = parse_f64(v)?,
            "time.T" => self.t_end = parse_f64(v)?,
            "time.output_every" => self.output_every = parse_usize(v)?,
            "scenario.memory_off" => self.memory_off = parse_bool(v)?,
            "scenario.friction_phi_off" => self.friction_phi_off = parse_bool(v)?,
            "lyapunov.eps" => self.eps = parse_opt_f64(v)?,
            "lyapunov.eps0" => self.eps0 = parse_opt_f64(v)?,
            "lyapunov.tau0" => self.tau0 = parse_f64(v)?,
            "lyapunov.c0c" => self.c0c = parse_f64(v)?,
            "analysis.fit_from" => self.fit_from = parse_opt_f64(v)?,
            "analysis.envelope_c1" => self.envelope_c1 = parse_opt_f64(v)?,
            "analysis.ledger_slack" => self.ledger_slack = parse_f64(v)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Parses configuration text on top of the defaults. Does not validate.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected 'key = value', found '{line}'"),
            })?;
            cfg.set(key.trim(), value).map_err(|message| Error::Parse { line: i + 1, message })?;
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("override '{assignment}' is not key=value")))?;
        self.set(key.trim(), value)
            .map_err(|m| Error::InvalidInput(format!("override '{assignment}': {m}")))
    }

    /// The fully resolved configuration in the input format. Loading it back
    /// gives an identical configuration.
    pub fn echo(&self) -> String {
        let m = &self.moduli;
        let k = &self.kernel;
        let values: [String; 37] = [
            self.n.to_string(),
            self.length.to_string(),
            m.mu.to_string(),
            m.kappa.to_string(),
            m.lambda.to_string(),
            m.gamma.to_string(),
            m.alpha.to_string(),
            m.beta.to_string(),
            m.d.to_string(),
            m.k.to_string(),
            m.b.to_string(),
            m.alpha0.to_string(),
            m.xi.to_string(),
            m.xi0.to_string(),
            k.family.to_string(),
            k.amplitude.to_string(),
            k.rate.to_string(),
            k.exponent.to_string(),
            list_to_string(&k.s),
            list_to_string(&k.g),
            list_to_string(&k.dg),
            self.s_nodes.to_string(),
            self.s_first_step.to_string(),
            opt_to_string(self.gauge_r),
            self.initial.to_string(),
            self.history.to_string(),
            self.seed.to_string(),
            self.scheme.to_string(),
            self.dt.to_string(),
            self.t_end.to_string(),
            self.output_every.to_string(),
            self.memory_off.to_string(),
            self.friction_phi_off.to_string(),
            opt_to_string(self.eps),
            opt_to_string(self.eps0),
            self.tau0.to_string(),
            self.c0c.to_string(),
        ];
        let mut out = String::from("# resolved configuration\n");
        for (key, value) in Self::KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key} = {value}");
        }
        let _ = writeln!(out, "analysis.fit_from = {}", opt_to_string(self.fit_from));
        let _ = writeln!(out, "analysis.envelope_c1 = {}", opt_to_string(self.envelope_c1));
        let _ = writeln!(out, "analysis.ledger_slack = {}", self.ledger_slack);
        out
    }

    /// Kernel after scenario flags.
    pub fn effective_kernel(&self) -> Result<Kernel> {
        if self.memory_off {
            Ok(Kernel::zero())
        } else {
            self.kernel.build()
        }
    }

    /// Moduli after scenario flags.
    pub fn effective_moduli(&self) -> Moduli {
        let mut m = self.moduli;
        if self.friction_phi_off {
            m.xi = 0.0;
        }
        m
    }

    /// Builds and validates the model.
    pub fn model(&self) -> Result<Model> {
        let grid = Grid::new(self.n, self.length).map_err(|e| match e {
            Error::InvalidInput(m) => Error::Validation(m),
            other => other,
        })?;
        let kernel = self.effective_kernel()?;
        let g1 = kernel.check_g1(self.moduli.gamma);
        if !g1.d0.is_finite() {
            return Err(Error::Validation(format!(
                "kernel condition g′ ≥ −d0·g violated (no finite d0 for {})",
                kernel.id()
            )));
        }
        let sgrid = SGrid::for_kernel(&kernel, self.s_nodes, self.s_first_step)?;
        Model::with_sgrid(grid, self.effective_moduli(), kernel, sgrid)
    }

    /// Gauge of the decay envelope: linear for exponentially decaying
    /// kernels, `s^r` otherwise.
    pub fn gauge(&self, model: &Model) -> Result<ConvexGauge> {
        if model.kernel.is_zero() {
            return Ok(ConvexGauge::Linear);
        }
        match self.gauge_r {
            Some(r) => Ok(model.kernel.check_g2_with(Some(r))?.gauge),
            None => Ok(model.kernel.default_gauge()),
        }
    }

    pub fn lyapunov(&self, model: &Model) -> Result<LyapunovParams> {
        let eq = equivalence_constants(model)?;
        let mut p = LyapunovParams::defaults(&eq, self.gauge(model)?);
        p.tau0 = self.tau0;
        p.c0c = self.c0c;
        if let Some(eps) = self.eps {
            p.eps = eps;
            p.eps0 = 0.5 * eps / self.c0c;
        }
        if let Some(eps0) = self.eps0 {
            p.eps0 = eps0;
        }
        if !(p.eps > 0.0 && p.eps < eq.eps_max) {
            return Err(Error::Validation(format!(
                "Lyapunov weight ε = {} must lie in (0, 1/μ0) = (0, {})",
                p.eps, eq.eps_max
            )));
        }
        if !(p.eps0 > 0.0 && p.eps0 < p.eps / p.c0c) {
            return Err(Error::Validation(format!(
                "Lyapunov weight ε0 = {} must lie in (0, ε/c0C) = (0, {})",
                p.eps0,
                p.eps / p.c0c
            )));
        }
        if !(p.tau0 > 0.0 && p.c0c > 0.0) {
            return Err(Error::Validation("τ0 and c0C must be positive".into()));
        }
        Ok(p)
    }

    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            scheme: self.scheme,
            dt: self.dt,
            t_end: self.t_end,
            output_every: self.output_every,
        }
    }

    /// Full validation: model, gauge, Lyapunov weights, time settings and
    /// the explicit stability bound.
    pub fn validate(&self) -> Result<Model> {
        let model = self.model()?;
        self.lyapunov(&model)?;
        self.run_spec().steps().map_err(|e| match e {
            Error::InvalidInput(m) => Error::Validation(m),
            other => other,
        })?;
        if !(self.ledger_slack >= 0.0) {
            return Err(Error::Validation("ledger slack must be nonnegative".into()));
        }
        if let Some(t) = self.fit_from {
            if !(t >= 0.0 && t < self.t_end) {
                return Err(Error::Validation(format!("fit window start {t} outside [0, T)")));
            }
        }
        if let Some(c1) = self.envelope_c1 {
            if !(c1 > 0.0) {
                return Err(Error::Validation("envelope rate must be positive".into()));
            }
        }
        Stepper::new(&model, self.scheme, self.dt)?;
        Ok(model)
    }
}

/// Reads, applies overrides and validates a configuration file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<(RunConfig, Model)> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut super::open(path)?, &mut text)?;
    let mut cfg = RunConfig::parse(&text)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    let model = cfg.validate()?;
    Ok((cfg, model))
}
