//! Property suites run at the scale of a configuration. Failures are
//! report entries, not errors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use crate::dynamics::{dissipativity_report, resolvent_solve, Scheme, DEFECT_BOUND};
use crate::energy::{energy_rate_residual, LyapunovParams};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::history::{self, HistoryBuffer, SGrid};
use crate::kernel::{ConvexGauge, Kernel};
use crate::krylov::GmresOptions;
use crate::quadrature;
use crate::simulation::{initial_state, simulate, RunSpec};
use crate::state::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Operators,
    Dissipativity,
    HistoryOracle,
    Resolvent,
    EnergyLaw,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        match s {
            "operators" => Ok(Suite::Operators),
            "dissipativity" => Ok(Suite::Dissipativity),
            "history-oracle" => Ok(Suite::HistoryOracle),
            "resolvent" => Ok(Suite::Resolvent),
            "energy-law" => Ok(Suite::EnergyLaw),
            other => Err(Error::InvalidInput(format!("unknown suite '{other}'"))),
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Operators => "operators",
            Suite::Dissipativity => "dissipativity",
            Suite::HistoryOracle => "history-oracle",
            Suite::Resolvent => "resolvent",
            Suite::EnergyLaw => "energy-law",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            bound,
            pass: value <= bound,
        }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            bound,
            pass: value >= bound,
        }
    }
}

pub fn verify(cfg: &RunConfig, model: &Model, suite: Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::Operators => Ok(operators(model, cfg.seed)),
        Suite::Dissipativity => dissipativity(model, cfg.seed),
        Suite::HistoryOracle => history_oracle(cfg, model),
        Suite::Resolvent => {
            let rows = resolvent_check(model, &[0.5, 1.0, 50.0], 20, cfg.seed)?;
            let mut out = Vec::new();
            for lambda in [0.5, 1.0, 50.0] {
                let worst = rows
                    .iter()
                    .filter(|r| r.lambda == lambda && r.sample.is_some())
                    .map(|r| r.defect)
                    .fold(0.0, f64::max);
                out.push(Check::at_most(&format!("resolvent_defect_lambda_{lambda}"), worst, DEFECT_BOUND));
            }
            let zero = rows.iter().filter(|r| r.sample.is_none()).map(|r| r.defect).fold(0.0, f64::max);
            out.push(Check::at_most("resolvent_zero_rhs_norm", zero, 1e-12));
            Ok(out)
        }
        Suite::EnergyLaw => energy_law(cfg, model),
    }
}

fn operators(model: &Model, seed: u64) -> Vec<Check> {
    let g = &model.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut identity, mut ibp, mut curl, mut poincare) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let u = g.random_vector(&mut rng);
        let w = g.random_vector(&mut rng);
        let f = g.random_scalar(&mut rng);
        identity = identity.max(g.vector_identity_residual(&u) / u.max_abs());
        let nf = g.l2_scalar(&f, &f).sqrt();
        let nw = g.l2(&w, &w).sqrt();
        let nu = g.l2(&u, &u).sqrt();
        ibp = ibp.max((g.l2(&g.grad(&f), &w) + g.l2_scalar(&f, &g.div(&w))).abs() / (nf * nw));
        curl = curl.max((g.l2(&g.curl(&u), &w) - g.l2(&u, &g.curl(&w))).abs() / (nu * nw));
        let grad = g.h1_semi(&w, &w);
        poincare = poincare.max(g.l2(&w, &w) / (g.discrete_poincare_constant() * grad));
    }
    vec![
        Check::at_most("vector_identity_residual", identity, 1e-12),
        Check::at_most("integration_by_parts_gap", ibp, 1e-12),
        Check::at_most("curl_symmetry_gap", curl, 1e-12),
        Check::at_most("poincare_ratio", poincare, 1.0 + 1e-12),
    ]
}

/// `η(s) = (1 − e^{−s})w₁ + s·e^{−s}w₂`, smooth in `s`, sampled on a grid.
fn smooth_history(sgrid: std::sync::Arc<SGrid>, w1: &VectorField, w2: &VectorField) -> Result<HistoryBuffer> {
    let eta = sgrid.nodes().iter().map(|&s| w1.combine(1.0 - (-s).exp(), w2, s * (-s).exp())).collect();
    HistoryBuffer::from_nodes(sgrid, eta)
}

fn dissipativity(model: &Model, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sign, mut gap_free, mut gap_mem) = (f64::NEG_INFINITY, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let mut s = model.random_state(&mut rng);
        let scale = model.inner(&s, &s);
        let r = dissipativity_report(model, &s);
        sign = sign.max(r.direct_value / scale);
        gap_mem = gap_mem.max(r.gap / scale);
        s.eta.scale(0.0);
        let scale = model.inner(&s, &s);
        gap_free = gap_free.max(dissipativity_report(model, &s).gap / scale);
    }
    let mut checks = vec![
        Check::at_most("max_normalized_dissipation", sign, 0.0),
        Check::at_most("gap_without_memory", gap_free, 1e-10),
        Check::at_most("gap_with_rough_memory", gap_mem, f64::INFINITY),
    ];
    if !model.kernel.is_zero() {
        let factor = refinement_factor(model, &mut rng)?;
        checks.push(Check::at_least("gap_refinement_factor", factor, 1.8));
    }
    Ok(checks)
}

/// Smallest ratio of successive formula-versus-direct gaps when the
/// `s`-grid is halved twice, over three smooth histories.
pub fn refinement_factor(model: &Model, rng: &mut ChaCha8Rng) -> Result<f64> {
    let k = &model.kernel;
    let g1 = model.sgrid.refined(k)?;
    let g2 = g1.refined(k)?;
    let models = [
        model.clone(),
        Model::with_sgrid(model.grid, model.moduli, k.clone(), g1)?,
        Model::with_sgrid(model.grid, model.moduli, k.clone(), g2)?,
    ];
    let mut worst = f64::INFINITY;
    for _ in 0..3 {
        let base = model.random_state(rng);
        let w1 = model.grid.random_vector(rng);
        let w2 = model.grid.random_vector(rng);
        let mut gaps = Vec::new();
        for m in &models {
            let mut s = base.clone();
            s.eta = smooth_history(m.sgrid.clone(), &w1, &w2)?;
            gaps.push(dissipativity_report(m, &s).gap / m.inner(&s, &s));
        }
        worst = worst.min(gaps[0] / gaps[1]).min(gaps[1] / gaps[2]);
    }
    Ok(worst)
}

/// `∫₀^∞ g(s)(φ(t) − φ(t − s)) ds` from a stored trajectory sampled every
/// `dt` (linear in time between samples) and the separable initial history
/// `φ(−σ) = p(σ)·φ₀` before it.
pub fn convolution_memory<P: Fn(f64) -> f64>(
    kernel: &Kernel,
    trajectory: &[VectorField],
    dt: f64,
    profile: P,
) -> VectorField {
    let k = trajectory.len() - 1;
    let t = k as f64 * dt;
    let now = &trajectory[k];
    let mut out = now.scaled(kernel.g0());
    for i in 0..k {
        let (a, b) = (i as f64 * dt, (i + 1) as f64 * dt);
        let wa = quadrature::integrate(|tau| kernel.value(t - tau) * (b - tau) / dt, a, b, 1e-12);
        let wb = quadrature::integrate(|tau| kernel.value(t - tau) * (tau - a) / dt, a, b, 1e-12);
        out.axpy(-wa, &trajectory[i]);
        out.axpy(-wb, &trajectory[i + 1]);
    }
    let upper = kernel.truncation_point();
    let past = quadrature::integrate_decades(|sigma| kernel.value(t + sigma) * profile(sigma), upper, 1e-12);
    out.axpy(-past, &trajectory[0].scaled(1.0 / profile(0.0)));
    out
}

fn history_oracle(cfg: &RunConfig, model: &Model) -> Result<Vec<Check>> {
    let g = &model.grid;
    let horizon = 2.0f64.min(cfg.t_end).max(cfg.dt);
    let steps = (horizon / cfg.dt).round().max(1.0);
    let spec = RunSpec {
        scheme: cfg.scheme,
        dt: cfg.dt,
        t_end: steps * cfg.dt,
        output_every: steps as usize,
    };
    let lyap = LyapunovParams {
        eps: 0.0,
        eps0: 0.0,
        tau0: 1.0,
        c0c: 1.0,
        gauge: ConvexGauge::Linear,
    };
    let initial = initial_state(model, cfg.initial, cfg.history, cfg.seed);
    let mut trajectory = Vec::new();
    let (mut eta0, mut sign, mut bound_gap) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let d0 = model.kernel.d0();
    let out = simulate(model, initial, 0.0, &spec, &lyap, |_, _, s| {
        trajectory.push(s.phi.clone());
        eta0 = eta0.max(s.eta.nodes()[0].max_abs());
        let diss = history::history_dissipation(g, &s.eta);
        let energy = history::history_energy(g, &s.eta);
        sign = sign.max(diss);
        bound_gap = bound_gap.max(diss.abs() - 2.0 * d0 * energy);
    })?;
    let mut checks = vec![
        Check::at_most("eta_at_zero", eta0, 0.0),
        Check::at_most("history_dissipation_sign", sign, 0.0),
        Check::at_most("history_dissipation_bound_excess", bound_gap, 1e-12),
    ];
    if !model.kernel.is_zero() && cfg.history.profile(0.0) != 0.0 {
        let buffer = history::memory_integral(g, &out.final_state.eta);
        let oracle = g.laplacian(&convolution_memory(&model.kernel, &trajectory, cfg.dt, |s| cfg.history.profile(s)));
        let diff = buffer.combine(1.0, &oracle, -1.0);
        let err = g.l2(&diff, &diff).sqrt();
        let scale = trajectory
            .iter()
            .map(|p| {
                let l = g.laplacian(p);
                g.l2(&l, &l).sqrt()
            })
            .fold(0.0, f64::max);
        let bound = 5.0 * (model.sgrid.max_step() + cfg.dt) * scale;
        checks.push(Check::at_most("dafermos_equivalence_error", err, bound));
    }
    Ok(checks)
}

fn energy_law(cfg: &RunConfig, model: &Model) -> Result<Vec<Check>> {
    let bound = crate::dynamics::explicit_step_bound(model);
    let mut dt = 4e-3;
    while dt > bound {
        dt *= 0.5;
    }
    let horizon = 100.0 * dt;
    let initial = initial_state(model, cfg.initial, cfg.history, cfg.seed);
    let lyap = cfg.lyapunov(model)?;
    let mut residuals = Vec::new();
    let mut violations = 0;
    for level in 0..3 {
        let h = dt / f64::powi(2.0, level);
        let spec = RunSpec {
            scheme: Scheme::Rk4Explicit,
            dt: h,
            t_end: horizon,
            output_every: 1,
        };
        let out = simulate(model, initial.clone(), 0.0, &spec, &lyap, |_, _, _| {})?;
        violations += out.ledger.invariant_violations(cfg.ledger_slack).len();
        let scale = out.ledger.records[0].e.max(f64::MIN_POSITIVE);
        residuals.push(energy_rate_residual(&out.ledger.records)?.max / scale);
    }
    let order = (residuals[0] / residuals[1]).log2().min((residuals[1] / residuals[2]).log2());
    let mut checks = vec![Check::at_most("ledger_invariant_violations", violations as f64, 0.0)];
    if residuals[0] > 1e-13 {
        checks.push(Check::at_least("energy_rate_residual_order", order, 1.9));
    }
    checks.push(Check::at_most("energy_rate_residual_finest", residuals[2], f64::INFINITY));
    Ok(checks)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventRow {
    pub lambda: f64,
    /// `None` for the zero right-hand side, whose row holds `‖U‖_H`.
    pub sample: Option<usize>,
    pub iterations: usize,
    /// `‖λU − AU − F‖_H/‖F‖_H`
    pub defect: f64,
}

/// Solves `(λ − A)U = F` for `samples` random `F` at every `λ`, plus `F = 0`.
pub fn resolvent_check(model: &Model, lambdas: &[f64], samples: usize, seed: u64) -> Result<Vec<ResolventRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = GmresOptions::default();
    let mut rows = Vec::new();
    for &lambda in lambdas {
        for i in 0..samples {
            let f = model.random_state(&mut rng);
            let (_, rep) = match resolvent_solve(model, &f, lambda, None, opts) {
                Ok(v) => v,
                Err(Error::ResolventDefect { defect, .. }) => {
                    rows.push(ResolventRow {
                        lambda,
                        sample: Some(i),
                        iterations: opts.max_iter,
                        defect,
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            rows.push(ResolventRow {
                lambda,
                sample: Some(i),
                iterations: rep.iterations,
                defect: rep.defect,
            });
        }
        let (u, rep) = resolvent_solve(model, &model.zero_state(), lambda, None, opts)?;
        rows.push(ResolventRow {
            lambda,
            sample: None,
            iterations: rep.iterations,
            defect: model.norm(&u),
        });
    }
    Ok(rows)
}
