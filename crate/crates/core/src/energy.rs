//! Energy functionals, the dissipation budget, Lyapunov functionals and
//! decay fits over a ledger of records.

use std::io::{BufRead, Write};

use serde::Serialize;

use crate::dynamics::damping_rate;
use crate::error::{Error, Result};
use crate::history;
use crate::kernel::ConvexGauge;
use crate::state::{Model, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComponents {
    /// Stored elastic, micropolar and memory energy.
    pub e_w: f64,
    /// `½(‖v‖² + ‖ψ‖²)`
    pub e_k: f64,
    pub e_theta: f64,
    pub e: f64,
}

pub fn energy_components(model: &Model, s: &State) -> EnergyComponents {
    let g = &model.grid;
    let m = &model.moduli;
    let curl_gap = g.curl(&s.u).combine(1.0, &s.phi, -1.0);
    let div_u = g.div(&s.u);
    let div_phi = g.div(&s.phi);
    let e_w = 0.5
        * (m.mu * g.h1_semi(&s.u, &s.u)
            + (m.lambda + m.mu + m.kappa) * g.l2_scalar(&div_u, &div_u)
            + m.kappa * g.l2(&curl_gap, &curl_gap)
            + m.kappa * g.l2(&s.phi, &s.phi)
            + model.beta0() * g.h1_semi(&s.phi, &s.phi)
            + (m.alpha + m.beta) * g.l2_scalar(&div_phi, &div_phi))
        + history::history_energy(g, &s.eta);
    let e_k = 0.5 * (g.l2(&s.v, &s.v) + g.l2(&s.psi, &s.psi));
    let mixed = s.theta.combine(1.0, &s.big_theta, m.alpha0);
    let e_theta = 0.5
        * (g.l2_scalar(&mixed, &mixed) / m.alpha0
            + m.thermal_margin() / m.alpha0 * g.l2_scalar(&s.theta, &s.theta)
            + m.alpha0 * m.k * g.h1_semi_scalar(&s.theta, &s.theta));
    EnergyComponents {
        e_w,
        e_k,
        e_theta,
        e: e_w + e_k + e_theta,
    }
}

/// Nonnegative dissipation channels; `−dE/dt` is their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dissipation {
    /// `ξ₀‖v‖²`
    pub d_u: f64,
    /// `ξ‖ψ‖²`
    pub d_phi: f64,
    /// `k‖∇θ‖²`
    pub d_gradtheta: f64,
    /// `(α₀d − 1)‖Θ‖²`
    pub d_theta: f64,
    /// Energy drained from the history by the `s`-transport. This is the
    /// upwind value `Σ wⱼ g(sⱼ)⟨∇(D_s η)ⱼ, ∇ηⱼ⟩`, which converges to
    /// `−½∫∫ g′|∇η|²` as the `s`-grid is refined and makes the discrete
    /// energy balance exact.
    pub d_memory: f64,
}

impl Dissipation {
    pub fn total(&self) -> f64 {
        self.d_u + self.d_phi + self.d_gradtheta + self.d_theta + self.d_memory
    }
}

pub fn dissipation(model: &Model, s: &State) -> Dissipation {
    let g = &model.grid;
    let m = &model.moduli;
    Dissipation {
        d_u: m.xi0 * g.l2(&s.v, &s.v),
        d_phi: m.xi * g.l2(&s.psi, &s.psi),
        d_gradtheta: m.k * g.h1_semi_scalar(&s.theta, &s.theta),
        d_theta: m.thermal_margin() * g.l2_scalar(&s.big_theta, &s.big_theta),
        d_memory: -history::transport_dissipation(g, &s.eta),
    }
}

/// `−dE/dt` with the memory channel taken from the kernel quadrature
/// `−½ Σ wⱼ g′(sⱼ)‖∇ηⱼ‖²` instead of the transport.
pub fn quadrature_dissipation(model: &Model, s: &State) -> f64 {
    -damping_rate(model, s) - history::history_dissipation(&model.grid, &s.eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equivalence {
    /// `|F| ≤ μ₀E`
    pub mu0: f64,
    /// `1/μ₀`
    pub eps_max: f64,
    /// Coercivity constant of the stored energy over `‖∇u‖² + ‖∇φ‖²`.
    pub coercivity: f64,
    /// Discrete Poincaré constant of the grid.
    pub poincare: f64,
}

/// `μ₀ = max(C_P/μ_w, 1)` from `|F| ≤ ½(‖u‖² + ‖v‖² + ‖φ‖² + ‖ψ‖²)`, the
/// discrete Poincaré inequality, and `E_w ≥ ½μ_w(‖∇u‖² + ‖∇φ‖²)`.
pub fn equivalence_constants(model: &Model) -> Result<Equivalence> {
    model.moduli.validate(&model.kernel)?;
    let coercivity = model.moduli.coercivity(&model.kernel);
    if !(coercivity > 0.0) {
        return Err(Error::Validation(format!(
            "stored energy is not coercive over the gradients (μ_w = {coercivity})"
        )));
    }
    let poincare = model.grid.discrete_poincare_constant();
    let mu0 = (poincare / coercivity).max(1.0);
    Ok(Equivalence {
        mu0,
        eps_max: 1.0 / mu0,
        coercivity,
        poincare,
    })
}

/// Parameters of the Lyapunov functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovParams {
    pub eps: f64,
    pub eps0: f64,
    pub tau0: f64,
    /// Aggregate constant `c₀C`.
    pub c0c: f64,
    pub gauge: ConvexGauge,
}

impl LyapunovParams {
    /// `ε = ½/μ₀`, `c₀C = 1`, `ε₀ = ½ε/c₀C`, `τ₀ = 1`.
    pub fn defaults(eq: &Equivalence, gauge: ConvexGauge) -> LyapunovParams {
        let eps = 0.5 / eq.mu0;
        LyapunovParams {
            eps,
            eps0: 0.5 * eps,
            tau0: 1.0,
            c0c: 1.0,
            gauge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lyapunov {
    /// `⟨u, v⟩ + ⟨φ, ψ⟩`
    pub f: f64,
    /// `E + εF`
    pub l: f64,
    /// `τ₀(G₀(ε₀E)/(ε₀E)·L + c₀C·E)`, zero at `E = 0`.
    pub r: f64,
}

pub fn lyapunov_from_energy(f: f64, e: f64, p: &LyapunovParams) -> Lyapunov {
    let l = e + p.eps * f;
    let r = if e > 0.0 {
        p.tau0 * (p.gauge.g0_ratio(p.eps0 * e) * l + p.c0c * e)
    } else {
        0.0
    };
    Lyapunov { f, l, r }
}

pub fn lyapunov_values(model: &Model, s: &State, p: &LyapunovParams) -> Lyapunov {
    let g = &model.grid;
    let f = g.l2(&s.u, &s.v) + g.l2(&s.phi, &s.psi);
    lyapunov_from_energy(f, energy_components(model, s).e, p)
}

/// One ledger row. Column order in CSV is the field order here, without
/// `half_norm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRecord {
    pub t: f64,
    pub e_w: f64,
    pub e_k: f64,
    pub e_theta: f64,
    pub e: f64,
    pub d_u: f64,
    pub d_phi: f64,
    pub d_gradtheta: f64,
    pub d_theta: f64,
    pub d_memory: f64,
    pub f: f64,
    pub l: f64,
    pub r: f64,
    /// Central-difference `dE/dt` plus total dissipation; NaN at the ends.
    pub residual: f64,
    /// `½‖U‖²_H`, kept to audit the energy identity. Not written to CSV.
    #[serde(skip)]
    pub half_norm: f64,
}

impl LedgerRecord {
    pub fn dissipation_total(&self) -> f64 {
        self.d_u + self.d_phi + self.d_gradtheta + self.d_theta + self.d_memory
    }
}

pub fn record(model: &Model, s: &State, t: f64, p: &LyapunovParams) -> LedgerRecord {
    let e = energy_components(model, s);
    let d = dissipation(model, s);
    let g = &model.grid;
    let f = g.l2(&s.u, &s.v) + g.l2(&s.phi, &s.psi);
    let ly = lyapunov_from_energy(f, e.e, p);
    LedgerRecord {
        t,
        e_w: e.e_w,
        e_k: e.e_k,
        e_theta: e.e_theta,
        e: e.e,
        d_u: d.d_u,
        d_phi: d.d_phi,
        d_gradtheta: d.d_gradtheta,
        d_theta: d.d_theta,
        d_memory: d.d_memory,
        f: ly.f,
        l: ly.l,
        r: ly.r,
        residual: f64::NAN,
        half_norm: 0.5 * model.inner(s, s),
    }
}

pub const LEDGER_COLUMNS: [&str; 14] = [
    "t", "E_w", "E_k", "E_theta", "E", "D_u", "D_phi", "D_gradtheta", "D_Theta", "D_memory", "F",
    "L", "R", "residual",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub records: Vec<LedgerRecord>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: LedgerRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.e).collect()
    }

    /// Fills the residual column from the central-difference energy rate.
    pub fn fill_residuals(&mut self) -> Result<()> {
        let series = energy_rate_residual(&self.records)?;
        for (i, r) in self.records.iter_mut().enumerate() {
            r.residual = if i == 0 || i + 1 == series.values.len() + 2 {
                f64::NAN
            } else {
                series.values[i - 1]
            };
        }
        Ok(())
    }

    /// Violations of the record invariants: `E` equals the sum of its parts
    /// and `½‖U‖²_H`, `E` does not increase by more than `slack`, and every
    /// dissipation channel is nonnegative.
    pub fn invariant_violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let scale = r.e.abs().max(f64::MIN_POSITIVE);
            if (r.e - (r.e_w + r.e_k + r.e_theta)).abs() > 1e-12 * scale {
                out.push(format!("record {i}: E differs from E_w + E_k + E_theta"));
            }
            if r.half_norm != 0.0 || r.e != 0.0 {
                if (r.e - r.half_norm).abs() > 1e-10 * scale {
                    out.push(format!("record {i}: E differs from half the squared state norm"));
                }
            }
            let channels = [r.d_u, r.d_phi, r.d_gradtheta, r.d_theta, r.d_memory];
            if channels.iter().any(|d| *d < 0.0) {
                out.push(format!("record {i}: negative dissipation channel"));
            }
            if i > 0 && r.e > self.records[i - 1].e + slack {
                out.push(format!(
                    "record {i}: energy increased by {:.3e}",
                    r.e - self.records[i - 1].e
                ));
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", LEDGER_COLUMNS.join(","))?;
        for r in &self.records {
            let row = [
                r.t, r.e_w, r.e_k, r.e_theta, r.e, r.d_u, r.d_phi, r.d_gradtheta, r.d_theta,
                r.d_memory, r.f, r.l, r.r, r.residual,
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<EnergyLedger> {
        let mut ledger = EnergyLedger::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if i == 0 {
                if line.trim() != LEDGER_COLUMNS.join(",") {
                    return Err(Error::Parse {
                        line: 1,
                        message: "unexpected ledger header".into(),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
            if vals.len() != LEDGER_COLUMNS.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} columns, found {}", LEDGER_COLUMNS.len(), vals.len()),
                });
            }
            ledger.push(LedgerRecord {
                t: vals[0],
                e_w: vals[1],
                e_k: vals[2],
                e_theta: vals[3],
                e: vals[4],
                d_u: vals[5],
                d_phi: vals[6],
                d_gradtheta: vals[7],
                d_theta: vals[8],
                d_memory: vals[9],
                f: vals[10],
                l: vals[11],
                r: vals[12],
                residual: vals[13],
                half_norm: vals[4],
            });
        }
        Ok(ledger)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    /// Residual at records `1..len−1`.
    pub values: Vec<f64>,
    pub max: f64,
}

/// `(E_{i+1} − E_{i−1})/(2Δt)` plus the total dissipation at record `i`.
pub fn energy_rate_residual(records: &[LedgerRecord]) -> Result<ResidualSeries> {
    if records.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "energy-rate residual needs at least 3 records, got {}",
            records.len()
        )));
    }
    let dt = records[1].t - records[0].t;
    if records
        .windows(2)
        .any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.abs().max(1.0))
    {
        return Err(Error::InvalidInput("energy-rate residual needs uniform record spacing".into()));
    }
    let values: Vec<f64> = records
        .windows(3)
        .map(|w| (w[2].e - w[0].e) / (2.0 * dt) + w[1].dissipation_total())
        .collect();
    let max = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(ResidualSeries { values, max })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayModel {
    /// `ln E` linear in `t`
    Exponential,
    /// `ln E` linear in `ln(1 + t)`
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Exponential: the decay rate (positive when decaying). Power: the slope.
    pub rate: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `ln E` over records with `t ∈ [t_a, t_b]`.
pub fn decay_fit(times: &[f64], energies: &[f64], model: DecayModel, window: (f64, f64)) -> Result<DecayFit> {
    let (ta, tb) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &e) in times.iter().zip(energies) {
        if t < ta || t > tb {
            continue;
        }
        if !(e > 0.0) {
            return Err(Error::InvalidInput(format!("nonpositive energy {e} at t = {t} in fit window")));
        }
        xs.push(match model {
            DecayModel::Exponential => t,
            DecayModel::Power => (1.0 + t).ln(),
        });
        ys.push(e.ln());
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput("fit window holds fewer than two records".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(DecayFit {
        model,
        rate: match model {
            DecayModel::Exponential => -slope,
            DecayModel::Power => slope,
        },
        amplitude: intercept.exp(),
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub holds: bool,
    /// Smallest `c₂` with `E(t) ≤ c₂·G₁⁻¹(c₁t)` on every record.
    pub c2_min: f64,
}

pub fn envelope_check(times: &[f64], energies: &[f64], gauge: ConvexGauge, c1: f64) -> EnvelopeCheck {
    let c2_min = times
        .iter()
        .zip(energies)
        .map(|(&t, &e)| e / gauge.g1_inv(c1 * t))
        .fold(0.0, f64::max);
    EnvelopeCheck {
        holds: c2_min.is_finite(),
        c2_min,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::kernel::Kernel;
    use crate::moduli::Moduli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> Model {
        Model::new(
            Grid::new(8, std::f64::consts::PI).unwrap(),
            Moduli::default(),
            Kernel::exponential(0.5, 2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn energy_is_half_squared_norm() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = m.random_state(&mut rng);
        let e = energy_components(&m, &s);
        assert!((e.e - 0.5 * m.inner(&s, &s)).abs() <= 1e-10 * e.e);
        let z = energy_components(&m, &m.zero_state());
        assert_eq!((z.e_w, z.e_k, z.e_theta, z.e), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn thermal_rate_only() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut s = m.zero_state();
        s.big_theta = m.grid.random_scalar(&mut rng);
        let e = energy_components(&m, &s);
        let expect = 0.5 * m.moduli.alpha0 * m.grid.l2_scalar(&s.big_theta, &s.big_theta);
        assert!((e.e_theta - expect).abs() <= 1e-14 * expect);
    }

    #[test]
    fn curl_coupling_cancels() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = m.grid.random_vector(&mut rng);
        let mut s = m.zero_state();
        s.u = m.grid.curl(&w);
        s.phi = m.grid.curl(&s.u);
        let gap = m.grid.curl(&s.u).combine(1.0, &s.phi, -1.0);
        assert_eq!(gap.max_abs(), 0.0);
    }

    #[test]
    fn lyapunov_special_cases() {
        let m = model();
        let eq = equivalence_constants(&m).unwrap();
        let p = LyapunovParams::defaults(&eq, ConvexGauge::Linear);
        let z = lyapunov_values(&m, &m.zero_state(), &p);
        assert_eq!((z.f, z.l, z.r), (0.0, 0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut s = m.random_state(&mut rng);
        s.v.scale(0.0);
        s.psi.scale(0.0);
        let ly = lyapunov_values(&m, &s, &p);
        let e = energy_components(&m, &s).e;
        assert_eq!(ly.f, 0.0);
        assert_eq!(ly.l, e);
        assert!((ly.r - p.tau0 * (ly.l + p.c0c * e)).abs() <= 1e-14 * ly.r);
    }

    #[test]
    fn equivalence_constant_bounds_f() {
        let m = model();
        let eq = equivalence_constants(&m).unwrap();
        assert!(eq.mu0 >= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = m.random_state(&mut rng);
            let ly = lyapunov_values(&m, &s, &LyapunovParams::defaults(&eq, ConvexGauge::Linear));
            let e = energy_components(&m, &s).e;
            assert!(ly.f.abs() <= eq.mu0 * e);
        }
        let mut s = m.random_state(&mut rng);
        s.v = s.u.clone();
        s.psi = s.phi.clone();
        let f = lyapunov_values(&m, &s, &LyapunovParams::defaults(&eq, ConvexGauge::Linear)).f;
        assert!(f >= 0.0 && f <= eq.mu0 * energy_components(&m, &s).e);
    }

    #[test]
    fn synthetic_fits_are_exact() {
        let t: Vec<f64> = (0..200).map(|i| i as f64 * 0.1).collect();
        let e: Vec<f64> = t.iter().map(|t| 5.0 * (-0.3 * t).exp()).collect();
        let fit = decay_fit(&t, &e, DecayModel::Exponential, (0.0, 20.0)).unwrap();
        assert!((fit.rate - 0.3).abs() < 1e-12);
        assert!((fit.amplitude - 5.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let e: Vec<f64> = t.iter().map(|t| 2.0 * (1.0 + t).powf(-1.0 / 3.0)).collect();
        let fit = decay_fit(&t, &e, DecayModel::Power, (0.0, 20.0)).unwrap();
        assert!((fit.rate + 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let bad = vec![0.0; t.len()];
        assert!(decay_fit(&t, &bad, DecayModel::Exponential, (0.0, 20.0)).is_err());
    }

    #[test]
    fn envelope_cases() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let e: Vec<f64> = t.iter().map(|t| 5.0 * (-0.3 * t).exp()).collect();
        let c = envelope_check(&t, &e, ConvexGauge::Linear, 0.3);
        assert!(c.holds && (c.c2_min - 5.0).abs() < 1e-12);
        let e: Vec<f64> = t.iter().map(|&t| if t < 2.0 { (-t).exp() } else { 0.0 }).collect();
        let c = envelope_check(&t, &e, ConvexGauge::Linear, 0.3);
        assert!(c.holds && c.c2_min > 0.0);
    }

    #[test]
    fn residual_needs_three_uniform_records() {
        let m = model();
        let p = LyapunovParams::defaults(&equivalence_constants(&m).unwrap(), ConvexGauge::Linear);
        let z = m.zero_state();
        let recs: Vec<_> = (0..4).map(|i| record(&m, &z, i as f64 * 0.1, &p)).collect();
        let r = energy_rate_residual(&recs).unwrap();
        assert_eq!(r.max, 0.0);
        assert!(energy_rate_residual(&recs[..2]).is_err());
    }

    #[test]
    fn ledger_csv_round_trip() {
        let m = model();
        let p = LyapunovParams::defaults(&equivalence_constants(&m).unwrap(), ConvexGauge::Linear);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = m.random_state(&mut rng);
        let mut ledger = EnergyLedger::new();
        for i in 0..3 {
            ledger.push(record(&m, &s, i as f64, &p));
        }
        ledger.fill_residuals().unwrap();
        let mut buf = Vec::new();
        ledger.write_csv(&mut buf).unwrap();
        let back = EnergyLedger::read_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.records[1].e, ledger.records[1].e);
        assert!(back.records[0].residual.is_nan());
        assert!(!back.records[1].residual.is_nan());
    }
}
