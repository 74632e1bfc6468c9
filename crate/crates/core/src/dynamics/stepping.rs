use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::generator::apply_generator;
use super::resolvent::{resolvent_solve, ResolventReport};
use crate::error::{Error, Result};
use crate::krylov::GmresOptions;
use crate::state::{Model, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4Explicit,
    ImplicitEuler,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "rk4" | "rk4_explicit" => Ok(Scheme::Rk4Explicit),
            "implicit_euler" | "implicit" => Ok(Scheme::ImplicitEuler),
            other => Err(Error::InvalidInput(format!("unknown time scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Rk4Explicit => "rk4_explicit",
            Scheme::ImplicitEuler => "implicit_euler",
        })
    }
}

/// Estimate of the spectral radius of the generator by power iteration.
pub fn spectral_radius_estimate(model: &Model, iterations: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = model.random_state(&mut rng);
    let mut estimate: f64 = 0.0;
    for k in 0..iterations {
        let xn = x.flat_dot(&x).sqrt();
        x.scale(1.0 / xn);
        let y = apply_generator(model, &x);
        let ratio = y.flat_dot(&y).sqrt();
        // Non-normal and complex-pair dominated: keep the largest late ratio.
        if k + 10 >= iterations {
            estimate = estimate.max(ratio);
        }
        x = y;
    }
    estimate
}

/// Largest admissible RK4 step: the real-axis stability limit of RK4 (about
/// 2.78, taken as 2.5) over the spectral radius, and at most the smallest
/// `s` interval so the history transport stays within its own CFL limit.
pub fn explicit_step_bound(model: &Model) -> f64 {
    let rho = spectral_radius_estimate(model, 60, 0x5eed);
    let mut bound = 2.5 / rho;
    if model.sgrid.len() > 1 {
        bound = bound.min(model.sgrid.min_step());
    }
    bound
}

/// One RK4 step on the full state, history included.
pub fn rk4_step(model: &Model, s: &State, dt: f64) -> State {
    let k1 = apply_generator(model, s);
    let mut tmp = s.clone();
    tmp.axpy(0.5 * dt, &k1);
    let k2 = apply_generator(model, &tmp);
    tmp = s.clone();
    tmp.axpy(0.5 * dt, &k2);
    let k3 = apply_generator(model, &tmp);
    tmp = s.clone();
    tmp.axpy(dt, &k3);
    let k4 = apply_generator(model, &tmp);
    let mut out = s.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

/// `U^{n+1} = (1/dt − A)⁻¹ U^n/dt`
pub fn implicit_euler_step(model: &Model, s: &State, dt: f64, opts: GmresOptions) -> Result<(State, ResolventReport)> {
    let rhs = s.scaled(1.0 / dt);
    resolvent_solve(model, &rhs, 1.0 / dt, Some(s), opts)
}

/// Time stepper with the explicit stability bound computed once.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub scheme: Scheme,
    pub dt: f64,
    pub gmres: GmresOptions,
    /// Worst resolvent defect seen so far.
    pub max_defect: f64,
}

impl Stepper {
    pub fn new(model: &Model, scheme: Scheme, dt: f64) -> Result<Stepper> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        if scheme == Scheme::Rk4Explicit {
            let bound = explicit_step_bound(model);
            if dt > bound {
                return Err(Error::StepTooLarge { dt, bound });
            }
        }
        Ok(Stepper {
            scheme,
            dt,
            gmres: GmresOptions::default(),
            max_defect: 0.0,
        })
    }

    pub fn step(&mut self, model: &Model, s: &State) -> Result<State> {
        match self.scheme {
            Scheme::Rk4Explicit => Ok(rk4_step(model, s, self.dt)),
            Scheme::ImplicitEuler => {
                let (next, report) = implicit_euler_step(model, s, self.dt, self.gmres)?;
                self.max_defect = self.max_defect.max(report.defect);
                Ok(next)
            }
        }
    }
}

/// Single step with the bound checked on the spot.
pub fn step(model: &Model, s: &State, dt: f64, scheme: Scheme) -> Result<State> {
    Stepper::new(model, scheme, dt)?.step(model, s)
}
