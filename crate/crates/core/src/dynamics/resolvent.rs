//! Solution of `(λ − A)U = F`.
//!
//! `v`, `ψ`, `Θ` are eliminated algebraically and the history is expressed
//! through `ψ` by solving the upwind transport row exactly,
//! `ηⱼ = aⱼ ψ + bⱼ`. What remains is a coupled nonsymmetric elliptic system
//! in `(u, φ, θ)`, solved with GMRES.

use serde::Serialize;

use super::generator::apply_generator;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::krylov::{self, GmresOptions};
use crate::state::{Model, State};

/// Largest admissible `‖λU − AU − F‖_H / ‖F‖_H`.
pub const DEFECT_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventReport {
    pub iterations: usize,
    /// Relative residual of the reduced system.
    pub residual: f64,
    /// `‖λU − AU − F‖_H / ‖F‖_H`
    pub defect: f64,
}

/// History recursion coefficients: `ηⱼ = aⱼψ + bⱼ` with
/// `aⱼ = (1 + aⱼ₋₁/Δ)/(λ + 1/Δ)` and `bⱼ = (f₇ⱼ + bⱼ₋₁/Δ)/(λ + 1/Δ)`.
fn history_coefficients(model: &Model, lambda: f64) -> Vec<f64> {
    let sg = &model.sgrid;
    let mut a = vec![0.0; sg.len()];
    for j in 1..sg.len() {
        let inv = 1.0 / sg.step(j - 1);
        a[j] = (1.0 + a[j - 1] * inv) / (lambda + inv);
    }
    a
}

/// `Σⱼ wⱼ g(sⱼ) aⱼ`; `λ` times this approximates `∫ (1 − e^{−λs}) g(s) ds`.
pub fn discrete_resolvent_weight(model: &Model, lambda: f64) -> f64 {
    history_coefficients(model, lambda)
        .iter()
        .zip(model.sgrid.memory_weights())
        .map(|(a, c)| a * c)
        .sum()
}

struct Reduced<'a> {
    model: &'a Model,
    lambda: f64,
    /// `Σ wⱼ g(sⱼ) aⱼ`
    ga: f64,
}

impl Reduced<'_> {
    fn n3(&self) -> usize {
        self.model.grid.len()
    }

    fn split(&self, x: &[f64]) -> (VectorField, VectorField, ScalarField) {
        let n = self.model.grid.n();
        let m = self.n3();
        let field = |k: usize| ScalarField::from_vec(n, x[k * m..(k + 1) * m].to_vec()).unwrap();
        (
            VectorField([field(0), field(1), field(2)]),
            VectorField([field(3), field(4), field(5)]),
            field(6),
        )
    }

    fn join(&self, u: &VectorField, phi: &VectorField, theta: &ScalarField, out: &mut [f64]) {
        let m = self.n3();
        for c in 0..3 {
            out[c * m..(c + 1) * m].copy_from_slice(u[c].as_slice());
            out[(3 + c) * m..(4 + c) * m].copy_from_slice(phi[c].as_slice());
        }
        out[6 * m..].copy_from_slice(theta.as_slice());
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let g = &self.model.grid;
        let md = &self.model.moduli;
        let l = self.lambda;
        let (u, phi, theta) = self.split(x);

        let mut ru = u.scaled(l * l + l * md.xi0);
        ru.axpy(-md.mu, &g.laplacian(&u));
        ru.axpy(-(md.lambda + md.mu + md.kappa), &g.grad_div(&u));
        ru.axpy(md.kappa, &g.curl_curl(&u));
        ru.axpy(-md.kappa, &g.curl(&phi));
        ru.axpy(md.b * (1.0 + md.alpha0 * l), &g.grad(&theta));

        let mut rphi = phi.scaled(l * l + l * md.xi + 2.0 * md.kappa);
        rphi.axpy(-(self.model.beta0() + l * self.ga), &g.laplacian(&phi));
        rphi.axpy(-(md.alpha + md.beta), &g.grad_div(&phi));
        rphi.axpy(-md.kappa, &g.curl(&u));

        let mut rtheta = theta.scaled(l * l + l * md.d);
        rtheta.axpy(-md.k, &g.laplacian_scalar(&theta));
        rtheta.axpy(md.b * l, &g.div(&u));

        self.join(&ru, &rphi, &rtheta, out);
    }
}

/// Solves `(λ − A)U = F`. `guess` seeds the Krylov iteration with its
/// `(u, φ, θ)` part.
pub fn resolvent_solve(
    model: &Model,
    f: &State,
    lambda: f64,
    guess: Option<&State>,
    opts: GmresOptions,
) -> Result<(State, ResolventReport)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("resolvent shift must be positive, got {lambda}")));
    }
    if f.eta.nodes()[0].max_abs() != 0.0 {
        return Err(Error::InvalidInput("history data must vanish at s = 0".into()));
    }
    let g = &model.grid;
    let md = &model.moduli;
    let sg = &model.sgrid;
    let fnorm = model.norm(f);
    if fnorm == 0.0 {
        return Ok((
            model.zero_state(),
            ResolventReport {
                iterations: 0,
                residual: 0.0,
                defect: 0.0,
            },
        ));
    }

    let a = history_coefficients(model, lambda);
    let weights = sg.memory_weights();
    let ga: f64 = a.iter().zip(&weights).map(|(a, c)| a * c).sum();
    let mut bs: Vec<VectorField> = Vec::with_capacity(sg.len());
    bs.push(VectorField::zeros(g.n()));
    for j in 1..sg.len() {
        let inv = 1.0 / sg.step(j - 1);
        let mut b = f.eta.nodes()[j].clone();
        b.axpy(inv, &bs[j - 1]);
        b.scale(1.0 / (lambda + inv));
        bs.push(b);
    }
    let mut wb = VectorField::zeros(g.n());
    for (b, c) in bs.iter().zip(&weights) {
        if *c != 0.0 {
            wb.axpy(*c, b);
        }
    }

    // Right-hand sides of the reduced system.
    let mut ru = f.v.clone();
    ru.axpy(lambda + md.xi0, &f.u);
    ru.axpy(md.b * md.alpha0, &g.grad(&f.theta));

    let mut rphi = f.psi.clone();
    rphi.axpy(lambda + md.xi, &f.phi);
    let mut lap_arg = wb;
    lap_arg.axpy(-ga, &f.phi);
    rphi.add_assign(&g.laplacian(&lap_arg));

    let mut rtheta = f.big_theta.clone();
    rtheta.axpy(lambda + md.d, &f.theta);
    rtheta.axpy(md.b, &g.div(&f.u));

    let op = Reduced { model, lambda, ga };
    let m = op.n3();
    let mut rhs = vec![0.0; 7 * m];
    op.join(&ru, &rphi, &rtheta, &mut rhs);
    let mut x = vec![0.0; 7 * m];
    if let Some(s) = guess {
        op.join(&s.u, &s.phi, &s.theta, &mut x);
    }
    let stats = krylov::gmres(|x, y| op.apply(x, y), &rhs, &mut x, opts)?;
    let (u, phi, theta) = op.split(&x);

    let v = u.combine(lambda, &f.u, -1.0);
    let psi = phi.combine(lambda, &f.phi, -1.0);
    let big_theta = theta.combine(lambda, &f.theta, -1.0);
    let mut out = model.zero_state();
    for (j, e) in out.eta.nodes_mut().iter_mut().enumerate().skip(1) {
        *e = bs[j].clone();
        e.axpy(a[j], &psi);
    }
    out.u = u;
    out.v = v;
    out.phi = phi;
    out.psi = psi;
    out.theta = theta;
    out.big_theta = big_theta;

    let defect = resolvent_defect(model, &out, f, lambda) / fnorm;
    let report = ResolventReport {
        iterations: stats.iterations,
        residual: stats.residual,
        defect,
    };
    if !(defect <= DEFECT_BOUND) {
        return Err(Error::ResolventDefect {
            defect,
            bound: DEFECT_BOUND,
        });
    }
    Ok((out, report))
}

/// `‖λU − AU − F‖_H`
pub fn resolvent_defect(model: &Model, u: &State, f: &State, lambda: f64) -> f64 {
    let mut r = u.scaled(lambda);
    r.axpy(-1.0, &apply_generator(model, u));
    r.axpy(-1.0, f);
    model.norm(&r)
}

