//! Spectral abscissa of the generator from Arnoldi iterations on the
//! resolvent `(1 − A)⁻¹`: an eigenvalue `ν` of the resolvent maps back to
//! `z = 1 − 1/ν`, and the slow modes of `A` are the large `ν`.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::resolvent::resolvent_solve;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::krylov::{self, GmresOptions};
use crate::state::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subsystem {
    /// The whole coupled system.
    Full,
    /// `(θ, Θ)` alone with the coupling `b` switched off: `θ_tt + dθ_t − kΔθ = 0`.
    Thermal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub krylov_dim: usize,
    /// Ritz residual tolerance relative to `|ν|`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            krylov_dim: 40,
            // Loose on purpose: repeated eigenvalues produce near-duplicate
            // Ritz pairs whose residual estimate is pessimistic.
            tol: 1e-6,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// Largest real part among the converged eigenvalues.
    pub sigma: f64,
    pub imag: f64,
    pub converged: usize,
}

pub fn spectral_abscissa_estimate(model: &Model, subsystem: Subsystem, opts: SpectralOptions) -> Result<SpectralEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let gm = GmresOptions {
        rel_tol: 1e-13,
        ..GmresOptions::default()
    };
    let mut failure = None;
    let ritz = match subsystem {
        Subsystem::Full => {
            let mut work = model.zero_state();
            let start = model.random_state(&mut rng).to_flat();
            krylov::arnoldi_ritz(
                |x, y| {
                    work.set_flat(x).expect("shape");
                    match resolvent_solve(model, &work, 1.0, None, gm) {
                        Ok((sol, _)) => y.copy_from_slice(&sol.to_flat()),
                        Err(e) => {
                            failure.get_or_insert(e);
                            y.iter_mut().for_each(|v| *v = 0.0);
                        }
                    }
                },
                &start,
                opts.krylov_dim,
            )
        }
        Subsystem::Thermal => {
            let g = model.grid;
            let (d, k) = (model.moduli.d, model.moduli.k);
            let m = g.len();
            let start: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            krylov::arnoldi_ritz(
                |x, y| {
                    // (1 − A_T)(θ, Θ) = (f₅, f₆): Θ = θ − f₅, (1 + d − kΔ)θ = f₆ + (1 + d)f₅.
                    let f5 = ScalarField::from_vec(g.n(), x[..m].to_vec()).unwrap();
                    let f6 = ScalarField::from_vec(g.n(), x[m..].to_vec()).unwrap();
                    let rhs = f6.combine(1.0, &f5, 1.0 + d);
                    let mut theta = vec![0.0; m];
                    let op = |t: &[f64], out: &mut [f64]| {
                        let tf = ScalarField::from_vec(g.n(), t.to_vec()).unwrap();
                        let lap = g.laplacian_scalar(&tf);
                        for ((o, t), l) in out.iter_mut().zip(t).zip(lap.as_slice()) {
                            *o = (1.0 + d) * t - k * l;
                        }
                    };
                    if let Err(e) = krylov::gmres(op, rhs.as_slice(), &mut theta, gm) {
                        failure.get_or_insert(e);
                    }
                    for i in 0..m {
                        y[i] = theta[i];
                        y[m + i] = theta[i] - x[i];
                    }
                },
                &start,
                opts.krylov_dim,
            )
        }
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let mut best: Option<Complex<f64>> = None;
    let mut converged = 0;
    for (nu, res) in ritz {
        if nu.norm() == 0.0 || res > opts.tol * nu.norm() {
            continue;
        }
        converged += 1;
        let z = Complex::new(1.0, 0.0) - Complex::new(1.0, 0.0) / nu;
        if best.map_or(true, |b| z.re > b.re) {
            best = Some(z);
        }
    }
    match best {
        Some(z) => Ok(SpectralEstimate {
            sigma: z.re,
            imag: z.im.abs(),
            converged,
        }),
        None => Err(Error::NoConvergence {
            iterations: opts.krylov_dim,
            residual: f64::NAN,
        }),
    }
}

/// Closed-form abscissa of the thermal subsystem on the grid: the largest
/// real part of the roots of `z² + dz + kμ = 0` over the discrete Dirichlet
/// eigenvalues `μ`, attained at the smallest one.
pub fn thermal_abscissa_closed_form(model: &Model) -> f64 {
    let mu = model.grid.smallest_laplacian_eigenvalue();
    let (d, k) = (model.moduli.d, model.moduli.k);
    let disc = d * d - 4.0 * k * mu;
    if disc >= 0.0 {
        0.5 * (-d + disc.sqrt())
    } else {
        -0.5 * d
    }
}
