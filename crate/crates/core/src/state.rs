//! The first-order state `U = (u, v, φ, ψ, θ, Θ, η)`, the model it lives in,
//! and the energy inner product.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, VectorField};
use crate::history::{self, HistoryBuffer, SGrid};
use crate::kernel::Kernel;
use crate::moduli::Moduli;

/// Everything the generator needs besides the state itself.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: Grid,
    pub moduli: Moduli,
    pub kernel: Kernel,
    pub sgrid: Arc<SGrid>,
}

impl Model {
    /// Validates the moduli against the kernel and builds the default `s`-grid.
    pub fn new(grid: Grid, moduli: Moduli, kernel: Kernel) -> Result<Model> {
        let sgrid = SGrid::for_kernel(&kernel, history::DEFAULT_NODES, history::DEFAULT_FIRST_STEP)?;
        Model::with_sgrid(grid, moduli, kernel, sgrid)
    }

    pub fn with_sgrid(grid: Grid, moduli: Moduli, kernel: Kernel, sgrid: SGrid) -> Result<Model> {
        moduli.validate(&kernel)?;
        if sgrid.kernel_id() != kernel.id() {
            return Err(Error::InvalidInput(format!(
                "s-grid was sampled for kernel {} but the model uses {}",
                sgrid.kernel_id(),
                kernel.id()
            )));
        }
        Ok(Model {
            grid,
            moduli,
            kernel,
            sgrid: Arc::new(sgrid),
        })
    }

    pub fn beta0(&self) -> f64 {
        self.moduli.beta0(&self.kernel)
    }

    pub fn zero_state(&self) -> State {
        State::zeros(&self.grid, self.sgrid.clone())
    }

    /// The energy inner product `⟨U, W⟩_H`.
    pub fn inner(&self, a: &State, b: &State) -> f64 {
        let g = &self.grid;
        let m = &self.moduli;
        let beta0 = self.beta0();
        let mut total = m.mu * g.h1_semi(&a.u, &b.u)
            + (m.lambda + m.mu + m.kappa) * g.l2_scalar(&g.div(&a.u), &g.div(&b.u))
            + g.l2(&a.v, &b.v)
            + m.kappa * g.l2(&g.curl(&a.u).combine(1.0, &a.phi, -1.0), &g.curl(&b.u).combine(1.0, &b.phi, -1.0))
            + m.kappa * g.l2(&a.phi, &b.phi)
            + beta0 * g.h1_semi(&a.phi, &b.phi)
            + (m.alpha + m.beta) * g.l2_scalar(&g.div(&a.phi), &g.div(&b.phi))
            + g.l2(&a.psi, &b.psi);
        total += history::memory_inner_product(g, &a.eta, &b.eta);
        let ta = a.theta.combine(1.0, &a.big_theta, m.alpha0);
        let tb = b.theta.combine(1.0, &b.big_theta, m.alpha0);
        total += g.l2_scalar(&ta, &tb) / m.alpha0
            + m.thermal_margin() / m.alpha0 * g.l2_scalar(&a.theta, &b.theta)
            + m.alpha0 * m.k * g.h1_semi_scalar(&a.theta, &b.theta);
        total
    }

    pub fn norm(&self, a: &State) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Random state: rough node noise in every field and in η (node 0 kept zero).
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        let g = &self.grid;
        let mut s = State {
            u: g.random_vector(rng),
            v: g.random_vector(rng),
            phi: g.random_vector(rng),
            psi: g.random_vector(rng),
            theta: g.random_scalar(rng),
            big_theta: g.random_scalar(rng),
            eta: HistoryBuffer::zeros(self.sgrid.clone(), g.n()),
        };
        for e in s.eta.nodes_mut().iter_mut().skip(1) {
            *e = g.random_vector(rng);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: VectorField,
    pub v: VectorField,
    pub phi: VectorField,
    pub psi: VectorField,
    pub theta: ScalarField,
    /// Temperature rate `Θ = θ_t`.
    pub big_theta: ScalarField,
    pub eta: HistoryBuffer,
}

impl State {
    pub fn zeros(grid: &Grid, sgrid: Arc<SGrid>) -> State {
        let n = grid.n();
        State {
            u: VectorField::zeros(n),
            v: VectorField::zeros(n),
            phi: VectorField::zeros(n),
            psi: VectorField::zeros(n),
            theta: ScalarField::zeros(n),
            big_theta: ScalarField::zeros(n),
            eta: HistoryBuffer::zeros(sgrid, n),
        }
    }

    pub fn n(&self) -> usize {
        self.u.n()
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &State) {
        self.u.axpy(a, &x.u);
        self.v.axpy(a, &x.v);
        self.phi.axpy(a, &x.phi);
        self.psi.axpy(a, &x.psi);
        self.theta.axpy(a, &x.theta);
        self.big_theta.axpy(a, &x.big_theta);
        self.eta.axpy(a, &x.eta);
    }

    pub fn scale(&mut self, a: f64) {
        self.u.scale(a);
        self.v.scale(a);
        self.phi.scale(a);
        self.psi.scale(a);
        self.theta.scale(a);
        self.big_theta.scale(a);
        self.eta.scale(a);
    }

    pub fn scaled(&self, a: f64) -> State {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// Number of scalar unknowns.
    pub fn dof(&self) -> usize {
        let per = self.u[0].as_slice().len();
        per * (14 + 3 * self.eta.len())
    }

    fn slices(&self) -> impl Iterator<Item = &[f64]> {
        let vectors = [&self.u, &self.v, &self.phi, &self.psi]
            .into_iter()
            .chain(self.eta.nodes().iter());
        vectors
            .flat_map(|v| v.0.iter().map(|c| c.as_slice()))
            .chain([self.theta.as_slice(), self.big_theta.as_slice()])
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        let State {
            u,
            v,
            phi,
            psi,
            theta,
            big_theta,
            eta,
        } = self;
        let mut out: Vec<&mut [f64]> = Vec::new();
        for vf in [u, v, phi, psi].into_iter().chain(eta.nodes_mut().iter_mut()) {
            for c in vf.0.iter_mut() {
                out.push(c.as_mut_slice());
            }
        }
        out.push(theta.as_mut_slice());
        out.push(big_theta.as_mut_slice());
        out
    }

    /// Flattens into one vector: u, v, φ, ψ, the η nodes, θ, Θ.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dof());
        for s in self.slices() {
            out.extend_from_slice(s);
        }
        out
    }

    /// Inverse of [`State::to_flat`] into a state of the same shape.
    pub fn set_flat(&mut self, data: &[f64]) -> Result<()> {
        if data.len() != self.dof() {
            return Err(Error::InvalidInput(format!(
                "flat state has {} values, expected {}",
                data.len(),
                self.dof()
            )));
        }
        let mut offset = 0;
        for s in self.slices_mut() {
            let len = s.len();
            s.copy_from_slice(&data[offset..offset + len]);
            offset += len;
        }
        Ok(())
    }

    /// Raw Euclidean product of the flattened states.
    pub fn flat_dot(&self, other: &State) -> f64 {
        self.slices()
            .zip(other.slices())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices().flat_map(|s| s.iter()).fold(0.0, |m, v| m.max(v.abs()))
    }
}
