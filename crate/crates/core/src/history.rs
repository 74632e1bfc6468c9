//! The history variable `η(x, t, s) = φ(x, t) − φ(x, t − s)` on a geometric
//! grid in `s`, with its upwind transport, memory integral and energy.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Grid, VectorField};
use crate::kernel::{ConvexGauge, Kernel};
use crate::quadrature;

/// Default number of `s` nodes.
pub const DEFAULT_NODES: usize = 64;
/// Default length of the first `s` interval.
pub const DEFAULT_FIRST_STEP: f64 = 1e-2;
/// Fraction of `g0` allowed beyond the last node.
pub const TAIL_FRACTION: f64 = 1e-8;

/// Quadrature grid in `s` with the kernel sampled at its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    kernel_id: String,
}

impl SGrid {
    /// Geometric grid for `kernel`: `count` nodes, first interval `first`,
    /// last node at the tail cutoff. The zero kernel gets the single node `0`.
    pub fn for_kernel(kernel: &Kernel, count: usize, first: f64) -> Result<SGrid> {
        if kernel.is_zero() {
            return SGrid::from_nodes(kernel, vec![0.0]);
        }
        let s_max = kernel.tail_cutoff(TAIL_FRACTION);
        SGrid::from_nodes(kernel, geometric_nodes(s_max, count, first)?)
    }

    /// Samples `kernel` on an explicit, strictly increasing node set starting at 0.
    pub fn from_nodes(kernel: &Kernel, nodes: Vec<f64>) -> Result<SGrid> {
        if nodes.first() != Some(&0.0) {
            return Err(Error::InvalidInput("the s-grid must start at s = 0".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("the s-grid must be strictly increasing".into()));
        }
        let mut weights = vec![0.0; nodes.len()];
        for (j, w) in nodes.windows(2).enumerate() {
            let half = 0.5 * (w[1] - w[0]);
            weights[j] += half;
            weights[j + 1] += half;
        }
        Ok(SGrid {
            g: nodes.iter().map(|&s| kernel.value(s)).collect(),
            dg: nodes.iter().map(|&s| kernel.derivative(s)).collect(),
            weights,
            nodes,
            kernel_id: kernel.id(),
        })
    }

    /// Halves every interval in the geometric sense: each old interval is
    /// split so the new grid is again geometric with ratio `√ρ`. Old nodes
    /// are kept.
    pub fn refined(&self, kernel: &Kernel) -> Result<SGrid> {
        if self.nodes.len() < 3 {
            return Ok(self.clone());
        }
        let ratio = (self.nodes[2] - self.nodes[1]) / (self.nodes[1] - self.nodes[0]);
        let split = 1.0 / (1.0 + ratio.sqrt());
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(w[0] + split * (w[1] - w[0]));
        }
        nodes.push(*self.nodes.last().unwrap());
        SGrid::from_nodes(kernel, nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn dg(&self) -> &[f64] {
        &self.dg
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    /// `s_{j+1} − s_j`
    pub fn step(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn min_step(&self) -> f64 {
        (0..self.len().saturating_sub(1)).map(|j| self.step(j)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        (0..self.len().saturating_sub(1)).map(|j| self.step(j)).fold(0.0, f64::max)
    }

    /// `w_j·g(s_j)`, the weights of the memory integral.
    pub fn memory_weights(&self) -> Vec<f64> {
        self.weights.iter().zip(&self.g).map(|(w, g)| w * g).collect()
    }
}

/// `count` nodes from 0 to `s_max` whose intervals grow geometrically from `first`.
pub fn geometric_nodes(s_max: f64, count: usize, first: f64) -> Result<Vec<f64>> {
    if count < 2 || !(first > 0.0) || !(s_max > 0.0) {
        return Err(Error::InvalidInput(format!(
            "geometric s-grid needs count >= 2 and positive lengths (count {count}, first {first}, s_max {s_max})"
        )));
    }
    let intervals = (count - 1) as i32;
    let span = |rho: f64| {
        if (rho - 1.0).abs() < 1e-12 {
            first * intervals as f64
        } else {
            first * (rho.powi(intervals) - 1.0) / (rho - 1.0)
        }
    };
    // span is increasing in ρ; bracket and bisect.
    let (mut lo, mut hi) = (1e-6, 2.0);
    while span(hi) < s_max {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if span(mid) < s_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let mut nodes = Vec::with_capacity(count);
    let mut s = 0.0;
    let mut step = first;
    nodes.push(0.0);
    for _ in 0..intervals {
        s += step;
        nodes.push(s);
        step *= rho;
    }
    *nodes.last_mut().unwrap() = s_max;
    Ok(nodes)
}

/// `η` sampled at every node of an [`SGrid`]. Node 0 is kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    sgrid: Arc<SGrid>,
    eta: Vec<VectorField>,
}

impl HistoryBuffer {
    pub fn zeros(sgrid: Arc<SGrid>, n: usize) -> HistoryBuffer {
        let eta = vec![VectorField::zeros(n); sgrid.len()];
        HistoryBuffer { sgrid, eta }
    }

    /// Wraps node values; node 0 must be identically zero.
    pub fn from_nodes(sgrid: Arc<SGrid>, eta: Vec<VectorField>) -> Result<HistoryBuffer> {
        if eta.len() != sgrid.len() {
            return Err(Error::InvalidInput(format!(
                "history has {} node fields for an s-grid of {} nodes",
                eta.len(),
                sgrid.len()
            )));
        }
        if eta[0].max_abs() != 0.0 {
            return Err(Error::InvalidInput("history must vanish at s = 0".into()));
        }
        Ok(HistoryBuffer { sgrid, eta })
    }

    pub fn sgrid(&self) -> &Arc<SGrid> {
        &self.sgrid
    }

    pub fn nodes(&self) -> &[VectorField] {
        &self.eta
    }

    pub fn nodes_mut(&mut self) -> &mut [VectorField] {
        &mut self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn axpy(&mut self, a: f64, other: &HistoryBuffer) {
        for (y, x) in self.eta.iter_mut().zip(&other.eta) {
            y.axpy(a, x);
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.eta.iter_mut().for_each(|e| e.scale(a));
    }

    /// `Σⱼ wⱼ g(sⱼ) ηⱼ`; the memory integral is the Laplacian of this field.
    pub fn weighted_sum(&self) -> VectorField {
        let n = self.eta[0].n();
        let mut out = VectorField::zeros(n);
        for (e, c) in self.eta.iter().zip(self.sgrid.memory_weights()) {
            if c != 0.0 {
                out.axpy(c, e);
            }
        }
        out
    }

    /// Upwind `−D_s η` with inflow value `η(0) = 0`:
    /// `(D_s η)ⱼ = (ηⱼ − ηⱼ₋₁)/(sⱼ − sⱼ₋₁)`.
    pub fn transport(&self) -> Vec<VectorField> {
        let n = self.eta[0].n();
        let mut out = Vec::with_capacity(self.eta.len());
        out.push(VectorField::zeros(n));
        for j in 1..self.eta.len() {
            let inv = 1.0 / self.sgrid.step(j - 1);
            out.push(self.eta[j - 1].combine(inv, &self.eta[j], -inv));
        }
        out
    }
}

/// `η₀(sⱼ) = φ₀(·, 0) − φ₀(·, sⱼ)`; `phi0` returns `None` where the history
/// is undefined.
pub fn init_history<F>(sgrid: Arc<SGrid>, mut phi0: F) -> Result<HistoryBuffer>
where
    F: FnMut(f64) -> Option<VectorField>,
{
    let at = |s: f64, f: &mut F| {
        f(s).ok_or_else(|| Error::InvalidInput(format!("initial history undefined at s = {s}")))
    };
    let base = at(0.0, &mut phi0)?;
    let n = base.n();
    let mut eta = Vec::with_capacity(sgrid.len());
    eta.push(VectorField::zeros(n));
    for &s in &sgrid.nodes()[1..] {
        let past = at(s, &mut phi0)?;
        if past.n() != n {
            return Err(Error::GridMismatch {
                expected: n,
                found: past.n(),
            });
        }
        eta.push(base.combine(1.0, &past, -1.0));
    }
    HistoryBuffer::from_nodes(sgrid, eta)
}

/// Separable history `φ₀(x, s) = p(s)·w(x)`, so `η₀(s) = (p(0) − p(s))·w`.
pub fn init_separable<P: Fn(f64) -> f64>(sgrid: Arc<SGrid>, w: &VectorField, profile: P) -> HistoryBuffer {
    let p0 = profile(0.0);
    let eta = sgrid.nodes().iter().map(|&s| w.scaled(p0 - profile(s))).collect::<Vec<_>>();
    let mut eta = eta;
    eta[0] = VectorField::zeros(w.n());
    HistoryBuffer { sgrid, eta }
}

/// One explicit upwind step of `η_t + η_s = ψ` with `η(0) = 0`.
pub fn advance_history(h: &mut HistoryBuffer, psi: &VectorField, dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    let bound = h.sgrid.min_step();
    if dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    for j in (1..h.eta.len()).rev() {
        let c = dt / h.sgrid.step(j - 1);
        let (before, after) = h.eta.split_at_mut(j);
        let prev = &before[j - 1];
        let cur = &mut after[0];
        for comp in 0..3 {
            let p = prev[comp].as_slice();
            for (e, (&q, &s)) in cur[comp]
                .as_mut_slice()
                .iter_mut()
                .zip(p.iter().zip(psi[comp].as_slice()))
            {
                *e += -c * (*e - q) + dt * s;
            }
        }
    }
    Ok(())
}

/// `Σⱼ wⱼ g(sⱼ) Δηⱼ`.
pub fn memory_integral(grid: &Grid, h: &HistoryBuffer) -> VectorField {
    grid.laplacian(&h.weighted_sum())
}

/// `Σⱼ wⱼ g(sⱼ) ⟨∇ηⱼ, ∇ζⱼ⟩`, the memory part of the energy product.
pub fn memory_inner_product(grid: &Grid, a: &HistoryBuffer, b: &HistoryBuffer) -> f64 {
    a.eta
        .iter()
        .zip(&b.eta)
        .zip(a.sgrid.memory_weights())
        .filter(|(_, c)| *c != 0.0)
        .map(|((x, y), c)| c * grid.h1_semi(x, y))
        .sum()
}

/// `½ Σⱼ wⱼ g(sⱼ) ‖∇ηⱼ‖²`
pub fn history_energy(grid: &Grid, h: &HistoryBuffer) -> f64 {
    0.5 * memory_inner_product(grid, h, h)
}

/// `½ Σⱼ wⱼ g′(sⱼ) ‖∇ηⱼ‖²`, the quadrature of the memory dissipation (≤ 0).
pub fn history_dissipation(grid: &Grid, h: &HistoryBuffer) -> f64 {
    let sg = &h.sgrid;
    0.5 * h
        .eta
        .iter()
        .enumerate()
        .filter(|(j, _)| sg.dg()[*j] != 0.0)
        .map(|(j, e)| sg.weights()[j] * sg.dg()[j] * grid.h1_semi(e, e))
        .sum::<f64>()
}

/// `−Σⱼ wⱼ g(sⱼ) ⟨∇(D_s η)ⱼ, ∇ηⱼ⟩`, the rate at which the upwind transport
/// removes history energy (≤ 0 on a geometric grid). This is the value the
/// discrete energy balance actually sees.
pub fn transport_dissipation(grid: &Grid, h: &HistoryBuffer) -> f64 {
    let c = h.sgrid.memory_weights();
    h.transport()
        .iter()
        .zip(&h.eta)
        .zip(c)
        .skip(1)
        .filter(|(_, c)| *c != 0.0)
        .map(|((t, e), c)| c * grid.h1_semi(t, e))
        .sum()
}

/// Value of `sup_t ∫ g/G⁻¹(−g′)·p(s − t)² ds` for a separable initial
/// history `φ₀(x, s) = p(s)·w(x)`, to be multiplied by `‖∇w‖²`. The profile
/// is taken as zero for negative arguments. Sampled over `times`.
pub fn initial_history_condition<P: Fn(f64) -> f64>(
    kernel: &Kernel,
    gauge: ConvexGauge,
    profile: P,
    times: &[f64],
) -> f64 {
    let weight = |s: f64| {
        let dg = -kernel.derivative(s);
        if dg <= 0.0 {
            0.0
        } else {
            kernel.value(s) / gauge.inverse(dg)
        }
    };
    let upper = kernel.truncation_point();
    times
        .iter()
        .map(|&t| {
            if t >= upper {
                return 0.0;
            }
            let f = |s: f64| {
                let p = profile(s - t);
                weight(s) * p * p
            };
            quadrature::integrate(f, t, upper, 1e-8)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Grid, Kernel, Arc<SGrid>) {
        let grid = Grid::new(6, 1.0).unwrap();
        let kernel = Kernel::exponential(0.5, 2.0).unwrap();
        let sg = SGrid::for_kernel(&kernel, DEFAULT_NODES, DEFAULT_FIRST_STEP).unwrap();
        (grid, kernel, Arc::new(sg))
    }

    #[test]
    fn geometric_grid_shape() {
        let (_, kernel, sg) = setup();
        assert_eq!(sg.len(), 64);
        assert_eq!(sg.nodes()[0], 0.0);
        assert!((sg.step(0) - 1e-2).abs() < 1e-12);
        assert!(kernel.tail(*sg.nodes().last().unwrap()) <= 1.0001e-8 * kernel.g0());
        let r1 = sg.step(1) / sg.step(0);
        let r2 = sg.step(40) / sg.step(39);
        assert!((r1 - r2).abs() < 1e-9);
        let total: f64 = sg.weights().iter().sum();
        assert!((total - sg.nodes().last().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn refinement_keeps_nodes_and_halves_steps() {
        let (_, kernel, sg) = setup();
        let fine = sg.refined(&kernel).unwrap();
        assert_eq!(fine.len(), 2 * sg.len() - 1);
        for (j, s) in sg.nodes().iter().enumerate() {
            assert_eq!(fine.nodes()[2 * j], *s);
        }
        let ratio = sg.max_step() / fine.max_step();
        assert!(ratio > 1.9 && ratio < 2.1, "{ratio}");
    }

    #[test]
    fn initial_histories() {
        let (grid, _, sg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = grid.random_vector(&mut rng);
        let h = init_history(sg.clone(), |s| Some(w.scaled((-s).exp()))).unwrap();
        for (j, &s) in sg.nodes().iter().enumerate() {
            let mut d = h.nodes()[j].clone();
            d.sub_assign(&w.scaled(1.0 - (-s).exp()));
            assert!(d.max_abs() < 1e-15);
        }
        let h = init_history(sg.clone(), |_| Some(w.clone())).unwrap();
        assert!(h.nodes().iter().all(|e| e.max_abs() == 0.0));
        let h = init_separable(sg.clone(), &w, f64::cos);
        let j = 10;
        let mut d = h.nodes()[j].clone();
        d.sub_assign(&w.scaled(1.0 - sg.nodes()[j].cos()));
        assert!(d.max_abs() < 1e-15);
        assert!(init_history(sg, |s| if s > 1.0 { None } else { Some(w.clone()) }).is_err());
    }

    #[test]
    fn linear_history_is_steady_under_constant_source() {
        let (grid, _, sg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = grid.random_vector(&mut rng);
        let mut h = init_separable(sg.clone(), &psi, |s| -s);
        let before = h.clone();
        for _ in 0..20 {
            advance_history(&mut h, &psi, 5e-3).unwrap();
        }
        for (a, b) in h.nodes().iter().zip(before.nodes()) {
            let mut d = a.clone();
            d.sub_assign(b);
            assert!(d.max_abs() <= 1e-12 * (1.0 + b.max_abs()));
        }
        assert!(matches!(
            advance_history(&mut h, &psi, 0.5),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn zero_history_stays_zero() {
        let (grid, _, sg) = setup();
        let mut h = HistoryBuffer::zeros(sg, grid.n());
        advance_history(&mut h, &grid.zero_vector(), 1e-3).unwrap();
        assert!(h.nodes().iter().all(|e| e.max_abs() == 0.0));
        assert_eq!(memory_integral(&grid, &h).max_abs(), 0.0);
        assert_eq!(history_energy(&grid, &h), 0.0);
        assert_eq!(history_dissipation(&grid, &h), 0.0);
    }

    #[test]
    fn separable_memory_integral_and_energy() {
        let grid = Grid::new(8, std::f64::consts::PI).unwrap();
        let kernel = Kernel::exponential(0.5, 2.0).unwrap();
        let sg = Arc::new(SGrid::for_kernel(&kernel, 256, 1e-3).unwrap());
        let w = grid.vector_from(|x| [x[0].sin() * x[1].sin() * x[2].sin(), 0.0, 0.0]);
        let h = init_separable(sg, &w, |s| (-s).exp());
        let m = memory_integral(&grid, &h);
        let mut exact = grid.laplacian(&w);
        exact.scale(kernel.g0() - 0.5 / 3.0);
        let mut d = m.clone();
        d.sub_assign(&exact);
        assert!(d.max_abs() <= 1e-3 * exact.max_abs(), "{}", d.max_abs() / exact.max_abs());

        // ∫ a e^{−d s}(1 − e^{−s})² ds = a(1/d − 2/(d+1) + 1/(d+2))
        let mass = 0.5 * (0.5 - 2.0 / 3.0 + 0.25);
        let e = history_energy(&grid, &h);
        let exact = 0.5 * mass * grid.h1_semi(&w, &w);
        assert!((e - exact).abs() <= 1e-3 * exact);
        let diss = history_dissipation(&grid, &h);
        // g′ = −d1·g at every node, and both sums carry the same ½.
        assert!((diss + 2.0 * e).abs() <= 1e-12 * e);
    }

    #[test]
    fn transport_dissipates_on_geometric_grid() {
        let (grid, kernel, sg) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let eta = sg
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, _)| if j == 0 { grid.zero_vector() } else { grid.random_vector(&mut rng) })
            .collect();
        let h = HistoryBuffer::from_nodes(sg, eta).unwrap();
        assert!(transport_dissipation(&grid, &h) <= 0.0);
        let diss = history_dissipation(&grid, &h);
        assert!(diss <= 0.0);
        assert!(diss.abs() <= kernel.d0() * 2.0 * history_energy(&grid, &h) + 1e-12);
    }

    #[test]
    fn condition_value_is_finite_for_decaying_profile() {
        let kernel = Kernel::polynomial(1.0, 2.0).unwrap();
        let v = initial_history_condition(&kernel, ConvexGauge::Power(4.0), |s| {
            if s < 0.0 { 0.0 } else { (-s).exp() }
        }, &[0.0, 1.0, 10.0]);
        assert!(v.is_finite() && v > 0.0);
    }
}
