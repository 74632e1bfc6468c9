//! Matrix-free operators against dense matrices assembled from Kronecker
//! products of the one-dimensional centered difference.

use std::sync::Arc;

use micropolar::dynamics::apply_generator;
use micropolar::field::{Grid, ScalarField, VectorField};
use micropolar::history::{HistoryBuffer, SGrid};
use micropolar::kernel::Kernel;
use micropolar::moduli::Moduli;
use micropolar::state::Model;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Centered difference with zero ghost values.
fn d1_1d(n: usize, h: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        if i + 1 < n {
            d[(i, i + 1)] = 0.5 / h;
        }
        if i > 0 {
            d[(i, i - 1)] = -0.5 / h;
        }
    }
    d
}

struct Dense {
    dx: [DMatrix<f64>; 3],
    zero: DMatrix<f64>,
    eye: DMatrix<f64>,
}

impl Dense {
    fn new(grid: &Grid) -> Dense {
        let n = grid.n();
        let d = d1_1d(n, grid.spacing());
        let i = DMatrix::<f64>::identity(n, n);
        // Node index i + n(j + nk): x varies fastest, so it is the last factor.
        let dx = i.kronecker(&i).kronecker(&d);
        let dy = i.kronecker(&d).kronecker(&i);
        let dz = d.kronecker(&i).kronecker(&i);
        let m = n * n * n;
        Dense {
            dx: [dx, dy, dz],
            zero: DMatrix::zeros(m, m),
            eye: DMatrix::identity(m, m),
        }
    }

    fn lap(&self) -> DMatrix<f64> {
        self.dx.iter().map(|d| d * d).fold(self.zero.clone(), |a, b| a + b)
    }

    fn block(rows: [[&DMatrix<f64>; 3]; 3]) -> DMatrix<f64> {
        let m = rows[0][0].nrows();
        let mut out = DMatrix::zeros(3 * m, 3 * m);
        for (r, row) in rows.iter().enumerate() {
            for (c, b) in row.iter().enumerate() {
                out.view_mut((r * m, c * m), (m, m)).copy_from(b);
            }
        }
        out
    }

    fn vec_lap(&self) -> DMatrix<f64> {
        let l = self.lap();
        Dense::block([[&l, &self.zero, &self.zero], [&self.zero, &l, &self.zero], [&self.zero, &self.zero, &l]])
    }

    fn grad_div(&self) -> DMatrix<f64> {
        let d = &self.dx;
        let p = |a: usize, b: usize| &d[a] * &d[b];
        let e = [[p(0, 0), p(0, 1), p(0, 2)], [p(1, 0), p(1, 1), p(1, 2)], [p(2, 0), p(2, 1), p(2, 2)]];
        Dense::block([[&e[0][0], &e[0][1], &e[0][2]], [&e[1][0], &e[1][1], &e[1][2]], [&e[2][0], &e[2][1], &e[2][2]]])
    }

    fn curl(&self) -> DMatrix<f64> {
        let [dx, dy, dz] = &self.dx;
        let (mdx, mdy, mdz) = (-dx.clone(), -dy.clone(), -dz.clone());
        Dense::block([[&self.zero, &mdz, dy], [dz, &self.zero, &mdx], [&mdy, dx, &self.zero]])
    }

    fn grad(&self) -> DMatrix<f64> {
        let m = self.zero.nrows();
        let mut out = DMatrix::zeros(3 * m, m);
        for c in 0..3 {
            out.view_mut((c * m, 0), (m, m)).copy_from(&self.dx[c]);
        }
        out
    }

    fn div(&self) -> DMatrix<f64> {
        self.grad().transpose() * -1.0
    }

    fn vec_eye(&self) -> DMatrix<f64> {
        Dense::block([[&self.eye, &self.zero, &self.zero], [&self.zero, &self.eye, &self.zero], [&self.zero, &self.zero, &self.eye]])
    }
}

fn flat_v(w: &VectorField) -> DVector<f64> {
    DVector::from_iterator(3 * w[0].as_slice().len(), w.0.iter().flat_map(|c| c.as_slice().iter().copied()))
}

fn flat_s(f: &ScalarField) -> DVector<f64> {
    DVector::from_column_slice(f.as_slice())
}

fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64) {
    let scale = a.amax().max(b.amax()).max(1.0);
    let err = (a - b).amax();
    assert!(err <= tol * scale, "dense and matrix-free differ by {err:e} (scale {scale:e})");
}

#[test]
fn first_derivatives_and_laplacian_match_kronecker_products() {
    let grid = Grid::new(6, 1.3).unwrap();
    let dense = Dense::new(&grid);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = grid.random_scalar(&mut rng);
    let w = grid.random_vector(&mut rng);
    for axis in 0..3 {
        close(&flat_s(&grid.d1(axis, &f)), &(&dense.dx[axis] * flat_s(&f)), 1e-13);
    }
    close(&flat_s(&grid.laplacian_scalar(&f)), &(dense.lap() * flat_s(&f)), 1e-13);
    close(&flat_v(&grid.grad(&f)), &(dense.grad() * flat_s(&f)), 1e-13);
    close(&flat_s(&grid.div(&w)), &(dense.div() * flat_v(&w)), 1e-13);
    close(&flat_v(&grid.curl(&w)), &(dense.curl() * flat_v(&w)), 1e-13);
    close(&flat_v(&grid.grad_div(&w)), &(dense.grad_div() * flat_v(&w)), 1e-13);
}

#[test]
fn vector_identity_holds_as_a_matrix_identity() {
    let grid = Grid::new(4, 1.0).unwrap();
    let dense = Dense::new(&grid);
    let curl = dense.curl();
    let residual = dense.vec_lap() - (dense.grad_div() - &curl * &curl);
    assert!(residual.amax() <= 1e-12 * dense.vec_lap().amax());
    // Skew-adjoint D, self-adjoint curl.
    assert!((dense.grad().transpose() + dense.div()).amax() == 0.0);
    assert!((&curl - curl.transpose()).amax() == 0.0);
}

#[test]
fn generator_rows_match_dense_assembly() {
    let grid = Grid::new(4, 1.1).unwrap();
    let moduli = Moduli {
        mu: 1.3,
        kappa: 0.7,
        lambda: 0.4,
        gamma: 1.2,
        alpha: 0.3,
        beta: 0.2,
        d: 1.7,
        k: 0.9,
        b: 0.6,
        alpha0: 1.1,
        xi: 0.5,
        xi0: 0.8,
    };
    let kernel = Kernel::exponential(0.4, 1.5).unwrap();
    let sgrid = SGrid::from_nodes(&kernel, vec![0.0, 0.1, 0.3, 0.7, 1.5, 3.0]).unwrap();
    let model = Model::with_sgrid(grid, moduli, kernel.clone(), sgrid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = model.random_state(&mut rng);
    let a = apply_generator(&model, &s);

    let dense = Dense::new(&grid);
    let m = &moduli;
    let curl = dense.curl();
    let curlcurl = &curl * &curl;
    let (u, v, phi, psi) = (flat_v(&s.u), flat_v(&s.v), flat_v(&s.phi), flat_v(&s.psi));
    let (theta, big_theta) = (flat_s(&s.theta), flat_s(&s.big_theta));

    // Elastic row.
    let a1 = dense.vec_lap() * m.mu + dense.grad_div() * (m.lambda + m.mu + m.kappa) - &curlcurl * m.kappa;
    let expect_v = &a1 * &u - &v * m.xi0 + &curl * &phi * m.kappa
        - dense.grad() * (&theta + &big_theta * m.alpha0) * m.b;
    close(&flat_v(&a.v), &expect_v, 1e-12);

    // Microrotation row with the memory quadrature written out node by node.
    let beta0 = m.gamma - kernel.g0();
    let nodes = model.sgrid.nodes().to_vec();
    let w = model.sgrid.weights();
    let mut memory = DVector::zeros(phi.len());
    for (j, e) in s.eta.nodes().iter().enumerate() {
        memory += dense.vec_lap() * flat_v(e) * (w[j] * kernel.value(nodes[j]));
    }
    let a2 = dense.vec_lap() * beta0 + dense.grad_div() * (m.alpha + m.beta) - dense.vec_eye() * (2.0 * m.kappa);
    let expect_psi = &a2 * &phi - &psi * m.xi + &curl * &u * m.kappa + memory;
    close(&flat_v(&a.psi), &expect_psi, 1e-12);

    // Thermal row.
    let expect_tt = dense.lap() * &theta * m.k - &big_theta * m.d - dense.div() * &v * m.b;
    close(&flat_s(&a.big_theta), &expect_tt, 1e-12);

    // History rows: backward difference in s plus ψ.
    for j in 1..nodes.len() {
        let ds = nodes[j] - nodes[j - 1];
        let expect = -(flat_v(&s.eta.nodes()[j]) - flat_v(&s.eta.nodes()[j - 1])) / ds + &psi;
        close(&flat_v(&a.eta.nodes()[j]), &expect, 1e-12);
    }
    assert_eq!(a.eta.nodes()[0].max_abs(), 0.0);
    close(&flat_v(&a.u), &v, 0.0);
    close(&flat_v(&a.phi), &psi, 0.0);
    close(&flat_s(&a.theta), &big_theta, 0.0);
}

#[test]
fn history_buffer_rejects_nonzero_inflow() {
    let kernel = Kernel::exponential(0.5, 2.0).unwrap();
    let sg = Arc::new(SGrid::from_nodes(&kernel, vec![0.0, 0.5, 1.0]).unwrap());
    let grid = Grid::new(4, 1.0).unwrap();
    let ones = grid.vector_from(|_| [1.0, 0.0, 0.0]);
    assert!(HistoryBuffer::from_nodes(sg.clone(), vec![ones.clone(), ones.clone(), ones.clone()]).is_err());
    assert!(HistoryBuffer::from_nodes(sg, vec![grid.zero_vector(), ones]).is_err());
}
