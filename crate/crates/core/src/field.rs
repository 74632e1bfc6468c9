//! Uniform box grid with homogeneous Dirichlet boundary, scalar and vector
//! fields on interior nodes, and the centered first-difference calculus.
//!
//! Every operator is composed from the three centered differences
//! `D₁ˣ, D₁ʸ, D₁ᶻ` with a zero ghost layer. The Laplacian is `Σᵢ D₁ⁱD₁ⁱ`
//! (the wide `2h` stencil), so `Δu = ∇div u − ∇×∇×u` holds exactly up to
//! rounding, and the differences are skew-adjoint in the discrete `L²`
//! product, which makes every integration-by-parts identity exact.

use std::io::Write;
use std::ops::{Index, IndexMut};

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
    h: f64,
}

impl Grid {
    /// `n` interior points per axis on `[0, length]³`. `n` must be even: for
    /// odd `n` the centered difference has a null mode and the discrete
    /// Poincaré inequality fails.
    pub fn new(n: usize, length: f64) -> Result<Grid> {
        if n < 4 {
            return Err(Error::InvalidInput(format!("grid needs n >= 4, got {n}")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "grid needs an even n (centered differences are singular for odd n), got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("box length must be positive, got {length}")));
        }
        Ok(Grid {
            n,
            length,
            h: length / (n + 1) as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Linear index, x fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    /// Physical position of node `(i, j, k)`; interior nodes start at `h`.
    pub fn position(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            (i + 1) as f64 * self.h,
            (j + 1) as f64 * self.h,
            (k + 1) as f64 * self.h,
        ]
    }

    /// Continuous Poincaré constant of the box, `L²/(3π²)`.
    pub fn poincare_constant(&self) -> f64 {
        self.length * self.length / (3.0 * std::f64::consts::PI.powi(2))
    }

    /// Eigenvalue of `−Σᵢ D₁ⁱD₁ⁱ` for the mode indices `m ∈ {1..n}³`:
    /// `Σᵢ cos²(mᵢπ/(n+1))/h²`.
    pub fn laplacian_eigenvalue(&self, m: [usize; 3]) -> f64 {
        m.iter()
            .map(|&mi| {
                let c = (mi as f64 * std::f64::consts::PI / (self.n + 1) as f64).cos();
                c * c
            })
            .sum::<f64>()
            / (self.h * self.h)
    }

    /// Smallest eigenvalue of the discrete Dirichlet Laplacian.
    pub fn smallest_laplacian_eigenvalue(&self) -> f64 {
        let half = self.n / 2;
        self.laplacian_eigenvalue([half; 3])
    }

    /// Reciprocal of [`Grid::smallest_laplacian_eigenvalue`]; the sharp constant
    /// in `‖w‖² ≤ C·‖∇w‖²` on this grid. It tends to four times the continuous
    /// constant (from above) because the wide stencil sees sawtooth modes as smooth.
    pub fn discrete_poincare_constant(&self) -> f64 {
        1.0 / self.smallest_laplacian_eigenvalue()
    }

    pub fn scalar_from<F: Fn([f64; 3]) -> f64>(&self, f: F) -> ScalarField {
        let n = self.n;
        let mut data = Vec::with_capacity(self.len());
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data.push(f(self.position(i, j, k)));
                }
            }
        }
        ScalarField { n, data }
    }

    pub fn vector_from<F: Fn([f64; 3]) -> [f64; 3]>(&self, f: F) -> VectorField {
        VectorField([
            self.scalar_from(|x| f(x)[0]),
            self.scalar_from(|x| f(x)[1]),
            self.scalar_from(|x| f(x)[2]),
        ])
    }

    pub fn zero_scalar(&self) -> ScalarField {
        ScalarField::zeros(self.n)
    }

    pub fn zero_vector(&self) -> VectorField {
        VectorField::zeros(self.n)
    }

    /// Centered first difference along `axis`, zero ghost values outside.
    pub fn d1_into(&self, axis: usize, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        let stride = match axis {
            0 => 1,
            1 => n,
            2 => n * n,
            _ => panic!("axis out of range: {axis}"),
        };
        let inv = 0.5 / self.h;
        for k in 0..n {
            for j in 0..n {
                let row = n * (j + n * k);
                for i in 0..n {
                    let idx = row + i;
                    let c = [i, j, k][axis];
                    let fwd = if c + 1 < n { f[idx + stride] } else { 0.0 };
                    let bwd = if c > 0 { f[idx - stride] } else { 0.0 };
                    out[idx] = (fwd - bwd) * inv;
                }
            }
        }
    }

    pub fn d1(&self, axis: usize, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(self.n);
        self.d1_into(axis, &f.data, &mut out.data);
        out
    }

    pub fn grad(&self, f: &ScalarField) -> VectorField {
        VectorField([self.d1(0, f), self.d1(1, f), self.d1(2, f)])
    }

    pub fn div(&self, w: &VectorField) -> ScalarField {
        let mut out = self.d1(0, &w[0]);
        out.add_assign(&self.d1(1, &w[1]));
        out.add_assign(&self.d1(2, &w[2]));
        out
    }

    pub fn curl(&self, w: &VectorField) -> VectorField {
        let mut cx = self.d1(1, &w[2]);
        cx.sub_assign(&self.d1(2, &w[1]));
        let mut cy = self.d1(2, &w[0]);
        cy.sub_assign(&self.d1(0, &w[2]));
        let mut cz = self.d1(0, &w[1]);
        cz.sub_assign(&self.d1(1, &w[0]));
        VectorField([cx, cy, cz])
    }

    /// Wide Laplacian `Σᵢ D₁ⁱD₁ⁱ f`.
    pub fn laplacian_scalar(&self, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(self.n);
        let mut first = vec![0.0; self.len()];
        let mut second = vec![0.0; self.len()];
        for axis in 0..3 {
            self.d1_into(axis, &f.data, &mut first);
            self.d1_into(axis, &first, &mut second);
            for (o, s) in out.data.iter_mut().zip(&second) {
                *o += s;
            }
        }
        out
    }

    pub fn laplacian(&self, w: &VectorField) -> VectorField {
        VectorField([
            self.laplacian_scalar(&w[0]),
            self.laplacian_scalar(&w[1]),
            self.laplacian_scalar(&w[2]),
        ])
    }

    pub fn grad_div(&self, w: &VectorField) -> VectorField {
        self.grad(&self.div(w))
    }

    pub fn curl_curl(&self, w: &VectorField) -> VectorField {
        self.curl(&self.curl(w))
    }

    /// Generic entry point with arity and grid checks.
    pub fn diff_op(&self, kind: DiffOp, f: &Field) -> Result<Field> {
        if f.n() != self.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: f.n(),
            });
        }
        match (kind, f) {
            (DiffOp::Grad, Field::Scalar(s)) => Ok(Field::Vector(self.grad(s))),
            (DiffOp::Div, Field::Vector(v)) => Ok(Field::Scalar(self.div(v))),
            (DiffOp::Curl, Field::Vector(v)) => Ok(Field::Vector(self.curl(v))),
            (DiffOp::Laplacian, Field::Vector(v)) => Ok(Field::Vector(self.laplacian(v))),
            (DiffOp::Laplacian, Field::Scalar(s)) => Ok(Field::Scalar(self.laplacian_scalar(s))),
            (DiffOp::GradDiv, Field::Vector(v)) => Ok(Field::Vector(self.grad_div(v))),
            (DiffOp::CurlCurl, Field::Vector(v)) => Ok(Field::Vector(self.curl_curl(v))),
            (kind, f) => Err(Error::Arity(format!(
                "{kind:?} is not defined on a {} field",
                if matches!(f, Field::Scalar(_)) { "scalar" } else { "vector" }
            ))),
        }
    }

    /// Midpoint-rule `L²` product with `h³` cell weight.
    pub fn l2_scalar(&self, f: &ScalarField, g: &ScalarField) -> f64 {
        f.dot(g) * self.cell_volume()
    }

    pub fn l2(&self, f: &VectorField, g: &VectorField) -> f64 {
        f.dot(g) * self.cell_volume()
    }

    /// `∫ ∇f·∇g` using the centered gradient.
    pub fn h1_semi_scalar(&self, f: &ScalarField, g: &ScalarField) -> f64 {
        self.l2(&self.grad(f), &self.grad(g))
    }

    /// `∫ ∇f:∇g` for vector fields, summed over components.
    pub fn h1_semi(&self, f: &VectorField, g: &VectorField) -> f64 {
        (0..3).map(|c| self.h1_semi_scalar(&f[c], &g[c])).sum()
    }

    /// Generic inner product with arity and grid checks.
    pub fn inner_product(&self, f: &Field, g: &Field, weight: Weight) -> Result<f64> {
        for x in [f, g] {
            if x.n() != self.n {
                return Err(Error::GridMismatch {
                    expected: self.n,
                    found: x.n(),
                });
            }
        }
        match (f, g, weight) {
            (Field::Scalar(a), Field::Scalar(b), Weight::L2) => Ok(self.l2_scalar(a, b)),
            (Field::Vector(a), Field::Vector(b), Weight::L2) => Ok(self.l2(a, b)),
            (Field::Scalar(a), Field::Scalar(b), Weight::H1Semi) => Ok(self.h1_semi_scalar(a, b)),
            (Field::Vector(a), Field::Vector(b), Weight::H1Semi) => Ok(self.h1_semi(a, b)),
            (_, _, Weight::Memory) => Err(Error::Arity(
                "the memory weight applies to history buffers only".into(),
            )),
            _ => Err(Error::Arity("inner product of a scalar with a vector field".into())),
        }
    }

    /// Max-norm of `Δu − (∇div u − ∇×∇×u)`.
    pub fn vector_identity_residual(&self, u: &VectorField) -> f64 {
        let mut r = self.laplacian(u);
        r.sub_assign(&self.grad_div(u));
        r.add_assign(&self.curl_curl(u));
        r.max_abs()
    }

    /// Uniform noise in `[−1, 1]` at every node.
    pub fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> ScalarField {
        ScalarField {
            n: self.n,
            data: (0..self.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> VectorField {
        VectorField([
            self.random_scalar(rng),
            self.random_scalar(rng),
            self.random_scalar(rng),
        ])
    }

    /// Random combination of the lowest `modes³` Dirichlet sine modes.
    pub fn random_smooth_scalar<R: Rng + ?Sized>(&self, rng: &mut R, modes: usize) -> ScalarField {
        let mut coeffs = Vec::new();
        for a in 1..=modes {
            for b in 1..=modes {
                for c in 1..=modes {
                    let amp: f64 = rng.gen_range(-1.0..1.0) / (a * a + b * b + c * c) as f64;
                    coeffs.push(([a, b, c], amp));
                }
            }
        }
        let k = std::f64::consts::PI / self.length;
        self.scalar_from(|x| {
            coeffs
                .iter()
                .map(|(m, amp)| {
                    amp * (m[0] as f64 * k * x[0]).sin()
                        * (m[1] as f64 * k * x[1]).sin()
                        * (m[2] as f64 * k * x[2]).sin()
                })
                .sum()
        })
    }

    pub fn random_smooth_vector<R: Rng + ?Sized>(&self, rng: &mut R, modes: usize) -> VectorField {
        VectorField([
            self.random_smooth_scalar(rng, modes),
            self.random_smooth_scalar(rng, modes),
            self.random_smooth_scalar(rng, modes),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Grad,
    Div,
    Curl,
    Laplacian,
    GradDiv,
    CurlCurl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    L2,
    H1Semi,
    Memory,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl Field {
    pub fn n(&self) -> usize {
        match self {
            Field::Scalar(s) => s.n,
            Field::Vector(v) => v.n(),
        }
    }
}

/// Values on interior nodes, x-fastest ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    n: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(n: usize) -> Self {
        ScalarField {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n * n {
            return Err(Error::InvalidInput(format!(
                "field of {} values does not fit an {n}³ grid",
                data.len()
            )));
        }
        Ok(ScalarField { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn dot(&self, other: &ScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += a * x;
        }
    }

    pub fn add_assign(&mut self, x: &ScalarField) {
        self.axpy(1.0, x);
    }

    pub fn sub_assign(&mut self, x: &ScalarField) {
        self.axpy(-1.0, x);
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|v| *v *= a);
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &ScalarField, b: f64) -> ScalarField {
        ScalarField {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub [ScalarField; 3]);

impl Index<usize> for VectorField {
    type Output = ScalarField;
    fn index(&self, c: usize) -> &ScalarField {
        &self.0[c]
    }
}

impl IndexMut<usize> for VectorField {
    fn index_mut(&mut self, c: usize) -> &mut ScalarField {
        &mut self.0[c]
    }
}

impl VectorField {
    pub fn zeros(n: usize) -> Self {
        VectorField([ScalarField::zeros(n), ScalarField::zeros(n), ScalarField::zeros(n)])
    }

    pub fn n(&self) -> usize {
        self.0[0].n
    }

    pub fn dot(&self, other: &VectorField) -> f64 {
        (0..3).map(|c| self.0[c].dot(&other.0[c])).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn axpy(&mut self, a: f64, x: &VectorField) {
        for c in 0..3 {
            self.0[c].axpy(a, &x.0[c]);
        }
    }

    pub fn add_assign(&mut self, x: &VectorField) {
        self.axpy(1.0, x);
    }

    pub fn sub_assign(&mut self, x: &VectorField) {
        self.axpy(-1.0, x);
    }

    pub fn scale(&mut self, a: f64) {
        self.0.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> VectorField {
        VectorField([
            self.0[0].combine(a, &other.0[0], b),
            self.0[1].combine(a, &other.0[1], b),
            self.0[2].combine(a, &other.0[2], b),
        ])
    }
}

/// Writes a scalar snapshot as CSV: `i,j,k,x,y,z,value`, x fastest.
pub fn write_scalar_csv<W: Write>(grid: &Grid, f: &ScalarField, mut out: W) -> Result<()> {
    writeln!(out, "i,j,k,x,y,z,value")?;
    let n = grid.n();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = grid.position(i, j, k);
                let v = f.as_slice()[grid.index(i, j, k)];
                writeln!(out, "{i},{j},{k},{},{},{},{v:e}", p[0], p[1], p[2])?;
            }
        }
    }
    Ok(())
}

/// Writes a vector snapshot as CSV: `i,j,k,x,y,z,vx,vy,vz`, x fastest.
pub fn write_vector_csv<W: Write>(grid: &Grid, f: &VectorField, mut out: W) -> Result<()> {
    writeln!(out, "i,j,k,x,y,z,vx,vy,vz")?;
    let n = grid.n();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let p = grid.position(i, j, k);
                let idx = grid.index(i, j, k);
                writeln!(
                    out,
                    "{i},{j},{k},{},{},{},{:e},{:e},{:e}",
                    p[0],
                    p[1],
                    p[2],
                    f[0].as_slice()[idx],
                    f[1].as_slice()[idx],
                    f[2].as_slice()[idx]
                )?;
            }
        }
    }
    Ok(())
}

/// Flat little-endian `f64` dump, x fastest.
pub fn write_scalar_binary<W: Write>(f: &ScalarField, mut out: W) -> Result<()> {
    for v in f.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(5, 1.0).is_err());
        assert!(Grid::new(6, -1.0).is_err());
        let g = Grid::new(16, PI).unwrap();
        assert!((g.spacing() - PI / 17.0).abs() < 1e-15);
    }

    #[test]
    fn divergence_of_constant_field_vanishes_inside() {
        // The zero ghost layer makes a constant field non-constant at the
        // boundary; interior nodes away from the walls see zero.
        let g = Grid::new(8, 1.0).unwrap();
        let w = g.vector_from(|_| [1.0, 2.0, 3.0]);
        let d = g.div(&w);
        for k in 1..7 {
            for j in 1..7 {
                for i in 1..7 {
                    assert_eq!(d.as_slice()[g.index(i, j, k)], 0.0);
                }
            }
        }
    }

    #[test]
    fn curl_of_gradient_is_rounding_level() {
        let g = Grid::new(16, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = g.random_scalar(&mut rng);
        let c = g.curl(&g.grad(&f));
        assert!(c.max_abs() <= 1e-13 * f.max_abs() / g.spacing().powi(2));
    }

    #[test]
    fn gradient_converges_at_second_order() {
        let err = |n: usize| {
            let g = Grid::new(n, PI).unwrap();
            let f = g.scalar_from(|x| x[0].sin() * x[1].sin() * x[2].sin());
            let exact = g.vector_from(|x| {
                [
                    x[0].cos() * x[1].sin() * x[2].sin(),
                    x[0].sin() * x[1].cos() * x[2].sin(),
                    x[0].sin() * x[1].sin() * x[2].cos(),
                ]
            });
            let mut d = g.grad(&f);
            d.sub_assign(&exact);
            (d.max_abs(), g.spacing())
        };
        let (e1, h1) = err(16);
        let (e2, h2) = err(32);
        let order = (e1 / e2).ln() / (h1 / h2).ln();
        assert!(order >= 1.9, "observed order {order}");
    }

    #[test]
    fn l2_norm_of_first_mode() {
        let g = Grid::new(16, PI).unwrap();
        let f = g.scalar_from(|x| x[0].sin() * x[1].sin() * x[2].sin());
        let v = g.l2_scalar(&f, &f);
        assert!((v - (PI / 2.0).powi(3)).abs() < 1e-12);
        assert_eq!(g.l2_scalar(&f, &g.zero_scalar()), 0.0);
    }

    #[test]
    fn identity_residual_on_harmonic_field() {
        // u = (yz, xz, xy): Δu = 0 and ∇div u = ∇×∇×u = 0 in the continuum.
        let g = Grid::new(12, 1.0).unwrap();
        let u = g.vector_from(|x| [x[1] * x[2], x[0] * x[2], x[0] * x[1]]);
        assert!(g.vector_identity_residual(&u) <= 1e-12 * u.max_abs());
        assert_eq!(g.vector_identity_residual(&g.zero_vector()), 0.0);
    }

    #[test]
    fn arity_errors() {
        let g = Grid::new(6, 1.0).unwrap();
        let s = Field::Scalar(g.zero_scalar());
        let v = Field::Vector(g.zero_vector());
        assert!(matches!(g.diff_op(DiffOp::Div, &s), Err(Error::Arity(_))));
        assert!(matches!(g.diff_op(DiffOp::Grad, &v), Err(Error::Arity(_))));
        assert!(g.diff_op(DiffOp::Curl, &v).is_ok());
        let other = Grid::new(8, 1.0).unwrap();
        assert!(matches!(
            other.diff_op(DiffOp::Curl, &v),
            Err(Error::GridMismatch { .. })
        ));
        assert!(g.inner_product(&s, &v, Weight::L2).is_err());
        assert!(g.inner_product(&v, &v, Weight::Memory).is_err());
    }

    #[test]
    fn discrete_poincare_constant_limits() {
        // The wide-stencil constant approaches 4·L²/(3π²) from above.
        for n in [8, 16, 64, 256] {
            let g = Grid::new(n, PI).unwrap();
            let ratio = g.discrete_poincare_constant() / g.poincare_constant();
            assert!(ratio > 4.0 && ratio < 4.5);
        }
        let g = Grid::new(1024, PI).unwrap();
        let ratio = g.discrete_poincare_constant() / g.poincare_constant();
        assert!((ratio - 4.0).abs() < 1e-2);
    }

    #[test]
    fn snapshot_csv_has_header_and_rows() {
        let g = Grid::new(4, 1.0).unwrap();
        let f = g.scalar_from(|x| x[0]);
        let mut buf = Vec::new();
        write_scalar_csv(&g, &f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 64);
        assert!(text.starts_with("i,j,k,x,y,z,value\n0,0,0,"));
    }
}
