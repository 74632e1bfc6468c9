//! Matrix-free restarted GMRES and an Arnoldi eigenvalue estimate.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            rel_tol: 1e-10,
            restart: 120,
            max_iter: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    /// `‖b − Ax‖/‖b‖` recomputed from the final iterate.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

/// Solves `A x = b` starting from `x` (overwritten with the solution).
pub fn gmres<A>(mut apply: A, b: &[f64], x: &mut [f64], opts: GmresOptions) -> Result<GmresStats>
where
    A: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut ax = vec![0.0; n];
    loop {
        apply(x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= opts.rel_tol * bnorm {
            return Ok(GmresStats {
                iterations,
                residual: beta / bnorm,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: beta / bnorm,
            });
        }
        r.iter_mut().for_each(|v| *v /= beta);
        let mut basis = vec![r];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && iterations < opts.max_iter {
            let mut w = vec![0.0; n];
            apply(&basis[k], &mut w);
            // Modified Gram-Schmidt, repeated once for stability.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(&w, q);
                    h[i][k] += c;
                    axpy(&mut w, -c, q);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let rho = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / rho;
            sn[k] = h[k + 1][k] / rho;
            h[k][k] = rho;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k += 1;
            if g[k].abs() <= 0.5 * opts.rel_tol * bnorm || wn == 0.0 {
                break;
            }
            w.iter_mut().for_each(|v| *v /= wn);
            basis.push(w);
        }
        // Back substitution for the least-squares coefficients.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            axpy(x, *yi, q);
        }
    }
}

/// Ritz values of `apply` from a `dim`-step Arnoldi process, with the
/// residual estimate `|h_{m+1,m}·y_m|` of each.
pub fn arnoldi_ritz<A>(mut apply: A, start: &[f64], dim: usize) -> Vec<(Complex<f64>, f64)>
where
    A: FnMut(&[f64], &mut [f64]),
{
    let n = start.len();
    let s = norm(start);
    let mut basis = vec![start.iter().map(|v| v / s).collect::<Vec<_>>()];
    let mut h = DMatrix::<f64>::zeros(dim + 1, dim);
    let mut m = dim;
    for k in 0..dim {
        let mut w = vec![0.0; n];
        apply(&basis[k], &mut w);
        for _ in 0..2 {
            for (i, q) in basis.iter().enumerate() {
                let c = dot(&w, q);
                h[(i, k)] += c;
                axpy(&mut w, -c, q);
            }
        }
        let wn = norm(&w);
        h[(k + 1, k)] = wn;
        if wn <= 1e-14 * h.column(k).norm() {
            m = k + 1;
            break;
        }
        w.iter_mut().for_each(|v| *v /= wn);
        basis.push(w);
    }
    let hm = h.view((0, 0), (m, m)).into_owned();
    let tail = h[(m, m - 1)];
    let eig = hm.clone().complex_eigenvalues();
    // Residual estimate from the last component of each eigenvector.
    let hc = hm.map(|v| Complex::new(v, 0.0));
    eig.iter()
        .map(|&z| {
            let last = last_eigvec_component(&hc, z);
            (z, tail * last)
        })
        .collect()
}

/// Last component of the unit eigenvector of `h` for eigenvalue `z`, by one
/// step of inverse iteration from a fixed start.
fn last_eigvec_component(h: &DMatrix<Complex<f64>>, z: Complex<f64>) -> f64 {
    let m = h.nrows();
    let scale = h.norm().max(1.0);
    let shift = z + Complex::new(1e-10 * scale, 1e-10 * scale);
    let shifted = h - DMatrix::<Complex<f64>>::identity(m, m) * shift;
    let lu = shifted.lu();
    let mut v = nalgebra::DVector::<Complex<f64>>::from_element(m, Complex::new(1.0, 0.0));
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(next) => {
                let nn = next.norm();
                if !(nn.is_finite() && nn > 0.0) {
                    break;
                }
                v = next / Complex::new(nn, 0.0);
            }
            None => break,
        }
    }
    v[m - 1].norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_nonsymmetric_tridiagonal() {
        let n = 200;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 4.0 * x[i] - 1.5 * l - 0.5 * r;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let opts = GmresOptions {
            restart: 20,
            ..GmresOptions::default()
        };
        let stats = gmres(apply, &b, &mut x, opts).unwrap();
        assert!(stats.residual <= 1e-10);
        let mut y = vec![0.0; n];
        apply(&x, &mut y);
        let err: f64 = y.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-9 * norm(&b));
    }

    #[test]
    fn gmres_zero_rhs() {
        let mut x = vec![1.0; 3];
        let s = gmres(|a, b| b.copy_from_slice(a), &[0.0; 3], &mut x, GmresOptions::default()).unwrap();
        assert_eq!(s.iterations, 0);
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn arnoldi_finds_dominant_eigenvalue() {
        // Diagonal with a rotation block: eigenvalues 0.1..0.9 and 2 ± i.
        let n = 40;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 2..n {
                y[i] = 0.1 + 0.8 * (i - 2) as f64 / (n - 3) as f64;
                y[i] *= x[i];
            }
            y[0] = 2.0 * x[0] - x[1];
            y[1] = x[0] + 2.0 * x[1];
        };
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.7).sin()).collect();
        let ritz = arnoldi_ritz(apply, &start, 20);
        let best = ritz.iter().max_by(|a, b| a.0.norm().total_cmp(&b.0.norm())).unwrap();
        assert!((best.0.re - 2.0).abs() < 1e-10);
        assert!((best.0.im.abs() - 1.0).abs() < 1e-10);
        assert!(best.1 < 1e-8);
    }
}
