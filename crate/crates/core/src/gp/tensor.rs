//! Uniform tensor-product grids in two and three dimensions.
//!
//! Dirichlet axes use interior vertices of a uniform partition; Neumann axes
//! use cell centres with no flux through the outer faces. The stiffness is
//! the standard second-difference Laplacian scaled by the cell volume, and
//! shifted systems are solved by Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Clone, Debug)]
pub struct Axis {
    pub coords: Vec<f64>,
    pub h: f64,
    pub neumann: bool,
}

impl Axis {
    /// Interior vertices of `[lo, hi]` split into `intervals` pieces.
    pub fn dirichlet(lo: f64, hi: f64, intervals: usize) -> Self {
        let h = (hi - lo) / intervals as f64;
        Axis {
            coords: (1..intervals).map(|j| lo + h * j as f64).collect(),
            h,
            neumann: false,
        }
    }

    /// Centres of `cells` cells on `[lo, hi]`.
    pub fn neumann(lo: f64, hi: f64, cells: usize) -> Self {
        let h = (hi - lo) / cells as f64;
        Axis {
            coords: (0..cells).map(|j| lo + h * (j as f64 + 0.5)).collect(),
            h,
            neumann: true,
        }
    }

    fn len(&self) -> usize {
        self.coords.len()
    }
}

#[derive(Clone, Debug)]
pub struct TensorGrid {
    pub(crate) axes: Vec<Axis>,
    strides: Vec<usize>,
    /// Cell volume, the same at every node.
    pub(crate) w: f64,
    len: usize,
    exec: Exec,
}

/// Rows per parallel chunk for stencil application.
const CHUNK: usize = 1024;
const CG_TOL: f64 = 1e-13;

impl TensorGrid {
    pub fn new(axes: Vec<Axis>, exec: Exec) -> Result<Self> {
        if !(axes.len() == 2 || axes.len() == 3) || axes.iter().any(|a| a.len() < 4) {
            return Err(Error::invalid("grid", "need 2 or 3 axes with at least 4 nodes each"));
        }
        let len = axes.iter().map(Axis::len).product();
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len() - 1).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        let w = axes.iter().map(|a| a.h).product();
        Ok(TensorGrid {
            axes,
            strides,
            w,
            len,
            exec,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.axes
            .iter()
            .zip(&self.strides)
            .map(|(a, &s)| a.coords[(idx / s) % a.len()])
            .collect()
    }

    /// Diagonal of the stiffness at `idx`.
    fn stiff_diag(&self, idx: usize) -> f64 {
        let mut d = 0.0;
        for (a, &s) in self.axes.iter().zip(&self.strides) {
            let j = (idx / s) % a.len();
            let inv = 1.0 / (a.h * a.h);
            if a.neumann {
                let nb = usize::from(j > 0) + usize::from(j + 1 < a.len());
                d += nb as f64 * inv;
            } else {
                d += 2.0 * inv;
            }
        }
        d * self.w
    }

    fn stiff_row(&self, x: &[f64], idx: usize) -> f64 {
        let mut v = self.stiff_diag(idx) * x[idx];
        for (a, &s) in self.axes.iter().zip(&self.strides) {
            let j = (idx / s) % a.len();
            let c = self.w / (a.h * a.h);
            if j > 0 {
                v -= c * x[idx - s];
            }
            if j + 1 < a.len() {
                v -= c * x[idx + s];
            }
        }
        v
    }

    /// `out = K x`, with `x^T K x = sum_faces w |difference / h|^2`.
    pub fn kinetic_apply(&self, x: &[f64], out: &mut [f64]) {
        self.exec.fill(out, CHUNK, |i| self.stiff_row(x, i));
    }

    /// `x^T K x` summed over faces, free of the cancellation in `K x`.
    pub fn kinetic_energy(&self, x: &[f64]) -> f64 {
        self.exec.sum(self.len, |i| {
            let mut e = 0.0;
            for (a, &s) in self.axes.iter().zip(&self.strides) {
                let j = (i / s) % a.len();
                let c = self.w / (a.h * a.h);
                if j + 1 < a.len() {
                    e += c * (x[i + s] - x[i]).powi(2);
                }
                if !a.neumann {
                    // Faces to the zero boundary values.
                    if j == 0 {
                        e += c * x[i] * x[i];
                    }
                    if j + 1 == a.len() {
                        e += c * x[i] * x[i];
                    }
                }
            }
            e
        })
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.exec.sum(a.len(), |i| a[i] * b[i])
    }

    /// Solve `(W + dt (mu K + W q)) x = b`; `x` holds the starting guess.
    pub fn solve_shifted(&self, mu: f64, dt: f64, q: &[f64], b: &[f64], x: &mut [f64]) -> Result<()> {
        let n = self.len;
        let w = self.w;
        let apply = |v: &[f64], out: &mut [f64]| {
            self.exec.fill(out, CHUNK, |i| {
                w * (1.0 + dt * q[i]) * v[i] + dt * mu * self.stiff_row(v, i)
            });
        };
        let mut diag = vec![0.0; n];
        self.exec
            .fill(&mut diag, CHUNK, |i| w * (1.0 + dt * q[i]) + dt * mu * self.stiff_diag(i));

        let mut ax = vec![0.0; n];
        apply(x, &mut ax);
        let mut r: Vec<f64> = (0..n).map(|i| b[i] - ax[i]).collect();
        let mut z: Vec<f64> = (0..n).map(|i| r[i] / diag[i]).collect();
        let mut p = z.clone();
        let mut rz = self.dot(&r, &z);
        let bnorm = self.dot(b, b).sqrt();
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        let mut ap = vec![0.0; n];
        for _ in 0..10 * n.max(100) {
            if self.dot(&r, &r).sqrt() <= CG_TOL * bnorm {
                return Ok(());
            }
            apply(&p, &mut ap);
            let alpha = rz / self.dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = self.dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::NonConvergence {
            best: self.dot(&r, &r).sqrt() / bnorm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_laplacian_eigenvalue() {
        // Lowest mode of the discrete Dirichlet Laplacian on the unit square.
        let m = 32;
        let g = TensorGrid::new(vec![Axis::dirichlet(0.0, 1.0, m), Axis::dirichlet(0.0, 1.0, m)], Exec::Sequential)
            .unwrap();
        let x: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                (std::f64::consts::PI * p[0]).sin() * (std::f64::consts::PI * p[1]).sin()
            })
            .collect();
        let mut kx = vec![0.0; g.len()];
        g.kinetic_apply(&x, &mut kx);
        let e: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        assert!((g.kinetic_energy(&x) - e).abs() < 1e-10 * e);
        let h = 1.0 / m as f64;
        let exact = 2.0 * 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        for i in 0..g.len() {
            assert!((kx[i] - exact * g.w * x[i]).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn neumann_constant_is_in_kernel() {
        let g = TensorGrid::new(
            vec![Axis::neumann(0.0, 1.0, 5), Axis::neumann(0.0, 2.0, 6), Axis::neumann(0.0, 1.0, 4)],
            Exec::Parallel,
        )
        .unwrap();
        let x = vec![3.0; g.len()];
        let mut kx = vec![1.0; g.len()];
        g.kinetic_apply(&x, &mut kx);
        assert!(kx.iter().all(|v| v.abs() < 1e-12));
        assert_eq!(g.kinetic_energy(&x), 0.0);
    }

    #[test]
    fn cg_solves_shifted_system() {
        let g = TensorGrid::new(vec![Axis::dirichlet(-1.0, 1.0, 20), Axis::dirichlet(-1.0, 1.0, 16)], Exec::Parallel)
            .unwrap();
        let q: Vec<f64> = (0..g.len()).map(|i| g.point(i)[0].powi(2)).collect();
        let x0: Vec<f64> = (0..g.len()).map(|i| (i as f64 * 0.1).cos()).collect();
        let mut kx = vec![0.0; g.len()];
        g.kinetic_apply(&x0, &mut kx);
        let (mu, dt) = (1.0, 3.0);
        let b: Vec<f64> = (0..g.len())
            .map(|i| g.w * x0[i] * (1.0 + dt * q[i]) + dt * mu * kx[i])
            .collect();
        let mut x = vec![0.0; g.len()];
        g.solve_shifted(mu, dt, &q, &b, &mut x).unwrap();
        for (a, b) in x.iter().zip(&x0) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
