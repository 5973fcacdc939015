//! Cell-centred finite volumes on `[0, R]` for radial problems.
//!
//! Cell `i` is centred at `r_i = (i + 1/2) h` with exact shell volume as its
//! mass. Fluxes through the faces `r = (i + 1) h` give a symmetric
//! tridiagonal stiffness; the outer face carries a Dirichlet condition.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RadialGrid {
    pub(crate) dim: usize,
    pub(crate) h: f64,
    pub(crate) r: Vec<f64>,
    pub(crate) w: Vec<f64>,
    /// `A(r_f) / h` for the interior faces between cells `i` and `i + 1`.
    pub(crate) coupling: Vec<f64>,
    /// `2 A(R) / h`: the Dirichlet face.
    pub(crate) boundary: f64,
}

fn surface(dim: usize) -> f64 {
    if dim == 2 {
        2.0 * std::f64::consts::PI
    } else {
        4.0 * std::f64::consts::PI
    }
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, cells: usize) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid("dimension", "must be 2 or 3"));
        }
        if cells < 8 || !(radius > 0.0) {
            return Err(Error::invalid("grid", "need at least 8 cells and a positive radius"));
        }
        let h = radius / cells as f64;
        let s = surface(dim);
        let d = dim as i32;
        let r: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * h).collect();
        let w = (0..cells)
            .map(|i| {
                let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
                s * (hi.powi(d) - lo.powi(d)) / dim as f64
            })
            .collect();
        let area = |f: f64| s * f.powi(d - 1);
        let coupling = (0..cells - 1).map(|i| area((i + 1) as f64 * h) / h).collect();
        Ok(RadialGrid {
            dim,
            h,
            r,
            w,
            coupling,
            boundary: 2.0 * area(radius) / h,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.h * self.r.len() as f64
    }

    fn diag(&self, i: usize) -> f64 {
        let m = self.len();
        let left = if i > 0 { self.coupling[i - 1] } else { 0.0 };
        let right = if i + 1 < m { self.coupling[i] } else { self.boundary };
        left + right
    }

    /// `out = K x`, with `x^T K x = int |grad phi|^2`.
    pub fn kinetic_apply(&self, x: &[f64], out: &mut [f64]) {
        let m = self.len();
        for i in 0..m {
            let mut v = self.diag(i) * x[i];
            if i > 0 {
                v -= self.coupling[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                v -= self.coupling[i] * x[i + 1];
            }
            out[i] = v;
        }
    }

    /// `x^T K x` summed over faces, free of the cancellation in `K x`.
    pub fn kinetic_energy(&self, x: &[f64]) -> f64 {
        let m = self.len();
        let inner: f64 = (0..m - 1).map(|i| self.coupling[i] * (x[i + 1] - x[i]).powi(2)).sum();
        inner + self.boundary * x[m - 1] * x[m - 1]
    }

    /// Solve `(W + dt (mu K + W q)) x = b` by the Thomas algorithm.
    pub fn solve_shifted(&self, mu: f64, dt: f64, q: &[f64], b: &[f64], x: &mut [f64]) -> Result<()> {
        let m = self.len();
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut prev_c = 0.0;
        let mut prev_d = 0.0;
        for i in 0..m {
            let a_i = if i > 0 { -dt * mu * self.coupling[i - 1] } else { 0.0 };
            let c_i = if i + 1 < m { -dt * mu * self.coupling[i] } else { 0.0 };
            let b_i = self.w[i] * (1.0 + dt * q[i]) + dt * mu * self.diag(i);
            let denom = b_i - a_i * prev_c;
            if !(denom.abs() > 0.0) || !denom.is_finite() {
                return Err(Error::invalid("gp", "singular tridiagonal system"));
            }
            c[i] = c_i / denom;
            d[i] = (b[i] - a_i * prev_d) / denom;
            prev_c = c[i];
            prev_d = d[i];
        }
        x[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        Ok(())
    }
}
