//! Globally adaptive Gauss-Kronrod (7/15) quadrature with breakpoints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

/// One 15-point Kronrod panel; returns `(kronrod, |kronrod - gauss|)`.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Integrate `f` over `[points[0], points[last]]`, splitting at every
/// interior point first. `points` must be nondecreasing.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: Tolerance) -> Result<Integral> {
    if points.len() < 2 {
        return Err(Error::invalid("points", "need at least two points"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("points", "must be finite and nondecreasing"));
    }
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&f, w[0], w[1]);
            heap.push(Panel {
                a: w[0],
                b: w[1],
                value,
                error,
                seq,
            });
            seq += 1;
        }
    }
    loop {
        let (total, err) = totals(&heap);
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature {
                error: err,
                requested: tol.abs,
            });
        }
        let target = tol.abs.max(tol.rel * total.abs());
        if err <= target {
            return Ok(Integral {
                value: total,
                abs_error: err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                error: err,
                requested: target,
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature {
                error: err,
                requested: target,
            });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(&f, a, b);
            heap.push(Panel {
                a,
                b,
                value,
                error,
                seq,
            });
            seq += 1;
        }
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // Sum in interval order so results do not depend on heap layout.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(6) - 2.0 * x, &[0.0, 2.0], Tolerance::default()).unwrap();
        assert!((r.value - (128.0 / 7.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let r = integrate(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], Tolerance::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], Tolerance {
            abs: 1e-10,
            rel: 1e-10,
            max_intervals: 2000,
        })
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unsorted_points() {
        assert!(integrate(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
    }
}
