//! Exponent admissibility and tuning of the ansatz constants.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use super::lower::{lower_bound, Ansatz, Constants, Precision};
use super::temple::GapConvention;
use super::GasParameter;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::scattering::Dimension;

type Q = Ratio<i64>;

/// Exponents `(alpha, beta, gamma)` of the ansatz, kept as exact rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exponents {
    pub alpha: Q,
    pub beta: Q,
    pub gamma: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    /// The quantity required to be positive.
    #[serde(serialize_with = "ser_ratio")]
    pub value: Q,
    pub pass: bool,
}

fn ser_ratio<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl Exponents {
    pub fn new(alpha: Q, beta: Q, gamma: Q) -> Self {
        Exponents { alpha, beta, gamma }
    }

    /// `(1/17, 6/17, 3/17)`.
    pub fn standard() -> Self {
        Exponents::new(Q::new(1, 17), Q::new(6, 17), Q::new(3, 17))
    }

    pub fn as_f64(&self) -> (f64, f64, f64) {
        let f = |q: Q| *q.numer() as f64 / *q.denom() as f64;
        (f(self.alpha), f(self.beta), f(self.gamma))
    }

    /// The five admissibility conditions, each as a quantity that must be
    /// strictly positive.
    pub fn conditions(&self) -> Vec<Condition> {
        let one = Q::from_integer(1);
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        let items = [
            ("alpha + 5 beta < 2", Q::from_integer(2) - a - b * 5),
            ("alpha > 0", a),
            ("3 beta - 1 > 0", b * 3 - one),
            ("1 - 3 beta + gamma > 0", one - b * 3 + g),
            ("1 - alpha - 2 beta - gamma > 0", one - a - b * 2 - g),
        ];
        items
            .into_iter()
            .map(|(name, value)| Condition {
                name,
                value,
                pass: value > Q::from_integer(0),
            })
            .collect()
    }

    /// Error with the first failing condition named.
    pub fn check(&self) -> Result<()> {
        match self.conditions().into_iter().find(|c| !c.pass) {
            Some(c) => Err(Error::Inadmissible(format!("exponent condition {} fails ({})", c.name, c.value))),
            None => Ok(()),
        }
    }

    /// Convergence rate `min(alpha, 3 beta - 1, 1 - 3 beta + gamma,
    /// 1 - alpha - 2 beta - gamma)`.
    pub fn rate(&self) -> Q {
        let c = self.conditions();
        [c[1].value, c[2].value, c[3].value, c[4].value]
            .into_iter()
            .min()
            .unwrap_or_default()
    }
}

impl fmt::Display for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.alpha, self.beta, self.gamma)
    }
}

impl FromStr for Exponents {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::invalid("exponents", "expected three comma-separated rationals"));
        }
        let parse = |p: &str| -> Result<Q> {
            p.parse::<Q>()
                .map_err(|_| Error::invalid("exponents", format!("cannot parse rational {p:?}")))
        };
        Ok(Exponents::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?))
    }
}

impl Serialize for Exponents {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OptimizeOptions {
    pub exec: Exec,
    /// Points per axis of the log-spaced starting scan.
    pub grid_points: usize,
    pub lo: f64,
    pub hi: f64,
    pub gap: GapConvention,
    pub r0_over_a: f64,
    /// Smallest log-space step of the pattern search.
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            exec: Exec::default(),
            grid_points: 25,
            lo: 1e-2,
            hi: 1e2,
            gap: GapConvention::Pi,
            r0_over_a: 1.0,
            min_step: 1e-6,
            max_evaluations: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Optimized {
    #[serde(rename = "C")]
    pub c: f64,
    pub constants: Constants,
    pub rate: f64,
    pub evaluations: usize,
}

/// `sup_Y (1 - lower(Y)) / Y^rate` for fixed constants; infinite when any
/// point is inadmissible or Temple-invalid.
pub fn error_constant(y_grid: &[f64], ansatz: &Ansatz) -> f64 {
    let (num, den) = {
        let r = ansatz.exponents.rate();
        (*r.numer() as f64, *r.denom() as f64)
    };
    let rate = num / den;
    let mut worst: f64 = 0.0;
    for &y in y_grid {
        let Ok(gas) = GasParameter::from_y(y, 1.0, Dimension::Three) else {
            return f64::INFINITY;
        };
        match lower_bound(&gas, ansatz) {
            Ok(r) if r.valid && r.lower > 0.0 => worst = worst.max((1.0 - r.lower) / y.powf(rate)),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Minimize [`error_constant`] over the three constants: a log-spaced scan
/// on `[lo, hi]^3` followed by a deterministic pattern search.
pub fn optimize_error_constant(y_grid: &[f64], exponents: Exponents, opts: &OptimizeOptions) -> Result<Optimized> {
    exponents.check()?;
    if y_grid.is_empty() {
        return Err(Error::invalid("Y_grid", "must not be empty"));
    }
    if opts.grid_points < 2 || !(opts.lo > 0.0 && opts.hi > opts.lo) {
        return Err(Error::invalid("scan", "need at least 2 points on 0 < lo < hi"));
    }
    let ansatz = |x: [f64; 3]| Ansatz {
        exponents,
        constants: Constants {
            c_eps: x[0].exp(),
            c_ell: x[1].exp(),
            c_r: x[2].exp(),
        },
        r0_over_a: opts.r0_over_a,
        gap: opts.gap,
        precision: Precision::Auto,
    };
    let objective = |x: [f64; 3]| error_constant(y_grid, &ansatz(x));

    let m = opts.grid_points;
    let (llo, lhi) = (opts.lo.ln(), opts.hi.ln());
    let step0 = (lhi - llo) / (m - 1) as f64;
    let axis = |i: usize| llo + step0 * i as f64;
    let scan = opts.exec.map_range(m * m * m, |idx| {
        let x = [axis(idx / (m * m)), axis((idx / m) % m), axis(idx % m)];
        (objective(x), x)
    });
    let mut evaluations = scan.len();
    // First minimum in scan order, so ties resolve deterministically.
    let (mut best, mut x) = scan
        .into_iter()
        .fold((f64::INFINITY, [0.0; 3]), |acc, c| if c.0 < acc.0 { c } else { acc });
    if !best.is_finite() {
        return Err(Error::NonConvergence { best });
    }

    let mut step = step0;
    while step >= opts.min_step {
        if evaluations >= opts.max_evaluations {
            return Err(Error::NonConvergence { best });
        }
        let moves: Vec<[f64; 3]> = (0..6)
            .map(|k| {
                let mut y = x;
                y[k / 2] += if k % 2 == 0 { step } else { -step };
                y
            })
            .collect();
        let values = opts.exec.map(&moves, |&y| objective(y));
        evaluations += moves.len();
        let mut moved = false;
        for (v, y) in values.into_iter().zip(moves) {
            if v < best {
                best = v;
                x = y;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let rate = {
        let r = exponents.rate();
        *r.numer() as f64 / *r.denom() as f64
    };
    Ok(Optimized {
        c: best,
        constants: ansatz(x).constants,
        rate,
        evaluations,
    })
}

/// `count` points from `start` to `stop`, equally spaced in `log`.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > 0.0) || count == 0 {
        return Err(Error::invalid("grid", "need positive endpoints and count >= 1"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (l0, l1) = (start.ln(), stop.ln());
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                start
            } else if i == count - 1 {
                stop
            } else {
                (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}
