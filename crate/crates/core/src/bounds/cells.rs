//! Distributing particles among cells.
//!
//! With `c_n` the fraction of cells holding `n` particles, `sum c_n = 1` and
//! `sum c_n n = k`, the quantity to minimize is
//! `sum_{n<p} c_n n(n-1) + 1/2 sum_{n>=p} c_n n (p-1)`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellMode {
    /// `min_{1<=t<=k} t(t-1) + (k-t)(p-1)/2`.
    Analytic,
    /// Exact minimum over weights `c_n = m_n / denominator`, `n <= n_max`.
    BruteForce { denominator: u32, n_max: u32 },
}

impl CellMode {
    pub const DEFAULT_BRUTE_FORCE: CellMode = CellMode::BruteForce {
        denominator: 16,
        n_max: 24,
    };
}

fn cost(n: u32, p: u32) -> f64 {
    let (n, pf) = (n as f64, p as f64);
    if (n as u32) < p {
        n * (n - 1.0)
    } else {
        0.5 * n * (pf - 1.0)
    }
}

/// Minimum of the cell-distribution objective for mean occupation `k`.
pub fn cell_occupancy_minimize(k: f64, p: u32, mode: CellMode) -> Result<f64> {
    require_positive("k", k)?;
    if k < 1.0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if p < 2 {
        return Err(Error::invalid("p", "must be at least 2"));
    }
    match mode {
        CellMode::Analytic => {
            let f = |t: f64| t * (t - 1.0) + 0.5 * (k - t) * (p as f64 - 1.0);
            // Convex in t with vertex at (p + 1)/4.
            let t = ((p as f64 + 1.0) / 4.0).clamp(1.0, k);
            Ok(f(t))
        }
        CellMode::BruteForce { denominator, n_max } => {
            let table = brute_force_table(k, denominator, n_max)?;
            Ok(table.min_for(p))
        }
    }
}

/// Exact minimizer over rational weights for one `k`, reusable across `p`.
pub struct BruteForceTable {
    denominator: u32,
    n_max: u32,
    total: usize,
}

/// Check feasibility of `sum m_n = D`, `sum m_n n = D k` with `n <= n_max`.
pub fn brute_force_table(k: f64, denominator: u32, n_max: u32) -> Result<BruteForceTable> {
    if denominator == 0 {
        return Err(Error::invalid("denominator", "must be positive"));
    }
    let scaled = k * denominator as f64;
    if (scaled - scaled.round()).abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "k = {k} is not a multiple of 1/{denominator}"
        )));
    }
    if k > n_max as f64 {
        return Err(Error::Infeasible(format!("k = {k} exceeds n_max = {n_max}")));
    }
    Ok(BruteForceTable {
        denominator,
        n_max,
        total: scaled.round() as usize,
    })
}

impl BruteForceTable {
    /// Exhaustive minimum over all multisets of `denominator` occupations
    /// summing to `denominator * k`. Runs as a dynamic program over
    /// (cells used, particles used), which visits every multiset class.
    pub fn min_for(&self, p: u32) -> f64 {
        let d = self.denominator as usize;
        let s = self.total;
        let inf = f64::INFINITY;
        // best[j][t]: minimal sum of costs over j cells with t particles.
        let mut best = vec![vec![inf; s + 1]; d + 1];
        best[0][0] = 0.0;
        for j in 1..=d {
            let (prev, cur) = best.split_at_mut(j);
            let (prev, cur) = (&prev[j - 1], &mut cur[0]);
            for t in 0..=s {
                let mut m = inf;
                for n in 0..=(self.n_max as usize).min(t) {
                    let c = prev[t - n] + cost(n as u32, p);
                    if c < m {
                        m = c;
                    }
                }
                cur[t] = m;
            }
        }
        best[d][s] / d as f64
    }
}

/// Analytic and brute-force minima for every `(k, p)` pair.
pub fn cell_table(ks: &[f64], ps: &[u32], mode: CellMode, exec: Exec) -> Result<Vec<(f64, u32, f64)>> {
    let rows = exec.map(ks, |&k| -> Result<Vec<(f64, u32, f64)>> {
        match mode {
            CellMode::Analytic => ps
                .iter()
                .map(|&p| Ok((k, p, cell_occupancy_minimize(k, p, mode)?)))
                .collect(),
            CellMode::BruteForce { denominator, n_max } => {
                let table = brute_force_table(k, denominator, n_max)?;
                Ok(ps.iter().map(|&p| (k, p, table.min_for(p))).collect())
            }
        }
    });
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuperadditivityReport {
    pub pass: bool,
    /// Most negative relative margin found, with the pair `(n, n')` or
    /// `(n, p)` that produced it.
    pub worst: Option<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub n: u64,
    pub m: u64,
    pub margin: f64,
}

/// Check `E(n + n') >= E(n) + E(n')` on all table pairs and
/// `E(n) >= n/(2p) E(p)` for `n >= p`.
pub fn superadditivity_check(table: &BTreeMap<u64, f64>) -> SuperadditivityReport {
    const REL_TOL: f64 = 1e-12;
    let mut worst: Option<Violation> = None;
    let mut record = |rule: &'static str, n: u64, m: u64, lhs: f64, rhs: f64| {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let margin = (lhs - rhs) / scale;
        if worst.as_ref().is_none_or(|w| margin < w.margin) {
            worst = Some(Violation { rule, n, m, margin });
        }
    };
    for (&n, &en) in table {
        for (&m, &em) in table.range(n..) {
            if let Some(&e) = table.get(&(n + m)) {
                record("E(n+m) >= E(n) + E(m)", n, m, e, en + em);
            }
        }
        for (&p, &ep) in table.range(1..=n) {
            record("E(n) >= n/(2p) E(p)", n, p, en, n as f64 / (2.0 * p as f64) * ep);
        }
    }
    let pass = worst.as_ref().is_none_or(|w| w.margin >= -REL_TOL);
    SuperadditivityReport { pass, worst }
}
