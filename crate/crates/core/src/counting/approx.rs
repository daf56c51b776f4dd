//! Log-domain approximate count tables.
//!
//! Column `m` of `H` is stored as `H[n][m] / rho_m^n` with
//! `rho_m = 4 cos^2(pi / (m + 1))` (the growth rate of the column), so
//! stored values stay within a few orders of magnitude of 1 and the
//! recurrence only adds positive terms. `E[n][h]` is scaled like column
//! `h + 1`. Entries whose scaled value falls below about `1e-200` are
//! flushed to zero; they correspond to counts at least `1e-200` times
//! smaller than `rho^n` and never carry probability above `1e-150`.

use crate::dd::Dd;
use crate::logreal::LogReal;
use rayon::prelude::*;

const FLUSH: f64 = 1e-200;

/// Approximate `H` and `E` tables with per-column scaling.
#[derive(Clone, Debug)]
pub struct ApproxTable {
    n_max: usize,
    m_max: usize,
    /// `ln rho_m` for `m = 0..=m_max + 1` (0 for `m <= 2`).
    ln_rho: Vec<f64>,
    /// `h_cols[m][n]`, `n = 0..=n_max` (index 0 unused).
    h_cols: Vec<Vec<f64>>,
    /// `e_cols[h][n]` scaled by `rho_{h+1}^n`, `h = 0..m_max`.
    e_cols: Vec<Vec<f64>>,
}

/// `ln(4 cos^2(pi/(m+1)))`, taken as 0 for `m <= 2`.
pub fn ln_rho(m: usize) -> f64 {
    if m <= 2 {
        return 0.0;
    }
    let (_, c) = Dd::PI.div_f64((m + 1) as f64).sin_cos();
    (c.sqr().mul_f64(4.0)).ln().to_f64()
}

#[inline]
fn flush(x: f64) -> f64 {
    if x < FLUSH {
        0.0
    } else {
        x
    }
}

/// `sum_{j=1}^{n-1} a[j] * c[n-j]` in a fixed order with four lanes.
#[inline]
fn conv_at(a: &[f64], c: &[f64], n: usize) -> f64 {
    let mut s = [0.0f64; 4];
    let len = n - 1;
    let chunks = len / 4;
    for q in 0..chunks {
        let j = 1 + 4 * q;
        s[0] += a[j] * c[n - j];
        s[1] += a[j + 1] * c[n - j - 1];
        s[2] += a[j + 2] * c[n - j - 2];
        s[3] += a[j + 3] * c[n - j - 3];
    }
    for j in (1 + 4 * chunks)..n {
        s[0] += a[j] * c[n - j];
    }
    (s[0] + s[1]) + (s[2] + s[3])
}

impl ApproxTable {
    pub fn build(n_max: usize, m_max: usize) -> ApproxTable {
        let ln_rho: Vec<f64> = (0..=m_max + 1).map(ln_rho).collect();
        let mut h_cols = vec![vec![0.0f64; n_max + 1]; m_max + 1];
        // a[m][j] = h[j][m-1] * (rho_{m-1}/rho_m)^j, the first-subtree weights
        let mut a = vec![vec![0.0f64; n_max + 1]; m_max + 1];
        if m_max >= 1 {
            h_cols[1][1] = 1.0;
            if m_max >= 2 {
                a[2][1] = (ln_rho[1] - ln_rho[2]).exp();
            }
        }
        for d in 3..=n_max + m_max {
            let cells: Vec<(usize, usize)> = (2..=n_max)
                .filter_map(|n| {
                    let m = d.checked_sub(n)?;
                    (m >= 1 && m <= m_max).then_some((n, m))
                })
                .collect();
            let vals: Vec<f64> = cells
                .par_iter()
                .map(|&(n, m)| flush(conv_at(&a[m], &h_cols[m], n)))
                .collect();
            for ((n, m), v) in cells.into_iter().zip(vals) {
                h_cols[m][n] = v;
                if m < m_max {
                    let r = n as f64 * (ln_rho[m] - ln_rho[m + 1]);
                    a[m + 1][n] = flush(v * r.exp());
                }
            }
            // the n = 1 cell of column d - 1 is the constant [n=1] term
            let m = d - 1;
            if m >= 2 && m <= m_max {
                let v = (-ln_rho[m]).exp();
                h_cols[m][1] = v;
                if m < m_max {
                    a[m + 1][1] = flush(v * (ln_rho[m] - ln_rho[m + 1]).exp());
                }
            }
        }

        let e_cols = build_e(n_max, m_max, &ln_rho, &h_cols);
        ApproxTable {
            n_max,
            m_max,
            ln_rho,
            h_cols,
            e_cols,
        }
    }

    pub(crate) fn from_parts(n_max: usize, m_max: usize, h_cols: Vec<Vec<f64>>, e_cols: Vec<Vec<f64>>) -> ApproxTable {
        let ln_rho = (0..=m_max + 1).map(ln_rho).collect();
        ApproxTable {
            n_max,
            m_max,
            ln_rho,
            h_cols,
            e_cols,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `ln rho_m` used to scale column `m`.
    #[inline]
    pub fn ln_scale(&self, m: usize) -> f64 {
        self.ln_rho[m]
    }

    /// Scaled `H[n][m] / rho_m^n`; `m` is clamped to `m_max` when `n <= m_max`.
    #[inline]
    pub fn h_scaled(&self, n: usize, m: usize) -> f64 {
        self.h_cols[m][n]
    }

    /// Scaled `E[n][h] / rho_{h+1}^n`.
    #[inline]
    pub fn e_scaled(&self, n: usize, h: usize) -> f64 {
        self.e_cols[h][n]
    }

    pub fn h_column(&self, m: usize) -> &[f64] {
        &self.h_cols[m]
    }

    pub fn e_column(&self, h: usize) -> &[f64] {
        &self.e_cols[h]
    }

    fn to_logreal(v: f64, n: usize, ln_scale: f64) -> LogReal {
        if v == 0.0 {
            return LogReal::ZERO;
        }
        LogReal::from_ln_dd(Dd::from_f64(v).ln() + Dd::from_f64(ln_scale).mul_f64(n as f64))
    }

    pub fn h_logreal(&self, n: usize, m: usize) -> LogReal {
        let m = if m > self.m_max { self.m_max } else { m };
        Self::to_logreal(self.h_cols[m][n], n, self.ln_rho[m])
    }

    pub fn e_logreal(&self, n: usize, h: usize) -> LogReal {
        if h >= n {
            return LogReal::ZERO;
        }
        Self::to_logreal(self.e_cols[h][n], n, self.ln_rho[h + 1])
    }
}

fn build_e(n_max: usize, m_max: usize, ln_rho: &[f64], h_cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut e_cols = vec![vec![0.0f64; n_max + 1]; m_max];
    e_cols[0][1] = (-ln_rho[1]).exp();
    // b1[h][j] = e[j][h-1] (rho_h/rho_{h+1})^j, filled as E is computed
    let mut b1 = vec![vec![0.0f64; n_max + 1]; m_max];
    // b2[h][j] = h[j][h-1] (rho_{h-1}/rho_{h+1})^j
    let mut b2 = vec![vec![0.0f64; n_max + 1]; m_max];
    for h in 1..m_max {
        let r = ln_rho[h - 1] - ln_rho[h + 1];
        for j in 1..=n_max {
            b2[h][j] = flush(h_cols[h - 1][j] * (j as f64 * r).exp());
        }
    }
    if m_max >= 2 {
        b1[1][1] = flush(e_cols[0][1] * (ln_rho[1] - ln_rho[2]).exp());
    }
    for d in 3..=n_max + m_max {
        let cells: Vec<(usize, usize)> = (2..=n_max)
            .filter_map(|n| {
                let h = d.checked_sub(n)?;
                (h >= 1 && h < m_max && h < n).then_some((n, h))
            })
            .collect();
        let vals: Vec<f64> = cells
            .par_iter()
            .map(|&(n, h)| flush(conv_at(&b1[h], &h_cols[h + 1], n) + conv_at(&b2[h], &e_cols[h], n)))
            .collect();
        for ((n, h), v) in cells.into_iter().zip(vals) {
            e_cols[h][n] = v;
            if h + 1 < m_max {
                let r = n as f64 * (ln_rho[h + 1] - ln_rho[h + 2]);
                b1[h + 1][n] = flush(v * r.exp());
            }
        }
    }
    e_cols
}
