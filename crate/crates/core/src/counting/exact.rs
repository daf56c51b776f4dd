//! Arbitrary-precision count tables.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

static ZERO: BigUint = BigUint::ZERO;

/// Exact `H` and `E` tables. Row `n` of `H` stores `m = 0..=min(n, m_max)`
/// (since `H[n][m] = H[n][n]` for `m >= n`); row `n` of `E` stores
/// `h = 0..=min(n - 1, m_max - 1)`.
#[derive(Clone, Debug)]
pub struct ExactTable {
    n_max: usize,
    m_max: usize,
    h_rows: Vec<Vec<BigUint>>,
    e_rows: Vec<Vec<BigUint>>,
}

impl ExactTable {
    pub fn build(n_max: usize, m_max: usize) -> ExactTable {
        let mut h_rows: Vec<Vec<BigUint>> = (0..=n_max)
            .map(|n| {
                if n == 0 {
                    Vec::new()
                } else {
                    vec![BigUint::zero(); n.min(m_max) + 1]
                }
            })
            .collect();
        h_rows[1][1] = BigUint::one();
        // Cells on an anti-diagonal n + m = d only read earlier diagonals.
        for d in 3..=n_max + m_max {
            let cells: Vec<(usize, usize)> = (2..=n_max)
                .filter_map(|n| {
                    let m = d.checked_sub(n)?;
                    (m >= 1 && m <= n.min(m_max)).then_some((n, m))
                })
                .collect();
            if cells.is_empty() {
                continue;
            }
            let vals: Vec<BigUint> = cells
                .par_iter()
                .map(|&(n, m)| {
                    let mut acc = BigUint::zero();
                    for j in 1..n {
                        let a = h_get(&h_rows, m_max, j, m - 1);
                        if a.is_zero() {
                            continue;
                        }
                        acc += a * h_get(&h_rows, m_max, n - j, m);
                    }
                    acc
                })
                .collect();
            for ((n, m), v) in cells.into_iter().zip(vals) {
                h_rows[n][m] = v;
            }
        }

        let mut e_rows: Vec<Vec<BigUint>> = (0..=n_max)
            .map(|n| {
                if n == 0 {
                    Vec::new()
                } else {
                    vec![BigUint::zero(); (n - 1).min(m_max - 1) + 1]
                }
            })
            .collect();
        e_rows[1][0] = BigUint::one();
        for d in 3..=n_max + m_max {
            let cells: Vec<(usize, usize)> = (2..=n_max)
                .filter_map(|n| {
                    let h = d.checked_sub(n)?;
                    (h >= 1 && h < n && h < m_max).then_some((n, h))
                })
                .collect();
            if cells.is_empty() {
                continue;
            }
            let vals: Vec<BigUint> = cells
                .par_iter()
                .map(|&(n, h)| {
                    let mut acc = BigUint::zero();
                    for j in 1..n {
                        // first subtree of height exactly h-1, rest of height <= h
                        let a = e_get(&e_rows, j, h - 1);
                        if !a.is_zero() {
                            acc += a * h_get(&h_rows, m_max, n - j, h + 1);
                        }
                        // first subtree of height < h-1, rest of height exactly h
                        let b = h_get(&h_rows, m_max, j, h - 1);
                        if !b.is_zero() {
                            let c = e_get(&e_rows, n - j, h);
                            if !c.is_zero() {
                                acc += b * c;
                            }
                        }
                    }
                    acc
                })
                .collect();
            for ((n, h), v) in cells.into_iter().zip(vals) {
                e_rows[n][h] = v;
            }
        }
        ExactTable {
            n_max,
            m_max,
            h_rows,
            e_rows,
        }
    }

    pub(crate) fn from_rows(
        n_max: usize,
        m_max: usize,
        h_rows: Vec<Vec<BigUint>>,
        e_rows: Vec<Vec<BigUint>>,
    ) -> ExactTable {
        ExactTable {
            n_max,
            m_max,
            h_rows,
            e_rows,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    /// `H[n][m]`, or `None` when `min(m, n) > m_max` or `n` is out of range.
    pub fn h(&self, n: usize, m: usize) -> Option<&BigUint> {
        if n == 0 || n > self.n_max {
            return None;
        }
        let mm = m.min(n);
        (mm <= self.m_max).then(|| &self.h_rows[n][mm])
    }

    /// `E[n][h]` (zero when `h >= n`); panics when `h >= m_max < n`.
    pub fn e(&self, n: usize, h: usize) -> BigUint {
        self.e_ref(n, h).clone()
    }

    pub fn e_ref(&self, n: usize, h: usize) -> &BigUint {
        assert!(n >= 1 && n <= self.n_max, "n = {n} outside table");
        if h >= n {
            return &ZERO;
        }
        assert!(h < self.m_max, "E[{n}][{h}] needs m_max > {h}");
        &self.e_rows[n][h]
    }

    /// `H[n][m]` clamped to the table, for internal loops that stay in range.
    #[inline]
    pub(crate) fn h_ref(&self, n: usize, m: usize) -> &BigUint {
        h_get(&self.h_rows, self.m_max, n, m)
    }
}

#[inline]
fn h_get(rows: &[Vec<BigUint>], m_max: usize, n: usize, m: usize) -> &BigUint {
    let mm = m.min(n);
    debug_assert!(mm <= m_max);
    &rows[n][mm]
}

#[inline]
fn e_get(rows: &[Vec<BigUint>], n: usize, h: usize) -> &BigUint {
    if h >= n {
        &ZERO
    } else {
        &rows[n][h]
    }
}
