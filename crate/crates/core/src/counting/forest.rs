//! Forest convolutions `F_r(n, m) = sum over n_1 + ... + n_r = n of
//! prod H[n_i][m]`: ordered forests of `r` trees, each of height `< m`.
//!
//! A tree with root degree `r` and height at most `m` is a root over such a
//! forest with `n - 1` nodes, so trees with root degree `r` and height
//! exactly `m` number `F_r(n-1, m) - F_r(n-1, m-1)`.

use super::CountTable;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `F_r(n, m)` from an exact table.
pub fn forest_count(r: usize, n: usize, m: usize, table: &CountTable) -> Result<BigUint> {
    if r == 0 || r > n {
        return Err(Error::Domain(format!(
            "forest_count needs 1 <= r <= n (r = {r}, n = {n})"
        )));
    }
    Ok(forest_counts(r, n, m, table)?.pop().unwrap().pop().unwrap())
}

/// `out[k][N] = F_k(N, m)` for `k = 0..=r_max`, `N = 0..=n`; costs
/// `O(r_max n^2)` multiplications.
pub fn forest_counts(r_max: usize, n: usize, m: usize, table: &CountTable) -> Result<Vec<Vec<BigUint>>> {
    let t = table
        .as_exact()
        .ok_or_else(|| Error::Domain("forest_counts needs the exact backend".into()))?;
    if n > t.n_max() || (m > t.m_max() && n > t.m_max()) {
        return Err(Error::TableTooSmall(format!("forest counts need H[..={n}][{m}]")));
    }
    let col: Vec<BigUint> = (0..=n)
        .map(|j| {
            if j == 0 {
                BigUint::zero()
            } else {
                t.h_ref(j, m.min(j)).clone()
            }
        })
        .collect();
    let mut out = Vec::with_capacity(r_max + 1);
    let mut f0 = vec![BigUint::zero(); n + 1];
    f0[0] = BigUint::one();
    out.push(f0);
    for k in 1..=r_max {
        let prev = &out[k - 1];
        let mut cur = vec![BigUint::zero(); n + 1];
        for (big_n, slot) in cur.iter_mut().enumerate().skip(k) {
            let mut acc = BigUint::zero();
            for j in 1..=big_n - (k - 1) {
                let p = &prev[big_n - j];
                if !p.is_zero() && !col[j].is_zero() {
                    acc += &col[j] * p;
                }
            }
            *slot = acc;
        }
        out.push(cur);
    }
    Ok(out)
}
