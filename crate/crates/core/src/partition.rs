//! Partition function, reduced sum `W_n`, and exact laws of the height and
//! of the root degree of a μ-height-biased tree.
//!
//! All laws are assembled in the log domain from table counts. Tables may
//! be truncated in height (`m_max < n`); every operation bounds the mass it
//! cannot see and fails with [`Error::TableTooSmall`] when that bound
//! exceeds [`TAIL_TOLERANCE`].

use crate::asymptotics;
use crate::counting::{catalan, Backend, CountTable};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::logreal::LogReal;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// Largest relative mass allowed outside a truncated table.
pub const TAIL_TOLERANCE: f64 = 1e-15;

/// Exhaustion tolerance for degree counts built from log-backend tables,
/// whose entries carry about `1e-13` relative error.
pub const APPROX_DEGREE_TOLERANCE: f64 = 1e-10;

/// Exact law of the height.
#[derive(Clone, Debug)]
pub struct HeightLaw {
    pub n: usize,
    pub mu: f64,
    pub backend: Backend,
    /// Normalization `Z` (restricted to the heights in `probs`).
    pub z: LogReal,
    /// `probs[m] = P(h = m)` for `m = 0..probs.len()`.
    pub probs: Vec<LogReal>,
    /// Upper bound on the mass of heights beyond `probs`.
    pub tail_bound: f64,
}

impl HeightLaw {
    pub fn prob(&self, m: usize) -> f64 {
        self.probs.get(m).map_or(0.0, |p| p.to_f64())
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.pmf().iter().enumerate().map(|(m, p)| m as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.pmf()
            .iter()
            .enumerate()
            .map(|(m, p)| (m as f64 - mean).powi(2) * p)
            .sum()
    }

    /// `P(h >= k)` in the log domain.
    pub fn upper_tail(&self, k: usize) -> LogReal {
        LogReal::sum(self.probs.iter().skip(k))
    }

    /// `P(h <= k)` in the log domain.
    pub fn lower_tail(&self, k: usize) -> LogReal {
        LogReal::sum(self.probs.iter().take(k + 1))
    }

    /// Smallest `m` with `P(h <= m) >= q`.
    pub fn quantile(&self, q: f64) -> usize {
        let mut acc = 0.0;
        for (m, p) in self.pmf().iter().enumerate() {
            acc += p;
            if acc >= q {
                return m;
            }
        }
        self.probs.len() - 1
    }

    /// Cumulative distribution used by samplers.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pmf()
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Exact law of the root degree.
#[derive(Clone, Debug)]
pub struct RootDegreeLaw {
    pub n: usize,
    pub mu: f64,
    /// `probs[r] = P(deg = r)` for `r = 0..probs.len()`.
    pub probs: Vec<LogReal>,
    /// Mass neglected by the height and degree truncations (upper bound).
    pub truncated_mass: f64,
}

impl RootDegreeLaw {
    pub fn prob(&self, r: usize) -> f64 {
        self.probs.get(r).map_or(0.0, |p| p.to_f64())
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.probs.iter().map(|p| p.to_f64()).collect()
    }

    pub fn mean(&self) -> f64 {
        self.pmf().iter().enumerate().map(|(r, p)| r as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.pmf()
            .iter()
            .enumerate()
            .map(|(r, p)| (r as f64 - mean).powi(2) * p)
            .sum()
    }
}

/// Weighted heights `E[n][m] e^{-mu m}` for the heights in the table and a
/// bound on the relative weight of the rest.
fn weighted_heights(n: usize, mu: f64, table: &CountTable) -> Result<(Vec<LogReal>, LogReal, f64)> {
    if n == 0 || n > table.n_max() {
        return Err(Error::TableTooSmall(format!("n = {n} outside 1..={}", table.n_max())));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!(
            "mu must be a finite nonnegative number, got {mu}"
        )));
    }
    let top = (n - 1).min(table.m_max() - 1);
    let mut w = Vec::with_capacity(top + 1);
    for m in 0..=top {
        w.push(table.e(n, m)?.mul_exp_dd(tilt(mu, m)));
    }
    let z = LogReal::sum(&w);
    let mut tail = 0.0;
    if top + 1 < n {
        let m0 = top + 1;
        let rest = table.count_at_least(n, m0)?.mul_exp_dd(tilt(mu, m0));
        tail = (rest / z).to_f64();
        if tail > TAIL_TOLERANCE {
            return Err(Error::TableTooSmall(format!(
                "heights >= {m0} may carry mass {tail:.3e} at n = {n}, mu = {mu}; increase m_max"
            )));
        }
    }
    Ok((w, z, tail))
}

/// `Z = sum_T e^{-mu h(T)}` over trees with `n` nodes.
/// `-mu * m` in double-double.
fn tilt(mu: f64, m: usize) -> Dd {
    Dd::from_f64(mu).mul_f64(-(m as f64))
}

pub fn partition_function(n: usize, mu: f64, table: &CountTable) -> Result<LogReal> {
    Ok(weighted_heights(n, mu, table)?.1)
}

/// `Z` through `H`: `C_{n-1} e^{-mu(n-1)} + e^mu (e^mu - 1) sum_{m=2}^{n-1}
/// H[n][m] e^{-mu(m+1)}`. Needs `H[n][m]` for all `m < n`.
pub fn partition_function_via_h(n: usize, mu: f64, table: &CountTable) -> Result<LogReal> {
    if n == 1 {
        return Ok(LogReal::ONE);
    }
    if !table.h_known(n, n - 1) {
        return Err(Error::TableTooSmall(format!("needs H[{n}][m] for all m < {n}")));
    }
    let first = LogReal::from_biguint(&catalan(n - 1)).mul_exp_dd(tilt(mu, n - 1));
    if mu == 0.0 {
        return Ok(first);
    }
    let mut terms = Vec::with_capacity(n);
    for m in 2..n {
        terms.push(table.h(n, m)?.mul_exp_dd(tilt(mu, m + 1)));
    }
    let factor = LogReal::from_ln_dd(Dd::from_f64(mu) + Dd::from_f64(mu).expm1().ln());
    Ok(first + factor * LogReal::sum(&terms))
}

/// `W_n = 4^{-n} sum_{m=3}^{n} H[n][m-1] e^{-mu m}`.
pub fn w_sum(n: usize, mu: f64, table: &CountTable) -> Result<LogReal> {
    if n < 3 {
        return Ok(LogReal::ZERO);
    }
    if n > table.n_max() {
        return Err(Error::TableTooSmall(format!("n = {n} > n_max")));
    }
    let ln4n = Dd::LN2.mul_f64(2.0 * n as f64);
    let mut terms = Vec::with_capacity(n);
    let mut last = 2;
    for m in 3..=n {
        if !table.h_known(n, m - 1) {
            break;
        }
        terms.push(table.h(n, m - 1)?.mul_exp_dd(tilt(mu, m)));
        last = m;
    }
    let s = LogReal::sum(&terms);
    if last < n {
        // H[n][m-1] <= C_{n-1} for the missing terms
        if mu == 0.0 {
            return Err(Error::TableTooSmall("W at mu = 0 needs the full table".into()));
        }
        let c = LogReal::from_biguint(&catalan(n - 1));
        let bound = c.mul_exp_dd(tilt(mu, last + 1)) / LogReal::from_f64(-(-mu).exp_m1());
        let rel = (bound / s).to_f64();
        if rel > TAIL_TOLERANCE {
            return Err(Error::TableTooSmall(format!(
                "W at n = {n}, mu = {mu} misses terms of relative size {rel:.3e}"
            )));
        }
    }
    Ok(s.mul_exp_dd(-ln4n))
}

pub fn height_law(n: usize, mu: f64, table: &CountTable) -> Result<HeightLaw> {
    let (w, z, tail) = weighted_heights(n, mu, table)?;
    let probs = w.iter().map(|t| *t / z).collect();
    Ok(HeightLaw {
        n,
        mu,
        backend: table.backend(),
        z,
        probs,
        tail_bound: tail,
    })
}

/// Heights carrying all but `TAIL_TOLERANCE` of the mass.
fn height_window(law: &HeightLaw) -> Vec<usize> {
    let pmf = law.pmf();
    let mut order: Vec<usize> = (0..pmf.len()).collect();
    order.sort_by(|&a, &b| pmf[b].partial_cmp(&pmf[a]).unwrap().then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut out = Vec::new();
    for m in order {
        if pmf[m] == 0.0 {
            break;
        }
        out.push(m);
        acc += pmf[m];
        if acc >= 1.0 - TAIL_TOLERANCE {
            break;
        }
    }
    out.sort_unstable();
    out
}

/// Scalar used by the forest recurrences.
trait ForestScalar: Zero + One + Clone + Send + Sync {
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn to_logreal(&self, ln_scale: Dd) -> LogReal;
}

impl ForestScalar for f64 {
    #[inline]
    fn add_mul(&mut self, a: &f64, b: &f64) {
        *self += a * b;
    }
    fn to_logreal(&self, ln_scale: Dd) -> LogReal {
        if *self == 0.0 {
            LogReal::ZERO
        } else {
            LogReal::from_ln_dd(Dd::from_f64(*self).ln() + ln_scale)
        }
    }
}

impl ForestScalar for BigUint {
    fn add_mul(&mut self, a: &BigUint, b: &BigUint) {
        *self += a * b;
    }
    fn to_logreal(&self, _: Dd) -> LogReal {
        LogReal::from_biguint(self)
    }
}

/// Counts of trees with `big_n + 1` nodes, height exactly `m` and root
/// degree `r`, for `r = 1..`, until they account for all but a relative
/// `tol` of `total` or `r_cap` is reached.
///
/// With `F_r` the forests of `r` trees of height `< m` and `G_r` those whose
/// tallest tree has height exactly `m - 1`:
/// `F_r = H_m * F_{r-1}`, `G_r = E_{m-1} * F_{r-1} + H_{m-1} * G_{r-1}`.
#[allow(clippy::too_many_arguments)]
fn degree_counts_at_height<T: ForestScalar>(
    big_n: usize,
    hcol: &[T],
    ecol: &[T],
    hprev: &[T],
    ln_scale: Dd,
    total: LogReal,
    r_cap: usize,
    tol: f64,
) -> (Vec<LogReal>, bool) {
    let mut f_prev = vec![T::zero(); big_n + 1];
    f_prev[0] = T::one();
    let mut g_prev = vec![T::zero(); big_n + 1];
    let mut out = vec![LogReal::ZERO];
    let mut acc = LogReal::ZERO;
    for r in 1..=r_cap.min(big_n) {
        let mut f = vec![T::zero(); big_n + 1];
        let mut g = vec![T::zero(); big_n + 1];
        for nn in r..=big_n {
            let (fv, gv) = (&mut f[nn], &mut g[nn]);
            for j in 1..=nn - (r - 1) {
                let fp = &f_prev[nn - j];
                if !fp.is_zero() {
                    fv.add_mul(&hcol[j], fp);
                    gv.add_mul(&ecol[j], fp);
                }
                let gp = &g_prev[nn - j];
                if !gp.is_zero() {
                    gv.add_mul(&hprev[j], gp);
                }
            }
        }
        let c = g[big_n].to_logreal(ln_scale);
        out.push(c);
        acc = acc + c;
        f_prev = f;
        g_prev = g;
        if !total.is_zero() && (acc / total).to_f64() >= 1.0 - tol {
            return (out, true);
        }
    }
    (out, total.is_zero())
}

/// Exact law of the root degree, restricted to heights carrying all but
/// `1e-15` of the mass and truncated in degree once each height's counts
/// are exhausted to the same tolerance.
pub fn root_degree_law(n: usize, mu: f64, table: &CountTable, r_max: Option<usize>) -> Result<RootDegreeLaw> {
    if n < 2 {
        return Err(Error::Domain("root degree law needs n >= 2".into()));
    }
    let r_cap = r_max.unwrap_or(n - 1);
    if r_cap > n - 1 || r_cap == 0 {
        return Err(Error::Domain(format!("r_max must lie in 1..={}", n - 1)));
    }
    let law = height_law(n, mu, table)?;
    let window = height_window(&law);
    let big_n = n - 1;
    let per_height: Vec<Result<(usize, Vec<LogReal>)>> = window
        .par_iter()
        .map(|&m| {
            let total = table.e(n, m)?;
            let (counts, done) = if m == 1 {
                // the star is the only tree of height 1
                let mut v = vec![LogReal::ZERO; n];
                v[n - 1] = LogReal::ONE;
                (v, r_cap == n - 1)
            } else if let Some(ex) = table.as_exact() {
                let hcol: Vec<BigUint> = (0..=big_n)
                    .map(|j| {
                        if j == 0 {
                            BigUint::zero()
                        } else {
                            ex.h_ref(j, m).clone()
                        }
                    })
                    .collect();
                let ecol: Vec<BigUint> = (0..=big_n)
                    .map(|j| if j == 0 { BigUint::zero() } else { ex.e(j, m - 1) })
                    .collect();
                let hprev: Vec<BigUint> = (0..=big_n)
                    .map(|j| {
                        if j == 0 {
                            BigUint::zero()
                        } else {
                            ex.h_ref(j, m - 1).clone()
                        }
                    })
                    .collect();
                degree_counts_at_height(big_n, &hcol, &ecol, &hprev, Dd::ZERO, total, r_cap, TAIL_TOLERANCE)
            } else {
                let ap = table.as_approx().unwrap();
                let (lm, lp) = (ap.ln_scale(m), ap.ln_scale(m - 1));
                let hcol: Vec<f64> = (0..=big_n)
                    .map(|j| if j == 0 { 0.0 } else { ap.h_scaled(j, m) })
                    .collect();
                let ecol: Vec<f64> = (0..=big_n)
                    .map(|j| if j == 0 { 0.0 } else { ap.e_scaled(j, m - 1) })
                    .collect();
                let hprev: Vec<f64> = (0..=big_n)
                    .map(|j| {
                        if j == 0 {
                            0.0
                        } else {
                            ap.h_scaled(j, m - 1) * (j as f64 * (lp - lm)).exp()
                        }
                    })
                    .collect();
                let scale = Dd::from_f64(lm).mul_f64(big_n as f64);
                degree_counts_at_height(
                    big_n,
                    &hcol,
                    &ecol,
                    &hprev,
                    scale,
                    total,
                    r_cap,
                    APPROX_DEGREE_TOLERANCE,
                )
            };
            if !done {
                return Err(Error::Domain(format!(
                    "r_max = {r_cap} does not exhaust trees of height {m}"
                )));
            }
            Ok((m, counts))
        })
        .collect();
    let mut probs: Vec<Vec<LogReal>> = Vec::new();
    let mut max_r = 0;
    for item in per_height {
        let (m, counts) = item?;
        let w = LogReal::ONE.mul_exp_dd(tilt(mu, m)) / law.z;
        let row: Vec<LogReal> = counts.iter().map(|c| *c * w).collect();
        max_r = max_r.max(row.len());
        probs.push(row);
    }
    let mut out = Vec::with_capacity(max_r);
    for r in 0..max_r {
        let terms: Vec<LogReal> = probs.iter().filter_map(|row| row.get(r).copied()).collect();
        out.push(LogReal::sum(&terms));
    }
    let covered: f64 = out.iter().map(|p| p.to_f64()).sum();
    Ok(RootDegreeLaw {
        n,
        mu,
        probs: out,
        truncated_mass: (1.0 - covered).max(0.0) + law.tail_bound,
    })
}

/// One point of [`ldp_curve`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LdpPoint {
    pub x: f64,
    /// `-(mu^2 n)^{-1/3} ln P(...)`; infinite when the event is empty.
    pub value: f64,
    /// Height threshold used.
    pub threshold: usize,
}

/// Empirical rate `-(mu^2 n)^{-1/3} ln P(h >= x L)` for `x >= 1` and with
/// `h <= x L` for `x < 1`, where `L = (2 pi^2 n / mu)^{1/3}`.
pub fn ldp_curve(n: usize, mu: f64, xs: &[f64], table: &CountTable) -> Result<Vec<LdpPoint>> {
    if !(mu > 0.0) {
        return Err(Error::Domain("ldp_curve needs mu > 0".into()));
    }
    let law = height_law(n, mu, table)?;
    let l = (2.0 * std::f64::consts::PI.powi(2) * n as f64 / mu).cbrt();
    let speed = (mu * mu * n as f64).cbrt();
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("ldp grid point {x} must be positive")));
        }
        let (p, threshold) = if x >= 1.0 {
            let k = (x * l).ceil() as usize;
            if k >= n {
                (LogReal::ZERO, k)
            } else if k >= law.probs.len() {
                return Err(Error::TableTooSmall(format!(
                    "P(h >= {k}) lies beyond the table's height range"
                )));
            } else {
                (law.upper_tail(k), k)
            }
        } else {
            let k = (x * l).floor() as usize;
            (law.lower_tail(k), k)
        };
        let value = if p.is_zero() { f64::INFINITY } else { -p.ln() / speed };
        out.push(LdpPoint { x, value, threshold });
    }
    Ok(out)
}

/// Heuristic height bound for a table serving `(n, mu)`: the first height
/// past the mode whose upper tail, tilted by `e^{-mu m}`, drops below
/// `1e-18` of the largest height weight, plus a margin.
pub fn suggest_m_max(n: usize, mu: f64) -> usize {
    if n <= 3 {
        return n.max(2);
    }
    let nf = n as f64;
    let ln_c = LogReal::from_biguint(&catalan(n - 1)).ln();
    let upper = |m: usize| -> f64 {
        let y = (m * m) as f64 / nf;
        if y < 1.0 {
            return 0.0;
        }
        let s: f64 = (1..=6)
            .map(|k| {
                let k2 = (k * k) as f64;
                (4.0 * k2 * y - 2.0) * (-k2 * y).exp()
            })
            .sum();
        if s > 0.0 {
            s.ln().min(0.0)
        } else {
            f64::NEG_INFINITY
        }
    };
    let lower = |m: usize| -> f64 {
        // trees of height exactly m are at most those of height < m + 1
        if m + 1 >= n {
            return 0.0;
        }
        match asymptotics::asymptotic_count(n, m + 1) {
            Ok(v) => (v.ln() - ln_c).min(0.0),
            Err(_) => 0.0,
        }
    };
    let mut best = f64::NEG_INFINITY;
    let mut arg = 1;
    for m in 1..n {
        let w = lower(m).min(upper(m)) - mu * m as f64;
        if w > best {
            best = w;
            arg = m;
        }
    }
    let cut = (1e-18f64).ln();
    let mut m = arg;
    while m + 1 < n && upper(m) - mu * m as f64 - best > cut {
        m += 1;
    }
    ((m as f64 * 1.1) as usize + 4).clamp(2, n)
}

/// Table covering every `(n, mu)` in `points`, grown until each height law
/// fits within [`TAIL_TOLERANCE`].
pub fn table_for(points: &[(usize, f64)], backend: Backend, cache_dir: Option<&std::path::Path>) -> Result<CountTable> {
    let n_max = points.iter().map(|p| p.0).max().unwrap_or(1);
    let mut m_max = points.iter().map(|&(n, mu)| suggest_m_max(n, mu)).max().unwrap_or(2);
    loop {
        let t = crate::counting::cache::load_or_build(n_max, m_max, backend, cache_dir)?;
        let short = points
            .iter()
            .any(|&(n, mu)| matches!(weighted_heights(n, mu, &t), Err(Error::TableTooSmall(_))));
        if !short || m_max >= n_max {
            return Ok(t);
        }
        m_max = ((m_max as f64 * 1.5) as usize).min(n_max);
    }
}
