//! Counts of plane trees by size and height.
//!
//! `H[n][m]` is the number of trees with `n` nodes and height `< m`, and
//! `E[n][h]` the number with height exactly `h`. Both come from the
//! first-subtree decomposition: a tree with more than one node splits into
//! the first subtree of the root (height one less) and the rest (same
//! height bound, same root).
//!
//! Two backends share one interface:
//! - [`Backend::Exact`]: arbitrary-precision integers;
//! - [`Backend::LogApprox`]: `f64` values rescaled per height column, which
//!   reaches much larger `n` at about `1e-13` relative error.

mod approx;
pub mod cache;
mod exact;
mod forest;
mod trig;

pub use approx::ApproxTable;
pub use exact::ExactTable;
pub use forest::{forest_count, forest_counts};
pub use trig::{pi_fixed, trig_count, trig_count_real, TrigBatch, TrigValue};

use crate::error::{Error, Result};
use crate::logreal::LogReal;
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Default memory budget for a table, in bytes.
pub const DEFAULT_MEMORY_CAP: u64 = 3 << 30;

/// Which arithmetic a [`CountTable`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    LogApprox,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::LogApprox => "log",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Backend> {
        match s {
            "exact" => Ok(Backend::Exact),
            "log" | "log-approx" | "approx" => Ok(Backend::LogApprox),
            _ => Err(Error::Domain(format!("unknown backend {s:?} (exact | log)"))),
        }
    }
}

/// `C_n = binom(2n, n) / (n + 1)`.
pub fn catalan(n: usize) -> BigUint {
    // C_{k+1} = C_k * 2(2k+1) / (k+2), exact at every step
    let mut c = BigUint::one();
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
    }
    c
}

/// `ln C_n` in double-double precision.
pub fn ln_catalan(n: usize) -> LogReal {
    LogReal::from_biguint(&catalan(n))
}

/// Table of `H[n][m]` for `1 <= n <= n_max`, `0 <= m <= m_max`, and of
/// `E[n][h]` for `h < m_max`.
#[derive(Clone, Debug)]
pub struct CountTable {
    inner: Inner,
}

#[derive(Clone, Debug)]
enum Inner {
    Exact(ExactTable),
    Approx(ApproxTable),
}

/// Build a table with the default memory cap and the global rayon pool.
pub fn build_counts(n_max: usize, m_max: usize, backend: Backend) -> Result<CountTable> {
    CountTable::build(n_max, m_max, backend, DEFAULT_MEMORY_CAP)
}

impl CountTable {
    pub fn build(n_max: usize, m_max: usize, backend: Backend, memory_cap: u64) -> Result<CountTable> {
        if n_max == 0 || m_max == 0 {
            return Err(Error::Domain("n_max and m_max must be at least 1".into()));
        }
        let est = CountTable::estimated_bytes(n_max, m_max, backend);
        if est > memory_cap {
            return Err(Error::SizeCap(format!(
                "{backend} table n_max={n_max} m_max={m_max} needs about {} MiB (cap {} MiB)",
                est >> 20,
                memory_cap >> 20
            )));
        }
        let inner = match backend {
            Backend::Exact => Inner::Exact(ExactTable::build(n_max, m_max)),
            Backend::LogApprox => Inner::Approx(ApproxTable::build(n_max, m_max)),
        };
        Ok(CountTable { inner })
    }

    /// Rough memory footprint of a table.
    pub fn estimated_bytes(n_max: usize, m_max: usize, backend: Backend) -> u64 {
        let (n, m) = (n_max as u64, m_max as u64);
        match backend {
            Backend::Exact => {
                // about 2n bits per entry, 2 tables, clamped at m <= n
                let cells: u64 = (1..=n).map(|k| k.min(m) + 1).sum();
                cells * 2 * ((2 * n) / 8 + 40)
            }
            Backend::LogApprox => 8 * 4 * n * (m + 2),
        }
    }

    pub(crate) fn from_exact(t: ExactTable) -> CountTable {
        CountTable { inner: Inner::Exact(t) }
    }

    pub(crate) fn from_approx(t: ApproxTable) -> CountTable {
        CountTable {
            inner: Inner::Approx(t),
        }
    }

    pub fn backend(&self) -> Backend {
        match &self.inner {
            Inner::Exact(_) => Backend::Exact,
            Inner::Approx(_) => Backend::LogApprox,
        }
    }

    pub fn n_max(&self) -> usize {
        match &self.inner {
            Inner::Exact(t) => t.n_max(),
            Inner::Approx(t) => t.n_max(),
        }
    }

    pub fn m_max(&self) -> usize {
        match &self.inner {
            Inner::Exact(t) => t.m_max(),
            Inner::Approx(t) => t.m_max(),
        }
    }

    pub fn as_exact(&self) -> Option<&ExactTable> {
        match &self.inner {
            Inner::Exact(t) => Some(t),
            Inner::Approx(_) => None,
        }
    }

    pub fn as_approx(&self) -> Option<&ApproxTable> {
        match &self.inner {
            Inner::Exact(_) => None,
            Inner::Approx(t) => Some(t),
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.n_max() {
            return Err(Error::TableTooSmall(format!("n = {n} outside 1..={}", self.n_max())));
        }
        Ok(())
    }

    /// Largest `m` for which `H[n][m]` is known (every `m` when `n <= m_max`).
    pub fn h_known(&self, n: usize, m: usize) -> bool {
        n >= 1 && n <= self.n_max() && (m <= self.m_max() || n <= self.m_max())
    }

    /// `H[n][m]`, trees with `n` nodes and height `< m`.
    pub fn h(&self, n: usize, m: usize) -> Result<LogReal> {
        self.check_n(n)?;
        if !self.h_known(n, m) {
            return Err(Error::TableTooSmall(format!("H[{n}][{m}] needs m_max >= {}", m.min(n))));
        }
        Ok(match &self.inner {
            Inner::Exact(t) => LogReal::from_biguint(t.h(n, m).unwrap()),
            Inner::Approx(t) => t.h_logreal(n, m),
        })
    }

    /// `E[n][h]`, trees with `n` nodes and height exactly `h`.
    pub fn e(&self, n: usize, h: usize) -> Result<LogReal> {
        self.check_n(n)?;
        if h >= n {
            return Ok(LogReal::ZERO);
        }
        if h >= self.m_max() {
            return Err(Error::TableTooSmall(format!("E[{n}][{h}] needs m_max > {h}")));
        }
        Ok(match &self.inner {
            Inner::Exact(t) => LogReal::from_biguint(&t.e(n, h)),
            Inner::Approx(t) => t.e_logreal(n, h),
        })
    }

    /// `C_{n-1}` as seen by this table (exact integer or log value).
    pub fn total(&self, n: usize) -> LogReal {
        LogReal::from_biguint(&catalan(n - 1))
    }

    /// `C_{n-1} - H[n][m]` as a count, used for height-tail bounds.
    pub fn count_at_least(&self, n: usize, m: usize) -> Result<LogReal> {
        self.check_n(n)?;
        if m >= n {
            return Ok(LogReal::ZERO);
        }
        match &self.inner {
            Inner::Exact(t) => {
                let h = t.h(n, m).ok_or_else(|| Error::TableTooSmall(format!("H[{n}][{m}]")))?;
                Ok(LogReal::from_biguint(&(catalan(n - 1) - h)))
            }
            Inner::Approx(_) => Ok(self.total(n) - self.h(n, m)?),
        }
    }

    /// Short content fingerprint: SHA-256 over the header and the last row.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(cache::header_line(self).as_bytes());
        let n = self.n_max();
        for m in 0..=self.m_max() {
            hasher.update(cache::record_line(self, n, m).as_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().take(12).map(|b| format!("{b:02x}")).collect()
    }
}
