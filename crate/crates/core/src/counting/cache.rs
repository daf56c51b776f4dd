//! On-disk cache of count tables as versioned JSON lines.
//!
//! The first line is a header with the format name, version, backend and
//! dimensions. Every other line is one `(n, m)` record:
//!
//! ```text
//! {"n":4,"m":3,"h":"4","e":"1"}                       exact backend
//! {"n":4,"m":3,"h":"+0.60205999132796239","e":"+0"}   log backend
//! ```
//!
//! `h` is `H[n][m]` and `e` is `E[n][m]` (omitted when not stored). Exact
//! counts are decimal integers; approximate counts are a sign followed by
//! the decimal `log10` of the magnitude, or `0`.

use super::{ApproxTable, Backend, CountTable, ExactTable};
use crate::dd::Dd;
use crate::error::{Error, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const FORMAT_NAME: &str = "treelab-count-table";
pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "TREELAB_CACHE";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub backend: Backend,
    pub n_max: usize,
    pub m_max: usize,
}

#[derive(Debug, Deserialize)]
struct Record {
    n: usize,
    m: usize,
    h: String,
    #[serde(default)]
    e: Option<String>,
}

/// Cache directory: explicit value, else `$TREELAB_CACHE`, else
/// `$HOME/.cache/treelab`, else `./.treelab-cache`.
pub fn resolve_cache_dir(explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(CACHE_ENV) {
        if !p.is_empty() {
            return PathBuf::from(p);
        }
    }
    if let Some(h) = std::env::var_os("HOME") {
        return PathBuf::from(h).join(".cache").join("treelab");
    }
    PathBuf::from(".treelab-cache")
}

pub fn file_name(n_max: usize, m_max: usize, backend: Backend) -> String {
    format!("counts-v{FORMAT_VERSION}-{}-n{n_max}-m{m_max}.jsonl", backend.as_str())
}

pub fn header_line(t: &CountTable) -> String {
    let h = Header {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        backend: t.backend(),
        n_max: t.n_max(),
        m_max: t.m_max(),
    };
    serde_json::to_string(&h).expect("header serializes")
}

fn log10_string(v: Dd) -> String {
    let ip = v.hi.floor();
    let frac = (v - Dd::from_f64(ip)).to_f64().clamp(0.0, 1.0);
    let s = format!("{frac:.20}");
    if s.starts_with('1') {
        format!("+{}.{}", ip as i64 + 1, "0".repeat(20))
    } else {
        format!("+{}{}", ip as i64, &s[1..])
    }
}

fn parse_log10(s: &str) -> Result<Option<Dd>> {
    if s == "0" {
        return Ok(None);
    }
    let body = s
        .strip_prefix('+')
        .ok_or_else(|| Error::CacheFormat(format!("log value {s:?} lacks sign")))?;
    let (ip, fp) = body.split_once('.').unwrap_or((body, "0"));
    let ip: i64 = ip
        .parse()
        .map_err(|_| Error::CacheFormat(format!("bad log value {s:?}")))?;
    let fp: f64 = format!("0.{fp}")
        .parse()
        .map_err(|_| Error::CacheFormat(format!("bad log value {s:?}")))?;
    Ok(Some(Dd::from_f64(ip as f64) + Dd::from_f64(fp)))
}

fn approx_value_string(t: &ApproxTable, v: f64, n: usize, m_scale: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let ln = Dd::from_f64(v).ln() + Dd::from_f64(t.ln_scale(m_scale)).mul_f64(n as f64);
    log10_string(ln / Dd::LN10)
}

/// Serialized record for `(n, m)`; empty when the table does not store it.
pub fn record_line(t: &CountTable, n: usize, m: usize) -> String {
    match (t.as_exact(), t.as_approx()) {
        (Some(ex), _) => {
            if m > n.min(ex.m_max()) {
                return String::new();
            }
            let h = ex.h(n, m).unwrap().to_str_radix(10);
            if m < n && m < ex.m_max() {
                format!(
                    "{{\"n\":{n},\"m\":{m},\"h\":\"{h}\",\"e\":\"{}\"}}",
                    ex.e_ref(n, m).to_str_radix(10)
                )
            } else {
                format!("{{\"n\":{n},\"m\":{m},\"h\":\"{h}\"}}")
            }
        }
        (_, Some(ap)) => {
            let h = approx_value_string(ap, ap.h_scaled(n, m), n, m);
            if m < ap.m_max() {
                let e = if m < n {
                    approx_value_string(ap, ap.e_scaled(n, m), n, m + 1)
                } else {
                    "0".to_string()
                };
                format!("{{\"n\":{n},\"m\":{m},\"h\":\"{h}\",\"e\":\"{e}\"}}")
            } else {
                format!("{{\"n\":{n},\"m\":{m},\"h\":\"{h}\"}}")
            }
        }
        _ => unreachable!(),
    }
}

/// Write the table to `path`.
pub fn write_table(t: &CountTable, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(w, "{}", header_line(t))?;
        for n in 1..=t.n_max() {
            for m in 0..=t.m_max() {
                let line = record_line(t, n, m);
                if !line.is_empty() {
                    writeln!(w, "{line}")?;
                }
            }
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_header(path: &Path) -> Result<Header> {
    let mut first = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut first)?;
    let h: Header = serde_json::from_str(first.trim())?;
    if h.format != FORMAT_NAME || h.version != FORMAT_VERSION {
        return Err(Error::CacheFormat(format!(
            "{}: format {} v{} not supported",
            path.display(),
            h.format,
            h.version
        )));
    }
    Ok(h)
}

/// Read a table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<CountTable> {
    let header = read_header(path)?;
    let (n_max, m_max) = (header.n_max, header.m_max);
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    lines.next();
    let bad = |msg: String| Error::CacheFormat(format!("{}: {msg}", path.display()));
    match header.backend {
        Backend::Exact => {
            let mut h_rows: Vec<Vec<Option<BigUint>>> = (0..=n_max)
                .map(|n| {
                    if n == 0 {
                        Vec::new()
                    } else {
                        vec![None; n.min(m_max) + 1]
                    }
                })
                .collect();
            let mut e_rows: Vec<Vec<Option<BigUint>>> = (0..=n_max)
                .map(|n| {
                    if n == 0 {
                        Vec::new()
                    } else {
                        vec![None; (n - 1).min(m_max - 1) + 1]
                    }
                })
                .collect();
            for line in lines {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: Record = serde_json::from_str(&line)?;
                if r.n == 0 || r.n > n_max || r.m > r.n.min(m_max) {
                    return Err(bad(format!("record ({}, {}) out of range", r.n, r.m)));
                }
                let parse =
                    |s: &str| BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| bad(format!("bad integer {s:?}")));
                h_rows[r.n][r.m] = Some(parse(&r.h)?);
                if let Some(e) = r.e {
                    if r.m >= e_rows[r.n].len() {
                        return Err(bad(format!("E record ({}, {}) out of range", r.n, r.m)));
                    }
                    e_rows[r.n][r.m] = Some(parse(&e)?);
                }
            }
            let unwrap_rows = |rows: Vec<Vec<Option<BigUint>>>, what: &str| -> Result<Vec<Vec<BigUint>>> {
                rows.into_iter()
                    .enumerate()
                    .map(|(n, row)| {
                        row.into_iter()
                            .enumerate()
                            .map(|(m, v)| v.ok_or_else(|| bad(format!("missing {what}[{n}][{m}]"))))
                            .collect()
                    })
                    .collect()
            };
            let h = unwrap_rows(h_rows, "H")?;
            let e = unwrap_rows(e_rows, "E")?;
            Ok(CountTable::from_exact(ExactTable::from_rows(n_max, m_max, h, e)))
        }
        Backend::LogApprox => {
            let scales: Vec<f64> = (0..=m_max + 1).map(super::approx::ln_rho).collect();
            let mut h_cols = vec![vec![f64::NAN; n_max + 1]; m_max + 1];
            let mut e_cols = vec![vec![f64::NAN; n_max + 1]; m_max];
            for col in h_cols.iter_mut().chain(e_cols.iter_mut()) {
                col[0] = 0.0;
            }
            let scaled = |s: &str, n: usize, m: usize| -> Result<f64> {
                Ok(match parse_log10(s)? {
                    None => 0.0,
                    Some(l) => {
                        let ln = l * Dd::LN10 - Dd::from_f64(scales[m]).mul_f64(n as f64);
                        ln.exp().to_f64()
                    }
                })
            };
            for line in lines {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let r: Record = serde_json::from_str(&line)?;
                if r.n == 0 || r.n > n_max || r.m > m_max {
                    return Err(bad(format!("record ({}, {}) out of range", r.n, r.m)));
                }
                h_cols[r.m][r.n] = scaled(&r.h, r.n, r.m)?;
                if let Some(e) = r.e {
                    if r.m >= m_max {
                        return Err(bad(format!("E record ({}, {}) out of range", r.n, r.m)));
                    }
                    e_cols[r.m][r.n] = scaled(&e, r.n, r.m + 1)?;
                }
            }
            if h_cols.iter().chain(e_cols.iter()).any(|c| c.iter().any(|v| v.is_nan())) {
                return Err(bad("missing records".into()));
            }
            Ok(CountTable::from_approx(ApproxTable::from_parts(
                n_max, m_max, h_cols, e_cols,
            )))
        }
    }
}

/// Load `(n_max, m_max, backend)` from `dir`, or build and store it.
pub fn load_or_build(n_max: usize, m_max: usize, backend: Backend, dir: Option<&Path>) -> Result<CountTable> {
    let Some(dir) = dir else {
        return super::build_counts(n_max, m_max, backend);
    };
    let path = dir.join(file_name(n_max, m_max, backend));
    if path.exists() {
        if let Ok(t) = read_table(&path) {
            return Ok(t);
        }
    }
    let t = super::build_counts(n_max, m_max, backend)?;
    write_table(&t, &path)?;
    Ok(t)
}

/// Cache files in `dir` with their headers.
pub fn list(dir: &Path) -> Result<Vec<(PathBuf, Header)>> {
    let mut out = Vec::new();
    if !dir.exists() {
        return Ok(out);
    }
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    entries.sort();
    for p in entries {
        if let Ok(h) = read_header(&p) {
            out.push((p, h));
        }
    }
    Ok(out)
}

/// Structural checks on a cached table: monotone rows, `H[n][m] = C_{n-1}`
/// for `m >= n`, `E` equal to differences of `H`.
pub fn verify(path: &Path) -> Result<()> {
    let t = read_table(path)?;
    let fail = |msg: String| Err(Error::CacheFormat(format!("{}: {msg}", path.display())));
    for n in 1..=t.n_max() {
        let top = n.min(t.m_max());
        for m in 1..=top {
            if t.h(n, m)? < t.h(n, m - 1)? {
                return fail(format!("H[{n}][{m}] < H[{n}][{}]", m - 1));
            }
        }
        if n <= t.m_max() && t.h(n, n)?.rel_diff(&t.total(n)) > 1e-9 {
            return fail(format!("H[{n}][{n}] differs from the Catalan number"));
        }
        for h in 0..top.min(t.m_max() - 1) {
            let ok = match t.as_exact() {
                Some(x) => x.e_ref(n, h) + x.h_ref(n, h) == *x.h_ref(n, h + 1),
                None => {
                    let diff = t.h(n, h + 1)? - t.h(n, h)?;
                    let e = t.e(n, h)?;
                    diff.rel_diff(&e) < 1e-6 || (diff - e).abs() < t.h(n, h + 1)?.mul_exp(-20.0)
                }
            };
            if !ok {
                return fail(format!("E[{n}][{h}] differs from H[{n}][{}] - H[{n}][{h}]", h + 1));
            }
        }
    }
    Ok(())
}

/// Remove all cache files in `dir`; returns how many were removed.
pub fn purge(dir: &Path) -> Result<usize> {
    let files = list(dir)?;
    for (p, _) in &files {
        fs::remove_file(p)?;
    }
    Ok(files.len())
}
