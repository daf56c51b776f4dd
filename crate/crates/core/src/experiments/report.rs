//! Experiment reports and their CSV and JSON forms.

use crate::counting::Backend;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported only, never gated.
    Info,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub experiment: String,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub quantity: String,
    pub measured: f64,
    pub predicted: f64,
    pub tolerance: Option<f64>,
    pub stderr: Option<f64>,
    pub pass: Verdict,
    /// `exact`, `exact-log`, `numeric`, `exhaustive` or `monte-carlo(N)`.
    pub provenance: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub backend: Option<Backend>,
    /// Fingerprints of the count tables used.
    pub tables: Vec<String>,
    pub parameters: serde_json::Value,
    pub rows: Vec<Row>,
    /// Wall-clock time; not part of the serialized report.
    #[serde(skip)]
    pub runtime: Duration,
}

/// Row position: tree size and bias, either optional.
pub type Point = (Option<usize>, Option<f64>);

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, backend: Option<Backend>, parameters: serde_json::Value) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            seed,
            backend,
            tables: Vec::new(),
            parameters,
            rows: Vec::new(),
            runtime: Duration::ZERO,
        }
    }

    fn push(
        &mut self,
        at: Point,
        quantity: &str,
        values: (f64, f64),
        tol: Option<f64>,
        stderr: Option<f64>,
        provenance: &str,
    ) {
        let (measured, predicted) = values;
        let pass = match tol {
            None => Verdict::Info,
            Some(t) => {
                let close = (measured - predicted).abs() <= t;
                let resolved = stderr.is_none_or(|s| t > 4.0 * s);
                if close && resolved {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
        };
        self.rows.push(Row {
            experiment: self.experiment.clone(),
            n: at.0,
            mu: at.1,
            quantity: quantity.to_string(),
            measured,
            predicted,
            tolerance: tol,
            stderr,
            pass,
            provenance: provenance.to_string(),
        });
    }

    /// Gated row without sampling error.
    pub fn gate(&mut self, at: Point, quantity: &str, measured: f64, predicted: f64, tol: f64, provenance: &str) {
        self.push(at, quantity, (measured, predicted), Some(tol), None, provenance);
    }

    /// Gated Monte Carlo row.
    pub fn gate_mc(&mut self, at: Point, quantity: &str, values: (f64, f64), tol: f64, stderr: f64, provenance: &str) {
        self.push(at, quantity, values, Some(tol), Some(stderr), provenance);
    }

    /// Informational row.
    pub fn info(&mut self, at: Point, quantity: &str, measured: f64, predicted: f64, provenance: &str) {
        self.push(at, quantity, (measured, predicted), None, None, provenance);
    }

    /// Informational Monte Carlo row.
    pub fn info_mc(&mut self, at: Point, quantity: &str, values: (f64, f64), stderr: f64, provenance: &str) {
        self.push(at, quantity, values, None, Some(stderr), provenance);
    }

    /// True when no gated row failed.
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.pass == Verdict::Fail)
    }

    /// CSV with `#`-prefixed metadata lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# experiment={}", self.experiment);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# backend={}", self.backend.map_or("none", |b| b.as_str()));
        let _ = writeln!(s, "# tables={}", self.tables.join(";"));
        let _ = writeln!(s, "# parameters={}", self.parameters);
        s.push_str("experiment,n,mu,quantity,measured,predicted,tolerance,stderr,pass,provenance\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.n.map(|v| v.to_string()).unwrap_or_default(),
                r.mu.map(fmt_num).unwrap_or_default(),
                r.quantity,
                fmt_num(r.measured),
                fmt_num(r.predicted),
                r.tolerance.map(fmt_num).unwrap_or_default(),
                r.stderr.map(fmt_num).unwrap_or_default(),
                r.pass.as_str(),
                r.provenance
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let a = v.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let mut r = ExperimentReport::new("t", 1, None, serde_json::Value::Null);
        r.gate((Some(3), None), "a", 1.0, 1.05, 0.1, "exact");
        r.gate((None, None), "b", 1.0, 1.5, 0.1, "exact");
        r.gate_mc((None, None), "c", (0.26, 0.25), 0.03, 0.01, "monte-carlo(100)");
        r.info((None, None), "d", 1.0, 2.0, "exact");
        let v: Vec<Verdict> = r.rows.iter().map(|x| x.pass).collect();
        assert_eq!(v, vec![Verdict::Pass, Verdict::Fail, Verdict::Fail, Verdict::Info]);
        assert!(!r.passed());
        assert!(r.to_csv().contains("t,3,,a,1,1.05,0.1,,pass,exact"));
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
    }
}
