//! Oracles shared by the integration tests.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use treelab::tree::enumerate_trees;

/// Every tree of size `n` by parenthesis string, with its probability under
/// the weight `exp(-mu h)`.
pub fn weighted_tree_law(n: usize, mu: f64) -> Vec<(String, f64)> {
    let trees = enumerate_trees(n).unwrap();
    let w: Vec<f64> = trees.iter().map(|t| (-mu * t.height() as f64).exp()).collect();
    let z: f64 = w.iter().sum();
    trees.iter().zip(w).map(|(t, w)| (t.to_parens(), w / z)).collect()
}

/// Pearson chi-square p-value of observed counts against a law. Cells with
/// expected count below 5 are pooled into one cell.
pub fn chi_square_p(law: &[(String, f64)], counts: &HashMap<String, u64>) -> f64 {
    let total: u64 = counts.values().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut seen = 0u64;
    let (mut pooled_e, mut pooled_o) = (0.0, 0u64);
    for (key, p) in law {
        let expected = p * total as f64;
        let o = counts.get(key).copied().unwrap_or(0);
        seen += o;
        if expected < 5.0 {
            pooled_e += expected;
            pooled_o += o;
        } else {
            stat += (o as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    // Any draw outside the support is a hard failure.
    if seen != total {
        return 0.0;
    }
    if pooled_e > 0.0 {
        stat += (pooled_o as f64 - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    let dof = (cells.max(2) - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Histogram of parenthesis strings.
pub fn tally<I: IntoIterator<Item = String>>(keys: I) -> HashMap<String, u64> {
    let mut m = HashMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}
