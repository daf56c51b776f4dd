//! Partition function and exact laws against weighted enumeration and
//! cross-backend agreement.

use treelab::counting::{build_counts, Backend};
use treelab::partition::{
    height_law, ldp_curve, partition_function, partition_function_via_h, root_degree_law, table_for, w_sum,
};
use treelab::tree::enumerate_trees;
use treelab::LogReal;

const MUS: [f64; 4] = [0.0, 0.5, 1.0, 3.0];

/// `(Z, P(h = m), P(deg = r))` by direct summation over all trees.
fn weighted_enumeration(n: usize, mu: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let mut z = 0.0;
    let mut heights = vec![0.0; n];
    let mut degrees = vec![0.0; n];
    for t in enumerate_trees(n).unwrap() {
        let w = (-mu * t.height() as f64).exp();
        z += w;
        heights[t.height()] += w;
        degrees[t.root_degree()] += w;
    }
    for p in heights.iter_mut().chain(degrees.iter_mut()) {
        *p /= z;
    }
    (z, heights, degrees)
}

#[test]
fn laws_match_weighted_enumeration() {
    let t = build_counts(8, 8, Backend::Exact).unwrap();
    for n in 2..=8 {
        for mu in MUS {
            let (z, hp, dp) = weighted_enumeration(n, mu);
            let zz = partition_function(n, mu, &t).unwrap().to_f64();
            assert!((zz / z - 1.0).abs() < 1e-12, "Z n={n} mu={mu}");
            let law = height_law(n, mu, &t).unwrap();
            for (m, &p) in hp.iter().enumerate() {
                assert!((law.prob(m) - p).abs() < 1e-12, "height n={n} mu={mu} m={m}");
            }
            assert!((law.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let rd = root_degree_law(n, mu, &t, None).unwrap();
            for (r, &p) in dp.iter().enumerate() {
                assert!((rd.prob(r) - p).abs() < 1e-12, "degree n={n} mu={mu} r={r}");
            }
            assert!((rd.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn small_examples() {
    let t = build_counts(8, 8, Backend::Exact).unwrap();
    for mu in [0.0, 0.7, 2.5] {
        let z2 = partition_function(2, mu, &t).unwrap().to_f64();
        assert!((z2 - (-mu).exp()).abs() < 1e-15);
        let z3 = partition_function(3, mu, &t).unwrap().to_f64();
        assert!((z3 - (-mu).exp() - (-2.0 * mu).exp()).abs() < 1e-15);
        let w3 = w_sum(3, mu, &t).unwrap().to_f64();
        assert!((w3 / ((-3.0 * mu).exp() / 64.0) - 1.0).abs() < 1e-14);
    }
    let l = height_law(3, 2f64.ln(), &t).unwrap();
    assert!((l.prob(1) - 2.0 / 3.0).abs() < 1e-15);
    assert!((l.prob(2) - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn star_mass_in_root_degree_law() {
    let t = build_counts(40, 40, Backend::Exact).unwrap();
    for (n, mu) in [(10usize, 0.5), (25, 2.0), (40, 4.0)] {
        let z = partition_function(n, mu, &t).unwrap();
        let rd = root_degree_law(n, mu, &t, None).unwrap();
        let star = (LogReal::from_f64(1.0).mul_exp(-mu) / z).to_f64();
        assert!((rd.prob(n - 1) / star - 1.0).abs() < 1e-12);
        assert_eq!(rd.prob(0), 0.0);
    }
}

#[test]
fn decomposition_via_bounded_counts() {
    let t = build_counts(300, 300, Backend::Exact).unwrap();
    for (n, mu) in [(50usize, 0.0), (120, 0.4), (300, 1.5), (300, 9.0)] {
        let a = partition_function(n, mu, &t).unwrap();
        let b = partition_function_via_h(n, mu, &t).unwrap();
        assert!(a.rel_diff(&b) < 1e-12, "n={n} mu={mu}");
    }
}

#[test]
fn tilting_orders_height_laws() {
    let t = build_counts(120, 120, Backend::Exact).unwrap();
    let mus = [0.0, 0.1, 0.5, 1.0, 3.0];
    let cdfs: Vec<Vec<f64>> = mus.iter().map(|&mu| height_law(120, mu, &t).unwrap().cdf()).collect();
    for w in cdfs.windows(2) {
        for (m, (lo, hi)) in w[0].iter().zip(&w[1]).enumerate() {
            assert!(*hi >= lo - 1e-14, "m={m}");
        }
    }
}

#[test]
fn backends_agree_on_laws() {
    let e = build_counts(200, 200, Backend::Exact).unwrap();
    let a = build_counts(200, 200, Backend::LogApprox).unwrap();
    for mu in [0.2, 3.0] {
        let (le, la) = (height_law(200, mu, &e).unwrap(), height_law(200, mu, &a).unwrap());
        for m in 0..le.probs.len() {
            assert!((le.prob(m) - la.prob(m)).abs() < 1e-12, "height mu={mu} m={m}");
        }
        let (re, ra) = (
            root_degree_law(200, mu, &e, None).unwrap(),
            root_degree_law(200, mu, &a, None).unwrap(),
        );
        for r in 0..re.probs.len().max(ra.probs.len()) {
            assert!((re.prob(r) - ra.prob(r)).abs() < 1e-10, "degree mu={mu} r={r}");
        }
    }
}

#[test]
fn root_degree_moments_independent_oracle() {
    // Mean and variance from a separate generating-function evaluation:
    // trees of height <= m with root degree r are [z^{n-1}] T_{m-1}(z)^r,
    // T_0 = z, T_k = z / (1 - T_{k-1}).
    let t = build_counts(60, 60, Backend::Exact).unwrap();
    let rd = root_degree_law(60, 3.0, &t, None).unwrap();
    assert!((rd.mean() - 7.56526546068853).abs() < 1e-10, "{}", rd.mean());
    assert!((rd.variance() - 13.213269469319144).abs() < 1e-9, "{}", rd.variance());
}

#[test]
fn truncated_tables_and_errors() {
    let t = build_counts(200, 20, Backend::Exact).unwrap();
    // Strong bias keeps all mass on low heights.
    let law = height_law(200, 6.0, &t).unwrap();
    assert!(law.tail_bound < 1e-15);
    assert!((law.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(height_law(200, 0.0, &t).is_err());
    assert!(root_degree_law(1, 1.0, &t, None).is_err());
    assert!(root_degree_law(50, 1.0, &t, Some(50)).is_err());
    assert!(height_law(201, 1.0, &t).is_err());
}

#[test]
fn table_for_grows_until_laws_fit() {
    let t = table_for(&[(400, 0.05), (300, 2.0)], Backend::LogApprox, None).unwrap();
    let law = height_law(400, 0.05, &t).unwrap();
    assert!(law.tail_bound < 1e-15);
    assert!(t.m_max() <= 400);
}

#[test]
fn ldp_curve_edges() {
    let t = build_counts(600, 600, Backend::Exact).unwrap();
    let pts = ldp_curve(600, 2.0, &[0.5, 1.0, 1.5, 40.0], &t).unwrap();
    assert!(pts[1].value.abs() < 0.3);
    assert!(pts[0].value > pts[1].value);
    assert!(pts[2].value > pts[1].value);
    assert!(pts[3].value.is_infinite());
    assert!(ldp_curve(600, 0.0, &[1.2], &t).is_err());
    assert!(ldp_curve(600, 2.0, &[0.0], &t).is_err());
    // Lower tails blow up as n grows.
    let small = ldp_curve(150, 2.0, &[0.3], &t).unwrap()[0].value;
    let large = ldp_curve(600, 2.0, &[0.3], &t).unwrap()[0].value;
    assert!(large > small);
}
