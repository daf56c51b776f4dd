//! Count tables against enumeration, a Dyck-path oracle, the trigonometric
//! closed form and the log backend; cache round trips.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;
use treelab::asymptotics::asymptotic_count;
use treelab::counting::cache::{self, load_or_build, read_table, write_table};
use treelab::counting::{
    build_counts, catalan, forest_count, forest_counts, trig_count, trig_count_real, Backend, CountTable,
};
use treelab::tree::enumerate_trees;
use treelab::LogReal;

/// Dyck paths of length `2n - 2` staying in `[0, m - 1]`: trees with `n`
/// nodes and height `< m`.
fn strip_paths(n: usize, m: usize) -> BigUint {
    if m == 0 {
        return BigUint::zero();
    }
    let mut row = vec![BigUint::zero(); m];
    row[0] = BigUint::one();
    for _ in 0..2 * (n - 1) {
        let mut next = vec![BigUint::zero(); m];
        for y in 0..m {
            if y + 1 < m {
                next[y + 1] += &row[y];
            }
            if y > 0 {
                next[y - 1] += &row[y];
            }
        }
        row = next;
    }
    row[0].clone()
}

fn binomial(n: u64, k: u64) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn catalan_matches_binomials() {
    for n in 0..60u64 {
        assert_eq!(catalan(n as usize), binomial(2 * n, n) / (n + 1));
    }
    assert_eq!(catalan(10), BigUint::from(16796u32));
}

#[test]
fn exact_table_matches_enumeration() {
    let t = build_counts(8, 8, Backend::Exact).unwrap();
    let x = t.as_exact().unwrap();
    for n in 1..=8 {
        let trees = enumerate_trees(n).unwrap();
        for m in 0..=n + 1 {
            let c = trees.iter().filter(|t| t.height() < m).count();
            assert_eq!(*x.h(n, m).unwrap(), BigUint::from(c), "H[{n}][{m}]");
        }
    }
    assert_eq!(*x.h(4, 3).unwrap(), BigUint::from(4u32));
    assert_eq!(
        (1..4).map(|h| x.e(4, h)).collect::<Vec<_>>(),
        [1u32, 3, 1].map(BigUint::from).to_vec()
    );
}

#[test]
fn exact_table_matches_path_oracle() {
    let t = build_counts(120, 120, Backend::Exact).unwrap();
    let x = t.as_exact().unwrap();
    for n in [1usize, 2, 7, 33, 64, 120] {
        for m in [1usize, 2, 3, 5, 9, 17, 40, 120] {
            assert_eq!(*x.h(n, m).unwrap(), strip_paths(n, m), "H[{n}][{m}]");
        }
    }
}

#[test]
fn table_invariants() {
    let t = build_counts(60, 60, Backend::Exact).unwrap();
    let x = t.as_exact().unwrap();
    for n in 1..=60 {
        let c = catalan(n - 1);
        let mut sum = BigUint::zero();
        for h in 0..n {
            let e = x.e(n, h);
            assert_eq!(e, x.h(n, h + 1).unwrap() - x.h(n, h).unwrap());
            sum += e;
        }
        assert_eq!(sum, c);
        assert_eq!(*x.h(n, n).unwrap(), c);
        assert_eq!(*x.h(n, n + 5).unwrap(), c);
        if n >= 2 {
            assert!(x.h(n, 1).unwrap().is_zero());
            assert!(x.h(n, 2).unwrap().is_one());
        }
        for m in 1..=n {
            assert!(x.h(n, m).unwrap() >= x.h(n, m - 1).unwrap());
        }
    }
}

#[test]
fn truncated_table_keeps_low_heights() {
    let full = build_counts(50, 50, Backend::Exact).unwrap();
    let cut = build_counts(50, 9, Backend::Exact).unwrap();
    for n in 1..=50 {
        for m in 0..=9 {
            assert_eq!(full.h(n, m).unwrap(), cut.h(n, m).unwrap());
        }
    }
    assert!(cut.h(50, 10).is_err());
    assert!(cut.e(50, 9).is_err());
    assert!(cut.h(51, 3).is_err());
}

#[test]
fn trig_closed_form_examples() {
    assert_eq!(trig_count(4, 3, 128).unwrap(), BigUint::from(4u32));
    assert_eq!(trig_count(2, 2, 128).unwrap(), BigUint::one());
    let t = build_counts(30, 7, Backend::Exact).unwrap();
    assert_eq!(
        trig_count(30, 7, 192).unwrap(),
        *t.as_exact().unwrap().h(30, 7).unwrap()
    );
    let v = trig_count_real(40, 9, 256).unwrap();
    assert!(v.error < 1e-6);
}

#[test]
fn log_backend_tracks_exact() {
    let n = 400;
    let e = build_counts(n, n, Backend::Exact).unwrap();
    let a = build_counts(n, n, Backend::LogApprox).unwrap();
    let mut worst = 0.0f64;
    for k in (1..=n).step_by(7) {
        for m in 2..=k {
            let x = e.h(k, m).unwrap();
            if x.is_zero() {
                continue;
            }
            worst = worst.max(a.h(k, m).unwrap().rel_diff(&x));
        }
        // E entries far below the column scale are flushed by design.
        let scales = a.as_approx().unwrap();
        for h in 1..k {
            let x = e.e(k, h).unwrap();
            if x.ln() > (1e-150f64).ln() + k as f64 * scales.ln_scale(h + 1) {
                worst = worst.max(a.e(k, h).unwrap().rel_diff(&x));
            }
        }
    }
    assert!(worst < 1e-9, "worst relative deviation {worst}");
}

#[test]
fn leading_term_ratio() {
    let t = build_counts(400, 20, Backend::Exact).unwrap();
    let r = (t.h(400, 20).unwrap() / asymptotic_count(400, 20).unwrap()).to_f64();
    assert!((r - 1.0).abs() < 1e-3, "{r}");
    assert!(asymptotic_count(10, 12).is_err());
}

#[test]
fn forest_counts_match_enumeration() {
    let t = build_counts(9, 9, Backend::Exact).unwrap();
    for n in 2..=8usize {
        let trees = enumerate_trees(n).unwrap();
        let mut total = BigUint::zero();
        for r in 1..n {
            for m in 1..n {
                let lhs = forest_count(r, n - 1, m, &t).unwrap() - forest_count(r, n - 1, m - 1, &t).unwrap();
                let c = trees.iter().filter(|t| t.root_degree() == r && t.height() == m).count();
                assert_eq!(lhs, BigUint::from(c), "n={n} r={r} m={m}");
                total += lhs;
            }
        }
        assert_eq!(total, catalan(n - 1));
    }
    let all = forest_counts(4, 8, 5, &t).unwrap();
    for (n, c) in all[1].iter().enumerate().skip(1) {
        assert_eq!(*c, *t.as_exact().unwrap().h(n, 5).unwrap());
    }
    assert!(forest_count(5, 4, 3, &t).is_err());
}

#[test]
fn forest_counts_need_exact_backend() {
    let a = build_counts(10, 10, Backend::LogApprox).unwrap();
    assert!(forest_counts(2, 5, 3, &a).is_err());
}

fn assert_same_table(a: &CountTable, b: &CountTable) {
    assert_eq!(a.backend(), b.backend());
    assert_eq!(a.n_max(), b.n_max());
    assert_eq!(a.m_max(), b.m_max());
    assert_eq!(a.fingerprint(), b.fingerprint());
    for n in 1..=a.n_max() {
        for m in 0..=a.m_max().min(n) {
            let (x, y) = (a.h(n, m).unwrap(), b.h(n, m).unwrap());
            assert!(x == y || x.rel_diff(&y) < 1e-15, "H[{n}][{m}]");
        }
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for backend in [Backend::Exact, Backend::LogApprox] {
        let t = build_counts(80, 30, backend).unwrap();
        let path = dir.path().join(cache::file_name(80, 30, backend));
        write_table(&t, &path).unwrap();
        assert_same_table(&t, &read_table(&path).unwrap());
        cache::verify(&path).unwrap();
        assert_same_table(&t, &load_or_build(80, 30, backend, Some(dir.path())).unwrap());
    }
    assert_eq!(cache::list(dir.path()).unwrap().len(), 2);
    assert_eq!(cache::purge(dir.path()).unwrap(), 2);
    assert!(cache::list(dir.path()).unwrap().is_empty());
}

#[test]
fn corrupted_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let t = build_counts(20, 20, Backend::Exact).unwrap();
    let path = dir.path().join(cache::file_name(20, 20, Backend::Exact));
    write_table(&t, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    std::fs::write(&path, lines[..lines.len() / 2].join("\n")).unwrap();
    assert!(read_table(&path).is_err());
    std::fs::write(&path, "not a table\n").unwrap();
    assert!(cache::verify(&path).is_err());
    // A damaged file is rebuilt rather than trusted.
    let rebuilt = load_or_build(20, 20, Backend::Exact, Some(dir.path())).unwrap();
    assert_same_table(&t, &rebuilt);
}

#[test]
fn memory_cap() {
    assert!(CountTable::build(10_000, 10_000, Backend::Exact, 1 << 20).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trig_agrees_with_recurrence(n in 2usize..90, m in 2usize..90) {
        prop_assume!(m <= n);
        let t = build_counts(n, m, Backend::Exact).unwrap();
        let v = trig_count(n, m, 64 + 4 * n as u64).unwrap();
        prop_assert_eq!(v, t.as_exact().unwrap().h(n, m).unwrap().clone());
    }

    #[test]
    fn log_of_exact_counts(n in 1usize..200, m in 2usize..60) {
        let t = build_counts(n, m, Backend::Exact).unwrap();
        let h = t.h(n, m.min(n)).unwrap();
        let s = strip_paths(n, m.min(n));
        prop_assert!(h.rel_diff(&LogReal::from_biguint(&s)) < 1e-15);
    }
}
