//! Trees, contours and path bijections against exhaustive enumeration, plus
//! property tests on random trees and walks.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, HashSet};
use treelab::counting::{build_counts, catalan, Backend};
use treelab::lattice::{
    all_walks, cut_bijection, cycle_map, last_visit, path_width, uniform_bridge, uniform_excursion, LatticePath,
};
use treelab::tree::{enumerate_trees, enumerate_trees_capped, PlaneTree};

/// Valid preorder depth sequence from arbitrary integers.
fn depths_from(raw: &[u32]) -> Vec<u32> {
    let mut d = vec![0u32];
    for &x in raw {
        let prev = *d.last().unwrap();
        d.push(1 + x % (prev + 1));
    }
    d
}

fn arb_tree(max_size: usize) -> impl Strategy<Value = PlaneTree> {
    prop::collection::vec(any::<u32>(), 0..max_size)
        .prop_map(|raw| PlaneTree::from_preorder_depths(depths_from(&raw)).unwrap())
}

fn arb_walk(max_len: usize) -> impl Strategy<Value = LatticePath> {
    prop::collection::vec(prop::bool::ANY, 2..max_len)
        .prop_map(|b| LatticePath::from_steps(0, b.into_iter().map(|u| if u { 1 } else { -1 }).collect()))
}

#[test]
fn enumeration_matches_catalan_and_is_distinct() {
    for n in 1..=10 {
        let trees = enumerate_trees(n).unwrap();
        assert_eq!(trees.len() as u64, u64::try_from(catalan(n - 1)).unwrap(), "n={n}");
        let set: HashSet<String> = trees.iter().map(|t| t.to_parens()).collect();
        assert_eq!(set.len(), trees.len());
        assert!(trees.iter().all(|t| t.size() == n));
    }
    assert!(enumerate_trees(13).is_err());
    assert_eq!(enumerate_trees_capped(13, 13).unwrap().len(), 208_012);
}

#[test]
fn contour_roundtrip_exhaustive() {
    for n in 1..=8 {
        let mut seen = HashSet::new();
        for t in enumerate_trees(n).unwrap() {
            let c = t.to_contour();
            assert_eq!(c.len(), 2 * n - 1);
            assert!(c.is_excursion());
            assert_eq!(c.max_value(), t.height() as i64);
            assert_eq!(PlaneTree::from_contour(&c).unwrap(), t);
            assert!(seen.insert(c.to_ud()));
        }
    }
}

#[test]
fn from_contour_rejects_non_excursions() {
    for s in ["UD", "DUD", "UDDUD", "UUDD", "UUDDDD"] {
        assert!(
            PlaneTree::from_contour(&LatticePath::from_ud(s).unwrap()).is_err(),
            "{s}"
        );
    }
}

#[test]
fn stats_invariants_exhaustive() {
    for n in 1..=8 {
        for t in enumerate_trees(n).unwrap() {
            let s = t.stats();
            assert_eq!(s.generation_sizes.iter().sum::<usize>(), n);
            assert_eq!(s.generation_sizes[0], 1);
            assert_eq!(s.width, *s.generation_sizes.iter().max().unwrap());
            assert_eq!(s.height + 1, s.generation_sizes.len());
            assert!(s.height * s.width >= n - 1);
            if n >= 2 {
                assert_eq!(s.root_degree, s.generation_sizes[1]);
                assert_eq!(path_width(&t.to_contour()), s.width as f64);
            }
        }
    }
}

#[test]
fn height_counts_match_table() {
    let table = build_counts(8, 8, Backend::Exact).unwrap();
    let exact = table.as_exact().unwrap();
    for n in 1..=8 {
        let mut by_height = vec![0u64; n];
        for t in enumerate_trees(n).unwrap() {
            by_height[t.height()] += 1;
        }
        for (h, &c) in by_height.iter().enumerate() {
            assert_eq!(exact.e(n, h), c.into(), "n={n} h={h}");
        }
    }
}

#[test]
fn cycle_map_fibers_exhaustive() {
    for n in 1..=6 {
        let k = 2 * n - 1;
        let mut fibers: HashMap<String, usize> = HashMap::new();
        for w in all_walks(k).filter(|w| w.end() == -1) {
            let e = cycle_map(&w).unwrap();
            assert!(e.is_excursion());
            *fibers.entry(e.to_ud()).or_default() += 1;
        }
        assert_eq!(fibers.len() as u64, u64::try_from(catalan(n - 1)).unwrap());
        assert!(fibers.values().all(|&f| f == k), "n={n}");
        for t in enumerate_trees(n).unwrap() {
            let c = t.to_contour();
            assert_eq!(cycle_map(&c).unwrap(), c);
        }
    }
}

#[test]
fn cycle_map_rejects_bad_input() {
    assert!(cycle_map(&LatticePath::from_ud("UD").unwrap()).is_err());
    assert!(cycle_map(&LatticePath::from_ud("UUD").unwrap()).is_err());
    assert!(cycle_map(&LatticePath::from_ud("1:DDD").unwrap()).is_err());
}

#[test]
fn cut_bijection_exhaustive() {
    for len in 1..=12usize {
        for x in -(len as i64)..=(len as i64) {
            if (len as i64 - x) % 2 != 0 {
                continue;
            }
            let level = x.div_euclid(2);
            let target = 2 * level - x;
            let bridges: Vec<LatticePath> = all_walks(len).filter(|w| w.end() == x).collect();
            let mut images = HashSet::new();
            for w in &bridges {
                let v = cut_bijection(w, x).unwrap();
                assert_eq!(v.end(), target);
                assert_eq!(last_visit(&v, level), last_visit(w, level));
                assert_eq!(cut_bijection(&v, x).unwrap(), *w);
                images.insert(v.to_ud());
            }
            let constrained = all_walks(len)
                .filter(|w| w.end() == target && last_visit(w, level).is_some())
                .count();
            assert_eq!(images.len(), bridges.len());
            assert_eq!(images.len(), constrained, "len={len} x={x}");
        }
    }
}

#[test]
fn cut_bijection_parity_error() {
    let w = LatticePath::from_ud("UUD").unwrap();
    assert!(cut_bijection(&w, 0).is_err());
}

#[test]
fn uniform_excursion_height_law() {
    let table = build_counts(6, 6, Backend::Exact).unwrap();
    let draws = 100_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut hist = [0usize; 6];
    for _ in 0..draws {
        let e = uniform_excursion(6, &mut rng).unwrap();
        hist[e.max_value() as usize] += 1;
    }
    let total = 42.0;
    for (h, &c) in hist.iter().enumerate().skip(1) {
        let p = table.e(6, h).unwrap().to_f64() / total;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((c as f64 / draws as f64 - p).abs() < 5.0 * sd + 1e-12, "h={h}");
    }
}

#[test]
fn uniform_bridge_two_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let draws = 100_000;
    let ups_first = (0..draws)
        .filter(|_| uniform_bridge(2, 0, &mut rng).unwrap().steps()[0] == 1)
        .count();
    let sd = (0.25f64 / draws as f64).sqrt();
    assert!((ups_first as f64 / draws as f64 - 0.5).abs() < 3.0 * sd);
    assert!(uniform_bridge(3, 0, &mut rng).is_err());
    assert!(uniform_bridge(2, 4, &mut rng).is_err());
}

proptest! {
    #[test]
    fn parens_and_contour_roundtrip(t in arb_tree(200)) {
        prop_assert_eq!(PlaneTree::from_parens(&t.to_parens()).unwrap(), t.clone());
        let c = t.to_contour();
        prop_assert!(c.is_excursion());
        prop_assert_eq!(c.max_value() as usize, t.height());
        prop_assert_eq!(PlaneTree::from_contour(&c).unwrap(), t);
    }

    #[test]
    fn preorder_parents_precede_children(t in arb_tree(200)) {
        for v in 1..t.size() {
            let p = t.parent(v).unwrap();
            prop_assert!(p < v);
            prop_assert_eq!(t.depths()[v], t.depths()[p] + 1);
            prop_assert!(t.children(p).contains(&(v as u32)));
        }
        prop_assert!(t.parent(0).is_none());
        let edges: usize = (0..t.size()).map(|v| t.degree(v)).sum();
        prop_assert_eq!(edges, t.size() - 1);
    }

    #[test]
    fn width_identity(t in arb_tree(200)) {
        let s = t.stats();
        prop_assert!(s.height * s.width + 1 >= s.generation_sizes.iter().sum::<usize>());
        if t.size() >= 2 {
            prop_assert_eq!(path_width(&t.to_contour()), s.width as f64);
        }
    }

    #[test]
    fn balls_truncate(t in arb_tree(120), r in 0usize..8) {
        let b = t.ball(r);
        prop_assert_eq!(b.height(), r.min(t.height()));
        let gb = b.generation_sizes();
        prop_assert_eq!(&gb[..], &t.generation_sizes()[..gb.len()]);
        prop_assert_eq!(t.ball(t.height()), t.clone());
        prop_assert_eq!(t.ball(0).size(), 1);
        prop_assert_eq!(b.ball(r), b);
    }

    #[test]
    fn cut_bijection_involution(w in arb_walk(60)) {
        let x = w.end();
        let level = x.div_euclid(2);
        if last_visit(&w, level).is_some() {
            let v = cut_bijection(&w, x).unwrap();
            prop_assert_eq!(v.end(), 2 * level - x);
            prop_assert_eq!(last_visit(&v, level), last_visit(&w, level));
            prop_assert_eq!(cut_bijection(&v, x).unwrap(), w);
        }
    }

    #[test]
    fn path_width_subadditive(a in arb_walk(40), b in arb_walk(40)) {
        let c = a.concat(&b);
        prop_assert!(path_width(&c) <= path_width(&a) + path_width(&b));
    }

    #[test]
    fn cycle_map_is_excursion(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = uniform_bridge(2 * n - 1, -1, &mut rng).unwrap();
        let e = cycle_map(&b).unwrap();
        prop_assert!(e.is_excursion());
        prop_assert_eq!(cycle_map(&e).unwrap(), e.clone());
        prop_assert_eq!(PlaneTree::from_contour(&e).unwrap().size(), n);
    }
}
