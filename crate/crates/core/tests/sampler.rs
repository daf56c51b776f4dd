//! Samplers against weighted enumeration (chi-square), determinism and
//! independence from the worker count.

mod common;

use common::{chi_square_p, tally, weighted_tree_law};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treelab::counting::{build_counts, Backend};
use treelab::partition::height_law;
use treelab::sampler::{
    monte_carlo_map, sample_biased_tree, sample_uniform_bounded, sample_uniform_exact_height, sample_uniform_tree,
    BiasedSampler, RngStream, StripSampler,
};

const DRAWS: usize = 60_000;
const P_MIN: f64 = 1e-3;

#[test]
fn descent_sampler_chi_square_both_backends() {
    for backend in [Backend::Exact, Backend::LogApprox] {
        let t = build_counts(7, 7, backend).unwrap();
        for (n, mu) in [(6usize, 0.0), (7, 1.0), (7, 3.0)] {
            let s = BiasedSampler::new(n, mu, &t).unwrap();
            assert_eq!(s.backend(), backend);
            let mut rng = RngStream::new(5, n as u64);
            let counts = tally((0..DRAWS).map(|_| s.sample(&mut rng).to_parens()));
            let p = chi_square_p(&weighted_tree_law(n, mu), &counts);
            assert!(p > P_MIN, "{backend:?} n={n} mu={mu} p={p}");
        }
    }
}

#[test]
fn rejection_sampler_chi_square() {
    let t = build_counts(7, 7, Backend::Exact).unwrap();
    let s = BiasedSampler::new(7, 0.5, &t).unwrap();
    let mut rng = RngStream::new(9, 0);
    let counts = tally((0..DRAWS).map(|_| s.sample_by_rejection(&mut rng).unwrap().to_parens()));
    let p = chi_square_p(&weighted_tree_law(7, 0.5), &counts);
    assert!(p > P_MIN, "p={p}");
}

#[test]
fn monte_carlo_map_chi_square() {
    let t = build_counts(7, 7, Backend::LogApprox).unwrap();
    let law = height_law(7, 1.0, &t).unwrap();
    let keys = monte_carlo_map(&law, DRAWS, 17, |tr| tr.to_parens()).unwrap();
    let p = chi_square_p(&weighted_tree_law(7, 1.0), &tally(keys));
    assert!(p > P_MIN, "p={p}");
}

#[test]
fn strip_sampler_is_uniform_given_height() {
    let trees = treelab::tree::enumerate_trees(7).unwrap();
    for h in 1..7 {
        let support: Vec<String> = trees
            .iter()
            .filter(|t| t.height() == h)
            .map(|t| t.to_parens())
            .collect();
        let law: Vec<(String, f64)> = support
            .iter()
            .map(|k| (k.clone(), 1.0 / support.len() as f64))
            .collect();
        let s = StripSampler::new(7, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(h as u64);
        let counts = tally((0..20_000).map(|_| s.sample(&mut rng).to_parens()));
        let p = chi_square_p(&law, &counts);
        assert!(p > P_MIN, "h={h} p={p}");
    }
    assert!(StripSampler::new(7, 7).is_err());
    assert!(StripSampler::new(7, 0).is_err());
    assert_eq!(
        StripSampler::new(1, 0)
            .unwrap()
            .sample(&mut ChaCha8Rng::seed_from_u64(0))
            .size(),
        1
    );
}

#[test]
fn uniform_samplers_chi_square() {
    let t = build_counts(7, 7, Backend::Exact).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let counts = tally((0..DRAWS).map(|_| sample_uniform_tree(7, &mut rng).unwrap().to_parens()));
    assert!(chi_square_p(&weighted_tree_law(7, 0.0), &counts) > P_MIN);
    // Bounded sampler: uniform on trees of height < 4.
    let trees = treelab::tree::enumerate_trees(7).unwrap();
    let support: Vec<String> = trees.iter().filter(|t| t.height() < 4).map(|t| t.to_parens()).collect();
    let law: Vec<(String, f64)> = support
        .iter()
        .map(|k| (k.clone(), 1.0 / support.len() as f64))
        .collect();
    let counts = tally((0..DRAWS).map(|_| sample_uniform_bounded(7, 4, &t, &mut rng).unwrap().to_parens()));
    assert!(chi_square_p(&law, &counts) > P_MIN);
}

#[test]
fn bounded_and_exact_height_outputs() {
    let t = build_counts(300, 300, Backend::Exact).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, m) in [(300usize, 6usize), (300, 40), (120, 300), (2, 2)] {
        for _ in 0..20 {
            let tr = sample_uniform_bounded(n, m, &t, &mut rng).unwrap();
            assert_eq!(tr.size(), n);
            assert!(tr.height() < m);
        }
    }
    for h in [1usize, 2, 17, 299] {
        let tr = sample_uniform_exact_height(300, h, &t, &mut rng).unwrap();
        assert_eq!((tr.size(), tr.height()), (300, h));
    }
    assert!(sample_uniform_bounded(300, 1, &t, &mut rng).is_err());
    assert!(sample_uniform_exact_height(300, 300, &t, &mut rng).is_err());
    assert!(sample_uniform_bounded(301, 5, &t, &mut rng).is_err());
}

#[test]
fn same_seed_same_trees() {
    let t = build_counts(500, 500, Backend::LogApprox).unwrap();
    let draw = |seed| {
        let mut rng = RngStream::new(seed, 3);
        (0..10)
            .map(|_| sample_biased_tree(500, 0.2, &t, &mut rng).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(draw(42), draw(42));
    assert_ne!(draw(42), draw(43));
    let a = RngStream::new(42, 0);
    assert_eq!(a.split(7).stream(), 7);
    assert_eq!(a.split(7).seed(), 42);
}

#[test]
fn monte_carlo_map_ignores_thread_count() {
    let t = build_counts(800, 800, Backend::LogApprox).unwrap();
    let law = height_law(800, 0.1, &t).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_map(&law, 300, 99, |tr| (tr.height(), tr.stats().width, tr.to_parens())).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert!(one.iter().all(|(h, _, s)| *h >= 1 && s.len() == 1600));
}
