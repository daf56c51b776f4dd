//! The experiment catalogue.

use super::report::ExperimentReport;
use super::ExperimentConfig;
use crate::asymptotics::{self, kesten_ball_mass};
use crate::counting::{Backend, CountTable};
use crate::error::{Error, Result};
use crate::lattice::{all_walks, cut_bijection, cycle_map, last_visit, path_width, LatticePath};
use crate::logreal::LogReal;
use crate::partition::{self, height_law, HeightLaw};
use crate::sampler::monte_carlo_map;
use crate::tree::{enumerate_trees, PlaneTree};
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};
use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

const EXACT: &str = "exact";
const NUMERIC: &str = "numeric";

fn provenance(backend: Backend) -> &'static str {
    match backend {
        Backend::Exact => EXACT,
        Backend::LogApprox => "exact-log",
    }
}

fn mc(samples: usize) -> String {
    format!("monte-carlo({samples})")
}

/// Table for the given `(n, mu)` points, remembered in the report.
fn table(
    report: &mut ExperimentReport,
    points: &[(usize, f64)],
    backend: Backend,
    cfg: &ExperimentConfig,
) -> Result<CountTable> {
    let t = partition::table_for(points, backend, cfg.cache_dir.as_deref())?;
    report.tables.push(format!(
        "{}:n{}:m{}:{}",
        t.backend(),
        t.n_max(),
        t.m_max(),
        t.fingerprint()
    ));
    Ok(t)
}

fn nonempty<T: Clone>(v: &Option<Vec<T>>, default: &[T]) -> Result<Vec<T>> {
    let out = v.clone().unwrap_or_else(|| default.to_vec());
    if out.is_empty() {
        return Err(Error::Domain("empty parameter grid".into()));
    }
    Ok(out)
}

/// 1 when `errs` strictly decreases, else 0.
fn decreasing(errs: &[f64]) -> f64 {
    f64::from(u8::from(errs.windows(2).all(|w| w[1] < w[0])))
}

/// `sup_x |F(x) - Phi((x - mean)/sd)|` for a law on the integers `0..`.
pub(crate) fn kolmogorov_to_normal(pmf: &[f64], mean: f64, sd: f64) -> f64 {
    let normal = Normal::new(mean, sd).expect("sd > 0");
    let mut below = 0.0;
    let mut d: f64 = 0.0;
    for (k, p) in pmf.iter().enumerate() {
        if *p == 0.0 {
            continue;
        }
        let phi = normal.cdf(k as f64);
        d = d.max((below - phi).abs());
        below += p;
        d = d.max((below - phi).abs());
    }
    d
}

fn law_mean_sd(law: &HeightLaw) -> (f64, f64) {
    (law.mean(), law.variance().sqrt())
}

pub(crate) fn height_lln(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[500, 1000, 2000])?;
    let mus = nonempty(&cfg.mu, &[1.0])?;
    let tol = cfg.tolerance.unwrap_or(0.10);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "height-lln",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "mu": mus, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for &mu in &mus {
        let mut errs = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let law = height_law(n, mu, &t)?;
            let lln = (2.0 * PI * PI * n as f64 / mu).cbrt();
            let ratio = law.mean() / lln;
            errs.push((ratio - 1.0).abs());
            let at = (Some(n), Some(mu));
            if i + 1 == ns.len() {
                rep.gate(at, "mean_height/lln", ratio, 1.0, tol, provenance(backend));
            } else {
                rep.info(at, "mean_height/lln", ratio, 1.0, provenance(backend));
            }
            rep.info(
                at,
                "mean_height/t_x",
                law.mean() / asymptotics::t_min(mu / n as f64),
                1.0,
                provenance(backend),
            );
        }
        if ns.len() > 1 {
            rep.gate(
                (None, Some(mu)),
                "lln_error_decreasing",
                decreasing(&errs),
                1.0,
                0.0,
                provenance(backend),
            );
        }
    }
    Ok(rep)
}

pub(crate) fn height_clt(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[500, 1000, 2000])?;
    let mus = nonempty(&cfg.mu, &[0.3])?;
    let tol = cfg.tolerance.unwrap_or(0.08);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "height-clt",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "mu": mus, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for &mu in &mus {
        let mut ds = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let law = height_law(n, mu, &t)?;
            let pmf = law.pmf();
            let (mean, sd) = law_mean_sd(&law);
            let d = kolmogorov_to_normal(&pmf, mean, sd);
            ds.push(d);
            let at = (Some(n), Some(mu));
            if i + 1 == ns.len() {
                rep.gate(at, "kolmogorov", d, 0.0, tol, provenance(backend));
            } else {
                rep.info(at, "kolmogorov", d, 0.0, provenance(backend));
            }
            let nf = n as f64;
            let lln = (2.0 * PI * PI * nf / mu).cbrt();
            let clt_sd = ((2.0 * PI * PI * nf / mu.powi(4)).cbrt() / 3.0).sqrt();
            rep.info(at, "sd/clt_sd", sd / clt_sd, 1.0, provenance(backend));
            rep.info(
                at,
                "kolmogorov_limit_centering",
                kolmogorov_to_normal(&pmf, lln, clt_sd),
                0.0,
                provenance(backend),
            );
        }
        if ns.len() > 1 {
            rep.gate(
                (None, Some(mu)),
                "kolmogorov_decreasing",
                decreasing(&ds),
                1.0,
                0.0,
                provenance(backend),
            );
        }
    }
    Ok(rep)
}

/// Law of `h - floor(t_x) + 2` against `X_{gamma, delta}`: total variation
/// and the two means.
pub(crate) fn discrete_clt_distance(law: &HeightLaw, n: usize, mu: f64) -> Result<(f64, f64, f64, f64)> {
    let t = asymptotics::t_min(mu / n as f64);
    let delta = t - t.floor();
    let gamma = mu / (n as f64).powf(0.25);
    let x = asymptotics::discrete_clt_pmf(gamma, delta)?;
    let shift = t.floor() as i64 - 2;
    let mut lhs: BTreeMap<i64, f64> = BTreeMap::new();
    for (h, p) in law.pmf().iter().enumerate() {
        *lhs.entry(h as i64 - shift).or_default() += p;
    }
    for k in x.k_lo..=x.k_hi() {
        lhs.entry(k).or_default();
    }
    let tv = 0.5 * lhs.iter().map(|(&k, &p)| (p - x.prob(k)).abs()).sum::<f64>();
    let mean_l: f64 = lhs.iter().map(|(&k, &p)| k as f64 * p).sum();
    let mean_x: f64 = (x.k_lo..=x.k_hi()).map(|k| k as f64 * x.prob(k)).sum();
    Ok((tv, delta, mean_l, mean_x))
}

pub(crate) fn discrete_clt(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[1500])?;
    let gamma = cfg.gamma.unwrap_or(1.0);
    let tol = cfg.tolerance.unwrap_or(0.05);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "discrete-clt",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "gamma": gamma, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = ns.iter().map(|&n| (n, gamma * (n as f64).powf(0.25))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for &(n, mu) in &points {
        let law = height_law(n, mu, &t)?;
        let (tv, delta, mean_l, mean_x) = discrete_clt_distance(&law, n, mu)?;
        let at = (Some(n), Some(mu));
        rep.gate(at, "total_variation", tv, 0.0, tol, provenance(backend));
        rep.info(at, "delta", delta, delta, NUMERIC);
        rep.info(at, "mean_shifted_height", mean_l, mean_x, provenance(backend));
    }
    Ok(rep)
}

pub(crate) fn height_ldp(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[2000])?;
    let mus = nonempty(&cfg.mu, &[2.0])?;
    let xs = nonempty(&cfg.x, &[1.3, 1.5])?;
    let tol = cfg.tolerance.unwrap_or(0.15);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "height-ldp",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "mu": mus, "x": xs, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    let info_xs = [0.8, 1.0, 1.2];
    for &(n, mu) in &points {
        let at = (Some(n), Some(mu));
        for p in partition::ldp_curve(n, mu, &xs, &t)? {
            let rate = asymptotics::ldp_rate(p.x);
            rep.gate(
                at,
                &format!("rate_ratio@x={}", p.x),
                p.value / rate,
                1.0,
                tol,
                provenance(backend),
            );
        }
        for p in partition::ldp_curve(n, mu, &info_xs, &t)? {
            rep.info(
                at,
                &format!("rate@x={}", p.x),
                p.value,
                asymptotics::ldp_rate(p.x),
                provenance(backend),
            );
        }
    }
    Ok(rep)
}

pub(crate) fn bernoulli(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[300])?;
    let deltas = nonempty(&cfg.delta, &[0.0])?;
    let tol = cfg.tolerance.unwrap_or(0.05);
    let backend = cfg.backend.unwrap_or(Backend::Exact);
    let mut rep = ExperimentReport::new(
        "bernoulli",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "delta": deltas, "levels": [3, 4], "tolerance": tol}),
    );
    let mut points = Vec::new();
    for &n in &ns {
        for &d in &deltas {
            for m in [3usize, 4] {
                let mu = asymptotics::mu_for_delta(n, m, d);
                if mu > 0.0 && asymptotics::m_x(mu / n as f64) == m {
                    points.push((n, mu));
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::Domain("no (n, delta, m) combination has m_x = m".into()));
    }
    let t = table(&mut rep, &points, backend, cfg)?;
    for &(n, mu) in &points {
        let law = height_law(n, mu, &t)?;
        let pred = asymptotics::height_predictions(n, mu)?;
        let base = pred.m_x - 2;
        let p0 = law.prob(base);
        let p1 = law.prob(base + 1);
        let at = (Some(n), Some(mu));
        rep.gate(at, "mass_on_0_1", p0 + p1, 1.0, 0.02, provenance(backend));
        rep.gate(at, "bernoulli_p", p1, pred.bernoulli_p, tol, provenance(backend));
        rep.info(at, "m_x", pred.m_x as f64, pred.m_x as f64, NUMERIC);
        rep.info(at, "delta_n", pred.delta_n, pred.delta_n, NUMERIC);
    }
    Ok(rep)
}

pub(crate) fn star(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[200])?;
    let deltas = nonempty(&cfg.delta, &[-2.0, 0.0, 2.0])?;
    let tol = cfg.tolerance.unwrap_or(0.02);
    let backend = cfg.backend.unwrap_or(Backend::Exact);
    let mut rep = ExperimentReport::new(
        "star",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "delta": deltas, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = ns
        .iter()
        .flat_map(|&n| deltas.iter().map(move |&d| (n, n as f64 * LN_2 + d)))
        .collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for (&(n, mu), d) in points.iter().zip(deltas.iter().cycle()) {
        let law = height_law(n, mu, &t)?;
        rep.gate(
            (Some(n), Some(mu)),
            &format!("p_star@delta={d}"),
            law.prob(1),
            asymptotics::star_probability(*d),
            tol,
            provenance(backend),
        );
    }
    Ok(rep)
}

/// Median and its standard error from order statistics `N/2 +- sqrt(N)/2`.
/// For discrete data the error is at least half the gap to the nearest
/// distinct value.
fn median_with_stderr(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    let q = |r: f64| v[(r.round() as usize).min(n - 1)];
    let mid = (n as f64 - 1.0) / 2.0;
    let half = (n as f64).sqrt() / 2.0;
    let med = if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    };
    let spread = 0.5 * (q(mid + half) - q((mid - half).max(0.0)));
    let gap = v
        .iter()
        .map(|&x| (x - med).abs())
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if gap.is_finite() { 0.5 * gap } else { 0.0 };
    (med, spread.max(floor))
}

pub(crate) fn width_scaling(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[1000, 2000, 4000])?;
    let power = cfg.mu_power.unwrap_or(-0.25);
    let samples = cfg.samples.unwrap_or(10_000);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let seed = cfg.seed();
    let mut rep = ExperimentReport::new(
        "width-scaling",
        seed,
        Some(backend),
        json!({"n": ns, "mu_power": power, "samples": samples, "band": 5.0, "stability": 1.5}),
    );
    let points: Vec<(usize, f64)> = ns.iter().map(|&n| (n, (n as f64).powf(power))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    let mut medians = Vec::new();
    for &(n, mu) in &points {
        let law = height_law(n, mu, &t)?;
        let scale = (n as f64).min((mu * (n * n) as f64).cbrt());
        let ratios = monte_carlo_map(&law, samples, seed, |tr| tr.width() as f64 / scale)?;
        let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let (lmed, lse) = median_with_stderr(logs);
        medians.push((lmed, lse));
        let at = (Some(n), Some(mu));
        rep.gate_mc(at, "ln_median_width_ratio", (lmed, 0.0), 5f64.ln(), lse, &mc(samples));
        rep.info(at, "median_width_ratio", lmed.exp(), 1.0, &mc(samples));
    }
    if medians.len() > 1 {
        let hi = medians.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
        let lo = medians.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
        let se = medians.iter().map(|m| m.1).fold(0.0, f64::max) * 2f64.sqrt();
        rep.gate_mc(
            (None, None),
            "ln_median_spread",
            (hi - lo, 0.0),
            1.5f64.ln(),
            se,
            &mc(samples),
        );
    }
    Ok(rep)
}

pub(crate) fn root_degree(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[2000])?;
    let mus = nonempty(&cfg.mu, &[5.0])?;
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "root-degree",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "mu": mus, "tolerance_mean": 0.10, "tolerance_var": 0.15, "tolerance_local": 0.20}),
    );
    let points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for &(n, mu) in &points {
        let law = partition::root_degree_law(n, mu, &t, None)?;
        let at = (Some(n), Some(mu));
        let prov = provenance(backend);
        rep.gate(at, "mean/(2mu)", law.mean() / (2.0 * mu), 1.0, 0.10, prov);
        rep.gate(at, "variance/(6mu)", law.variance() / (6.0 * mu), 1.0, 0.15, prov);
        let r = (2.0 * mu).floor() as usize;
        rep.gate(
            at,
            "q(floor(2mu))/local",
            law.prob(r) / asymptotics::root_degree_local(mu, 0.0),
            1.0,
            0.20,
            prov,
        );
        rep.info(at, "truncated_mass", law.truncated_mass, 0.0, prov);
    }
    Ok(rep)
}

pub(crate) fn local_ball(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[4000])?;
    let mus = nonempty(&cfg.mu, &[0.005])?;
    let samples = cfg.samples.unwrap_or(100_000);
    let tol = cfg.tolerance.unwrap_or(0.03);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let seed = cfg.seed();
    let mut rep = ExperimentReport::new(
        "local-ball",
        seed,
        Some(backend),
        json!({"n": ns, "mu": mus, "samples": samples, "tolerance": tol}),
    );
    let points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    let t = table(&mut rep, &points, backend, cfg)?;
    for &(n, mu) in &points {
        let law = height_law(n, mu, &t)?;
        let degs = monte_carlo_map(&law, samples, seed, |tr| tr.root_degree())?;
        let at = (Some(n), Some(mu));
        for k in 1..=4usize {
            let hits = degs.iter().filter(|&&d| d == k).count() as f64;
            let p = hits / samples as f64;
            let se = (p * (1.0 - p) / samples as f64).sqrt().max(1.0 / samples as f64);
            let pred = kesten_ball_mass(&PlaneTree::star(k));
            let q = format!("p_root_degree={k}");
            if k == 1 {
                rep.gate_mc(at, &q, (p, pred), tol, se, &mc(samples));
            } else {
                rep.info_mc(at, &q, (p, pred), se, &mc(samples));
            }
        }
    }
    Ok(rep)
}

/// Relative size of the `k = 2` term of the closed form to the `k = 1` term.
pub(crate) fn count_correction(n: usize, m: usize) -> f64 {
    let th = PI / (m + 1) as f64;
    let e = 2.0 * ((2.0 * th).sin() / th.sin()).ln() + (2 * n - 2) as f64 * ((2.0 * th).cos() / th.cos()).abs().ln();
    e.exp()
}

pub(crate) fn count_asymptotics(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[100, 200, 300, 400])?;
    let mut rep = ExperimentReport::new(
        "count-asymptotics",
        cfg.seed(),
        Some(Backend::Exact),
        json!({"n": ns, "m": 20, "tolerance": 1e-3, "log_point": [5000, 12], "log_tolerance": 1e-6}),
    );
    let m = 20;
    let n_max = *ns.iter().max().unwrap();
    if n_max <= m {
        return Err(Error::Domain("count-asymptotics needs n > 20".into()));
    }
    let exact = crate::counting::cache::load_or_build(n_max, m, Backend::Exact, cfg.cache_dir.as_deref())?;
    rep.tables
        .push(format!("exact:n{}:m{}:{}", n_max, m, exact.fingerprint()));
    for &n in ns.iter().filter(|&&n| n > m) {
        let ratio = exact.h(n, m)? / asymptotics::asymptotic_count(n, m)?;
        let err = ratio - LogReal::ONE;
        let at = (Some(n), None);
        if n == n_max {
            rep.gate(at, "ratio_m20", ratio.to_f64(), 1.0, 1e-3, EXACT);
        } else {
            rep.info(at, "ratio_m20", ratio.to_f64(), 1.0, EXACT);
        }
        let corr = count_correction(n, m);
        if corr > 1e-25 {
            rep.gate(
                at,
                "error/correction_m20",
                (err / LogReal::from_f64(corr)).to_f64(),
                1.0,
                0.5,
                EXACT,
            );
        }
    }
    let (nl, ml) = (5000, 12);
    let log = crate::counting::cache::load_or_build(nl, ml, Backend::LogApprox, cfg.cache_dir.as_deref())?;
    rep.tables.push(format!("log:n{}:m{}:{}", nl, ml, log.fingerprint()));
    let ratio = (log.h(nl, ml)? / asymptotics::asymptotic_count(nl, ml)?).to_f64();
    rep.gate((Some(nl), None), "ratio_m12", ratio, 1.0, 1e-6, "exact-log");
    Ok(rep)
}

pub(crate) fn partition_asymptotics(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[400, 800, 1200])?;
    let mus = nonempty(&cfg.mu, &[0.5])?;
    let power = cfg.mu_power.unwrap_or(0.4);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let n23 = 2000usize;
    let mu23 = (n23 as f64).powf(power);
    let overlap = [1000usize, 2000];
    let mut rep = ExperimentReport::new(
        "partition-asymptotics",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "mu": mus, "tolerance": 0.05, "regime23_point": [n23, mu23], "regime23_tolerance": 0.01}),
    );
    let mut points: Vec<(usize, f64)> = mus.iter().flat_map(|&mu| ns.iter().map(move |&n| (n, mu))).collect();
    points.push((n23, mu23));
    let t = table(&mut rep, &points, backend, cfg)?;
    let prov = provenance(backend);
    for &mu in &mus {
        let mut errs = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let z = partition::partition_function(n, mu, &t)?;
            let r1 = asymptotics::partition_regime1(n, mu);
            let ratio = (z / r1).to_f64();
            errs.push((ratio - 1.0).abs());
            let at = (Some(n), Some(mu));
            if i + 1 == ns.len() {
                rep.gate(at, "z/regime1", ratio, 1.0, 0.05, prov);
                let w = partition::w_sum(n, mu, &t)?;
                let pre = LogReal::from_ln_dd(
                    crate::dd::Dd::LN2.mul_f64(2.0 * n as f64)
                        + crate::dd::Dd::from_f64(mu)
                        + crate::dd::Dd::from_f64(mu).expm1().ln(),
                );
                rep.gate(at, "z/(4^n e^mu (e^mu-1) w)", (z / (pre * w)).to_f64(), 1.0, 0.05, prov);
            } else {
                rep.info(at, "z/regime1", ratio, 1.0, prov);
            }
            rep.info(
                at,
                "z/regime2",
                (z / asymptotics::partition_regime2(n, mu)).to_f64(),
                1.0,
                prov,
            );
        }
        if ns.len() > 1 {
            rep.gate(
                (None, Some(mu)),
                "regime1_error_decreasing",
                decreasing(&errs),
                1.0,
                0.0,
                prov,
            );
        }
    }
    let at = (Some(n23), Some(mu23));
    let r2 = asymptotics::partition_regime2(n23, mu23);
    let r3 = asymptotics::partition_regime3(n23, mu23);
    rep.gate(at, "regime2/regime3", (r2 / r3).to_f64(), 1.0, 0.01, NUMERIC);
    let z = partition::partition_function(n23, mu23, &t)?;
    rep.info(at, "z/regime2", (z / r2).to_f64(), 1.0, prov);
    rep.info(at, "z/regime3", (z / r3).to_f64(), 1.0, prov);
    for &n in &overlap {
        let mu = (n as f64).powf(0.25);
        let x = mu / n as f64;
        let gap = ((PI * x / 2.0).powf(4.0 / 3.0) * n as f64 / 6.0).exp();
        let r = (asymptotics::partition_regime1(n, mu) / asymptotics::partition_regime2(n, mu)).to_f64();
        rep.info((Some(n), Some(mu)), "regime1/regime2", r, gap, NUMERIC);
    }
    Ok(rep)
}

pub(crate) fn lambda_expansions(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let xs = nonempty(&cfg.x, &[1e-4, 1e-5, 1e-6])?;
    let mut rep = ExperimentReport::new(
        "lambda-expansions",
        cfg.seed(),
        None,
        json!({"x": xs, "stability_factor": 2.0}),
    );
    let mut cs = Vec::new();
    let mut rs = Vec::new();
    for &x in &xs {
        let e = asymptotics::lambda_expansion(x)?;
        let t = asymptotics::t_min(x);
        let lam = asymptotics::lambda(x, t)?;
        let at = (None, Some(x));
        let c = (t - e.t_leading).abs() / (t * x.powf(2.0 / 3.0));
        cs.push(c);
        rep.info(
            at,
            "t_leading_error/x^(2/3)",
            c,
            (PI / 2.0).powf(2.0 / 3.0) / 9.0,
            NUMERIC,
        );
        rep.info(
            at,
            "t_corrected_error/x^(4/3)",
            (t - e.t_approx).abs() / (t * x.powf(4.0 / 3.0)),
            0.0,
            NUMERIC,
        );
        let r = (lam - e.min_approx).abs() / (x * x);
        rs.push(r);
        rep.info(at, "min_error/x^2", r, 0.0, NUMERIC);
        let eps = 0.01;
        let q = (asymptotics::lambda(x, (1.0 + eps) * t)? - lam) / e.quadratic(eps);
        rep.info(at, "curvature_ratio@eps=0.01", q, 1.0, NUMERIC);
        if x <= 1e-6 {
            rep.gate(
                at,
                "t_corrected_rel_error",
                (t - e.t_approx).abs() / t,
                0.0,
                1e-4,
                NUMERIC,
            );
            rep.gate(at, "min_abs_error", (lam - e.min_approx).abs(), 0.0, 1e-7, NUMERIC);
        }
    }
    let spread = |v: &[f64]| {
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo
    };
    if xs.len() > 1 {
        rep.gate((None, None), "t_constant_spread", spread(&cs), 1.0, 1.0, NUMERIC);
        rep.gate((None, None), "min_constant_spread", spread(&rs), 1.0, 1.0, NUMERIC);
    }
    Ok(rep)
}

/// `sup |F - G|` for laws of `h / s1` and `h / s2` with integer heights.
fn scaled_kolmogorov(p: &[f64], s1: f64, q: &[f64], s2: f64) -> f64 {
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    pts.extend(p.iter().enumerate().map(|(k, &w)| (k as f64 / s1, w, 0.0)));
    pts.extend(q.iter().enumerate().map(|(k, &w)| (k as f64 / s2, 0.0, w)));
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (mut f, mut g, mut d) = (0.0f64, 0.0f64, 0.0f64);
    let mut i = 0;
    while i < pts.len() {
        let x = pts[i].0;
        while i < pts.len() && pts[i].0 == x {
            f += pts[i].1;
            g += pts[i].2;
            i += 1;
        }
        d = d.max((f - g).abs());
    }
    d
}

pub(crate) fn brownian_selfconsistency(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let ns = nonempty(&cfg.n, &[200, 400, 800])?;
    let alphas = nonempty(&cfg.alpha, &[1.0])?;
    let tol = cfg.tolerance.unwrap_or(0.1);
    let backend = cfg.backend.unwrap_or(Backend::LogApprox);
    let mut rep = ExperimentReport::new(
        "brownian-selfconsistency",
        cfg.seed(),
        Some(backend),
        json!({"n": ns, "alpha": alphas, "tolerance": tol}),
    );
    let mut points = Vec::new();
    for &a in &alphas {
        for &n in &ns {
            points.push((n, a / (n as f64).sqrt()));
            points.push((2 * n, a / ((2 * n) as f64).sqrt()));
        }
    }
    let t = table(&mut rep, &points, backend, cfg)?;
    for &a in &alphas {
        let mut ds = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let l1 = height_law(n, a / (n as f64).sqrt(), &t)?;
            let l2 = height_law(2 * n, a / ((2 * n) as f64).sqrt(), &t)?;
            let d = scaled_kolmogorov(&l1.pmf(), (2.0 * n as f64).sqrt(), &l2.pmf(), (4.0 * n as f64).sqrt());
            ds.push(d);
            let at = (Some(n), Some(a));
            if i + 1 == ns.len() {
                rep.gate(at, "kolmogorov(n,2n)", d, 0.0, tol, provenance(backend));
            } else {
                rep.info(at, "kolmogorov(n,2n)", d, 0.0, provenance(backend));
            }
            rep.info(
                at,
                "mean_scaled_height_ratio(2n/n)",
                (l2.mean() / (4.0 * n as f64).sqrt()) / (l1.mean() / (2.0 * n as f64).sqrt()),
                1.0,
                provenance(backend),
            );
        }
        if ns.len() > 1 {
            rep.gate(
                (None, Some(a)),
                "kolmogorov_decreasing",
                decreasing(&ds),
                1.0,
                0.0,
                provenance(backend),
            );
        }
    }
    Ok(rep)
}

/// Violations of the cycle-map fiber sizes for all bridges of length
/// `2n - 1`, `n <= n_max`.
pub(crate) fn cycle_violations(n_max: usize) -> usize {
    let mut bad = 0;
    for n in 1..=n_max {
        let len = 2 * n - 1;
        let mut fibers: BTreeMap<LatticePath, usize> = BTreeMap::new();
        for w in all_walks(len).filter(|w| w.end() == -1) {
            let e = cycle_map(&w).expect("bridge");
            if !e.is_excursion() {
                bad += 1;
            }
            *fibers.entry(e).or_default() += 1;
        }
        let catalan = crate::counting::catalan(n - 1);
        if fibers.len() != usize::try_from(&catalan).unwrap_or(usize::MAX) {
            bad += 1;
        }
        bad += fibers.values().filter(|&&c| c != len).count();
    }
    bad
}

/// Violations of the cut-bijection contract over all walks of length
/// `<= len_max` from 0.
pub(crate) fn cut_violations(len_max: usize) -> usize {
    let mut bad = 0;
    for len in 0..=len_max {
        for w in all_walks(len) {
            let x = w.end();
            let level = x.div_euclid(2);
            let image = match cut_bijection(&w, x) {
                Ok(v) => v,
                Err(_) => {
                    bad += usize::from(last_visit(&w, level).is_some());
                    continue;
                }
            };
            let target = 2 * level - x;
            let ok = image.end() == target
                && last_visit(&image, level) == last_visit(&w, level)
                && cut_bijection(&image, x).ok().as_ref() == Some(&w);
            bad += usize::from(!ok);
        }
    }
    bad
}

/// Trees with `2 <= n <= n_max` whose contour width differs from their width.
pub(crate) fn width_violations(n_max: usize) -> Result<usize> {
    let mut bad = 0;
    for n in 2..=n_max {
        for t in enumerate_trees(n)? {
            bad += usize::from(path_width(&t.to_contour()) != t.width() as f64);
        }
    }
    Ok(bad)
}

pub(crate) fn bijection_exhaustive(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(
        "bijection-exhaustive",
        cfg.seed(),
        None,
        json!({"cycle_n_max": 6, "cut_length_max": 12, "width_n_max": 8}),
    );
    rep.gate(
        (None, None),
        "cycle_map_fiber_violations",
        cycle_violations(6) as f64,
        0.0,
        0.0,
        "exhaustive",
    );
    rep.gate(
        (None, None),
        "cut_bijection_violations",
        cut_violations(12) as f64,
        0.0,
        0.0,
        "exhaustive",
    );
    rep.gate(
        (None, None),
        "path_width_violations",
        width_violations(8)? as f64,
        0.0,
        0.0,
        "exhaustive",
    );
    Ok(rep)
}
