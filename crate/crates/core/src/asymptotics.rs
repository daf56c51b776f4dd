//! Closed-form predictions: the exponent function `lambda_x` and its
//! minimizer, partition-function asymptotics, height laws in every regime,
//! root-degree and local-limit quantities.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::logreal::LogReal;
use crate::tree::PlaneTree;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Relative term size below which infinite sums over `Z` are truncated.
pub const SUM_TRUNCATION: f64 = 1e-30;

/// `lambda_x(t) = x t + ln(1 + tan^2(pi/t))` for `t > 2`.
pub fn lambda(x: f64, t: f64) -> Result<f64> {
    if !(t > 2.0) {
        return Err(Error::Domain(format!("lambda needs t > 2, got {t}")));
    }
    Ok(x * t + ln1p_tan2_real(t))
}

/// `ln(1 + tan^2(pi/t)) = -2 ln cos(pi/t)`, accurate for large `t`.
#[inline]
fn ln1p_tan2_real(t: f64) -> f64 {
    let s = (PI / (2.0 * t)).sin();
    -2.0 * (-2.0 * s * s).ln_1p()
}

/// `lambda_x'(t) = x - (2 pi / t^2) tan(pi/t)` for `t > 2`.
pub fn lambda_prime(x: f64, t: f64) -> Result<f64> {
    if !(t > 2.0) {
        return Err(Error::Domain(format!("lambda_prime needs t > 2, got {t}")));
    }
    Ok(lambda_prime_raw(x, t))
}

#[inline]
fn lambda_prime_raw(x: f64, t: f64) -> f64 {
    x - 2.0 * PI / (t * t) * (PI / t).tan()
}

#[inline]
fn lambda_second(t: f64) -> f64 {
    let a = PI / t;
    let c = a.cos();
    4.0 * PI / (t * t * t) * a.tan() + 2.0 * PI * PI / (t * t * t * t) / (c * c)
}

/// Unique minimizer `t_x` of `lambda_x` on `(2, inf)`, for `x > 0`.
///
/// Bisection of the increasing function `lambda_x'` on
/// `[2 + 1e-9, max(8, 2 (2 pi^2/x)^{1/3})]`, then Newton polishing.
pub fn t_min(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "t_min needs a finite x > 0, got {x}");
    let mut lo = 2.0 + 1e-9;
    let mut hi = f64::max(8.0, 2.0 * (2.0 * PI * PI / x).cbrt());
    while lambda_prime_raw(x, hi) < 0.0 {
        hi *= 2.0;
    }
    if lambda_prime_raw(x, lo) > 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if lambda_prime_raw(x, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let next = t - lambda_prime_raw(x, t) / lambda_second(t);
        if next > 2.0 && lambda_prime_raw(x, next).abs() < lambda_prime_raw(x, t).abs() {
            t = next;
        } else {
            break;
        }
    }
    t
}

/// Small-`x` expansions of `t_x`, `lambda_x(t_x)` and the curvature.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LambdaExpansion {
    /// `(2 pi^2/x)^{1/3} [1 + (pi x/2)^{2/3}/9]`.
    pub t_approx: f64,
    /// Leading term `(2 pi^2/x)^{1/3}` alone.
    pub t_leading: f64,
    /// `3 (pi x/2)^{2/3} + (pi x/2)^{4/3}/6`, from
    /// `lambda_x = x t + u^2 + u^4/6 + O(u^6)` with `u = pi/t`.
    pub min_approx: f64,
    /// `3 (pi x/2)^{2/3}`: `lambda_x((1+eps) t_x) - lambda_x(t_x) ~ coeff * eps^2`.
    pub curvature_coeff: f64,
}

impl LambdaExpansion {
    /// Predicted `lambda_x((1+eps) t_x) - lambda_x(t_x)`.
    pub fn quadratic(&self, eps: f64) -> f64 {
        self.curvature_coeff * eps * eps
    }
}

pub fn lambda_expansion(x: f64) -> Result<LambdaExpansion> {
    if !(x > 0.0 && x <= 0.1) {
        return Err(Error::Domain(format!("expansions need x in (0, 0.1], got {x}")));
    }
    let t_leading = (2.0 * PI * PI / x).cbrt();
    let s = (PI * x / 2.0).powf(2.0 / 3.0);
    Ok(LambdaExpansion {
        t_approx: t_leading * (1.0 + s / 9.0),
        t_leading,
        min_approx: 3.0 * s + s * s / 6.0,
        curvature_coeff: 3.0 * s,
    })
}

/// `(ln sin^2(pi/(m+1)), ln cos^2(pi/(m+1)))` in double-double.
fn ln_sin2_cos2(m: usize) -> (Dd, Dd) {
    let (s, c) = Dd::PI.div_f64((m + 1) as f64).sin_cos();
    (s.sqr().ln(), c.sqr().ln())
}

/// Leading term `4^n/(m+1) tan^2(pi/(m+1)) / (1 + tan^2(pi/(m+1)))^n` of the
/// number of trees with `n` nodes and height `< m`, for `2 <= m < n`.
pub fn asymptotic_count(n: usize, m: usize) -> Result<LogReal> {
    if m < 2 {
        return Err(Error::Domain(format!("asymptotic_count needs m >= 2, got {m}")));
    }
    if m >= n {
        return Err(Error::Domain(format!(
            "asymptotic_count needs m < n (m = {m}, n = {n}); the expansion is for m << sqrt(n)"
        )));
    }
    let (ls, lc) = ln_sin2_cos2(m);
    let nf = n as f64;
    let ln = Dd::LN2.mul_f64(2.0 * nf) - Dd::from_f64((m + 1) as f64).ln() + ls - lc + lc.mul_f64(nf);
    Ok(LogReal::from_ln_dd(ln))
}

/// Regime of `(n, mu)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Brownian,
    IntermediateGaussian,
    IntermediateDiscrete,
    /// `mu >> n^{1/4}` but `mu/n` small: Bernoulli height fluctuations.
    IntermediateBernoulli,
    Extreme,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Brownian => "brownian",
            Regime::IntermediateGaussian => "intermediate-gaussian",
            Regime::IntermediateDiscrete => "intermediate-discrete",
            Regime::IntermediateBernoulli => "intermediate-bernoulli",
            Regime::Extreme => "extreme",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numeric cutoffs of the regime classification.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RegimeThresholds {
    /// Brownian when `mu sqrt(n) <= brownian`.
    pub brownian: f64,
    /// Extreme when `mu/n >= extreme`.
    pub extreme: f64,
    /// Discrete when `mu/n^{1/4}` lies in `[discrete_lo, discrete_hi]`.
    pub discrete_lo: f64,
    pub discrete_hi: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds {
            brownian: 10.0,
            extreme: 0.1,
            discrete_lo: 0.2,
            discrete_hi: 5.0,
        }
    }
}

impl RegimeThresholds {
    pub fn classify(&self, n: usize, mu: f64) -> Regime {
        let nf = n as f64;
        if mu * nf.sqrt() <= self.brownian {
            Regime::Brownian
        } else if mu / nf >= self.extreme {
            Regime::Extreme
        } else {
            let gamma = mu / nf.powf(0.25);
            if gamma < self.discrete_lo {
                Regime::IntermediateGaussian
            } else if gamma <= self.discrete_hi {
                Regime::IntermediateDiscrete
            } else {
                Regime::IntermediateBernoulli
            }
        }
    }
}

pub fn classify(n: usize, mu: f64) -> Regime {
    RegimeThresholds::default().classify(n, mu)
}

/// `ln(4^n e^mu (e^mu - 1))`, common prefactor of regimes 1 and 2.
fn ln_prefactor(n: usize, mu: f64) -> Dd {
    Dd::LN2.mul_f64(2.0 * n as f64) + Dd::from_f64(mu) + Dd::from_f64(mu).expm1().ln()
}

/// Regime 1 (`1/sqrt(n) << mu << n^{1/4}`).
pub fn partition_regime1(n: usize, mu: f64) -> LogReal {
    let nf = n as f64;
    let c = (5.0 / 6.0) * PI.ln() - LN_2 / 3.0 - 0.5 * 3f64.ln();
    let rest = c + mu.ln() / 3.0 - (5.0 / 6.0) * nf.ln() - 3.0 * (PI * PI * mu * mu * nf / 4.0).cbrt();
    LogReal::from_ln_dd(ln_prefactor(n, mu) + Dd::from_f64(rest))
}

/// `ln sum_{m in Z} exp(-a (m - t)^2)` truncated at relative size `1e-30`.
fn ln_gauss_sum(a: f64, t: f64) -> f64 {
    let half = (-SUM_TRUNCATION.ln() / a).sqrt() + 1.0;
    if half > 1e6 {
        return 0.5 * (PI / a).ln();
    }
    let lo = (t - half).floor() as i64;
    let hi = (t + half).ceil() as i64;
    let s: f64 = (lo..=hi).map(|m| (-a * (m as f64 - t).powi(2)).exp()).sum();
    s.ln()
}

/// Regime 2 (`(log n)^{3/2}/sqrt(n) << mu << n`), with the `o(1)` in the
/// Gaussian coefficient dropped.
pub fn partition_regime2(n: usize, mu: f64) -> LogReal {
    let nf = n as f64;
    let x = mu / nf;
    let t = t_min(x);
    let a = 1.5 * (mu.powi(4) / (2.0 * PI * PI * nf)).cbrt();
    let lam = lambda(x, t).expect("t_x > 2");
    let rest = (mu / (2.0 * nf)).ln() + ln_gauss_sum(a, t);
    LogReal::from_ln_dd(ln_prefactor(n, mu) - Dd::from_f64(lam).mul_f64(nf) + Dd::from_f64(rest))
}

/// Regime 3 (`n^{1/4} << mu`).
pub fn partition_regime3(n: usize, mu: f64) -> LogReal {
    let nf = n as f64;
    let t = t_min(mu / nf);
    let lo = (t.floor() as usize).max(3);
    let hi = t.ceil() as usize;
    let terms: Vec<LogReal> = (lo..=hi.max(lo))
        .map(|m| {
            // tan^2(pi/m)/m e^{-mu m} cos^{2n}(pi/m)
            let (ls, lc) = ln_sin2_cos2(m - 1);
            let ln = ls - lc - Dd::from_f64(m as f64).ln() - Dd::from_f64(mu).mul_f64(m as f64) + lc.mul_f64(nf);
            LogReal::from_ln_dd(ln)
        })
        .collect();
    let pre = Dd::LN2.mul_f64(2.0 * nf) + Dd::from_f64(mu).mul_f64(2.0);
    LogReal::sum(&terms).mul_exp_dd(pre)
}

/// Partition-function asymptotics of every regime whose cutoffs admit
/// `(n, mu)`.
#[derive(Clone, Debug)]
pub struct PartitionAsymptotic {
    pub regime: Regime,
    pub regime1: Option<LogReal>,
    pub regime2: Option<LogReal>,
    pub regime3: Option<LogReal>,
}

/// Regime 1 is used for `mu/n^{1/4} <= 1`, regime 2 for `mu/n < 0.1`,
/// regime 3 for `mu/n^{1/4} >= 1`; none in the Brownian regime.
pub fn partition_asymptotic(n: usize, mu: f64) -> Result<PartitionAsymptotic> {
    if !(mu > 0.0) || n < 2 {
        return Err(Error::Domain("partition_asymptotic needs n >= 2 and mu > 0".into()));
    }
    let th = RegimeThresholds::default();
    let regime = th.classify(n, mu);
    let nf = n as f64;
    let gamma = mu / nf.powf(0.25);
    if regime == Regime::Brownian {
        return Ok(PartitionAsymptotic {
            regime,
            regime1: None,
            regime2: None,
            regime3: None,
        });
    }
    Ok(PartitionAsymptotic {
        regime,
        regime1: (gamma <= 1.0).then(|| partition_regime1(n, mu)),
        regime2: (mu / nf < th.extreme).then(|| partition_regime2(n, mu)),
        regime3: (gamma >= 1.0).then(|| partition_regime3(n, mu)),
    })
}

/// Law of `X_{gamma,delta}` on a window of integers.
#[derive(Clone, Debug, Serialize)]
pub struct DiscreteClt {
    pub gamma: f64,
    pub delta: f64,
    /// Smallest integer of the window.
    pub k_lo: i64,
    pub pmf: Vec<f64>,
    /// Normalizing constant `C_{gamma,delta}`.
    pub c: f64,
}

impl DiscreteClt {
    pub fn prob(&self, k: i64) -> f64 {
        if k < self.k_lo {
            return 0.0;
        }
        self.pmf.get((k - self.k_lo) as usize).copied().unwrap_or(0.0)
    }

    pub fn k_hi(&self) -> i64 {
        self.k_lo + self.pmf.len() as i64 - 1
    }
}

/// Coefficient `3 (gamma^2/(4 pi))^{2/3}` of the discrete Gaussian.
pub fn discrete_clt_coeff(gamma: f64) -> f64 {
    3.0 * (gamma * gamma / (4.0 * PI)).powf(2.0 / 3.0)
}

/// `P(X = k) = exp(-a (k - delta)^2)/C` over `k` in `Z`, truncated where
/// terms fall below `1e-30` of the largest.
pub fn discrete_clt_pmf(gamma: f64, delta: f64) -> Result<DiscreteClt> {
    if !(gamma > 0.0) || !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "discrete_clt_pmf needs gamma > 0 and delta in [0, 1], got ({gamma}, {delta})"
        )));
    }
    let a = discrete_clt_coeff(gamma);
    let half = (-SUM_TRUNCATION.ln() / a).sqrt() + 1.0;
    if half > 1e7 {
        return Err(Error::Domain(format!("gamma = {gamma} too small for a summed window")));
    }
    let k_lo = (delta - half).floor() as i64;
    let k_hi = (delta + half).ceil() as i64;
    let w: Vec<f64> = (k_lo..=k_hi).map(|k| (-a * (k as f64 - delta).powi(2)).exp()).collect();
    let c: f64 = w.iter().sum();
    Ok(DiscreteClt {
        gamma,
        delta,
        k_lo,
        pmf: w.iter().map(|v| v / c).collect(),
        c,
    })
}

/// `m_x = max(floor(t_x), 3)`.
pub fn m_x(x: f64) -> usize {
    (t_min(x).floor() as usize).max(3)
}

fn ln1p_tan2(m: usize) -> f64 {
    ln1p_tan2_real(m as f64)
}

/// `delta_n = mu + n ln[(1 + tan^2(pi/ceil t)) / (1 + tan^2(pi/m_x))]` with
/// `t = t_{mu/n}`.
pub fn delta_n(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    let t = t_min(mu / nf);
    let m = (t.floor() as usize).max(3);
    let up = (t.ceil() as usize).max(3);
    mu + nf * (ln1p_tan2(up) - ln1p_tan2(m))
}

/// Bias `mu` at which `delta_n = delta` when `m_{mu/n} = m` (valid when the
/// returned `mu` indeed has `m_{mu/n} = m`).
pub fn mu_for_delta(n: usize, m: usize, delta: f64) -> f64 {
    delta - n as f64 * (ln1p_tan2(m + 1) - ln1p_tan2(m))
}

/// Parameter `p_{c,delta}` of the limiting Bernoulli law of
/// `h - m_{mu/n} + 2`; `c = +inf` is allowed.
pub fn bernoulli_param(c: f64, delta: f64) -> f64 {
    if delta == f64::INFINITY {
        return 0.0;
    }
    if delta == f64::NEG_INFINITY {
        return 1.0;
    }
    let e = (-delta).exp();
    if c > 0.0 {
        let m = if c.is_infinite() { 3 } else { m_x(c) } as f64;
        let t1 = (PI / (m + 1.0)).tan().powi(2);
        let t0 = (PI / m).tan().powi(2);
        let num = m * t1 * e;
        num / ((m + 1.0) * t0 + num)
    } else {
        e / (1.0 + e)
    }
}

/// Limit `4/(4 + e^{-delta})` of the probability of the star, `delta = mu - n ln 2`.
pub fn star_probability(delta: f64) -> f64 {
    if delta == f64::NEG_INFINITY {
        return 0.0;
    }
    4.0 / (4.0 + (-delta).exp())
}

/// Rate `(pi/2)^{2/3} (x-1)^2 (2x+1)/x^2` for `x > 0`, infinite otherwise.
pub fn ldp_rate(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::INFINITY;
    }
    (PI / 2.0).powf(2.0 / 3.0) * (x - 1.0).powi(2) * (2.0 * x + 1.0) / (x * x)
}

/// Equivalent form `(2 pi^2)^{1/3} [x + 1/(2 x^2) - 3/2]`.
pub fn ldp_rate_alt(x: f64) -> f64 {
    if !(x > 0.0) {
        return f64::INFINITY;
    }
    (2.0 * PI * PI).cbrt() * (x + 0.5 / (x * x) - 1.5)
}

/// Limit mass `2K 2^K 4^{-|T0|}` of the ball around `T0` under Kesten's
/// tree, with `K` the number of vertices at the maximal depth of `T0`.
pub fn kesten_ball_mass(t0: &PlaneTree) -> f64 {
    let k = *t0.generation_sizes().last().unwrap() as f64;
    ((2.0 * k).ln() + (k - 2.0 * t0.size() as f64) * LN_2).exp()
}

/// Root-degree local approximation `e^{-rho^2/12}/sqrt(12 pi mu)` at degree
/// `floor(2 mu + rho sqrt(mu))`.
pub fn root_degree_local(mu: f64, rho: f64) -> f64 {
    (-rho * rho / 12.0).exp() / (12.0 * PI * mu).sqrt()
}

/// Every closed-form prediction for `(n, mu)`.
#[derive(Clone, Debug, Serialize)]
pub struct PredictionSet {
    pub n: usize,
    pub mu: f64,
    pub x: f64,
    pub t_x: f64,
    pub regime: Regime,
    /// `(2 pi^2 n/mu)^{1/3}`; absent in the Brownian and extreme regimes.
    pub lln_height: Option<f64>,
    /// `sqrt((1/3)(2 pi^2 n/mu^4)^{1/3})`; absent where `lln_height` is.
    pub clt_sd: Option<f64>,
    pub m_x: usize,
    pub delta_n: f64,
    pub bernoulli_p: f64,
    pub width_scale: f64,
    /// `mu/n^{1/4}`.
    pub gamma: f64,
    /// Fractional part of `t_x`.
    pub frac_t: f64,
    /// Discrete-CLT coefficient `3 (gamma^2/(4 pi))^{2/3}`.
    pub discrete_coeff: f64,
    /// LDP speed `(mu^2 n)^{1/3}`.
    pub ldp_speed: f64,
    /// `4/(4 + e^{-(mu - n ln 2)})`.
    pub star_prob: f64,
    pub root_degree_mean: f64,
    pub root_degree_var: f64,
}

pub fn height_predictions(n: usize, mu: f64) -> Result<PredictionSet> {
    height_predictions_with(n, mu, &RegimeThresholds::default())
}

pub fn height_predictions_with(n: usize, mu: f64, th: &RegimeThresholds) -> Result<PredictionSet> {
    if n < 2 || !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::Domain(format!(
            "predictions need n >= 2 and finite mu > 0 (n = {n}, mu = {mu})"
        )));
    }
    let nf = n as f64;
    let x = mu / nf;
    let t = t_min(x);
    let regime = th.classify(n, mu);
    let intermediate = !matches!(regime, Regime::Brownian | Regime::Extreme);
    let gamma = mu / nf.powf(0.25);
    let dn = delta_n(n, mu);
    Ok(PredictionSet {
        n,
        mu,
        x,
        t_x: t,
        regime,
        lln_height: intermediate.then(|| (2.0 * PI * PI * nf / mu).cbrt()),
        clt_sd: intermediate.then(|| ((2.0 * PI * PI * nf / mu.powi(4)).cbrt() / 3.0).sqrt()),
        m_x: (t.floor() as usize).max(3),
        delta_n: dn,
        bernoulli_p: bernoulli_param(x, dn),
        width_scale: nf.min((mu * nf * nf).cbrt()),
        gamma,
        frac_t: t - t.floor(),
        discrete_coeff: discrete_clt_coeff(gamma),
        ldp_speed: (mu * mu * nf).cbrt(),
        star_prob: star_probability(mu - nf * LN_2),
        root_degree_mean: 2.0 * mu,
        root_degree_var: 6.0 * mu,
    })
}
