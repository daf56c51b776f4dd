//! Closed trigonometric form of the bounded-height counts,
//!
//! `H[n][m] = 4^n/(m+1) * sum_{k=1}^{floor(m/2)} sin^2(pi k/(m+1)) cos^{2n-2}(pi k/(m+1))`,
//!
//! evaluated in binary fixed point with a running error bound so that the
//! nearest integer can be certified. Valid for `n >= 2`; `n = 1` is
//! returned directly.

use crate::error::{Error, Result};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fixed-point value `value / 2^bits` with an absolute error bound in the
/// same units.
#[derive(Clone, Debug)]
pub struct TrigValue {
    pub fixed: BigInt,
    pub bits: u64,
    /// Absolute error bound on the real value.
    pub error: f64,
}

impl TrigValue {
    /// Approximate value as `f64` (may be infinite for very large counts).
    pub fn to_f64(&self) -> f64 {
        to_real(&self.fixed, self.bits)
    }

    /// Nearest integer, if the error bound certifies it.
    pub fn certified_integer(&self) -> Result<BigUint> {
        let one = BigInt::one() << self.bits;
        let half = &one >> 1u32;
        let (q, r) = (&self.fixed + &half).div_mod_floor(&one);
        let dist = to_real(&(&r - &half).abs(), self.bits);
        if !(dist + self.error < 0.5) || q.sign() == Sign::Minus {
            return Err(Error::PrecisionInsufficient {
                bits: self.bits,
                error_bound: self.error,
                value: format!("{:.6e}", self.to_f64()),
            });
        }
        Ok(q.to_biguint().unwrap_or_default())
    }
}

/// `floor(pi * 2^bits)` and its error bound in ulps.
pub fn pi_fixed(bits: u64) -> (BigInt, f64) {
    const GUARD: u64 = 32;
    let prec = bits + GUARD;
    let (a, ka) = atan_inv(5, prec);
    let (b, kb) = atan_inv(239, prec);
    let pi = (a * 16u32) - (b * 4u32);
    // each series term is off by at most 2 ulps at the guarded precision
    let err_guarded = 16.0 * 2.0 * ka as f64 + 4.0 * 2.0 * kb as f64;
    let err = err_guarded / 2f64.powi(GUARD as i32) + 1.0;
    (pi >> GUARD, err)
}

/// `atan(1/x) * 2^prec` by its alternating series; returns the number of terms.
fn atan_inv(x: u32, prec: u64) -> (BigInt, usize) {
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut term = (BigInt::one() << prec) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !term.is_zero() {
        let t = &term / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    (sum, k as usize + 1)
}

#[inline]
fn mul_fixed(a: &BigInt, b: &BigInt, bits: u64) -> BigInt {
    (a * b) >> bits
}

#[inline]
fn to_real(a: &BigInt, bits: u64) -> f64 {
    let shift = a.bits().saturating_sub(60);
    let e = shift as f64 - bits as f64;
    (a >> shift).to_f64().unwrap_or(0.0) * e.exp2()
}

/// Fixed-point `(sin^2 theta, cos^2 theta)` for `theta = pi k/(m+1)` with
/// error bounds in ulps.
fn sin2_cos2(k: u64, m: u64, pi: &BigInt, pi_err: f64, bits: u64) -> ((BigInt, f64), (BigInt, f64)) {
    let theta = (pi * BigInt::from(k)) / BigInt::from(m + 1);
    let theta_err = pi_err * k as f64 / (m + 1) as f64 + 1.0;
    let theta_val = to_real(&theta, bits);
    let x2 = mul_fixed(&theta, &theta, bits);
    let x2_val = to_real(&x2, bits);
    let x2_err = 2.0 * theta_val * theta_err + 1.0;

    let one = BigInt::one() << bits;
    let series = |mut term: BigInt, mut term_err: f64, first: u64| -> (BigInt, f64) {
        let mut sum = term.clone();
        let mut err_sum = term_err;
        let mut i = first;
        let mut negative = true;
        loop {
            let term_val = to_real(&term, bits);
            let denom = (i * (i + 1)) as f64;
            term = mul_fixed(&term, &x2, bits) / BigInt::from(i * (i + 1));
            term_err = (term_err * x2_val + term_val * x2_err + 1.0) / denom + 1.0;
            if term.is_zero() {
                // omitted tail: alternating and decreasing
                err_sum += 2.0 * (term_err + 1.0);
                break;
            }
            if negative {
                sum -= &term;
            } else {
                sum += &term;
            }
            err_sum += term_err;
            negative = !negative;
            i += 2;
        }
        (sum, err_sum)
    };
    let (s, s_err) = series(theta.clone(), theta_err, 2);
    let (c, c_err) = series(one, 0.0, 1);
    let s2 = mul_fixed(&s, &s, bits);
    let c2 = mul_fixed(&c, &c, bits);
    ((s2, 2.0 * s_err + 1.0), (c2, 2.0 * c_err + 1.0))
}

/// Evaluate the closed form at `bits` fractional bits with an error bound.
pub fn trig_count_real(n: usize, m: usize, bits: u64) -> Result<TrigValue> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("trig_count needs n >= 1 and m >= 1".into()));
    }
    if bits < 64 {
        return Err(Error::Domain("trig_count needs at least 64 bits".into()));
    }
    if n == 1 {
        return Ok(TrigValue {
            fixed: BigInt::one() << bits,
            bits,
            error: 0.0,
        });
    }
    let mut batch = TrigBatch::new(m, bits);
    batch.advance_to(n);
    Ok(batch.current())
}

/// Certified nearest integer of the closed form.
pub fn trig_count(n: usize, m: usize, bits: u64) -> Result<BigUint> {
    trig_count_real(n, m, bits)?.certified_integer()
}

/// Incremental evaluation of the closed form for fixed `m` and increasing
/// `n >= 2`, sharing the trigonometric values.
pub struct TrigBatch {
    m: usize,
    bits: u64,
    n: usize,
    s2: Vec<(BigInt, f64)>,
    c2: Vec<(BigInt, f64)>,
    /// `cos^{2n-2}` per k with error
    pow: Vec<(BigInt, f64)>,
}

impl TrigBatch {
    pub fn new(m: usize, bits: u64) -> TrigBatch {
        let (pi, pi_err) = pi_fixed(bits);
        let mut s2 = Vec::new();
        let mut c2 = Vec::new();
        for k in 1..=(m / 2) as u64 {
            let (s, c) = sin2_cos2(k, m as u64, &pi, pi_err, bits);
            s2.push(s);
            c2.push(c);
        }
        // n = 2 needs cos^2
        let pow = c2.clone();
        TrigBatch {
            m,
            bits,
            n: 2,
            s2,
            c2,
            pow,
        }
    }

    /// Move to `n` (must not decrease).
    pub fn advance_to(&mut self, n: usize) {
        assert!(n >= self.n, "TrigBatch cannot go backwards");
        while self.n < n {
            for (p, c) in self.pow.iter_mut().zip(&self.c2) {
                let p_val = to_real(&p.0, self.bits);
                let c_val = to_real(&c.0, self.bits);
                p.0 = mul_fixed(&p.0, &c.0, self.bits);
                p.1 = p.1 * c_val + c.1 * p_val + 1.0;
            }
            self.n += 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value at the current `n`.
    pub fn current(&self) -> TrigValue {
        let mut sum = BigInt::zero();
        let mut err = 0.0;
        for (s, p) in self.s2.iter().zip(&self.pow) {
            let s_val = to_real(&s.0, self.bits);
            let p_val = to_real(&p.0, self.bits);
            sum += mul_fixed(&s.0, &p.0, self.bits);
            err += s.1 * p_val + s_val * p.1 + 1.0;
        }
        let n = self.n as u64;
        let scaled = (sum << (2 * n)) / BigInt::from(self.m as u64 + 1);
        let log2_err = err.log2() + (2 * n) as f64 - ((self.m + 1) as f64).log2() - self.bits as f64;
        let error = log2_err.exp2() + (-(self.bits as f64)).exp2();
        TrigValue {
            fixed: scaled,
            bits: self.bits,
            error,
        }
    }
}
