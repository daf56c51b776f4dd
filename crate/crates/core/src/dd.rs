//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`
//! carrying about 106 bits of mantissa.
//!
//! Only the operations needed by the log-domain carrier are provided:
//! add, multiply, divide, `exp`, `ln`, and small-angle `sin`/`cos`.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Double-double number `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    pub const LN10: Dd = Dd {
        hi: std::f64::consts::LN_10,
        lo: -2.170_756_223_382_249e-16,
    };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    #[inline]
    pub const fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact conversion of an unsigned 128-bit integer (rounded to ~106 bits).
    pub fn from_u128(x: u128) -> Dd {
        let hi = x as f64;
        // `hi` may round up past `x`; the remainder fits an i128 either way.
        let hi_int = if hi >= 3.402_823_669_209_385e38 {
            u128::MAX
        } else {
            hi as u128
        };
        let rem = (x as i128).wrapping_sub(hi_int as i128);
        let (h, l) = quick_two_sum(hi, rem as f64);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    /// Multiply by `2^k` exactly.
    #[inline]
    pub fn ldexp(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (h, l) = quick_two_sum(p, e);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let f = f - e + self.lo;
        let q2 = (s + f) / b;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l }
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn sqr(self) -> Dd {
        self * self
    }

    /// Nearest integer to `self.hi` (ties away from zero).
    #[inline]
    pub fn round_hi(self) -> f64 {
        self.hi.round()
    }

    /// `e^self` with about 100 bits of relative accuracy.
    pub fn exp(self) -> Dd {
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = (self - Dd::LN2.mul_f64(k)).ldexp(-10);
        // expm1(r) by Taylor; |r| < 3.4e-4 so 10 terms reach 1e-36.
        let mut term = r;
        let mut s = r;
        for i in 2..=11 {
            term = (term * r).div_f64(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        // expm1(2r) = 2 expm1(r) + expm1(r)^2
        for _ in 0..10 {
            s = s.ldexp(1) + s.sqr();
        }
        let v = s + Dd::ONE;
        // Split the scaling to avoid overflow of 2^k near the range ends.
        let k = k as i32;
        let half = k / 2;
        v.ldexp(half).ldexp(k - half)
    }

    /// Natural logarithm; `ln(0) = -inf`, negative input gives NaN.
    pub fn ln(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::from_f64(f64::NEG_INFINITY);
        }
        if self.hi < 0.0 || self.hi.is_nan() {
            return Dd::from_f64(f64::NAN);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Reduce to [1, 2) so that exp(-x) below stays in the normal range.
        let e = self.hi.log2().floor() as i32;
        let y = self.ldexp(-e / 2).ldexp(-e + e / 2);
        // One Newton step on exp(x) = y doubles the 53 correct bits.
        let x = Dd::from_f64(y.hi.ln());
        Dd::LN2.mul_f64(f64::from(e)) + (x + y * (-x).exp() - Dd::ONE)
    }

    /// `ln(1 + e^self)` for any finite input.
    pub fn ln1p_exp(self) -> Dd {
        if self.hi > 40.0 {
            // ln(1+e^d) = d + ln(1+e^-d)
            return self + (-self).ln1p_exp();
        }
        if self.hi < -80.0 {
            // ln(1+y) = y - y^2/2 + ... with y < 2e-35
            return self.exp();
        }
        (Dd::ONE + self.exp()).ln()
    }

    /// `ln(1 - e^self)` for `self < 0`.
    pub fn ln1m_exp(self) -> Dd {
        if self.hi >= 0.0 {
            return if self.hi == 0.0 && self.lo == 0.0 {
                Dd::from_f64(f64::NEG_INFINITY)
            } else {
                Dd::from_f64(f64::NAN)
            };
        }
        if self.hi < -80.0 {
            return -self.exp();
        }
        if self.hi > -0.693 {
            // 1 - e^d suffers cancellation; use -expm1(d).
            let em1 = self.expm1();
            return (-em1).ln();
        }
        (Dd::ONE - self.exp()).ln()
    }

    /// `e^self - 1` accurate for small arguments.
    pub fn expm1(self) -> Dd {
        if self.hi.abs() > 0.5 {
            return self.exp() - Dd::ONE;
        }
        let r = self.ldexp(-8);
        let mut term = r;
        let mut s = r;
        for i in 2..=16 {
            term = (term * r).div_f64(i as f64);
            s = s + term;
            if term.hi.abs() < 1e-36 * s.hi.abs() {
                break;
            }
        }
        for _ in 0..8 {
            s = s.ldexp(1) + s.sqr();
        }
        s
    }

    /// `(sin x, cos x)` by Taylor series; intended for `|x| <= 1.1`.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let x2 = self.sqr();
        let mut term = self;
        let mut s = self;
        let mut k = 1.0;
        for _ in 0..30 {
            term = (term * x2).div_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            s = if ((k as i64 - 1) / 2) % 2 == 1 {
                s - term
            } else {
                s + term
            };
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        let mut term = Dd::ONE;
        let mut c = Dd::ONE;
        let mut k = 0.0;
        for _ in 0..30 {
            term = (term * x2).div_f64((k + 1.0) * (k + 2.0));
            k += 2.0;
            c = if ((k as i64) / 2) % 2 == 1 { c - term } else { c + term };
            if term.hi.abs() < 1e-36 {
                break;
            }
        }
        (s, c)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (h, l) = quick_two_sum(s1, s2);
        if !h.is_finite() {
            return Dd { hi: h, lo: 0.0 };
        }
        Dd { hi: h, lo: l }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (h, l) = quick_two_sum(p, e);
        if !h.is_finite() {
            return Dd { hi: h, lo: 0.0 };
        }
        Dd { hi: h, lo: l }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (h, l) = quick_two_sum(q1, q2);
        Dd { hi: h, lo: l } + Dd::from_f64(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_roundtrip() {
        // below about -650 the low word of e^x is subnormal
        for &x in &[-650.0, -3.5, -1e-9, 0.3, 1.0, 2.5, 100.0, 700.0] {
            let d = Dd::from_f64(x);
            let back = d.exp().ln();
            assert!(
                (back - d).abs().hi <= 1e-30 * x.abs().max(1.0),
                "{x}: {:e}",
                (back - d).abs().hi
            );
        }
    }

    #[test]
    fn exp_one_matches_e() {
        // e = 2.718281828459045235360287471352662497757...
        let e = Dd::ONE.exp();
        let reference = Dd {
            hi: std::f64::consts::E,
            lo: 1.445_646_891_729_250_2e-16,
        };
        assert!((e - reference).abs().hi < 1e-31);
    }

    #[test]
    fn ln2_constant_consistent() {
        let l = Dd::from_f64(2.0).ln();
        assert!((l - Dd::LN2).abs().hi < 1e-31);
        let l10 = Dd::from_f64(10.0).ln();
        assert!((l10 - Dd::LN10).abs().hi < 1e-30);
    }

    #[test]
    fn sin_cos_pi_over_six() {
        let (s, c) = (Dd::PI.div_f64(6.0)).sin_cos();
        assert!((s - Dd::from_f64(0.5)).abs().hi < 1e-31);
        let three_quarters = c * c;
        assert!((three_quarters - Dd::from_f64(0.75)).abs().hi < 1e-31);
    }

    #[test]
    fn ln1p_exp_and_ln1m_exp() {
        let d = Dd::from_f64(-1e-20);
        // ln(1 + e^{-e}) = ln 2 - e/2 + e^2/8 + ...
        let expected = Dd::LN2 - Dd::from_f64(5e-21);
        assert!((d.ln1p_exp() - expected).abs().hi < 1e-30);
        // ln(1 - e^{-1e-20}) = ln(1e-20) - 5e-21 + ...
        let v = d.ln1m_exp().to_f64();
        assert!((v - (1e-20f64).ln()).abs() < 1e-14);
        let big = Dd::from_f64(50.0).ln1p_exp();
        assert!((big.to_f64() - 50.0).abs() < 1e-20);
    }

    #[test]
    fn from_u128_exact_for_small() {
        let x: u128 = (1u128 << 100) + 12345;
        let d = Dd::from_u128(x);
        assert_eq!(d.hi, (1u128 << 100) as f64);
        assert_eq!(d.lo, 12345.0);
    }
}
