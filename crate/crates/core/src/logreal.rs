//! Signed log-domain scalar.
//!
//! A [`LogReal`] stores `sign * exp(ln_mag)` with `ln_mag` in double-double
//! precision. Absolute error in `ln_mag` equals relative error in the value,
//! so a product or quotient costs about `|ln_mag| * 2^-104` relative error
//! and a same-sign sum about `2^-104`. For magnitudes up to `e^(10^6)` this
//! stays below `10^-18` per operation. Sums of opposite signs lose relative
//! accuracy in proportion to the cancellation, as for any floating format.

use crate::dd::Dd;
use num_bigint::BigUint;
use num_traits::Zero;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `sign * exp(ln_mag)`; zero is represented by `sign == 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogReal {
    sign: i8,
    ln_mag: Dd,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        ln_mag: Dd {
            hi: f64::NEG_INFINITY,
            lo: 0.0,
        },
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        ln_mag: Dd { hi: 0.0, lo: 0.0 },
    };

    /// Positive value `exp(ln)`.
    pub fn from_ln(ln: f64) -> LogReal {
        LogReal::from_ln_dd(Dd::from_f64(ln))
    }

    /// Positive value `exp(ln)` from a double-double logarithm.
    pub fn from_ln_dd(ln: Dd) -> LogReal {
        if ln.hi == f64::NEG_INFINITY {
            LogReal::ZERO
        } else {
            LogReal { sign: 1, ln_mag: ln }
        }
    }

    pub fn from_f64(x: f64) -> LogReal {
        if x == 0.0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_mag: Dd::from_f64(x.abs()).ln(),
            }
        }
    }

    pub fn from_u64(x: u64) -> LogReal {
        if x == 0 {
            LogReal::ZERO
        } else {
            LogReal {
                sign: 1,
                ln_mag: Dd::from_u128(x as u128).ln(),
            }
        }
    }

    /// Conversion of an arbitrary-precision count, rounded to ~106 bits.
    pub fn from_biguint(x: &BigUint) -> LogReal {
        if x.is_zero() {
            return LogReal::ZERO;
        }
        let bits = x.bits();
        let shift = bits.saturating_sub(112);
        let top: BigUint = x >> shift;
        let digits = top.to_u64_digits();
        let mut v: u128 = 0;
        for (i, d) in digits.iter().enumerate() {
            v |= (*d as u128) << (64 * i);
        }
        let ln = Dd::from_u128(v).ln() + Dd::LN2.mul_f64(shift as f64);
        LogReal { sign: 1, ln_mag: ln }
    }

    #[inline]
    pub fn sign(&self) -> i8 {
        self.sign
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of the magnitude (`-inf` for zero).
    #[inline]
    pub fn ln(&self) -> f64 {
        self.ln_mag.to_f64()
    }

    #[inline]
    pub fn ln_dd(&self) -> Dd {
        self.ln_mag
    }

    /// Base-10 log of the magnitude.
    pub fn log10(&self) -> f64 {
        if self.sign == 0 {
            return f64::NEG_INFINITY;
        }
        (self.ln_mag / Dd::LN10).to_f64()
    }

    pub fn log10_dd(&self) -> Dd {
        self.ln_mag / Dd::LN10
    }

    /// Nearest `f64` (may overflow to infinity or underflow to zero).
    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        self.sign as f64 * self.ln_mag.exp().to_f64()
    }

    pub fn abs(&self) -> LogReal {
        LogReal {
            sign: self.sign.abs(),
            ln_mag: self.ln_mag,
        }
    }

    /// Multiply by `exp(a)`.
    pub fn mul_exp(&self, a: f64) -> LogReal {
        self.mul_exp_dd(Dd::from_f64(a))
    }

    pub fn mul_exp_dd(&self, a: Dd) -> LogReal {
        if self.sign == 0 {
            return *self;
        }
        LogReal {
            sign: self.sign,
            ln_mag: self.ln_mag + a,
        }
    }

    pub fn powf(&self, p: f64) -> LogReal {
        assert!(self.sign >= 0, "powf of a negative LogReal");
        if self.sign == 0 {
            return if p == 0.0 { LogReal::ONE } else { LogReal::ZERO };
        }
        LogReal {
            sign: 1,
            ln_mag: self.ln_mag.mul_f64(p),
        }
    }

    /// Relative difference `|self/other - 1|` computed in the log domain.
    pub fn rel_diff(&self, other: &LogReal) -> f64 {
        if self.sign != other.sign {
            return if self.sign == 0 && other.sign == 0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        if self.sign == 0 {
            return 0.0;
        }
        (self.ln_mag - other.ln_mag).expm1().to_f64().abs()
    }

    /// Sum of many terms with one shared shift: `M + ln(sum exp(l_i - M))`.
    /// Terms are added in the given order, so results are reproducible.
    pub fn sum<'a, I: IntoIterator<Item = &'a LogReal>>(terms: I) -> LogReal {
        let items: Vec<&LogReal> = terms.into_iter().filter(|t| t.sign != 0).collect();
        if items.is_empty() {
            return LogReal::ZERO;
        }
        let m = items
            .iter()
            .map(|t| t.ln_mag)
            .fold(Dd::from_f64(f64::NEG_INFINITY), |a, b| if b > a { b } else { a });
        let mut acc = Dd::ZERO;
        for t in items {
            let w = (t.ln_mag - m).exp();
            acc = if t.sign > 0 { acc + w } else { acc - w };
        }
        if acc.hi == 0.0 {
            return LogReal::ZERO;
        }
        LogReal {
            sign: if acc.hi > 0.0 { 1 } else { -1 },
            ln_mag: m + acc.abs().ln(),
        }
    }

    /// Decimal rendering with `digits` significant digits, exact for values
    /// outside the `f64` range (`d.ddd...e<exp>`).
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.sign == 0 {
            return "0".to_string();
        }
        let sign = if self.sign < 0 { "-" } else { "" };
        let l10 = self.log10_dd();
        if l10.hi.abs() < 15.0 {
            let v = self.to_f64().abs();
            let s = format!("{v}");
            if s.len() <= digits + 2 {
                return format!("{sign}{s}");
            }
            return format!("{sign}{}", trim_float(&format!("{:.*e}", digits - 1, v)));
        }
        let e = l10.hi.floor();
        let frac = l10 - Dd::from_f64(e);
        let mant = (frac * Dd::LN10).exp().to_f64();
        let (mant, e) = if mant >= 10.0 {
            (mant / 10.0, e + 1.0)
        } else {
            (mant, e)
        };
        format!("{sign}{}e{}", trim_float(&format!("{:.*}", digits - 1, mant)), e as i64)
    }
}

fn trim_float(s: &str) -> String {
    if let Some(epos) = s.find('e') {
        let (m, e) = s.split_at(epos);
        format!("{}{}", trim_float(m), e)
    } else if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, b: LogReal) -> LogReal {
        if self.sign == 0 {
            return b;
        }
        if b.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_mag >= b.ln_mag { (self, b) } else { (b, self) };
        let d = small.ln_mag - big.ln_mag;
        if big.sign == small.sign {
            LogReal {
                sign: big.sign,
                ln_mag: big.ln_mag + d.ln1p_exp(),
            }
        } else {
            if d.hi == 0.0 && d.lo == 0.0 {
                return LogReal::ZERO;
            }
            LogReal {
                sign: big.sign,
                ln_mag: big.ln_mag + d.ln1m_exp(),
            }
        }
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            ln_mag: self.ln_mag,
        }
    }
}

impl Sub for LogReal {
    type Output = LogReal;
    fn sub(self, b: LogReal) -> LogReal {
        self + (-b)
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, b: LogReal) -> LogReal {
        if self.sign == 0 || b.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            sign: self.sign * b.sign,
            ln_mag: self.ln_mag + b.ln_mag,
        }
    }
}

impl Div for LogReal {
    type Output = LogReal;
    fn div(self, b: LogReal) -> LogReal {
        assert!(b.sign != 0, "LogReal division by zero");
        if self.sign == 0 {
            return LogReal::ZERO;
        }
        LogReal {
            sign: self.sign * b.sign,
            ln_mag: self.ln_mag - b.ln_mag,
        }
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &LogReal) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_mag.partial_cmp(&other.ln_mag),
                _ => other.ln_mag.partial_cmp(&self.ln_mag),
            },
            o => Some(o),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(17))
    }
}
