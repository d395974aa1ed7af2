//! Outward-rounded interval arithmetic over MPFR floats.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

use crate::{Error, Result};

pub const DEFAULT_DIGITS: u32 = 50;
pub const PRECISION_ENV: &str = "ELLCOUNT_PRECISION_DIGITS";

/// Working precision, in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { digits: DEFAULT_DIGITS }
    }
}

impl Precision {
    pub fn digits(digits: u32) -> Result<Self> {
        if !(16..=2000).contains(&digits) {
            return Err(Error::Precision(format!("{digits} digits outside 16..=2000")));
        }
        Ok(Precision { digits })
    }

    /// Reads the precision environment variable, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(v) => {
                let d = v
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Precision(format!("{PRECISION_ENV}={v:?} is not a digit count")))?;
                Precision::digits(d)
            }
            Err(_) => Ok(Precision::default()),
        }
    }

    pub fn decimal_digits(self) -> u32 {
        self.digits
    }

    pub fn bits(self) -> u32 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16
    }
}

/// A closed interval `[lo, hi]` known to contain the exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    pub fn new(lo: Float, hi: Float) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn int(n: impl Into<Integer>, p: Precision) -> Self {
        let n: Integer = n.into();
        let lo = Float::with_val_round(p.bits(), &n, Round::Down).0;
        let hi = Float::with_val_round(p.bits(), &n, Round::Up).0;
        Interval { lo, hi }
    }

    pub fn rational(q: &Rational, p: Precision) -> Self {
        let lo = Float::with_val_round(p.bits(), q, Round::Down).0;
        let hi = Float::with_val_round(p.bits(), q, Round::Up).0;
        Interval { lo, hi }
    }

    /// The binary value of `x` exactly.
    pub fn f64(x: f64, p: Precision) -> Self {
        let v = Float::with_val(p.bits(), x);
        Interval { lo: v.clone(), hi: v }
    }

    /// An enclosure of `x ± err`.
    pub fn f64_with_error(x: f64, err: f64, p: Precision) -> Self {
        let b = p.bits();
        let lo = Float::with_val_round(b, Float::with_val(b, x) - err.abs(), Round::Down).0;
        let hi = Float::with_val_round(b, Float::with_val(b, x) + err.abs(), Round::Up).0;
        Interval { lo, hi }
    }

    fn constant(c: Constant, p: Precision) -> Self {
        let lo = Float::with_val_round(p.bits(), c, Round::Down).0;
        let hi = Float::with_val_round(p.bits(), c, Round::Up).0;
        Interval { lo, hi }
    }

    pub fn ln2(p: Precision) -> Self {
        Self::constant(Constant::Log2, p)
    }

    pub fn pi(p: Precision) -> Self {
        Self::constant(Constant::Pi, p)
    }

    pub fn e(p: Precision) -> Self {
        Self::int(1, p).exp()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn mid_f64(&self) -> f64 {
        let b = self.prec();
        let mut m = Float::with_val(b, &self.lo + &self.hi);
        m /= 2u32;
        m.to_f64()
    }

    pub fn width(&self) -> f64 {
        let b = self.prec();
        Float::with_val_round(b, &self.hi - &self.lo, Round::Up).0.to_f64_round(Round::Up)
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `Some(Less)` if every point is below every point of `other`, etc.
    pub fn certain_cmp(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Certainly `self <= other`.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    fn monotone_inc(&self, f: impl Fn(&Float, Round) -> Float) -> Self {
        Interval {
            lo: f(&self.lo, Round::Down),
            hi: f(&self.hi, Round::Up),
        }
    }

    pub fn ln(&self) -> Self {
        debug_assert!(self.lo > 0, "log of a non-positive interval");
        let b = self.prec();
        self.monotone_inc(|x, r| Float::with_val_round(b, x.ln_ref(), r).0)
    }

    pub fn exp(&self) -> Self {
        let b = self.prec();
        self.monotone_inc(|x, r| Float::with_val_round(b, x.exp_ref(), r).0)
    }

    pub fn sqrt(&self) -> Self {
        let b = self.prec();
        let lo0 = if self.lo < 0 { Float::new(b) } else { self.lo.clone() };
        Interval {
            lo: Float::with_val_round(b, lo0.sqrt_ref(), Round::Down).0,
            hi: Float::with_val_round(b, self.hi.sqrt_ref(), Round::Up).0,
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Interval::int(1, Precision { digits: DEFAULT_DIGITS }).with_prec(self.prec());
        }
        let mut acc = self.clone();
        for _ in 1..n.unsigned_abs() {
            acc = &acc * self;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// `self^e` for a positive base.
    pub fn powf(&self, e: &Interval) -> Self {
        (&self.ln() * e).exp()
    }

    pub fn recip(&self) -> Self {
        debug_assert!(self.lo > 0 || self.hi < 0, "reciprocal of an interval containing zero");
        let b = self.prec();
        Interval {
            lo: Float::with_val_round(b, self.hi.recip_ref(), Round::Down).0,
            hi: Float::with_val_round(b, self.lo.recip_ref(), Round::Up).0,
        }
    }

    pub fn max(&self, other: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().max(&other.lo),
            hi: self.hi.clone().max(&other.hi),
        }
    }

    pub fn min(&self, other: &Interval) -> Self {
        Interval {
            lo: self.lo.clone().min(&other.lo),
            hi: self.hi.clone().min(&other.hi),
        }
    }

    pub fn ceil_hi(&self) -> Integer {
        self.hi.clone().ceil().to_integer().expect("finite")
    }

    pub fn floor_lo(&self) -> Integer {
        self.lo.clone().floor().to_integer().expect("finite")
    }

    fn with_prec(mut self, b: u32) -> Self {
        self.lo.set_prec_round(b, Round::Down);
        self.hi.set_prec_round(b, Round::Up);
        self
    }

    /// Shortest scientific rendering of the bound used for reporting.
    pub fn fmt_side(&self, upper: bool) -> String {
        let v = if upper { &self.hi } else { &self.lo };
        let r = if upper { Round::Up } else { Round::Down };
        v.to_string_radix_round(10, Some(20), r)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.fmt_side(false), self.fmt_side(true))
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, o: &Interval) -> Interval {
        let b = self.prec().max(o.prec());
        Interval {
            lo: Float::with_val_round(b, &self.lo + &o.lo, Round::Down).0,
            hi: Float::with_val_round(b, &self.hi + &o.hi, Round::Up).0,
        }
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, o: &Interval) -> Interval {
        let b = self.prec().max(o.prec());
        Interval {
            lo: Float::with_val_round(b, &self.lo - &o.hi, Round::Down).0,
            hi: Float::with_val_round(b, &self.hi - &o.lo, Round::Up).0,
        }
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, o: &Interval) -> Interval {
        let b = self.prec().max(o.prec());
        let corners = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let lo = corners
            .iter()
            .map(|(x, y)| Float::with_val_round(b, *x * *y, Round::Down).0)
            .reduce(|a, c| a.min(&c))
            .unwrap();
        let hi = corners
            .iter()
            .map(|(x, y)| Float::with_val_round(b, *x * *y, Round::Up).0)
            .reduce(|a, c| a.max(&c))
            .unwrap();
        Interval { lo, hi }
    }
}

impl Div for &Interval {
    type Output = Interval;
    fn div(self, o: &Interval) -> Interval {
        self * &o.recip()
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Interval {
            type Output = Interval;
            fn $m(self, o: Interval) -> Interval {
                (&self).$m(&o)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, o: &Interval) -> Interval {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_for_fifty_digits() {
        assert!(Precision::default().bits() >= 166);
        assert!(Precision::digits(5).is_err());
    }

    #[test]
    fn enclosures_contain_reference_values() {
        let p = Precision::default();
        let l2 = Interval::ln2(p);
        assert!(l2.contains_f64(std::f64::consts::LN_2) || l2.width() < 1e-40);
        assert!(l2.width() < 1e-45);
        let x = &Interval::int(2, p).sqrt() * &Interval::int(2, p).sqrt();
        assert!(x.lo <= 2 && x.hi >= 2);
        let third = &Interval::int(1, p) / &Interval::int(3, p);
        assert!(third.lo < third.hi);
        let e = Interval::e(p);
        assert!(e.ln().lo <= 1 && e.ln().hi >= 1);
    }

    #[test]
    fn subtraction_is_outward() {
        let p = Precision::default();
        let a = Interval::int(1, p) / Interval::int(3, p);
        let z = &a - &a;
        assert!(z.lo <= 0 && z.hi >= 0);
        assert!((-&a).hi < 0);
    }

    #[test]
    fn powers() {
        let p = Precision::default();
        let two = Interval::int(2, p);
        let v = two.powi(10);
        assert!(v.lo <= 1024 && v.hi >= 1024);
        let r = two.powf(&Interval::rational(&Rational::from((15, 2)), p));
        assert!(r.contains_f64(2f64.powf(7.5)) || (r.mid_f64() - 2f64.powf(7.5)).abs() < 1e-10);
    }
}
