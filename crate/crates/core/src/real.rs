//! Real scalars for the numerical side: `f64` and a software float.
//!
//! [`HpFloat`] wraps `astro_float::BigFloat` with a process-wide working
//! precision and a per-thread constants cache, so arithmetic reads like
//! ordinary method calls.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, RoundingMode};
use num_traits::ToPrimitive;

use crate::{Integer, Rational};

const RM: RoundingMode = RoundingMode::ToEven;

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: usize = 50;

static PRECISION_BITS: AtomicUsize = AtomicUsize::new(bits_for_digits(DEFAULT_DIGITS));

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
    static LOCAL_BITS: Cell<Option<usize>> = const { Cell::new(None) };
}

/// Working precision in bits for `digits` decimal digits, with guard bits.
pub const fn bits_for_digits(digits: usize) -> usize {
    (digits * 10 + 2) / 3 + 64
}

/// Sets the working precision of every subsequently created [`HpFloat`].
pub fn set_precision_digits(digits: usize) {
    PRECISION_BITS.store(bits_for_digits(digits), AtomicOrdering::SeqCst);
}

/// Current working precision in bits: the innermost
/// [`with_precision_digits`] scope on this thread, else the global setting.
pub fn precision_bits() -> usize {
    LOCAL_BITS.with(Cell::get).unwrap_or_else(|| PRECISION_BITS.load(AtomicOrdering::SeqCst))
}

/// Runs `f` with this thread's working precision set to `digits`.
pub fn with_precision_digits<T>(digits: usize, f: impl FnOnce() -> T) -> T {
    struct Restore(Option<usize>);
    impl Drop for Restore {
        fn drop(&mut self) {
            LOCAL_BITS.with(|c| c.set(self.0));
        }
    }
    let _restore = Restore(LOCAL_BITS.with(|c| c.replace(Some(bits_for_digits(digits)))));
    f()
}

/// The operations the numerical routines need.
pub trait Real: Clone + fmt::Debug + PartialOrd + Send + Sync {
    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn abs(&self) -> Self;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: u64) -> Self;
    fn pi() -> Self;
    fn to_f64(&self) -> f64;
    /// Decimal rendering with about `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;
}

impl Real for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: u64) -> Self {
        f64::powf(*self, n as f64)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_decimal(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1).min(16), self)
    }
}

/// Software float at the process-wide working precision.
#[derive(Clone, Debug)]
pub struct HpFloat(BigFloat);

impl HpFloat {
    fn p() -> usize {
        precision_bits()
    }

    fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
        CONSTS.with(|c| f(&mut c.borrow_mut()))
    }

    pub fn from_integer(v: &Integer) -> Self {
        match v.to_i128() {
            Some(x) => Self(BigFloat::from_i128(x, Self::p())),
            None => Self::parse(&v.to_string()),
        }
    }

    pub fn parse(s: &str) -> Self {
        Self(Self::with_consts(|cc| BigFloat::parse(s, astro_float::Radix::Dec, Self::p(), RM, cc)))
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn inner(&self) -> &BigFloat {
        &self.0
    }
}

impl PartialEq for HpFloat {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

impl PartialOrd for HpFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for HpFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Real for HpFloat {
    fn from_i64(v: i64) -> Self {
        Self(BigFloat::from_i64(v, Self::p()))
    }
    fn from_rational(q: &Rational) -> Self {
        Self::from_integer(q.numer()).div(&Self::from_integer(q.denom()))
    }
    fn add(&self, o: &Self) -> Self {
        Self(self.0.add(&o.0, Self::p(), RM))
    }
    fn sub(&self, o: &Self) -> Self {
        Self(self.0.sub(&o.0, Self::p(), RM))
    }
    fn mul(&self, o: &Self) -> Self {
        Self(self.0.mul(&o.0, Self::p(), RM))
    }
    fn div(&self, o: &Self) -> Self {
        Self(self.0.div(&o.0, Self::p(), RM))
    }
    fn neg(&self) -> Self {
        Self(self.0.neg())
    }
    fn abs(&self) -> Self {
        Self(self.0.abs())
    }
    fn exp(&self) -> Self {
        Self(Self::with_consts(|cc| self.0.exp(Self::p(), RM, cc)))
    }
    fn sin(&self) -> Self {
        Self(Self::with_consts(|cc| self.0.sin(Self::p(), RM, cc)))
    }
    fn cos(&self) -> Self {
        Self(Self::with_consts(|cc| self.0.cos(Self::p(), RM, cc)))
    }
    fn sqrt(&self) -> Self {
        Self(self.0.sqrt(Self::p(), RM))
    }
    fn powi(&self, n: u64) -> Self {
        Self(self.0.powi(n as usize, Self::p(), RM))
    }
    fn pi() -> Self {
        Self(Self::with_consts(|cc| cc.pi(Self::p(), RM)))
    }
    fn to_f64(&self) -> f64 {
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }
    fn to_decimal(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        let s = Self::with_consts(|cc| self.0.format(astro_float::Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        trim_mantissa(&s, digits)
    }
}

/// Shortens `d.ddddde±x` to `digits` significant digits (truncating).
fn trim_mantissa(s: &str, digits: usize) -> String {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let (sign, body) = mant.strip_prefix('-').map_or(("", mant), |b| ("-", b));
    let mut kept = String::new();
    let mut count = 0;
    for ch in body.chars() {
        if ch.is_ascii_digit() {
            if count >= digits {
                break;
            }
            count += 1;
        }
        kept.push(ch);
    }
    format!("{sign}{kept}{exp}")
}

/// Complex number over a [`Real`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cx<R> {
    pub re: R,
    pub im: R,
}

impl<R: Real> Cx<R> {
    pub fn new(re: R, im: R) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(R::zero(), R::zero())
    }

    pub fn real(re: R) -> Self {
        Self::new(re, R::zero())
    }

    /// `exp(2 pi i t / n)`.
    pub fn root_of_unity(t: u64, n: u64) -> Self {
        let th = R::pi().mul(&R::from_i64(2 * (t % n) as i64)).div(&R::from_i64(n as i64));
        Self::new(th.cos(), th.sin())
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, s: &R) -> Self {
        Self::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn norm(&self) -> R {
        self.re.mul(&self.re).add(&self.im.mul(&self.im)).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hp_basic_arithmetic() {
        let a = HpFloat::from_i64(1).div(&HpFloat::from_i64(3));
        let b = a.mul(&HpFloat::from_i64(3));
        assert!((b.to_f64() - 1.0).abs() < 1e-30);
        let e = HpFloat::one().exp();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!(e.to_decimal(40).starts_with("2.71828182845904523536028747135266249775"));
        let pi = HpFloat::pi();
        assert!(pi.sin().abs().to_f64() < 1e-50);
        assert!(pi.to_decimal(30).starts_with("3.14159265358979323846264338327"));
    }

    #[test]
    fn rational_and_big_integers() {
        let q = Rational::new(Integer::from(-7), Integer::from(4));
        assert_eq!(HpFloat::from_rational(&q).to_f64(), -1.75);
        let big: Integer = Integer::from(10).pow(40u32) + 1;
        let x = HpFloat::from_integer(&big);
        assert!((x.to_f64() - 1e40).abs() / 1e40 < 1e-15);
    }

    #[test]
    fn roots_of_unity() {
        let z = Cx::<HpFloat>::root_of_unity(1, 4);
        assert!(z.re.abs().to_f64() < 1e-40 && (z.im.to_f64() - 1.0).abs() < 1e-40);
        let w = Cx::<f64>::root_of_unity(1, 3).mul(&Cx::root_of_unity(2, 3));
        assert!((w.re - 1.0).abs() < 1e-12 && w.im.abs() < 1e-12);
    }

    #[test]
    fn scoped_precision() {
        let outer = precision_bits();
        let third = with_precision_digits(120, || {
            assert_eq!(precision_bits(), bits_for_digits(120));
            HpFloat::one().div(&HpFloat::from_i64(3))
        });
        assert_eq!(precision_bits(), outer);
        assert!(third.to_decimal(110).starts_with(&format!("3.{}", "3".repeat(105))));
    }

    #[test]
    fn trimming() {
        assert_eq!(trim_mantissa("1.23456789e+5", 3), "1.23e+5");
        assert_eq!(trim_mantissa("-9.87e-2", 10), "-9.87e-2");
    }
}
