//! Scalar backends.
//!
//! Two realizations of the ground field are supported: exact arbitrary-precision
//! rationals ([`Rational`]) and binary floating point with a fixed working
//! precision ([`Approx`]). Generic code is written against [`Field`], which also
//! carries the row-reduction kernel so each backend can use the elimination
//! strategy suited to it.

use std::cmp::Ordering;
use std::fmt;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::{BitTest, UnsignedAbs};
use dashu_int::{IBig, UBig};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, Echelon, Matrix};

pub use dashu_ratio::RBig as Rational;

type Float = FBig<HalfEven, 2>;

/// Which scalar realization a computation runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Backend {
    Exact,
    Approx { precision_bits: usize },
}

impl Backend {
    pub fn precision_bits(&self) -> Option<usize> {
        match self {
            Backend::Exact => None,
            Backend::Approx { precision_bits } => Some(*precision_bits),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Approx { .. } => "approx",
        }
    }
}

/// A field element usable by the dense linear algebra and polynomial evaluation.
///
/// Values never carry hidden global state: anything needed to build new
/// elements (the working precision for [`Approx`]) lives in [`Field::Ctx`].
pub trait Field: Clone + fmt::Debug + fmt::Display + Send + Sync + 'static {
    type Ctx: Clone + fmt::Debug + Send + Sync;
    /// Whether equality tests are exact.
    const EXACT: bool;

    /// Zero tolerance `τ` as a double (0 for the exact backend).
    fn tolerance_f64(_ctx: &Self::Ctx) -> f64 {
        0.0
    }

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_rational(ctx: &Self::Ctx, q: &Rational) -> Self;

    fn from_i64(ctx: &Self::Ctx, v: i64) -> Self {
        Self::from_rational(ctx, &Rational::from(v))
    }

    /// Exact test for the exact backend, `|x| < τ` for the approximate one.
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Division by a value for which [`Field::is_zero`] is true is a logic error.
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Compare absolute values (used for pivot selection).
    fn cmp_abs(&self, other: &Self) -> Ordering;
    /// Absolute value as a double, for reporting.
    fn abs_f64(&self) -> f64;

    /// Reduced row echelon form of `m`.
    fn reduce(m: &Matrix<Self>) -> Echelon<Self> {
        linalg::pivoted_rref(m)
    }

    fn rank(m: &Matrix<Self>) -> usize {
        Self::reduce(m).rank()
    }
}

impl Field for Rational {
    type Ctx = ();
    const EXACT: bool = true;

    fn ctx(&self) {}
    fn zero(_: &()) -> Self {
        Rational::ZERO
    }
    fn one(_: &()) -> Self {
        Rational::ONE
    }
    fn from_rational(_: &(), q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        *self == Rational::ZERO
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        let a = if *self < Rational::ZERO {
            -self.clone()
        } else {
            self.clone()
        };
        let b = if *other < Rational::ZERO {
            -other.clone()
        } else {
            other.clone()
        };
        a.cmp(&b)
    }
    fn abs_f64(&self) -> f64 {
        self.to_f64().value().abs()
    }

    fn reduce(m: &Matrix<Self>) -> Echelon<Self> {
        linalg::exact_rref(m)
    }

    fn rank(m: &Matrix<Self>) -> usize {
        linalg::exact_rank(m)
    }
}

/// Working precision of the approximate backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision {
    pub bits: usize,
}

impl Precision {
    pub fn new(bits: usize) -> Self {
        assert!(bits >= 16, "precision below 16 bits is not supported");
        Precision { bits }
    }

    /// Zero tolerance `τ = 2^(-p/2)`.
    pub fn tolerance(&self) -> Approx {
        Approx::pow2(*self, -((self.bits / 2) as isize))
    }
}

/// Binary floating point value with an explicit working precision.
#[derive(Clone, Debug)]
pub struct Approx {
    value: Float,
    prec: Precision,
}

impl Approx {
    fn wrap(value: Float, prec: Precision) -> Self {
        Approx {
            value: value.with_precision(prec.bits).value(),
            prec,
        }
    }

    /// `2^exp` at the given precision.
    pub fn pow2(prec: Precision, exp: isize) -> Self {
        Approx::wrap(Float::from_parts(IBig::ONE, exp), prec)
    }

    pub fn from_f64(prec: Precision, v: f64) -> Self {
        let f = Float::try_from(v).expect("finite value");
        Approx::wrap(f, prec)
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().value()
    }

    pub fn abs(&self) -> Approx {
        if self.value < Float::ZERO {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn is_negative(&self) -> bool {
        self.value < Float::ZERO
    }

    /// Strict comparison of absolute value against a bound.
    pub fn abs_lt(&self, bound: &Approx) -> bool {
        self.abs().value < bound.value
    }

    pub fn sqrt(&self) -> Approx {
        use dashu_float::ops::SquareRoot;
        Approx::wrap(self.abs().value.sqrt(), self.prec)
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`, or `None` for zero.
    pub fn log2_magnitude(&self) -> Option<isize> {
        if self.value == Float::ZERO {
            return None;
        }
        let repr = self.value.repr();
        let bits = repr.significand().unsigned_abs().bit_len() as isize;
        Some(repr.exponent() + bits)
    }

    /// Nearest dyadic rational, exact.
    pub fn to_rational(&self) -> Rational {
        let repr = self.value.repr();
        let sig = repr.significand().clone();
        let exp = repr.exponent();
        if exp >= 0 {
            Rational::from(sig << exp as usize)
        } else {
            Rational::from_parts(sig, UBig::ONE << (-exp) as usize)
        }
    }
}

impl fmt::Display for Approx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Scientific notation with enough decimal digits for the precision.
        let digits = (self.prec.bits as f64 * std::f64::consts::LOG10_2).ceil() as usize;
        write!(f, "{}", format_decimal(&self.to_rational(), digits))
    }
}

/// Render a rational in decimal scientific notation with `digits` significant digits.
pub fn format_decimal(q: &Rational, digits: usize) -> String {
    if *q == Rational::ZERO {
        return "0".to_string();
    }
    let negative = *q < Rational::ZERO;
    let num = q.numerator().unsigned_abs();
    let den = q.denominator().clone();
    // Find k with 10^k <= |q| < 10^(k+1).
    let ten = UBig::from(10u8);
    let mut k: isize = num.to_string().len() as isize - den.to_string().len() as isize;
    let scaled = |k: isize| -> (UBig, UBig) {
        if k >= 0 {
            (num.clone(), den.clone() * ten.pow(k as usize))
        } else {
            (num.clone() * ten.pow((-k) as usize), den.clone())
        }
    };
    loop {
        let (n, d) = scaled(k);
        if n < d {
            k -= 1;
        } else if n >= d.clone() * &ten {
            k += 1;
        } else {
            break;
        }
    }
    let (n, d) = scaled(k - (digits as isize - 1));
    let (mut mant, rem) = (n.clone() / &d, n % &d);
    if rem * UBig::from(2u8) >= d {
        mant += UBig::ONE;
    }
    let mut s = mant.to_string();
    if s.len() > digits {
        s.truncate(digits);
        k += 1;
    }
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{k}")
    } else {
        format!("{sign}{head}.{tail}e{k}")
    }
}

impl Field for Approx {
    type Ctx = Precision;
    const EXACT: bool = false;

    fn tolerance_f64(ctx: &Precision) -> f64 {
        2f64.powi(-((ctx.bits / 2) as i32))
    }

    fn ctx(&self) -> Precision {
        self.prec
    }
    fn zero(ctx: &Precision) -> Self {
        Approx::wrap(Float::ZERO, *ctx)
    }
    fn one(ctx: &Precision) -> Self {
        Approx::wrap(Float::ONE, *ctx)
    }
    fn from_rational(ctx: &Precision, q: &Rational) -> Self {
        let n = Float::from(q.numerator().clone()).with_precision(ctx.bits + 8).value();
        let d = Float::from(IBig::from(q.denominator().clone()))
            .with_precision(ctx.bits + 8)
            .value();
        Approx::wrap(n / d, *ctx)
    }
    fn is_zero(&self) -> bool {
        self.abs_lt(&self.prec.tolerance())
    }
    fn add(&self, other: &Self) -> Self {
        Approx::wrap(&self.value + &other.value, self.prec)
    }
    fn sub(&self, other: &Self) -> Self {
        Approx::wrap(&self.value - &other.value, self.prec)
    }
    fn mul(&self, other: &Self) -> Self {
        Approx::wrap(&self.value * &other.value, self.prec)
    }
    fn div(&self, other: &Self) -> Self {
        Approx::wrap(&self.value / &other.value, self.prec)
    }
    fn neg(&self) -> Self {
        Approx::wrap(-self.value.clone(), self.prec)
    }
    fn cmp_abs(&self, other: &Self) -> Ordering {
        self.abs()
            .value
            .partial_cmp(&other.abs().value)
            .unwrap_or(Ordering::Equal)
    }
    fn abs_f64(&self) -> f64 {
        self.to_f64().abs()
    }
}

/// Exact rational from a pair of machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
    Rational::from_parts(IBig::from(num), UBig::from(den as u64))
}

/// Integer vector with the content removed and the first nonzero entry positive.
///
/// Returns `None` for the zero vector.
pub fn primitive(v: &[Rational]) -> Option<Vec<IBig>> {
    let first = v.iter().position(|x| *x != Rational::ZERO)?;
    let mut lcm = UBig::ONE;
    for x in v {
        let d = x.denominator();
        let g = dashu_int::ops::Gcd::gcd(&lcm, d);
        lcm = &lcm / g * d;
    }
    let ints: Vec<IBig> = v
        .iter()
        .map(|x| x.numerator() * IBig::from(&lcm / x.denominator()))
        .collect();
    let mut g = UBig::ZERO;
    for x in ints.iter().filter(|x| **x != IBig::ZERO) {
        g = dashu_int::ops::Gcd::gcd(&g, &x.unsigned_abs());
    }
    let g = IBig::from(g);
    let sign = if ints[first] < IBig::ZERO {
        -IBig::ONE
    } else {
        IBig::ONE
    };
    Some(ints.into_iter().map(|x| x / &g * &sign).collect())
}

/// [`primitive`] as rationals, or the zero vector unchanged.
pub fn primitive_rational(v: &[Rational]) -> Vec<Rational> {
    match primitive(v) {
        Some(p) => p.into_iter().map(Rational::from).collect(),
        None => v.to_vec(),
    }
}

/// Serialize a rational as `"p/q"` (or `"p"` when integral).
pub fn rational_string(q: &Rational) -> String {
    q.to_string()
}

/// Convert an exact vector to another backend.
pub fn convert_vec<T: Field>(ctx: &T::Ctx, v: &[Rational]) -> Vec<T> {
    v.iter().map(|x| T::from_rational(ctx, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_zero_is_exact() {
        let a = rat(1, 3);
        let b = rat(2, 6);
        assert!(Field::sub(&a, &b).is_zero());
        assert!(!rat(1, 1_000_000_000).is_zero());
    }

    #[test]
    fn approx_zero_uses_tolerance() {
        let p = Precision::new(100);
        let tiny = Approx::pow2(p, -60);
        assert!(tiny.is_zero());
        let not_tiny = Approx::pow2(p, -40);
        assert!(!not_tiny.is_zero());
    }

    #[test]
    fn approx_from_rational_is_close() {
        let p = Precision::new(100);
        let third = Approx::from_rational(&p, &rat(1, 3));
        let three = Approx::from_i64(&p, 3);
        let one = Approx::one(&p);
        let diff = third.mul(&three).sub(&one);
        assert!(diff.abs_lt(&Approx::pow2(p, -95)));
    }

    #[test]
    fn primitive_normalizes_sign_and_content() {
        let v = vec![rat(0, 1), rat(-2, 3), rat(4, 3)];
        let p = primitive(&v).unwrap();
        assert_eq!(p, vec![IBig::ZERO, IBig::ONE, IBig::from(-2)]);
        assert!(primitive(&[Rational::ZERO, Rational::ZERO]).is_none());
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(&rat(1, 4), 5), "2.5e-1");
        assert_eq!(format_decimal(&rat(-1500, 1), 3), "-1.5e3");
        assert_eq!(format_decimal(&rat(1, 3), 4), "3.333e-1");
        assert_eq!(format_decimal(&rat(999_999, 1), 3), "1e6");
    }

    #[test]
    fn dyadic_round_trip() {
        let p = Precision::new(64);
        let x = Approx::from_rational(&p, &rat(3, 8));
        assert_eq!(x.to_rational(), rat(3, 8));
        assert_eq!(x.log2_magnitude(), Some(-1));
    }
}
