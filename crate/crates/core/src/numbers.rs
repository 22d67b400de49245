//! Exact scalars, points and boxes.
//!
//! Everything certified in this crate is computed with [`Rat`], an
//! arbitrary-precision rational kept in lowest terms. Floating point only
//! appears when a value is handed to a renderer.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (`gcd(|num|, den) = 1`, `den >= 1`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn from_big(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn integer(n: i64) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Rat> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(self.0.recip()))
    }

    pub fn pow(&self, e: u32) -> Rat {
        Rat(num_traits::pow(self.0.clone(), e as usize))
    }

    pub fn square(&self) -> Rat {
        self * self
    }

    pub fn min(self, other: Rat) -> Rat {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Rat) -> Rat {
        std::cmp::max(self, other)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// Nearest integer, ties rounded up.
    pub fn round_half_up(&self) -> BigInt {
        (self + &Rat::new(1, 2)).floor()
    }

    /// Lossy conversion for rendering only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Plain decimal rendering rounded (half away from zero) to `sig`
    /// significant digits, trailing zeros trimmed.
    pub fn to_decimal(&self, sig: usize) -> String {
        let sig = sig.max(1);
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        let num = self.numer().abs();
        let den = self.denom().clone();
        let ten = BigInt::from(10u32);

        // Decimal exponent estimate from digit counts, then corrected so that
        // 10^exp <= |v| < 10^(exp+1).
        let mut exp = num.to_string().len() as i64 - den.to_string().len() as i64;
        let ge_pow10 = |e: i64| -> bool {
            if e >= 0 {
                num >= &den * ten.pow(e as u32)
            } else {
                &num * ten.pow((-e) as u32) >= den
            }
        };
        while !ge_pow10(exp) {
            exp -= 1;
        }
        while ge_pow10(exp + 1) {
            exp += 1;
        }

        // digits = round(|v| * 10^(sig - 1 - exp))
        let shift = sig as i64 - 1 - exp;
        let (n, d) = if shift >= 0 {
            (&num * ten.pow(shift as u32), den.clone())
        } else {
            (num.clone(), &den * ten.pow((-shift) as u32))
        };
        let (q, r) = n.div_rem(&d);
        let mut digits = if &r * 2u32 >= d { q + 1u32 } else { q };
        let mut point = exp; // position of the leading digit
        if digits == ten.pow(sig as u32) {
            digits /= 10u32;
            point += 1;
        }
        let s = digits.to_string();
        let body = if point >= 0 {
            let int_len = point as usize + 1;
            if s.len() <= int_len {
                format!("{}{}", s, "0".repeat(int_len - s.len()))
            } else {
                format!("{}.{}", &s[..int_len], &s[int_len..])
            }
        } else {
            format!("0.{}{}", "0".repeat((-point - 1) as usize), s)
        };
        let body = if body.contains('.') {
            body.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            body
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

/// Exactly `2^e`.
pub fn pow2(e: i64) -> Rat {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rat(BigRational::from_integer(p))
    } else {
        Rat(BigRational::new_raw(BigInt::one(), p))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::integer(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `a`, `a/b` and finite decimals such as `-0.125`.
impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Rat::from_big(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int_digits = int.trim_start_matches(['-', '+']);
            let int_val: BigInt = if int_digits.is_empty() {
                BigInt::zero()
            } else {
                int_digits.parse().map_err(|_| bad())?
            };
            let frac_val: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let mag = int_val * &scale + frac_val;
            let num = if neg { -mag } else { mag };
            return Rat::from_big(num, scale);
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rat::from(n))
    }
}

#[derive(Serialize, Deserialize)]
struct RatRepr {
    num: String,
    den: String,
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RatRepr {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = RatRepr::deserialize(deserializer)?;
        let num: BigInt = repr.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = repr.den.parse().map_err(D::Error::custom)?;
        if den.sign() != Sign::Plus {
            return Err(D::Error::custom("denominator must be positive"));
        }
        Rat::from_big(num, den).map_err(D::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
// Division by zero panics, as for the underlying BigRational.
forward_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

/// A point `x + iy` of the plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QPoint {
    pub x: Rat,
    pub y: Rat,
}

impl QPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        QPoint { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        QPoint::new(Rat::integer(x), Rat::integer(y))
    }

    /// Squared modulus `x^2 + y^2`.
    pub fn norm_sqr(&self) -> Rat {
        self.x.square() + self.y.square()
    }

    /// Chebyshev distance `max(|dx|, |dy|)`.
    pub fn linf_dist(&self, other: &QPoint) -> Rat {
        (&self.x - &other.x).abs().max((&self.y - &other.y).abs())
    }
}

impl Add<&QPoint> for &QPoint {
    type Output = QPoint;
    fn add(self, rhs: &QPoint) -> QPoint {
        QPoint::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Sub<&QPoint> for &QPoint {
    type Output = QPoint;
    fn sub(self, rhs: &QPoint) -> QPoint {
        QPoint::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

/// Closed axis-aligned box `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QBox {
    pub x_lo: Rat,
    pub x_hi: Rat,
    pub y_lo: Rat,
    pub y_hi: Rat,
}

impl QBox {
    pub fn new(x_lo: Rat, x_hi: Rat, y_lo: Rat, y_hi: Rat) -> Result<Self> {
        if x_lo > x_hi || y_lo > y_hi {
            return Err(Error::InvertedBox);
        }
        Ok(QBox {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        })
    }

    pub fn point(p: &QPoint) -> Self {
        QBox {
            x_lo: p.x.clone(),
            x_hi: p.x.clone(),
            y_lo: p.y.clone(),
            y_hi: p.y.clone(),
        }
    }

    pub fn width(&self) -> Rat {
        &self.x_hi - &self.x_lo
    }

    pub fn height(&self) -> Rat {
        &self.y_hi - &self.y_lo
    }

    pub fn contains_point(&self, p: &QPoint) -> bool {
        self.x_lo <= p.x && p.x <= self.x_hi && self.y_lo <= p.y && p.y <= self.y_hi
    }

    pub fn contains_box(&self, other: &QBox) -> bool {
        self.x_lo <= other.x_lo
            && other.x_hi <= self.x_hi
            && self.y_lo <= other.y_lo
            && other.y_hi <= self.y_hi
    }

    /// Closed intersection test (touching boxes intersect).
    pub fn intersects(&self, other: &QBox) -> bool {
        self.x_lo <= other.x_hi
            && other.x_lo <= self.x_hi
            && self.y_lo <= other.y_hi
            && other.y_lo <= self.y_hi
    }

    /// Minkowski inflation by the square of half-side `r`.
    pub fn inflate(&self, r: &Rat) -> Result<QBox> {
        if r.is_negative() {
            return Err(Error::NegativeRadius(r.clone()));
        }
        Ok(QBox {
            x_lo: &self.x_lo - r,
            x_hi: &self.x_hi + r,
            y_lo: &self.y_lo - r,
            y_hi: &self.y_hi + r,
        })
    }
}

/// Free-function form of [`QBox::inflate`].
pub fn box_inflate(b: &QBox, r: &Rat) -> Result<QBox> {
    b.inflate(r)
}
