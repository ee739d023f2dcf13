//! Exact nonnegative rational measures.
//!
//! Every measure in this crate is a reduced fraction of arbitrary-precision
//! unsigned integers. Serialized form is `{"num": "65", "den": "81"}` with both
//! parts as decimal strings, so no value ever passes through floating point.

use std::fmt;
use std::ops::{Add, Div, Mul};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Measure(Ratio<BigUint>);

impl Measure {
    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "measure with zero denominator");
        Measure(Ratio::new(num.into(), den))
    }

    pub fn zero() -> Self {
        Measure(Ratio::zero())
    }

    pub fn one() -> Self {
        Measure(Ratio::one())
    }

    pub fn from_integer(n: impl Into<BigUint>) -> Self {
        Measure(Ratio::from_integer(n.into()))
    }

    /// Ratio of two counts; `den` must be positive.
    pub fn ratio(num: u64, den: u64) -> Self {
        Measure::new(num, den)
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Measure) -> Option<Measure> {
        (self >= other).then(|| {
            let (a, b) = (self.numer() * other.denom(), other.numer() * self.denom());
            Measure::new(a - b, self.denom() * other.denom())
        })
    }

    /// `self / other`; panics if `other` is zero.
    pub fn ratio_to(&self, other: &Measure) -> Measure {
        assert!(!other.is_zero(), "ratio against zero measure");
        Measure(&self.0 / &other.0)
    }

    pub fn pow(&self, exp: u32) -> Measure {
        Measure(Ratio::new(self.numer().pow(exp), self.denom().pow(exp)))
    }

    /// Truncated decimal rendering with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let (int, mut rem) = self.numer().div_rem(self.denom());
        let mut out = int.to_string();
        if digits > 0 {
            out.push('.');
            let ten = BigUint::from(10u32);
            for _ in 0..digits {
                rem *= &ten;
                let (d, r) = rem.div_rem(self.denom());
                out.push_str(&d.to_string());
                rem = r;
            }
        }
        out
    }
}

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Add for Measure {
    type Output = Measure;
    fn add(self, rhs: Measure) -> Measure {
        Measure(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Measure> for &'a Measure {
    type Output = Measure;
    fn add(self, rhs: &Measure) -> Measure {
        Measure(&self.0 + &rhs.0)
    }
}

impl Mul for Measure {
    type Output = Measure;
    fn mul(self, rhs: Measure) -> Measure {
        Measure(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a Measure> for &'a Measure {
    type Output = Measure;
    fn mul(self, rhs: &Measure) -> Measure {
        Measure(&self.0 * &rhs.0)
    }
}

impl Mul<u64> for &Measure {
    type Output = Measure;
    fn mul(self, rhs: u64) -> Measure {
        Measure(&self.0 * Ratio::from_integer(BigUint::from(rhs)))
    }
}

impl Div<u64> for &Measure {
    type Output = Measure;
    fn div(self, rhs: u64) -> Measure {
        assert!(rhs != 0, "division of measure by zero");
        Measure(&self.0 / Ratio::from_integer(BigUint::from(rhs)))
    }
}

impl std::iter::Sum for Measure {
    fn sum<I: Iterator<Item = Measure>>(iter: I) -> Measure {
        iter.fold(Measure::zero(), |a, b| a + b)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    num: String,
    den: String,
}

impl Serialize for Measure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let num: BigUint = w.num.parse().map_err(D::Error::custom)?;
        let den: BigUint = w.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Measure::new(num, den))
    }
}

/// Exact signed rational, for ratio sequences that may be negative. Same wire
/// format as [`Measure`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(Ratio<BigInt>);

impl Fraction {
    /// `num / den`, reduced. Panics if `den == 0`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "fraction with zero denominator");
        Fraction(Ratio::new(num.into(), den))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Fraction(Ratio::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.numer().sign() == num_bigint::Sign::Plus
    }

    pub fn recip(&self) -> Fraction {
        Fraction(self.0.recip())
    }

    /// Truncated decimal rendering (toward zero) with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let sign = if self.0.numer().sign() == num_bigint::Sign::Minus {
            "-"
        } else {
            ""
        };
        let m = Measure::new(
            self.numer().magnitude().clone(),
            self.denom().magnitude().clone(),
        );
        format!("{sign}{}", m.to_decimal(digits))
    }
}

impl fmt::Debug for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<&Measure> for Fraction {
    fn from(m: &Measure) -> Self {
        Fraction::new(
            BigInt::from(m.numer().clone()),
            BigInt::from(m.denom().clone()),
        )
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        Wire {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(d)?;
        let num: BigInt = w.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = w.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Fraction::new(num, den))
    }
}

/// Exact lower bound plus the mass not yet decidable at the evaluation stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureInterval {
    pub confirmed: Measure,
    pub unresolved: Measure,
}

impl MeasureInterval {
    pub fn exact(value: Measure) -> Self {
        MeasureInterval {
            confirmed: value,
            unresolved: Measure::zero(),
        }
    }

    pub fn upper(&self) -> Measure {
        &self.confirmed + &self.unresolved
    }

    pub fn is_exact(&self) -> bool {
        self.unresolved.is_zero()
    }

    /// Both endpoints divided by `base` (e.g. to express relative to μ(I)).
    pub fn relative_to(&self, base: &Measure) -> MeasureInterval {
        MeasureInterval {
            confirmed: self.confirmed.ratio_to(base),
            unresolved: self.unresolved.ratio_to(base),
        }
    }
}
