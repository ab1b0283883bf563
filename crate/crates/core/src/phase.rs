//! Exact roots of unity and complex amplitudes.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, to_f64, Rational};

/// exp(2πi·q) for q ∈ [0, 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitPhase(Rational);

impl UnitPhase {
    pub fn new(q: Rational) -> Self {
        let floor = q.numer().div_floor(q.denom());
        UnitPhase(q - Rational::from_integer(floor))
    }

    pub fn zero() -> Self {
        UnitPhase(Rational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::new(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    /// Phase of ±1.
    pub fn from_sign(s: Sign) -> Self {
        match s {
            Sign::Plus => Self::zero(),
            Sign::Minus => Self::from_ratio(1, 2),
        }
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn times(&self, k: i64) -> Self {
        Self::new(&self.0 * BigInt::from(k))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * to_f64(&self.0))
    }

    /// Distance to the nearest integer, as a float in [0, 1/2].
    pub fn distance_to_zero(&self) -> f64 {
        let q = to_f64(&self.0);
        q.min(1.0 - q)
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Self::new(parse_rational(s)?))
    }
}

impl fmt::Display for UnitPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl Add for UnitPhase {
    type Output = UnitPhase;
    fn add(self, o: UnitPhase) -> UnitPhase {
        UnitPhase::new(self.0 + o.0)
    }
}

impl<'a> Add<&'a UnitPhase> for &'a UnitPhase {
    type Output = UnitPhase;
    fn add(self, o: &UnitPhase) -> UnitPhase {
        UnitPhase::new(&self.0 + &o.0)
    }
}

impl AddAssign for UnitPhase {
    fn add_assign(&mut self, o: UnitPhase) {
        *self = UnitPhase::new(&self.0 + o.0);
    }
}

impl Neg for UnitPhase {
    type Output = UnitPhase;
    fn neg(self) -> UnitPhase {
        UnitPhase::new(-self.0)
    }
}

impl Sub for UnitPhase {
    type Output = UnitPhase;
    fn sub(self, o: UnitPhase) -> UnitPhase {
        UnitPhase::new(self.0 - o.0)
    }
}

impl Sum for UnitPhase {
    fn sum<I: Iterator<Item = UnitPhase>>(iter: I) -> Self {
        iter.fold(UnitPhase::zero(), |a, b| a + b)
    }
}

impl Serialize for UnitPhase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UnitPhase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        UnitPhase::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        Sign::from_parity(self != o)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl Serialize for Sign {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

/// An exact complex number √magSq·exp(2πi·phase).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Amplitude {
    #[serde(with = "crate::rational::serde_rational")]
    mag_sq: Rational,
    phase: UnitPhase,
}

impl Amplitude {
    pub fn new(mag_sq: Rational, phase: UnitPhase) -> Result<Self> {
        if mag_sq.is_negative() {
            return Err(Error::NegativeArgument("squared modulus"));
        }
        Ok(Self::canonical(mag_sq, phase))
    }

    fn canonical(mag_sq: Rational, phase: UnitPhase) -> Self {
        if mag_sq.is_zero() {
            Amplitude {
                mag_sq,
                phase: UnitPhase::zero(),
            }
        } else {
            Amplitude { mag_sq, phase }
        }
    }

    pub fn one() -> Self {
        Amplitude {
            mag_sq: Rational::one(),
            phase: UnitPhase::zero(),
        }
    }

    pub fn zero() -> Self {
        Amplitude {
            mag_sq: Rational::zero(),
            phase: UnitPhase::zero(),
        }
    }

    pub fn unit(phase: UnitPhase) -> Self {
        Amplitude {
            mag_sq: Rational::one(),
            phase,
        }
    }

    pub fn mag_sq(&self) -> &Rational {
        &self.mag_sq
    }

    pub fn phase(&self) -> &UnitPhase {
        &self.phase
    }

    pub fn is_zero(&self) -> bool {
        self.mag_sq.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::canonical(self.mag_sq.clone(), -self.phase.clone())
    }

    pub fn scale_mag_sq(&self, k: &Rational) -> Self {
        Self::canonical(&self.mag_sq * k.abs(), self.phase.clone())
    }

    pub fn rotate(&self, phase: &UnitPhase) -> Self {
        Self::canonical(self.mag_sq.clone(), &self.phase + phase)
    }

    pub fn to_complex(&self) -> Complex64 {
        self.phase.to_complex() * to_f64(&self.mag_sq).sqrt()
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, o: Amplitude) -> Amplitude {
        Amplitude::canonical(self.mag_sq * o.mag_sq, self.phase + o.phase)
    }
}

impl<'a> Mul<&'a Amplitude> for &'a Amplitude {
    type Output = Amplitude;
    fn mul(self, o: &Amplitude) -> Amplitude {
        Amplitude::canonical(&self.mag_sq * &o.mag_sq, &self.phase + &o.phase)
    }
}

impl MulAssign for Amplitude {
    fn mul_assign(&mut self, o: Amplitude) {
        *self = &*self * &o;
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "√({})·e^(2πi·{})",
            format_rational(&self.mag_sq),
            self.phase
        )
    }
}
