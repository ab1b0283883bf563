//! Valuations, norms, digit expansions and the linear order on Q_p.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{mod_inverse, Rational};

/// A prime, checked on construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(BigInt);

impl Prime {
    pub fn new(p: impl Into<BigInt>) -> Result<Self> {
        let p = p.into();
        if is_prime(&p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    pub fn is_two(&self) -> bool {
        self.0 == BigInt::from(2)
    }

    pub fn as_rational(&self) -> Rational {
        Rational::from_integer(self.0.clone())
    }

    /// p^k as a rational, for any integer k.
    pub fn pow(&self, k: i64) -> Rational {
        let m = self.0.pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Rational::from_integer(m)
        } else {
            Rational::new(BigInt::one(), m)
        }
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Prime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let n: BigInt = s
            .trim()
            .parse()
            .map_err(|_| Error::MalformedValuation(s.to_string()))?;
        Prime::new(n)
    }
}

impl Serialize for Prime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Prime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Prime::new(n).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Deterministic Miller-Rabin. The first twelve prime bases decide every
/// n < 3.3·10^24; beyond that more bases are tried and the answer is
/// probabilistic in principle but has no known counterexample.
pub fn is_prime(n: &BigInt) -> bool {
    const SMALL: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    if *n < BigInt::from(2) {
        return false;
    }
    for &q in &SMALL {
        let q = BigInt::from(q);
        if *n == q {
            return true;
        }
        if (n % &q).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for &a in &SMALL {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&BigInt::from(2), n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A place of Q: the real absolute value or a prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Valuation {
    Infinity,
    Prime(Prime),
}

impl Valuation {
    pub fn prime(p: u64) -> Result<Self> {
        Ok(Valuation::Prime(Prime::new(p)?))
    }

    pub fn as_prime(&self) -> Option<&Prime> {
        match self {
            Valuation::Prime(p) => Some(p),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinity)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinity => f.write_str("inf"),
            Valuation::Prime(p) => p.fmt(f),
        }
    }
}

impl FromStr for Valuation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "oo" | "∞" => Ok(Valuation::Infinity),
            t => {
                let n: BigInt = t
                    .parse()
                    .map_err(|_| Error::MalformedValuation(s.to_string()))?;
                Ok(Valuation::Prime(Prime::new(n)?))
            }
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Exponent of p in x; `Infinity` for x = 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Finite(i64),
    Infinity,
}

impl Order {
    pub fn finite(self) -> Option<i64> {
        match self {
            Order::Finite(m) => Some(m),
            Order::Infinity => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => m.fmt(f),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

fn strip(n: &BigInt, p: &BigInt) -> (i64, BigInt) {
    assert!(!n.is_zero(), "strip of zero");
    let mut k = 0;
    let mut n = n.clone();
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return (k, n);
        }
        n = q;
        k += 1;
    }
}

pub fn valuation(x: &Rational, p: &Prime) -> Order {
    if x.is_zero() {
        return Order::Infinity;
    }
    let (a, _) = strip(x.numer(), &p.0);
    let (b, _) = strip(x.denom(), &p.0);
    Order::Finite(a - b)
}

/// Valuation of a non-zero rational.
pub(crate) fn ord(x: &Rational, p: &Prime) -> i64 {
    valuation(x, p).finite().expect("ord of zero")
}

/// Splits x ≠ 0 as p^m·u with u a p-adic unit.
pub fn unit_part(x: &Rational, p: &Prime) -> (i64, Rational) {
    let (a, n) = strip(x.numer(), &p.0);
    let (b, d) = strip(x.denom(), &p.0);
    (a - b, Rational::new(n, d))
}

pub fn norm(x: &Rational, v: &Valuation) -> Rational {
    match v {
        Valuation::Infinity => x.abs(),
        Valuation::Prime(p) => match valuation(x, p) {
            Order::Infinity => Rational::zero(),
            Order::Finite(m) => p.pow(-m),
        },
    }
}

/// {x}_p: the part of the canonical expansion with negative exponents.
pub fn fractional_part(x: &Rational, p: &Prime) -> Rational {
    let (_, d) = strip(x.denom(), &p.0);
    let pk = x.denom() / &d;
    if pk.is_one() {
        return Rational::zero();
    }
    // x = n/(p^k d) with gcd(d, p) = 1; {x}_p = (n d^{-1} mod p^k) / p^k.
    let inv = mod_inverse(&d, &pk).expect("coprime by construction");
    let r = (x.numer() * inv).mod_floor(&pk);
    Rational::new(r, pk)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicDigits {
    pub prime: Prime,
    pub start: i64,
    pub digits: Vec<BigInt>,
}

impl PadicDigits {
    /// Σ b_k p^k over the retained digits.
    pub fn truncation(&self) -> Rational {
        let mut acc = Rational::zero();
        for (i, b) in self.digits.iter().enumerate() {
            acc += Rational::from_integer(b.clone()) * self.prime.pow(self.start + i as i64);
        }
        acc
    }

    /// The digit b_k, if it was retained.
    pub fn digit(&self, k: i64) -> Option<&BigInt> {
        let i = k.checked_sub(self.start)?;
        usize::try_from(i).ok().and_then(|i| self.digits.get(i))
    }
}

/// First `count` canonical digits of x = Σ_{k≥m} b_k p^k, b_m ≠ 0.
pub fn digits(x: &Rational, p: &Prime, count: usize) -> PadicDigits {
    if x.is_zero() {
        return PadicDigits {
            prime: p.clone(),
            start: 0,
            digits: Vec::new(),
        };
    }
    let (m, mut u) = unit_part(x, p);
    let pp = &p.0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let inv = mod_inverse(u.denom(), pp).expect("unit denominator");
        let b = (u.numer() * inv).mod_floor(pp);
        u = (u - Rational::from_integer(b.clone())) / Rational::from_integer(pp.clone());
        out.push(b);
    }
    PadicDigits {
        prime: p.clone(),
        start: m,
        digits: out,
    }
}

/// The linear order on Q_p: smaller norm first, then the first differing
/// digit of the canonical expansions.
pub fn padic_compare(x: &Rational, y: &Rational, p: &Prime) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    let v = Valuation::Prime(p.clone());
    match norm(x, &v).cmp(&norm(y, &v)) {
        Ordering::Equal => {}
        o => return o,
    }
    // Same leading exponent m; expansions first differ at ord(x − y).
    let m = ord(x, p);
    let j = ord(&(x - y), p);
    let count = (j - m + 1) as usize;
    let dx = digits(x, p, count);
    let dy = digits(y, p, count);
    dx.digits[count - 1].cmp(&dy.digits[count - 1])
}

/// Residue class of a p-adic unit (or integer) modulo p^k.
pub(crate) fn residue_mod_pk(x: &Rational, p: &Prime, k: u32) -> BigInt {
    let m = p.0.pow(k);
    crate::rational::residue(x, &m).expect("p-integral rational")
}

/// Distinct prime factors of |n|, ascending.
pub fn prime_factors(n: &BigInt) -> Vec<Prime> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return Vec::new();
    }
    let mut d = 2u32;
    while d < 1000 && n > BigInt::one() {
        let q = BigInt::from(d);
        if (&n % &q).is_zero() {
            out.push(q.clone());
            while (&n % &q).is_zero() {
                n /= &q;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m <= BigInt::one() {
            continue;
        }
        if is_prime(&m) {
            out.push(m);
            continue;
        }
        let f = pollard_brent(&m);
        stack.push(&m / &f);
        stack.push(f);
    }
    out.sort();
    out.dedup();
    out.into_iter().map(Prime).collect()
}

/// A non-trivial factor of an odd composite without small factors.
fn pollard_brent(n: &BigInt) -> BigInt {
    let one = BigInt::one();
    for c in 1u32.. {
        let c = BigInt::from(c);
        let f = |x: &BigInt| (x * x + &c) % n;
        let (mut y, mut r, mut q) = (BigInt::from(2), 1u64, BigInt::one());
        let mut g = BigInt::one();
        let (mut x, mut ys) = (y.clone(), y.clone());
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..(r - k).min(128) {
                    y = f(&y);
                    q = (&q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += 128;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
    }
    unreachable!()
}
