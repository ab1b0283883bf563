//! Truncated Laurent series over Q.
//!
//! A series carries the coefficients it knows and the largest exponent up to
//! which they are valid: `Σ c_k t^k + O(t^(prec+1))`. Polynomials are exact
//! and carry an effectively infinite precision.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::Ring;
use crate::padic::{norm, Valuation};
use crate::rational::{format_rational, to_f64, Rational};

pub const EXACT: i64 = i64::MAX / 4;

/// Number of trailing retained terms the evaluation guard inspects.
pub const GUARD_TAIL: usize = 4;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    start: i64,
    coeffs: Vec<Rational>,
    prec: i64,
}

fn cap(x: i64) -> i64 {
    x.min(EXACT)
}

fn shift(prec: i64, by: i64) -> i64 {
    if prec >= EXACT {
        EXACT
    } else {
        prec + by
    }
}

impl Series {
    fn build(start: i64, coeffs: Vec<Rational>, prec: i64) -> Self {
        let mut s = Series {
            start,
            coeffs,
            prec: cap(prec),
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let keep = (self.prec.saturating_sub(self.start).saturating_add(1)).max(0);
        if (self.coeffs.len() as i64) > keep {
            self.coeffs.truncate(keep as usize);
        }
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.start += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.start = 0;
        }
    }

    pub fn polynomial(coeffs: Vec<Rational>) -> Self {
        Self::build(0, coeffs, EXACT)
    }

    /// Power series known up to and including t^prec.
    pub fn truncated(coeffs: Vec<Rational>, prec: i64) -> Self {
        Self::build(0, coeffs, prec)
    }

    pub fn laurent(start: i64, coeffs: Vec<Rational>, prec: i64) -> Self {
        Self::build(start, coeffs, prec)
    }

    pub fn constant(c: Rational) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn zero() -> Self {
        Self::polynomial(Vec::new())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn monomial(c: Rational, k: i64) -> Self {
        Self::build(k, vec![c], EXACT)
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec >= EXACT
    }

    /// Exponent of the first known non-zero coefficient.
    pub fn valuation(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.start)
    }

    fn lead(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.prec.saturating_add(1)
        } else {
            self.start
        }
    }

    /// Coefficient of t^k, or `None` beyond the precision.
    pub fn coeff(&self, k: i64) -> Option<Rational> {
        if k > self.prec {
            return None;
        }
        let i = k - self.start;
        if i < 0 || i as usize >= self.coeffs.len() {
            Some(Rational::zero())
        } else {
            Some(self.coeffs[i as usize].clone())
        }
    }

    /// Coefficient of t^k, treating unknown terms as zero.
    pub(crate) fn coeff_or_zero(&self, k: i64) -> Rational {
        self.coeff(k).unwrap_or_else(Rational::zero)
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero_known(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Known coefficients of exponents in `from..=to` that are non-zero.
    pub fn nonzero_between(&self, from: i64, to: i64) -> Vec<(i64, Rational)> {
        (from..=to.min(self.prec))
            .filter_map(|k| {
                let c = self.coeff_or_zero(k);
                (!c.is_zero()).then_some((k, c))
            })
            .collect()
    }

    pub fn truncate(&self, prec: i64) -> Self {
        Self::build(self.start, self.coeffs.clone(), self.prec.min(prec))
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.min(o.prec);
        if self.coeffs.is_empty() {
            return o.truncate(prec);
        }
        if o.coeffs.is_empty() {
            return self.truncate(prec);
        }
        let start = self.start.min(o.start);
        let end = (self.start + self.coeffs.len() as i64).max(o.start + o.coeffs.len() as i64);
        let coeffs = (start..end)
            .map(|k| self.coeff_or_zero(k) + o.coeff_or_zero(k))
            .collect();
        Self::build(start, coeffs, prec)
    }

    pub fn neg(&self) -> Self {
        Series {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Series {
            start: self.start,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = cap(
            self.prec
                .saturating_add(o.lead())
                .min(o.prec.saturating_add(self.lead())),
        );
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::build(0, Vec::new(), prec);
        }
        let start = self.start + o.start;
        let full = self.coeffs.len() + o.coeffs.len() - 1;
        let len = (prec - start + 1).clamp(0, full as i64) as usize;
        let mut coeffs = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        Self::build(start, coeffs, prec)
    }

    /// Multiplicative inverse; the leading coefficient must be known.
    pub fn inverse(&self) -> Result<Self> {
        let Some(v) = self.valuation() else {
            return Err(Error::Singular("series inverse"));
        };
        let u0 = self.coeffs[0].clone();
        let rel = if self.is_exact() {
            // An exact polynomial with a non-trivial tail has an infinite
            // inverse; give it a relative precision comparable to its own degree.
            if self.coeffs.len() == 1 {
                EXACT
            } else {
                crate::series::DEFAULT_INVERSE_PRECISION.max(self.coeffs.len() as i64)
            }
        } else {
            self.prec - v
        };
        if rel >= EXACT {
            return Ok(Self::monomial(Rational::one() / u0, -v));
        }
        let n = rel as usize + 1;
        let mut w = Vec::with_capacity(n);
        w.push(Rational::one() / &u0);
        for k in 1..n {
            let mut acc = Rational::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                acc += &self.coeffs[j] * &w[k - j];
            }
            w.push(-acc / &u0);
        }
        Ok(Self::build(-v, w, rel - v))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inverse()?))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Rational::from_integer((self.start + i as i64).into()))
            .collect();
        Self::build(self.start - 1, coeffs, shift(self.prec, -1))
    }

    /// The antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Result<Self> {
        if !self.coeff_or_zero(-1).is_zero() {
            return Err(Error::Pole);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = self.start + i as i64;
                if k == -1 {
                    Rational::zero()
                } else {
                    c / Rational::from_integer((k + 1).into())
                }
            })
            .collect();
        Ok(Self::build(self.start + 1, coeffs, shift(self.prec, 1)))
    }

    /// Σ c_k t^k over the known coefficients.
    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t.is_zero() {
            if self.start < 0 && !self.coeffs.is_empty() {
                return Err(Error::Pole);
            }
            return Ok(self.coeff_or_zero(0));
        }
        // Horner from the top, then shift by t^start.
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        Ok(acc * pow(t, self.start))
    }

    /// Evaluation with a truncation check: the last `GUARD_TAIL` retained
    /// terms must be small at `t` in the guard's valuation.
    pub fn eval_guarded(&self, t: &Rational, guard: &Guard) -> Result<Rational> {
        let value = self.eval(t)?;
        if self.is_exact() || t.is_zero() {
            return Ok(value);
        }
        let hi = self.prec;
        let lo = hi - GUARD_TAIL as i64 + 1;
        for k in lo..=hi {
            let c = self.coeff_or_zero(k);
            if c.is_zero() {
                continue;
            }
            let term = c * pow(t, k);
            if !guard.accepts(&term, &value) {
                return Err(guard.failure(t));
            }
        }
        Ok(value)
    }

    pub fn coefficients(&self) -> (i64, &[Rational]) {
        (self.start, &self.coeffs)
    }
}

/// Relative precision given to inverses of exact non-monomial polynomials.
pub const DEFAULT_INVERSE_PRECISION: i64 = 32;

fn pow(t: &Rational, k: i64) -> Rational {
    let p = num_traits::pow(t.clone(), k.unsigned_abs() as usize);
    if k >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Truncation guard for evaluating series at a point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub valuation: Valuation,
    /// p-adic case: tail terms need norm ≤ p^-precision. Real case: tail
    /// terms need magnitude ≤ 10^-(2·precision) relative to the value.
    pub precision: i64,
}

pub const DEFAULT_GUARD_PRECISION: i64 = 8;

impl Guard {
    pub fn new(valuation: Valuation) -> Self {
        Guard {
            valuation,
            precision: DEFAULT_GUARD_PRECISION,
        }
    }

    pub fn with_precision(mut self, precision: i64) -> Self {
        self.precision = precision;
        self
    }

    fn accepts(&self, term: &Rational, value: &Rational) -> bool {
        match &self.valuation {
            Valuation::Prime(p) => norm(term, &self.valuation) <= p.pow(-self.precision),
            Valuation::Infinity => {
                let bound = 10f64.powi(-2 * self.precision as i32) * to_f64(value).abs().max(1.0);
                to_f64(term).abs() <= bound
            }
        }
    }

    fn failure(&self, t: &Rational) -> Error {
        Error::Convergence {
            valuation: self.valuation.clone(),
            t: format_rational(t),
            precision: self.precision,
        }
    }
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            f.write_str("0")?;
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = self.start + i as i64;
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            write!(f, "{}", format_rational(&c.abs()))?;
            match k {
                0 => {}
                1 => f.write_str("·t")?,
                _ => write!(f, "·t^{k}")?,
            }
        }
        if !self.is_exact() {
            write!(f, " + O(t^{})", self.prec + 1)?;
        }
        Ok(())
    }
}

impl Ring for Series {
    fn zero_value() -> Self {
        Series::zero()
    }
    fn one_value() -> Self {
        Series::one()
    }
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negated(&self) -> Self {
        self.neg()
    }
    fn from_rational(r: &Rational) -> Self {
        Series::constant(r.clone())
    }
    fn try_inverse(&self) -> Option<Self> {
        self.inverse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn poly(c: &[i64]) -> Series {
        Series::polynomial(c.iter().map(|&x| int(x)).collect())
    }

    fn exp_series(n: i64) -> Series {
        let mut c = vec![int(1)];
        for k in 1..=n {
            let prev: Rational = c[(k - 1) as usize].clone();
            c.push(prev / int(k));
        }
        Series::truncated(c, n)
    }

    #[test]
    fn polynomial_arithmetic() {
        let a = poly(&[1, 1]);
        let b = poly(&[1, -1]);
        assert_eq!(a.mul(&b), poly(&[1, 0, -1]));
        assert_eq!(a.add(&b), poly(&[2]));
        assert_eq!(a.sub(&a), Series::zero());
        assert_eq!(poly(&[0, 0, 3]).valuation(), Some(2));
        assert_eq!(poly(&[5, 0, 3]).derivative(), poly(&[0, 6]));
        assert_eq!(poly(&[0, 6]).antiderivative().unwrap(), poly(&[0, 0, 3]));
    }

    #[test]
    fn truncated_precision_propagates() {
        let e = exp_series(10);
        let e2 = e.mul(&e);
        assert_eq!(e2.precision(), 10);
        assert_eq!(e2.coeff(3), Some(ratio(8, 6)));
        assert_eq!(e2.coeff(11), None);
        // t·O(t^11) is O(t^12).
        let shifted = Series::monomial(int(1), 1).mul(&e);
        assert_eq!(shifted.precision(), 11);
        assert_eq!(e.derivative().precision(), 9);
        assert_eq!(e.antiderivative().unwrap().precision(), 11);
    }

    #[test]
    fn inverse_of_exp_is_exp_of_minus() {
        let e = exp_series(12);
        let inv = e.inverse().unwrap();
        let prod = e.mul(&inv);
        assert_eq!(prod.precision(), 12);
        for k in 0..=12 {
            assert_eq!(prod.coeff(k).unwrap(), if k == 0 { int(1) } else { int(0) });
        }
    }

    #[test]
    fn laurent_inverse_of_sine() {
        // sin t = t − t³/6 + …; 1/sin t = 1/t + t/6 + 7t³/360 + …
        let s = Series::truncated(vec![int(0), int(1), int(0), ratio(-1, 6), int(0), ratio(1, 120)], 5);
        let inv = s.inverse().unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert_eq!(inv.precision(), 3);
        assert_eq!(inv.coeff(-1), Some(int(1)));
        assert_eq!(inv.coeff(1), Some(ratio(1, 6)));
        assert_eq!(inv.coeff(3), Some(ratio(7, 360)));
        assert!(inv.antiderivative().is_err());
    }

    #[test]
    fn evaluation_and_guard() {
        let p = poly(&[1, 2, 3]);
        assert_eq!(p.eval(&ratio(1, 2)).unwrap(), ratio(11, 4));
        let e = exp_series(30);
        let g3 = Guard::new(Valuation::prime(3).unwrap());
        assert!(e.eval_guarded(&int(3), &g3).is_ok());
        assert!(matches!(e.eval_guarded(&int(1), &g3), Err(Error::Convergence { .. })));
        let greal = Guard::new(Valuation::Infinity);
        assert!(e.eval_guarded(&ratio(1, 2), &greal).is_ok());
        assert!(e.eval_guarded(&int(5), &greal).is_err());
    }

    #[test]
    fn zero_handling() {
        let unknown = Series::truncated(vec![], 4);
        assert!(unknown.inverse().is_err());
        assert_eq!(unknown.mul(&poly(&[0, 0, 1])).precision(), 6);
        assert_eq!(Series::zero().mul(&exp_series(3)), Series::truncated(vec![], EXACT));
        assert!(Series::zero().is_exact());
    }
}
