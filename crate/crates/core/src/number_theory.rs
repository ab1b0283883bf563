//! Characters, λ-functions, Legendre and Hilbert symbols.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::padic::{fractional_part, residue_mod_pk, unit_part, Prime, Valuation};
use crate::phase::{Sign, UnitPhase};
use crate::rational::Rational;

/// χ_p(a) = exp(2πi{a}_p), χ_∞(a) = exp(−2πi·a).
pub fn chi(v: &Valuation, a: &Rational) -> UnitPhase {
    match v {
        Valuation::Prime(p) => UnitPhase::new(fractional_part(a, p)),
        Valuation::Infinity => UnitPhase::new(-a),
    }
}

/// Ω(t): 1 if t ≤ 1, else 0.
pub fn omega(t: &Rational) -> Result<u8> {
    if t.is_negative() {
        return Err(Error::NegativeArgument("omega argument"));
    }
    Ok(u8::from(*t <= Rational::one()))
}

/// Legendre symbol (a|p) by Euler's criterion; 0 when p | a.
pub fn legendre(a: &BigInt, p: &Prime) -> Result<i8> {
    if p.is_two() {
        return Err(Error::EvenPrime("legendre"));
    }
    let pp = p.value();
    let a = a.mod_floor(pp);
    if a.is_zero() {
        return Ok(0);
    }
    let e = (pp - 1u32) >> 1;
    Ok(if a.modpow(&e, pp).is_one() { 1 } else { -1 })
}

fn unit_legendre(u: &Rational, p: &Prime) -> i8 {
    legendre(&residue_mod_pk(u, p, 1), p).expect("odd prime")
}

fn p_mod_4(p: &Prime) -> u32 {
    (p.value() % 4u32).to_u32().unwrap()
}

/// λ_v(x), an eighth root of unity; λ_v(0) = 1.
pub fn lambda(v: &Valuation, x: &Rational) -> UnitPhase {
    if x.is_zero() {
        return UnitPhase::zero();
    }
    match v {
        Valuation::Infinity => {
            if x.is_positive() {
                UnitPhase::from_ratio(-1, 8)
            } else {
                UnitPhase::from_ratio(1, 8)
            }
        }
        Valuation::Prime(p) if p.is_two() => {
            let (m, u) = unit_part(x, p);
            let r = residue_mod_pk(&u, p, 3).to_i64().unwrap();
            if m.is_even() {
                UnitPhase::from_ratio(if r % 4 == 1 { 1 } else { 7 }, 8)
            } else {
                // 1/8 + x_{m+1}/4 + x_{m+2}/2 with u ≡ 1 + 2x_{m+1} + 4x_{m+2}.
                UnitPhase::from_ratio(r, 8)
            }
        }
        Valuation::Prime(p) => {
            let (m, u) = unit_part(x, p);
            if m.is_even() {
                return UnitPhase::zero();
            }
            let root = if p_mod_4(p) == 1 {
                UnitPhase::zero()
            } else {
                UnitPhase::from_ratio(1, 4)
            };
            match unit_legendre(&u, p) {
                1 => root,
                _ => root + UnitPhase::from_ratio(1, 2),
            }
        }
    }
}

fn eps2(u: i64) -> bool {
    ((u - 1) / 2) % 2 == 1
}

fn omega2(u: i64) -> bool {
    ((u * u - 1) / 8) % 2 == 1
}

/// Hilbert symbol (a, b)_v by the local formulas.
pub fn hilbert(v: &Valuation, a: &Rational, b: &Rational) -> Result<Sign> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument("hilbert symbol arguments"));
    }
    Ok(match v {
        Valuation::Infinity => Sign::from_parity(a.is_negative() && b.is_negative()),
        Valuation::Prime(p) if p.is_two() => {
            let (al, u) = unit_part(a, p);
            let (be, w) = unit_part(b, p);
            let u = residue_mod_pk(&u, p, 3).to_i64().unwrap();
            let w = residue_mod_pk(&w, p, 3).to_i64().unwrap();
            let odd = (eps2(u) && eps2(w))
                ^ (al.is_odd() && omega2(w))
                ^ (be.is_odd() && omega2(u));
            Sign::from_parity(odd)
        }
        Valuation::Prime(p) => {
            let (al, u) = unit_part(a, p);
            let (be, w) = unit_part(b, p);
            let eps = p_mod_4(p) == 3;
            let mut odd = al.is_odd() && be.is_odd() && eps;
            if be.is_odd() && unit_legendre(&u, p) == -1 {
                odd = !odd;
            }
            if al.is_odd() && unit_legendre(&w, p) == -1 {
                odd = !odd;
            }
            Sign::from_parity(odd)
        }
    })
}

/// Λ_v(x_1, …, x_n) = ∏ λ_v(x_i).
pub fn big_lambda(v: &Valuation, xs: &[Rational]) -> UnitPhase {
    xs.iter().map(|x| lambda(v, x)).sum()
}

/// λ_v(∏x_i)·λ_v(1)^{n−1}·∏_{i<j}(x_i, x_j)_v.
pub fn big_lambda_factored(v: &Valuation, xs: &[Rational]) -> Result<UnitPhase> {
    if xs.iter().any(Zero::is_zero) {
        return Err(Error::ZeroArgument("Λ entries"));
    }
    if xs.is_empty() {
        return Ok(UnitPhase::zero());
    }
    let product: Rational = xs.iter().product();
    let mut phase = lambda(v, &product) + lambda(v, &Rational::one()).times(xs.len() as i64 - 1);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            phase += UnitPhase::from_sign(hilbert(v, &xs[i], &xs[j])?);
        }
    }
    Ok(phase)
}
