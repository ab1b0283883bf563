mod common;

use std::collections::HashSet;

use common::*;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use padelic::number_theory::{big_lambda, big_lambda_factored, hilbert, lambda};
use padelic::padic::unit_part;
use padelic::rational::int;
use padelic::{Prime, Rational, Sign, UnitPhase, Valuation};
use proptest::prelude::*;

/// Whether a·x² + b·y² = z² has a primitive solution modulo p^k; for
/// arguments of order 0 or 1 this decides solvability over Q_p.
fn solvable(a: &Rational, b: &Rational, p: &Prime) -> bool {
    let pu = p.to_u64().unwrap() as i64;
    let k = if pu == 2 { 5 } else { 3 };
    let m = pu.pow(k);
    let reduce = |x: &Rational| -> i64 {
        let (e, u) = unit_part(x, p);
        let inv = modinv(u.denom().to_i64().unwrap().rem_euclid(m), m);
        let unit = (u.numer() % m).to_i64().unwrap() * inv;
        (unit.rem_euclid(m) * pu.pow(e.rem_euclid(2) as u32)).rem_euclid(m)
    };
    let (a, b) = (reduce(a), reduce(b));
    let squares: HashSet<i64> = (0..m).map(|z| z * z % m).collect();
    (0..m).any(|x| {
        (0..m).any(|y| (x % pu != 0 || y % pu != 0) && squares.contains(&((a * x % m * x + b * y % m * y) % m)))
    })
}

fn modinv(a: i64, m: i64) -> i64 {
    (1..m).find(|i| a * i % m == 1).unwrap()
}

fn gauss_sum(p: u64, u: i64) -> Complex64 {
    let s: Complex64 = (0..p as i64)
        .map(|x| Complex64::from_polar(1.0, std::f64::consts::TAU * (u * x * x).rem_euclid(p as i64) as f64 / p as f64))
        .sum();
    s / (p as f64).sqrt()
}

proptest! {
    #[test]
    fn lambda_square_class(x in nonzero(100_000), a in nonzero(1000), v in valuation()) {
        prop_assert_eq!(lambda(&v, &(&a * &a * &x)), lambda(&v, &x));
    }

    #[test]
    fn lambda_of_opposites(x in nonzero(1_000_000), v in valuation()) {
        prop_assert!((lambda(&v, &x) + lambda(&v, &-x.clone())).is_zero());
    }

    #[test]
    fn lambda_harmonic_identity(x in nonzero(100_000), y in nonzero(100_000), v in valuation()) {
        prop_assume!(!(&x + &y).is_zero());
        let lhs = lambda(&v, &(&x * &y / (&x + &y)));
        prop_assert_eq!(lhs, lambda(&v, &x) + lambda(&v, &y) - lambda(&v, &(&x + &y)));
    }

    #[test]
    fn lambda_hilbert_identity(x in nonzero(100_000), y in nonzero(100_000), v in valuation()) {
        let rhs = UnitPhase::from_sign(hilbert(&v, &x, &y).unwrap()) + lambda(&v, &int(1)) + lambda(&v, &(&x * &y));
        prop_assert_eq!(lambda(&v, &x) + lambda(&v, &y), rhs);
    }

    #[test]
    fn hilbert_symbol_laws(a in nonzero(10_000), b in nonzero(10_000), c in nonzero(10_000), v in valuation()) {
        let h = |x: &Rational, y: &Rational| hilbert(&v, x, y).unwrap();
        prop_assert_eq!(h(&a, &b), h(&b, &a));
        prop_assert_eq!(h(&a, &(&b * &c)), h(&a, &b) * h(&a, &c));
        prop_assert_eq!(h(&a, &-a.clone()), Sign::Plus);
    }

    #[test]
    fn hilbert_matches_solvability(a in nonzero(60), b in nonzero(60), p in small_prime()) {
        let expected = if solvable(&a, &b, &p) { Sign::Plus } else { Sign::Minus };
        prop_assert_eq!(hilbert(&Valuation::Prime(p), &a, &b).unwrap(), expected);
    }

    #[test]
    fn big_lambda_factorization(xs in prop::collection::vec(nonzero(10_000), 1..6), v in valuation()) {
        prop_assert_eq!(big_lambda(&v, &xs), big_lambda_factored(&v, &xs).unwrap());
    }

    #[test]
    fn lambda_matches_gauss_sums(p in odd_prime(), u in 1..1000i64) {
        let pu = p.to_u64().unwrap();
        prop_assume!(u % pu as i64 != 0);
        let x = p.as_rational() * int(u);
        let l = lambda(&Valuation::Prime(p), &x).to_complex();
        prop_assert!((l - gauss_sum(pu, u)).norm() < 1e-9);
    }
}

#[test]
fn worked_values() {
    assert_eq!(lambda(&vp(3), &int(3)), UnitPhase::from_ratio(1, 4));
    assert_eq!(lambda(&Valuation::Infinity, &int(-1)), UnitPhase::from_ratio(1, 8));
    assert_eq!(lambda(&vp(2), &int(1)), UnitPhase::from_ratio(1, 8));
    assert_eq!(hilbert(&vp(2), &int(2), &int(3)).unwrap(), Sign::Minus);
    assert!(solvable(&int(1), &int(5), &prime(3)));
    assert!(!solvable(&int(3), &int(3), &prime(3)));
    assert!(!solvable(&int(-1), &int(-1), &prime(2)));
}
