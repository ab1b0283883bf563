mod common;

use std::cmp::Ordering;

use common::*;
use num_traits::{One, Zero};
use padelic::padic::{digits, fractional_part, norm, padic_compare, valuation as ord, Order};
use padelic::{Amplitude, Rational, UnitPhase};
use proptest::prelude::*;

fn amplitude() -> impl Strategy<Value = Amplitude> {
    (nonzero(1000), rational(1000)).prop_map(|(m, ph)| {
        let m = if m < Rational::zero() { -m } else { m };
        Amplitude::new(m, UnitPhase::new(ph)).unwrap()
    })
}

proptest! {
    #[test]
    fn norm_is_multiplicative(x in rational(1_000_000), y in rational(1_000_000), v in valuation()) {
        prop_assert_eq!(norm(&(&x * &y), &v), norm(&x, &v) * norm(&y, &v));
    }

    #[test]
    fn norm_is_ultrametric(x in rational(100_000), y in rational(100_000), p in small_prime()) {
        let v = padelic::Valuation::Prime(p);
        let (nx, ny) = (norm(&x, &v), norm(&y, &v));
        let nxy = norm(&(&x + &y), &v);
        prop_assert!(nxy <= nx.clone().max(ny.clone()));
        if nx != ny {
            prop_assert_eq!(nxy, nx.max(ny));
        }
    }

    #[test]
    fn fractional_parts_of_opposites(x in rational(1_000_000), p in small_prime()) {
        let s = fractional_part(&x, &p) + fractional_part(&-x.clone(), &p);
        let integral = ord(&x, &p) >= Order::Finite(0);
        prop_assert!(s.is_zero() || s.is_one());
        prop_assert_eq!(s.is_zero(), integral);
    }

    #[test]
    fn fractional_part_is_the_negative_digit_sum(x in nonzero(1_000_000), p in small_prime()) {
        let d = digits(&x, &p, 64);
        let mut sum = Rational::zero();
        for k in d.start..0 {
            if let Some(b) = d.digit(k) {
                sum += Rational::from_integer(b.clone()) * p.pow(k);
            }
        }
        prop_assert_eq!(fractional_part(&x, &p), sum);
    }

    #[test]
    fn padic_order_is_strict_and_total(xs in prop::collection::btree_set(rational(500), 2..12), p in small_prime()) {
        let mut v: Vec<Rational> = xs.into_iter().collect();
        v.sort_by(|a, b| padic_compare(a, b, &p));
        for w in v.windows(2) {
            prop_assert_eq!(padic_compare(&w[0], &w[1], &p), Ordering::Less);
            prop_assert_eq!(padic_compare(&w[1], &w[0], &p), Ordering::Greater);
        }
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                prop_assert_eq!(padic_compare(&v[i], &v[j], &p), Ordering::Less);
            }
        }
    }

    #[test]
    fn amplitude_algebra(a in amplitude(), b in amplitude(), c in amplitude()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(a.conj().conj(), a.clone());
        prop_assert_eq!((&a * &b).mag_sq().clone(), a.mag_sq() * b.mag_sq());
        prop_assert!((&a * &a.conj()).phase().is_zero());
    }
}

#[test]
fn worked_values() {
    let p3 = prime(3);
    assert_eq!(norm(&padelic::rational::ratio(1, 9), &vp(3)), Rational::from_integer(9.into()));
    assert_eq!(fractional_part(&padelic::rational::ratio(7, 9), &p3), padelic::rational::ratio(7, 9));
    assert!(Amplitude::one().mag_sq().is_one());
}
