mod common;

use common::*;
use num_complex::Complex64;
use padelic::action::Boundary;
use padelic::kernel::Propagator;
use padelic::lagrangian::QuadraticLagrangian;
use padelic::number_theory::chi;
use padelic::padic::norm;
use padelic::rational::{int, ratio};
use padelic::{Error, Rational, Valuation};
use proptest::prelude::*;

fn local(v: Valuation) -> (Valuation, Rational) {
    let step = match &v {
        Valuation::Prime(p) => p.as_rational() * p.as_rational(),
        Valuation::Infinity => ratio(1, 10),
    };
    (v, step)
}

fn place() -> impl Strategy<Value = (Valuation, Rational)> {
    prop_oneof![
        Just(Valuation::Infinity),
        Just(Valuation::prime(2).unwrap()),
        Just(Valuation::prime(3).unwrap()),
        Just(Valuation::prime(5).unwrap()),
    ]
    .prop_map(local)
}

fn points(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-6i64..=6, 1i64..=3), 4 * n).prop_map(|v| v.into_iter().map(|(a, b)| ratio(a, b)).collect())
}

fn kernel_or_skip(prop: &Propagator, v: &Valuation, b: &Boundary) -> Option<padelic::kernel::KernelValue> {
    match prop.kernel(v, b) {
        Ok(k) => Some(k),
        Err(Error::AtValuation { source, .. }) if matches!(*source, Error::Singular(_) | Error::SingularBoundary | Error::Convergence { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernel_factors_into_normalization_and_character(
        (l, xs) in (1usize..=2).prop_flat_map(|n| (lagrangian(n), points(n))),
        (v, step) in place(),
        k in 1i64..=3,
    ) {
        let n = l.dim();
        let prop = Propagator::from_lagrangian(l, 32, int(1)).unwrap();
        let t2 = &step * int(k);
        let mut stripped = None;
        for pair in xs.chunks(2 * n) {
            let b = Boundary::new(int(0), pair[..n].to_vec(), t2.clone(), pair[n..].to_vec()).unwrap();
            let Some(kv) = kernel_or_skip(&prop, &v, &b) else { return Ok(()) };
            prop_assert_eq!(kv.amplitude.mag_sq(), &norm(&kv.det_b_bar, &v));
            let rest = kv.amplitude.phase().clone() - chi(&v, &-kv.action_value.clone());
            prop_assert_eq!(&rest, kv.normalization.phase());
            match &stripped {
                None => stripped = Some(rest),
                Some(s) => prop_assert_eq!(s, &rest),
            }
        }
    }

    #[test]
    fn real_kernel_matches_the_closed_form(
        (l, xs) in (1usize..=2).prop_flat_map(|n| (lagrangian(n), points(n))),
        k in 1i64..=4,
    ) {
        let n = l.dim();
        let prop = Propagator::from_lagrangian(l, 32, int(1)).unwrap();
        let b = Boundary::new(ratio(1, 10), xs[..n].to_vec(), ratio(1 + k, 10), xs[n..2 * n].to_vec()).unwrap();
        let Some(kv) = kernel_or_skip(&prop, &Valuation::Infinity, &b) else { return Ok(()) };
        let real = prop.real_kernel(&b).unwrap();
        let closed = kv.amplitude.to_complex();
        let scale = closed.norm().max(1.0);
        if n == 1 {
            prop_assert!((real - closed).norm() < 1e-9 * scale, "{real} vs {closed}");
        } else {
            prop_assert!((real.norm() - closed.norm()).abs() < 1e-9 * scale);
            prop_assert!((real - closed).norm() < 1e-9 * scale || (real + closed).norm() < 1e-9 * scale, "{real} vs {closed}");
        }
    }

    #[test]
    fn one_dimensional_composition(l in lagrangian(1), p in prop_oneof![Just(3u64), Just(5u64)], s in 1i64..=3) {
        let prop = Propagator::from_lagrangian(l, 32, int(1)).unwrap();
        let v = Valuation::prime(p).unwrap();
        let q = int(p as i64 * p as i64);
        let r = match prop.composition_check(&v, &int(0), &(&q * int(s)), &(&q * int(s + 1 + s % 2))) {
            Ok(r) => r,
            Err(Error::AtValuation { source, .. }) if matches!(*source, Error::Singular(_) | Error::SingularBoundary | Error::Convergence { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(r.hilbert_factor, padelic::Sign::Plus);
        prop_assert!(r.holds(8, 1e-9), "{r:?}");
    }

    #[test]
    fn kernel_is_hermitian(a in 1i64..=3, c in -2i64..=2, (v, step) in place(), xs in points(1)) {
        let l = QuadraticLagrangian::oscillator(&ratio(-c, a));
        let prop = Propagator::from_lagrangian(l, 32, int(1)).unwrap();
        let forward = Boundary::new(int(0), vec![xs[0].clone()], step.clone(), vec![xs[1].clone()]).unwrap();
        let backward = Boundary::new(step, vec![xs[1].clone()], int(0), vec![xs[0].clone()]).unwrap();
        let (Some(f), Some(b)) = (kernel_or_skip(&prop, &v, &forward), kernel_or_skip(&prop, &v, &backward)) else { return Ok(()) };
        prop_assert_eq!(f.amplitude.mag_sq(), b.amplitude.mag_sq());
        prop_assert_eq!(f.amplitude.phase().clone(), -b.amplitude.phase().clone());
    }
}

#[test]
fn free_particle_closed_form() {
    let prop = Propagator::from_lagrangian(QuadraticLagrangian::free_particle(1), 32, int(1)).unwrap();
    for (v, t, x) in [("inf", 2, 1), ("3", 3, 1), ("5", 25, 2), ("2", 4, 3)] {
        let v: Valuation = v.parse().unwrap();
        let b = Boundary::new(int(0), vec![int(0)], int(t), vec![int(x)]).unwrap();
        let k = prop.kernel(&v, &b).unwrap();
        let t = int(t);
        let expected_phase = padelic::number_theory::lambda(&v, &(int(2) * &t).recip()) + chi(&v, &-(int(x * x) / (int(2) * &t)));
        assert_eq!(k.amplitude.mag_sq(), &norm(&t, &v).recip());
        assert_eq!(k.amplitude.phase(), &expected_phase);
    }
    let closed: Complex64 = prop.kernel(&Valuation::Infinity, &Boundary::new(int(0), vec![int(0)], int(2), vec![int(1)]).unwrap()).unwrap().amplitude.to_complex();
    let t = 2.0f64;
    let direct = (Complex64::new(0.0, -1.0) / t).sqrt() * Complex64::from_polar(1.0, std::f64::consts::TAU * 1.0 / (2.0 * t));
    assert!((closed - direct).norm() < 1e-12, "{closed} vs {direct}");
}
