#![allow(dead_code)]

use padelic::rational::{int, ratio};
use padelic::{Prime, Rational, Valuation};
use proptest::prelude::*;

pub fn prime(p: u64) -> Prime {
    Prime::new(p).unwrap()
}

pub fn vp(p: u64) -> Valuation {
    Valuation::Prime(prime(p))
}

pub fn rational(bound: i64) -> impl Strategy<Value = Rational> {
    (-bound..=bound, 1..=bound).prop_map(|(n, d)| ratio(n, d))
}

pub fn nonzero(bound: i64) -> impl Strategy<Value = Rational> {
    (1..=bound, 1..=bound, any::<bool>()).prop_map(|(n, d, neg)| ratio(if neg { -n } else { n }, d))
}

pub fn small_prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![2u64, 3, 5, 7]).prop_map(prime)
}

pub fn odd_prime() -> impl Strategy<Value = Prime> {
    prop::sample::select(vec![3u64, 5, 7, 11, 13]).prop_map(prime)
}

pub fn valuation() -> impl Strategy<Value = Valuation> {
    prop_oneof![Just(Valuation::Infinity), small_prime().prop_map(Valuation::Prime)]
}

/// p^k·u with u a small p-adic unit.
pub fn scaled_unit(p: u64, k: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = Rational> {
    (k, 1..40i64, any::<bool>()).prop_filter_map("unit", move |(k, u, neg)| {
        (u % p as i64 != 0).then(|| prime(p).pow(k) * int(if neg { -u } else { u }))
    })
}

/// Constant-coefficient Lagrangians with small integer entries and det A ≠ 0.
pub fn lagrangian(n: usize) -> impl Strategy<Value = padelic::lagrangian::QuadraticLagrangian> {
    use padelic::linalg::Matrix;
    let sym = n * (n + 1) / 2;
    (
        prop::collection::vec(-1i64..=2, sym),
        prop::collection::vec(-1i64..=1, n * n),
        prop::collection::vec(-2i64..=2, sym),
        prop::collection::vec(-2i64..=2, 2 * n + 1),
    )
        .prop_filter_map("det A ≠ 0", move |(a, b, c, rest)| {
            let symmetric = |e: &[i64]| {
                let mut m = Matrix::zeros(n, n);
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        m[(i, j)] = int(e[k]);
                        m[(j, i)] = int(e[k]);
                        k += 1;
                    }
                }
                m
            };
            let b = Matrix::from_fn(n, n, |i, j| int(b[i * n + j]));
            let d: Vec<Rational> = rest[..n].iter().map(|&x| int(x)).collect();
            let e: Vec<Rational> = rest[n..2 * n].iter().map(|&x| int(x)).collect();
            padelic::lagrangian::QuadraticLagrangian::constant(&symmetric(&a), &b, &symmetric(&c), &d, &e, &int(rest[2 * n])).ok()
        })
}
