//! Brute-force residue sums for ∫ χ_p(Q(x)) dx over products of balls.
//!
//! Each axis is the ball |x| ≤ p^N sampled on cosets of p^M Z_p; once M is
//! past the local-constancy bound of Q the Riemann sum is the exact integral.
//! Terms are summed in fixed-size blocks whose partial sums are combined by a
//! fixed pairwise tree, so the result does not depend on the strategy.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{valuation, Order, Prime};
use crate::rational::{residue, Rational};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

const BLOCK: u64 = 1 << 12;

/// Largest modulus p^E the engine accepts; keeps every product below 2^126.
const MAX_MODULUS: u128 = 1 << 62;

/// Ball |x|_p ≤ p^radius sampled on cosets of p^resolution Z_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BallSpec {
    pub radius: i64,
    pub resolution: i64,
}

impl BallSpec {
    pub fn new(radius: i64, resolution: i64) -> Result<Self> {
        if resolution < 1 {
            return Err(Error::Invalid("resolution exponent M must be ≥ 1".into()));
        }
        if radius + resolution < 0 {
            return Err(Error::Invalid("ball radius below the sampling scale".into()));
        }
        Ok(BallSpec { radius, resolution })
    }
}

/// Q(x) = xᵀ·quad·x + linearᵀx + constant.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPhase {
    pub quad: Matrix<Rational>,
    pub linear: Vec<Rational>,
    pub constant: Rational,
}

impl QuadraticPhase {
    pub fn new(quad: Matrix<Rational>, linear: Vec<Rational>, constant: Rational) -> Result<Self> {
        if !quad.is_square() || quad.rows() != linear.len() {
            return Err(Error::Dimension("quadratic phase"));
        }
        Ok(QuadraticPhase {
            quad,
            linear,
            constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        let n = self.dim();
        let mut acc = self.constant.clone();
        for i in 0..n {
            acc += &self.linear[i] * &x[i];
            for j in 0..n {
                acc += &self.quad[(i, j)] * &x[i] * &x[j];
            }
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    Sequential,
    /// Blocks are summed on the rayon pool when the `parallel` feature is on
    /// and sequentially otherwise.
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

fn ord_or(x: &Rational, p: &Prime) -> Option<i64> {
    match valuation(x, p) {
        Order::Finite(m) => Some(m),
        Order::Infinity => None,
    }
}

/// Smallest per-axis resolutions at which χ_p(Q) is constant on sampling
/// cosets of the balls with the given radii.
pub fn local_constancy_resolution(p: &Prime, phase: &QuadraticPhase, radii: &[i64]) -> Vec<i64> {
    let n = phase.dim();
    (0..n)
        .map(|j| {
            let mut m = 1i64;
            if let Some(o) = ord_or(&phase.linear[j], p) {
                m = m.max(-o);
            }
            for i in 0..n {
                let c = &phase.quad[(i, j)] + &phase.quad[(j, i)];
                let d = &phase.quad[(i, j)];
                for o in [ord_or(&c, p), ord_or(d, p)].into_iter().flatten() {
                    m = m.max(radii[i] - o);
                    m = m.max(Integer::div_ceil(&(-o), &2));
                }
            }
            m
        })
        .collect()
}

struct Prepared {
    modulus: u128,
    counts: Vec<u64>,
    /// Upper-triangular coefficients of k_i·k_j (row-major over i ≤ j).
    pair: Vec<u128>,
    linear: Vec<u128>,
    constant: u128,
    total: u64,
}

fn prepare(p: &Prime, phase: &QuadraticPhase, axes: &[BallSpec], budget: u64) -> Result<Prepared> {
    let n = phase.dim();
    if axes.len() != n {
        return Err(Error::Dimension("residue-sum axes"));
    }
    let pu = p
        .to_u64()
        .ok_or_else(|| Error::Invalid("prime too large for the residue-sum engine".into()))?;
    let mut counts = Vec::with_capacity(n);
    let mut total: u128 = 1;
    for a in axes {
        let e = a.radius + a.resolution;
        if e < 0 || a.resolution < 1 {
            return Err(Error::Invalid("invalid ball specification".into()));
        }
        let c = (pu as u128).checked_pow(e as u32).unwrap_or(u128::MAX);
        total = total.saturating_mul(c);
        counts.push(c);
    }
    if total > budget as u128 {
        return Err(Error::BudgetExceeded {
            needed: total,
            budget,
        });
    }
    // x_i = k_i·p^(−N_i): collect the rational coefficients of the k-monomials.
    let scale = |i: usize| p.pow(-axes[i].radius);
    let mut pair_q = Vec::new();
    for i in 0..n {
        for j in i..n {
            let c = if i == j {
                phase.quad[(i, i)].clone()
            } else {
                &phase.quad[(i, j)] + &phase.quad[(j, i)]
            };
            pair_q.push(c * scale(i) * scale(j));
        }
    }
    let lin_q: Vec<Rational> = (0..n).map(|i| &phase.linear[i] * scale(i)).collect();
    let const_q = phase.constant.clone();
    let mut e = 0i64;
    for c in pair_q.iter().chain(&lin_q).chain(std::iter::once(&const_q)) {
        if let Some(o) = ord_or(c, p) {
            e = e.max(-o);
        }
    }
    let modulus = (pu as u128)
        .checked_pow(e as u32)
        .filter(|&m| m <= MAX_MODULUS)
        .ok_or(Error::ModulusTooLarge { exponent: e })?;
    let m_big = BigInt::from(modulus);
    let pe = p.pow(e);
    // Constant: only its fractional part matters; reduce p^E·{c}_p.
    let const_frac = crate::padic::fractional_part(&const_q, p);
    let red = |c: &Rational| -> u128 {
        let r = residue(&(c * &pe), &m_big).expect("p-integral after scaling");
        r.to_u128().unwrap()
    };
    Ok(Prepared {
        modulus,
        pair: pair_q.iter().map(red).collect(),
        linear: lin_q.iter().map(red).collect(),
        constant: red(&const_frac),
        counts: counts.iter().map(|&c| c as u64).collect(),
        total: total as u64,
    })
}

impl Prepared {
    fn term(&self, mut idx: u64, k: &mut [u128]) -> Complex64 {
        let n = self.counts.len();
        for i in (0..n).rev() {
            k[i] = (idx % self.counts[i]) as u128 % self.modulus;
            idx /= self.counts[i];
        }
        let m = self.modulus;
        let mut acc = self.constant;
        let mut t = 0;
        for i in 0..n {
            for j in i..n {
                let kk = k[i] * k[j] % m;
                acc = (acc + self.pair[t] * kk % m) % m;
                t += 1;
            }
            acc = (acc + self.linear[i] * k[i] % m) % m;
        }
        let angle = std::f64::consts::TAU * (acc as f64 / m as f64);
        let (s, c) = angle.sin_cos();
        Complex64::new(c, s)
    }

    fn block(&self, b: u64) -> Complex64 {
        let mut k = vec![0u128; self.counts.len()];
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(self.total);
        let mut acc = Complex64::zero();
        for idx in lo..hi {
            acc += self.term(idx, &mut k);
        }
        acc
    }
}

fn pairwise(mut v: Vec<Complex64>) -> Complex64 {
    if v.is_empty() {
        return Complex64::zero();
    }
    while v.len() > 1 {
        v = v.chunks(2).map(|c| c.iter().sum()).collect();
    }
    v[0]
}

/// ∫ χ_p(Q(x)) dx over the product of the given balls, as a Riemann sum.
pub fn residue_sum(
    p: &Prime,
    phase: &QuadraticPhase,
    axes: &[BallSpec],
    budget: u64,
    strategy: Strategy,
) -> Result<Complex64> {
    let prep = prepare(p, phase, axes, budget)?;
    let blocks = prep.total.div_ceil(BLOCK);
    let partial: Vec<Complex64> = match strategy {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            (0..blocks).into_par_iter().map(|b| prep.block(b)).collect()
        }
        _ => (0..blocks).map(|b| prep.block(b)).collect(),
    };
    let pu = p.to_u64().unwrap() as f64;
    let measure: i64 = axes.iter().map(|a| a.resolution).sum();
    Ok(pairwise(partial) * pu.powi(-(measure as i32)))
}

/// Residue sum at the local-constancy resolution for the given radii.
pub fn ball_integral(
    p: &Prime,
    phase: &QuadraticPhase,
    radii: &[i64],
    budget: u64,
    strategy: Strategy,
) -> Result<Complex64> {
    let res = local_constancy_resolution(p, phase, radii);
    let axes: Vec<BallSpec> = radii
        .iter()
        .zip(&res)
        .map(|(&n, &m)| BallSpec {
            radius: n,
            resolution: m.max(1).max(-n),
        })
        .collect();
    residue_sum(p, phase, &axes, budget, strategy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    fn one_d(a: Rational, b: Rational, c: Rational) -> QuadraticPhase {
        QuadraticPhase::new(Matrix::from_rows(vec![vec![a]]).unwrap(), vec![b], c).unwrap()
    }

    #[test]
    fn character_sums() {
        // ∫_{|x|≤p^N} χ(ux) = p^N·[|u| ≤ p^-N].
        let q = one_d(int(0), ratio(1, 5), int(0));
        let v = residue_sum(&p(5), &q, &[BallSpec::new(-1, 2).unwrap()], DEFAULT_BUDGET, Strategy::Sequential).unwrap();
        assert!((v - Complex64::new(0.2, 0.0)).norm() < 1e-12);
        let q = one_d(int(0), ratio(1, 3), int(0));
        let v = residue_sum(&p(3), &q, &[BallSpec::new(1, 2).unwrap()], DEFAULT_BUDGET, Strategy::Sequential).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn strategies_agree_bitwise() {
        let q = one_d(ratio(2, 9), ratio(1, 3), ratio(1, 27));
        let axes = [BallSpec::new(3, 4).unwrap()];
        let a = residue_sum(&p(3), &q, &axes, DEFAULT_BUDGET, Strategy::Sequential).unwrap();
        let b = residue_sum(&p(3), &q, &axes, DEFAULT_BUDGET, Strategy::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn resolution_beyond_bound_is_invariant() {
        let q = one_d(ratio(1, 3), int(2), int(0));
        let base = residue_sum(&p(3), &q, &[BallSpec::new(2, 3).unwrap()], DEFAULT_BUDGET, Strategy::Sequential).unwrap();
        for m in 4..7 {
            let v = residue_sum(&p(3), &q, &[BallSpec::new(2, m).unwrap()], DEFAULT_BUDGET, Strategy::Sequential).unwrap();
            assert!((v - base).norm() < 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let q = one_d(int(1), int(0), int(0));
        let err = residue_sum(&p(7), &q, &[BallSpec::new(5, 5).unwrap()], 1000, Strategy::Sequential);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }
}
