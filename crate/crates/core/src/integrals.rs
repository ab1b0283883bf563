//! Gaussian integrals over Q_v: closed forms, ball-regularized forms, and the
//! brute-force oracle.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{congruence_diagonalize, det, Congruence, Matrix};
use crate::number_theory::{chi, lambda};
use crate::padic::{norm, valuation, Order, Prime, Valuation};
use crate::phase::{Amplitude, UnitPhase};
use crate::rational::{int, Rational};
use crate::residue::{residue_sum, BallSpec, QuadraticPhase, Strategy};

/// The integrand χ_v(xᵀαx + βᵀx).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticIntegrand {
    pub alpha: Matrix<Rational>,
    pub beta: Vec<Rational>,
}

impl QuadraticIntegrand {
    pub fn new(alpha: Matrix<Rational>, beta: Vec<Rational>) -> Result<Self> {
        if !alpha.is_square() || alpha.rows() != beta.len() {
            return Err(Error::Dimension("quadratic integrand"));
        }
        if !alpha.is_symmetric() {
            return Err(Error::Invalid("alpha must be symmetric".into()));
        }
        Ok(QuadraticIntegrand { alpha, beta })
    }

    pub fn one_dim(alpha: Rational, beta: Rational) -> Self {
        QuadraticIntegrand {
            alpha: Matrix::from_rows(vec![vec![alpha]]).unwrap(),
            beta: vec![beta],
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    pub fn phase(&self) -> QuadraticPhase {
        QuadraticPhase {
            quad: self.alpha.clone(),
            linear: self.beta.clone(),
            constant: Rational::zero(),
        }
    }
}

/// ∫_{Q_v} χ_v(αx² + βx) dx = λ_v(α)|2α|_v^{-1/2} χ_v(−β²/4α).
pub fn gaussian_1d(v: &Valuation, alpha: &Rational, beta: &Rational) -> Result<Amplitude> {
    if alpha.is_zero() {
        return Err(Error::ZeroArgument("alpha"));
    }
    let mag_sq = norm(&(alpha * int(2)), v).recip();
    let phase = lambda(v, alpha) + chi(v, &(-(beta * beta) / (alpha * int(4))));
    Amplitude::new(mag_sq, phase)
}

/// The n-dimensional Gaussian with its congruence diagonalization.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianNd {
    pub value: Amplitude,
    pub congruence: Congruence,
}

impl GaussianNd {
    /// The λ-part Λ_v(d_1, …, d_n) of the phase.
    pub fn lambda_phase(&self, v: &Valuation) -> UnitPhase {
        self.congruence.diagonal.iter().map(|d| lambda(v, d)).sum()
    }
}

/// ∫_{Q_v^n} χ_v(xᵀαx + βᵀx) dⁿx via x = Py with PᵀαP diagonal.
pub fn gaussian_nd_parts(v: &Valuation, q: &QuadraticIntegrand) -> Result<GaussianNd> {
    let congruence = congruence_diagonalize(&q.alpha)?;
    let shifted = congruence.p.transpose().mul_vec(&q.beta);
    let jac = norm(&det(&congruence.p), v);
    let mut value = Amplitude::new(&jac * &jac, UnitPhase::zero())?;
    for (d, b) in congruence.diagonal.iter().zip(&shifted) {
        value *= gaussian_1d(v, d, b)?;
    }
    Ok(GaussianNd { value, congruence })
}

pub fn gaussian_nd(v: &Valuation, q: &QuadraticIntegrand) -> Result<Amplitude> {
    Ok(gaussian_nd_parts(v, q)?.value)
}

/// ∫_{|x|_p ≤ p^N} χ_p(ux) dx.
pub fn ball_character_integral(p: &Prime, u: &Rational, n: i64) -> Rational {
    let v = Valuation::Prime(p.clone());
    if norm(u, &v) <= p.pow(-n) {
        p.pow(n)
    } else {
        Rational::zero()
    }
}

/// ∫ χ_p(yᵀBx) dⁿx over |x_i|_p ≤ p^N.
pub fn ball_linear_integral_nd(p: &Prime, b: &Matrix<Rational>, y: &[Rational], n: i64) -> Result<Rational> {
    if !b.is_square() || b.rows() != y.len() {
        return Err(Error::Dimension("linear integral"));
    }
    if det(b).is_zero() {
        return Err(Error::Singular("linear integral matrix"));
    }
    let z = b.transpose().mul_vec(y);
    Ok(z.iter().map(|u| ball_character_integral(p, u, n)).product())
}

/// ∫_{Z_p} χ_p(az² + bz) dz in closed form.
fn unit_ball_gaussian(p: &Prime, a: &Rational, b: &Rational) -> Amplitude {
    let v = Valuation::Prime(p.clone());
    let na = norm(a, &v);
    let nb = norm(b, &v);
    if na <= Rational::one() {
        return if nb <= Rational::one() {
            Amplitude::one()
        } else {
            Amplitude::zero()
        };
    }
    let e = match valuation(a, p) {
        Order::Finite(m) => -m,
        Order::Infinity => unreachable!("|a| > 1"),
    };
    let full = || gaussian_1d(&v, a, b).expect("a ≠ 0");
    if p.is_two() {
        if e == 1 {
            // χ((u z² + w z)/2) ≡ 1 exactly when w is a unit.
            return if nb == int(2) {
                Amplitude::one()
            } else {
                Amplitude::zero()
            };
        }
        if nb > p.pow(e - 1) {
            Amplitude::zero()
        } else {
            full()
        }
    } else if nb > na {
        Amplitude::zero()
    } else {
        full()
    }
}

/// ∫_{|x|_p ≤ p^N} χ_p(ax² + bx) dx, exactly.
pub fn ball_gaussian_1d(p: &Prime, a: &Rational, b: &Rational, n: i64) -> Amplitude {
    // x = p^-N z maps Z_p onto the ball with dx = p^N dz.
    let s = p.pow(-n);
    let inner = unit_ball_gaussian(p, &(a * &s * &s), &(b * &s));
    let jac = p.pow(n);
    inner.scale_mag_sq(&(&jac * &jac))
}

/// Smallest N from which the ball integral of χ_p(ax² + bx) equals the full
/// integral; the closed form above makes this exact.
pub fn stabilization_radius(p: &Prime, a: &Rational, b: &Rational) -> Result<i64> {
    let oa = valuation(a, p).finite().ok_or(Error::ZeroArgument("alpha"))?;
    let ob = valuation(b, p).finite();
    let two = i64::from(p.is_two());
    let mut n = (oa + 1 + two).div_euclid(2) + i64::from((oa + 1 + two).rem_euclid(2) != 0);
    if let Some(ob) = ob {
        n = n.max(oa - ob + two);
    }
    Ok(n)
}

/// The brute-force oracle: p^{−nM}·Σ χ_p(xᵀαx + βᵀx) over x ∈ p^{−N}(Z/p^{N+M})ⁿ.
pub fn brute_force_ball_integral(
    p: &Prime,
    q: &QuadraticIntegrand,
    spec: BallSpec,
    budget: u64,
) -> Result<Complex64> {
    brute_force_ball_integral_with(p, q, spec, budget, Strategy::default())
}

pub fn brute_force_ball_integral_with(
    p: &Prime,
    q: &QuadraticIntegrand,
    spec: BallSpec,
    budget: u64,
    strategy: Strategy,
) -> Result<Complex64> {
    let axes = vec![spec; q.dim()];
    residue_sum(p, &q.phase(), &axes, budget, strategy)
}
