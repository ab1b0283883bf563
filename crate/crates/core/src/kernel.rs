//! The v-adic propagator
//! K_v(x″,t″; x′,t′) = λ_v(1)^{1−n}·λ_v(−det B̄/(2h)ⁿ)·|det(B̄/h)|_v^{1/2}·χ_v(−S̄/h)
//! and the composition, unitarity and delta-limit checks.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::action::{Boundary, ClassicalAction, ClassicalSystem};
use crate::error::{Error, Result};
use crate::integrals::{ball_gaussian_1d, gaussian_nd_parts, QuadraticIntegrand};
use crate::lagrangian::QuadraticLagrangian;
use crate::linalg::{congruence_diagonalize, dot, Matrix};
use crate::number_theory::{chi, hilbert, lambda, omega};
use crate::padic::{norm, valuation, Order, Prime, Valuation};
use crate::phase::{Amplitude, Sign, UnitPhase};
use crate::rational::{int, to_f64, Rational};
use crate::residue::{ball_integral, QuadraticPhase, Strategy};
use crate::series::{Guard, DEFAULT_GUARD_PRECISION};

/// λ_v(1)^{1−n}·λ_v(−det B̄/(2h)ⁿ) with magnitude² |det(B̄/h)|_v.
pub fn normalization(v: &Valuation, b_bar: &Matrix<Rational>, h: &Rational) -> Result<Amplitude> {
    let n = b_bar.rows() as i32;
    let det = b_bar.det();
    if det.is_zero() {
        return Err(Error::Singular("B̄"));
    }
    let mag_sq = norm(&(&det / num_traits::pow(h.clone(), n as usize)), v);
    let two_h_n = num_traits::pow(h * int(2), n as usize);
    let phase = lambda(v, &Rational::one()).times(1 - n as i64) + lambda(v, &(-&det / two_h_n));
    Amplitude::new(mag_sq, phase)
}

/// N_v(t″,t′)·χ_v(−S̄(x″,x′)/h).
pub fn kernel_amplitude(
    v: &Valuation,
    action: &ClassicalAction,
    h: &Rational,
    x2: &[Rational],
    x1: &[Rational],
) -> Result<Amplitude> {
    let s = action.evaluate(x2, x1);
    Ok(normalization(v, &action.b_bar, h)?.rotate(&chi(v, &(-s / h))))
}

/// √((ih)^{−n}·det(−B̄))·exp(2πi S̄/h) with the principal square root.
pub fn real_kernel_value(action: &ClassicalAction, h: &Rational, x2: &[Rational], x1: &[Rational]) -> Complex64 {
    let n = action.dim() as i32;
    let det = to_f64(&action.b_bar.neg().det());
    let unit = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)];
    let pref = unit[n as usize % 4] * det / to_f64(h).powi(n);
    let s = action.evaluate(x2, x1);
    pref.sqrt() * UnitPhase::new(s / h).to_complex()
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    pub valuation: Valuation,
    pub amplitude: Amplitude,
    pub normalization: Amplitude,
    pub det_b_bar: Rational,
    pub action_value: Rational,
    pub action: ClassicalAction,
}

/// A Lagrangian's classical data together with h, evaluated at any valuation.
#[derive(Clone, Debug)]
pub struct Propagator {
    system: ClassicalSystem,
    h: Rational,
    guard_precision: i64,
}

impl Propagator {
    pub fn new(system: ClassicalSystem, h: Rational) -> Result<Self> {
        if !h.is_positive() {
            return Err(Error::Invalid("h must be a positive rational".into()));
        }
        Ok(Propagator {
            system,
            h,
            guard_precision: DEFAULT_GUARD_PRECISION,
        })
    }

    pub fn from_lagrangian(l: QuadraticLagrangian, order: usize, h: Rational) -> Result<Self> {
        Self::new(ClassicalSystem::new(l, order)?, h)
    }

    pub fn with_guard_precision(mut self, precision: i64) -> Self {
        self.guard_precision = precision;
        self
    }

    pub fn system(&self) -> &ClassicalSystem {
        &self.system
    }

    pub fn h(&self) -> &Rational {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn guard(&self, v: &Valuation) -> Guard {
        Guard::new(v.clone()).with_precision(self.guard_precision)
    }

    pub fn action(&self, v: &Valuation, t1: &Rational, t2: &Rational) -> Result<ClassicalAction> {
        self.system
            .classical_action(t1, t2, Some(&self.guard(v)))
            .map_err(|e| e.at(v))
    }

    pub fn normalization(&self, v: &Valuation, t1: &Rational, t2: &Rational) -> Result<Amplitude> {
        normalization(v, &self.action(v, t1, t2)?.b_bar, &self.h).map_err(|e| e.at(v))
    }

    pub fn kernel(&self, v: &Valuation, b: &Boundary) -> Result<KernelValue> {
        let (action, value) = self
            .system
            .full_action(b, Some(&self.guard(v)))
            .map_err(|e| e.at(v))?;
        let normalization = normalization(v, &action.b_bar, &self.h).map_err(|e| e.at(v))?;
        let amplitude = normalization.rotate(&chi(v, &(-&value / &self.h)));
        Ok(KernelValue {
            valuation: v.clone(),
            amplitude,
            normalization,
            det_b_bar: action.b_bar.det(),
            action_value: value,
            action,
        })
    }

    pub fn real_kernel(&self, b: &Boundary) -> Result<Complex64> {
        let v = Valuation::Infinity;
        let (action, _) = self
            .system
            .full_action(b, Some(&self.guard(&v)))
            .map_err(|e| e.at(&v))?;
        Ok(real_kernel_value(&action, &self.h, &b.x_double_prime, &b.x_prime))
    }

    /// Compares the kernel over [t′, t″] with the composition of the kernels
    /// over [t′, t] and [t, t″] identity by identity.
    pub fn composition_check(&self, v: &Valuation, t1: &Rational, t: &Rational, t2: &Rational) -> Result<CompositionReport> {
        self.composition(v, t1, t, t2).map_err(|e| e.at(v))
    }

    fn composition(&self, v: &Valuation, t1: &Rational, t: &Rational, t2: &Rational) -> Result<CompositionReport> {
        let n = self.dim();
        if n > 2 {
            return Err(Error::UnsupportedDimension(n, "composition check"));
        }
        let g = self.guard(v);
        let h = &self.h;
        let first = self.system.classical_action(t1, t, Some(&g))?;
        let second = self.system.classical_action(t, t2, Some(&g))?;
        let whole = self.system.classical_action(t1, t2, Some(&g))?;
        let (d1, d2, d) = (&first.delta, &second.delta, &whole.delta);

        let script_h = first.a_bar.add(&second.c_bar);
        let big_h = script_h.scale(&(-(h * int(2)).recip()));
        let det_2h = big_h.scale(&int(2)).det();
        if det_2h.is_zero() {
            return Err(Error::Singular("H"));
        }
        let h_n = num_traits::pow(h.clone(), n);
        let sign_n = if n % 2 == 0 { int(1) } else { int(-1) };

        // U from the dotted determinants at the middle time.
        let lower = self.system.deltas(t1, t, Some(&g))?;
        let upper = self.system.deltas(t, t2, Some(&g))?;
        let half = Rational::new(1.into(), 2.into());
        let u = Matrix::from_fn(n, n, |i, j| {
            &half * &lower.dotted_hi[(i, j)] / d1 - &half * &upper.dotted_lo[(n + i, j)] / d2
        });
        let middle = self.system.frame(t, t2, Some(&g))?;
        let a_mid = middle.a_lo.clone();
        let wronskian_mid = middle.f_lo.vstack(&middle.fdot_lo).det();
        let id1_0_residual = script_h.det() - a_mid.det() * u.scale(&int(2)).det();
        let id1_1_residual = u.scale(&int(2)).det() - &sign_n * d / (d2 * d1) * &wronskian_mid;
        let id1_3_residual = &det_2h - d / (&h_n * d2 * d1);

        let n_first = normalization(v, &first.b_bar, h)?;
        let n_second = normalization(v, &second.b_bar, h)?;
        let n_whole = normalization(v, &whole.b_bar, h)?;
        let id1_ratio = n_second.mag_sq() * n_first.mag_sq() / norm(&det_2h, v) / n_whole.mag_sq();

        // Quadratic forms in w = (x″, x′): direct versus completed square.
        let block = |a: &Matrix<Rational>, b: &Matrix<Rational>, c: &Matrix<Rational>| {
            Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
                (true, true) => a[(i, j)].clone(),
                (true, false) => b[(i, j - n)].clone(),
                (false, true) => b[(j, i - n)].clone(),
                (false, false) => c[(i - n, j - n)].clone(),
            })
        };
        let zero = Matrix::<Rational>::zeros(n, n);
        let direct = block(&whole.a_bar, &whole.b_bar, &whole.c_bar).scale(&(-(h * int(2)).recip()));
        let outer = block(&second.a_bar, &zero, &first.c_bar).scale(&(-(h * int(2)).recip()));
        // z = G·w with G = −[B̄(t″,t)ᵀ | B̄(t,t′)]/h.
        let gz = Matrix::from_fn(n, 2 * n, |i, j| {
            let entry = if j < n { second.b_bar[(j, i)].clone() } else { first.b_bar[(i, j - n)].clone() };
            -entry / h
        });
        let h_inv = big_h.inverse()?;
        let completed = gz.transpose().mul(&h_inv).mul(&gz).scale(&Rational::new((-1).into(), 4.into()));
        let id2_residual = direct.sub(&outer.add(&completed));

        let congruence = congruence_diagonalize(&big_h)?;
        let lambda_h: UnitPhase = congruence.diagonal.iter().map(|d| lambda(v, d)).sum();
        let mut hilbert_factor = Sign::Plus;
        for i in 0..n {
            for j in i + 1..n {
                hilbert_factor = hilbert_factor * hilbert(v, &congruence.diagonal[i], &congruence.diagonal[j])?;
            }
        }
        let lmul_residual = lambda(v, &(d2 + d1)) - lambda(v, d);
        let id3_residual = n_second.phase().clone() + n_first.phase().clone() + lambda_h.clone() - n_whole.phase().clone();

        // Full kernels, including the linear and constant parts of the action.
        let samples = [(vec![int(1); n], vec![int(0); n]), (vec![int(0); n], vec![int(1); n]), (vec![int(1); n], vec![int(-1); n])];
        let mut kernel_residual = UnitPhase::zero();
        let mut kernel_mag_ratio = Rational::one();
        for (x2, x1) in &samples {
            let composed = self.composed_kernel(v, &first, &second, x2, x1)?;
            let exact = kernel_amplitude(v, &whole, h, x2, x1)?;
            let residual = composed.phase().clone() - exact.phase().clone();
            let ratio = composed.mag_sq() / exact.mag_sq();
            if kernel_residual.is_zero() && kernel_mag_ratio.is_one() {
                kernel_residual = residual;
                kernel_mag_ratio = ratio;
            }
        }

        Ok(CompositionReport {
            valuation: v.clone(),
            script_h,
            h: big_h,
            u,
            id1_0_residual,
            id1_1_residual,
            id1_3_residual,
            id1_ratio,
            id2_residual,
            lmul_residual,
            lambda_h,
            hilbert_factor,
            id3_residual,
            kernel_residual,
            kernel_mag_ratio,
        })
    }

    /// ∫ K(x″,t″; y,t) K(y,t; x′,t′) dⁿy by the closed-form Gaussian.
    fn composed_kernel(
        &self,
        v: &Valuation,
        first: &ClassicalAction,
        second: &ClassicalAction,
        x2: &[Rational],
        x1: &[Rational],
    ) -> Result<Amplitude> {
        let n = self.dim();
        let h = &self.h;
        let zeros = vec![Rational::zero(); n];
        // S̄(t″,t)(x″, y) + S̄(t,t′)(y, x′) split into y-quadratic, y-linear and constant parts.
        let constant = second.evaluate(x2, &zeros) + first.evaluate(&zeros, x1);
        let linear: Vec<Rational> = (0..n)
            .map(|k| {
                let col: Vec<Rational> = (0..n).map(|i| second.b_bar[(i, k)].clone()).collect();
                dot(&col, x2) + &second.e_bar[k] + dot(first.b_bar.row(k), x1) + &first.d_bar[k]
            })
            .collect();
        let alpha = first.a_bar.add(&second.c_bar).scale(&(-(h * int(2)).recip()));
        let beta: Vec<Rational> = linear.iter().map(|b| -b / h).collect();
        let gauss = gaussian_nd_parts(v, &QuadraticIntegrand::new(alpha, beta)?)?;
        Ok(normalization(v, &second.b_bar, h)?
            * normalization(v, &first.b_bar, h)?
            * gauss.value.rotate(&chi(v, &(-constant / h))))
    }

    /// ∫_{Z_p} K_p(x″,t″; x′,t′) dx′ in closed form (n = 1).
    pub fn initial_ball_integral(&self, p: &Prime, t1: &Rational, t2: &Rational, x2: &Rational) -> Result<Amplitude> {
        let v = Valuation::Prime(p.clone());
        self.require_one_dim("initial ball integral")?;
        let action = self.action(&v, t1, t2)?;
        let (quad, lin, constant) = initial_phase(&action, &self.h, x2);
        let n = normalization(&v, &action.b_bar, &self.h)?;
        Ok(n * ball_gaussian_1d(p, &quad, &lin, 0).rotate(&chi(&v, &constant)))
    }

    /// The same integral as a residue sum.
    pub fn initial_ball_integral_brute(
        &self,
        p: &Prime,
        t1: &Rational,
        t2: &Rational,
        x2: &Rational,
        budget: u64,
        strategy: Strategy,
    ) -> Result<Complex64> {
        let v = Valuation::Prime(p.clone());
        self.require_one_dim("initial ball integral")?;
        let action = self.action(&v, t1, t2)?;
        let (quad, lin, constant) = initial_phase(&action, &self.h, x2);
        let phase = QuadraticPhase::new(Matrix::diagonal(&[quad]), vec![lin], constant)?;
        let n = normalization(&v, &action.b_bar, &self.h)?;
        Ok(n.to_complex() * ball_integral(p, &phase, &[0], budget, strategy)?)
    }

    fn require_one_dim(&self, what: &'static str) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::UnsupportedDimension(self.dim(), what));
        }
        Ok(())
    }

    /// ∫_{Z_p}∫_{|y′| ≤ p^N} conj K(y″,t″; y′,t′)·K(y,t″; y′,t′) dy′ dy″ for each
    /// y, which must equal Ω(|y|_p). N is chosen so that the truncation in y′ is
    /// exact.
    pub fn unitarity_check(
        &self,
        p: &Prime,
        t1: &Rational,
        t2: &Rational,
        ys: &[Rational],
        budget: u64,
        strategy: Strategy,
    ) -> Result<UnitarityReport> {
        let v = Valuation::Prime(p.clone());
        self.require_one_dim("unitarity check").map_err(|e| e.at(&v))?;
        let action = self.action(&v, t1, t2)?;
        let h = &self.h;
        let (a, b, d) = (&action.a_bar[(0, 0)], &action.b_bar[(0, 0)], &action.d_bar[0]);
        let norm_amp = normalization(&v, &action.b_bar, h).map_err(|e| e.at(&v))?;
        let mag_sq_exact = *norm_amp.mag_sq() == norm(&(b / h), &v);
        let ord = |x: &Rational| match valuation(x, p) {
            Order::Finite(m) => Some(m),
            Order::Infinity => None,
        };
        let mut rows = Vec::new();
        let mut max_deviation = 0f64;
        for y in ys {
            let mut s = 0i64;
            for x in [a / (h * int(2)), (a * y + d) / h] {
                if let Some(o) = ord(&x) {
                    s = s.max(-o);
                }
            }
            let radius = s + ord(&(b / h)).expect("B̄ ≠ 0");
            let half_h = h * int(2);
            let quad = Matrix::from_rows(vec![vec![a / &half_h, b / &half_h], vec![b / &half_h, Rational::zero()]])?;
            let linear = vec![d / h, -(b * y) / h];
            let constant = -(a * y * y / int(2) + d * y) / h;
            let phase = QuadraticPhase::new(quad, linear, constant)?;
            let sum = ball_integral(p, &phase, &[0, radius], budget, strategy).map_err(|e| e.at(&v))?;
            let value = sum * to_f64(norm_amp.mag_sq());
            let expected = f64::from(omega(&norm(y, &v))?);
            max_deviation = max_deviation.max((value - expected).norm());
            rows.push(UnitarityRow {
                y: y.clone(),
                radius,
                value,
                expected,
            });
        }
        Ok(UnitarityReport {
            rows,
            max_deviation,
            mag_sq_exact,
        })
    }

    /// ∫_{Z_p} K_p(x″, t′+T; x′, t′) dx′ along a sequence of T, which should
    /// approach Ω(|x″|_p) as |T|_p → 0.
    pub fn delta_limit_check(&self, p: &Prime, t1: &Rational, ts: &[Rational], x2s: &[Rational]) -> Result<DeltaLimitReport> {
        let v = Valuation::Prime(p.clone());
        let mut rows = Vec::new();
        for t in ts {
            for x2 in x2s {
                let value = self.initial_ball_integral(p, t1, &(t1 + t), x2)?;
                let expected = omega(&norm(x2, &v))?;
                rows.push(DeltaLimitRow {
                    t: t.clone(),
                    x2: x2.clone(),
                    value,
                    expected,
                });
            }
        }
        let last = ts.last().cloned();
        let converged = rows
            .iter()
            .filter(|r| Some(&r.t) == last.as_ref())
            .all(|r| r.matches());
        Ok(DeltaLimitReport { rows, converged })
    }
}

fn initial_phase(action: &ClassicalAction, h: &Rational, x2: &Rational) -> (Rational, Rational, Rational) {
    // −S̄(x″, x′)/h as a polynomial in x′.
    let half = Rational::new(1.into(), 2.into());
    let quad = -(&half * &action.c_bar[(0, 0)]) / h;
    let lin = -(&action.b_bar[(0, 0)] * x2 + &action.e_bar[0]) / h;
    let constant = -(&half * &action.a_bar[(0, 0)] * x2 * x2 + &action.d_bar[0] * x2 + &action.eps_bar) / h;
    (quad, lin, constant)
}

#[derive(Clone, Debug)]
pub struct CompositionReport {
    pub valuation: Valuation,
    /// 𝓗 = Ā(t,t′) + C̄(t″,t).
    pub script_h: Matrix<Rational>,
    /// H = −𝓗/(2h).
    pub h: Matrix<Rational>,
    pub u: Matrix<Rational>,
    /// det 𝓗 − det A(t)·det 2U.
    pub id1_0_residual: Rational,
    /// det 2U − (−1)ⁿ Δ(t″,t′)/(Δ(t″,t)Δ(t,t′))·det[F(t); Ḟ(t)].
    pub id1_1_residual: Rational,
    /// det 2H − Δ(t″,t′)/(hⁿ Δ(t″,t)Δ(t,t′)).
    pub id1_3_residual: Rational,
    /// |N(t″,t)|²|N(t,t′)|²|det 2H|⁻¹ / |N(t″,t′)|²; 1 when the magnitudes compose.
    pub id1_ratio: Rational,
    /// Difference of the quadratic forms in (x″, x′) on the two sides of the
    /// phase identity, as a matrix.
    pub id2_residual: Matrix<Rational>,
    /// λ_v(Δ(t″,t) + Δ(t,t′)) − λ_v(Δ(t″,t′)).
    pub lmul_residual: UnitPhase,
    /// Λ_v over the congruence diagonal of H.
    pub lambda_h: UnitPhase,
    /// ∏_{i<j}(d_i, d_j)_v over the same diagonal.
    pub hilbert_factor: Sign,
    /// phase N(t″,t) + phase N(t,t′) + Λ_v − phase N(t″,t′).
    pub id3_residual: UnitPhase,
    /// Phase of the composed kernel minus the direct kernel at sample points.
    pub kernel_residual: UnitPhase,
    pub kernel_mag_ratio: Rational,
}

impl CompositionReport {
    /// Exact zero, or negligible in the report's valuation: p-adic norm at
    /// most p^−precision, or magnitude below `tolerance` for v = ∞.
    pub fn negligible(&self, x: &Rational, precision: i64, tolerance: f64) -> bool {
        if x.is_zero() {
            return true;
        }
        match &self.valuation {
            Valuation::Prime(p) => norm(x, &self.valuation) <= p.pow(-precision),
            Valuation::Infinity => to_f64(x).abs() < tolerance,
        }
    }

    fn phase_ok(&self, ph: &UnitPhase, tolerance: f64) -> bool {
        match self.valuation {
            Valuation::Prime(_) => ph.is_zero(),
            Valuation::Infinity => ph.distance_to_zero() < tolerance,
        }
    }

    fn ratio_ok(&self, r: &Rational, tolerance: f64) -> bool {
        match self.valuation {
            Valuation::Prime(_) => r.is_one(),
            Valuation::Infinity => (to_f64(r) - 1.0).abs() < tolerance,
        }
    }

    /// Every residual is exactly zero.
    pub fn exact(&self) -> bool {
        self.id1_0_residual.is_zero()
            && self.id1_1_residual.is_zero()
            && self.id1_3_residual.is_zero()
            && self.id1_ratio.is_one()
            && self.id2_residual.iter().all(Zero::is_zero)
            && self.lmul_residual.is_zero()
            && self.id3_residual.is_zero()
            && self.kernel_residual.is_zero()
            && self.kernel_mag_ratio.is_one()
    }

    /// All identities hold up to truncation: rational residuals negligible,
    /// p-adic phases and magnitudes exactly equal, real ones within `tolerance`.
    pub fn holds(&self, precision: i64, tolerance: f64) -> bool {
        let small = |x: &Rational| self.negligible(x, precision, tolerance);
        small(&self.id1_0_residual)
            && small(&self.id1_1_residual)
            && small(&self.id1_3_residual)
            && self.ratio_ok(&self.id1_ratio, tolerance)
            && self.id2_residual.iter().all(small)
            && self.phase_ok(&self.lmul_residual, tolerance)
            && self.phase_ok(&self.id3_residual, tolerance)
            && self.phase_ok(&self.kernel_residual, tolerance)
            && self.ratio_ok(&self.kernel_mag_ratio, tolerance)
    }
}

#[derive(Clone, Debug)]
pub struct UnitarityRow {
    pub y: Rational,
    pub radius: i64,
    pub value: Complex64,
    pub expected: f64,
}

#[derive(Clone, Debug)]
pub struct UnitarityReport {
    pub rows: Vec<UnitarityRow>,
    pub max_deviation: f64,
    /// |N|² = |B̄/h|_p.
    pub mag_sq_exact: bool,
}

#[derive(Clone, Debug)]
pub struct DeltaLimitRow {
    pub t: Rational,
    pub x2: Rational,
    pub value: Amplitude,
    pub expected: u8,
}

impl DeltaLimitRow {
    pub fn matches(&self) -> bool {
        match self.expected {
            0 => self.value.is_zero(),
            _ => self.value == Amplitude::one(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeltaLimitReport {
    pub rows: Vec<DeltaLimitRow>,
    /// Every value at the last T equals Ω(|x″|_p).
    pub converged: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::residue::DEFAULT_BUDGET;

    fn free(h: Rational) -> Propagator {
        Propagator::from_lagrangian(QuadraticLagrangian::free_particle(1), 8, h).unwrap()
    }

    fn boundary(t1: i64, x1: i64, t2: Rational, x2: i64) -> Boundary {
        Boundary::new(int(t1), vec![int(x1)], t2, vec![int(x2)]).unwrap()
    }

    fn v(p: u64) -> Valuation {
        Valuation::prime(p).unwrap()
    }

    #[test]
    fn free_particle_real_kernel() {
        let k = free(int(1)).kernel(&Valuation::Infinity, &boundary(0, 0, int(2), 1)).unwrap();
        assert_eq!(*k.amplitude.mag_sq(), ratio(1, 2));
        // λ_∞(1/4) has phase 7/8 and χ_∞(−1/4) phase 1/4.
        assert_eq!(*k.amplitude.phase(), UnitPhase::from_ratio(1, 8));
    }

    #[test]
    fn free_particle_three_adic_kernel() {
        let k = free(int(1)).kernel(&v(3), &boundary(0, 0, int(3), 1)).unwrap();
        assert_eq!(*k.amplitude.mag_sq(), int(3));
        // λ₃(1/6) = −i and {−1/6}₃ = 1/3.
        assert_eq!(*k.amplitude.phase(), UnitPhase::from_ratio(1, 12));
    }

    #[test]
    fn coincident_points_leave_only_normalization() {
        let prop = free(ratio(1, 2));
        for p in [3, 5, 7] {
            let k = prop.kernel(&v(p), &boundary(0, 2, int(5), 2)).unwrap();
            assert_eq!(k.amplitude, k.normalization);
            assert_eq!(*k.amplitude.phase(), lambda(&v(p), &ratio(1, 5)));
            assert_eq!(*k.amplitude.mag_sq(), norm(&ratio(2, 5), &v(p)));
        }
    }

    #[test]
    fn normalization_examples() {
        let b = Matrix::from_rows(vec![vec![int(-1)]]).unwrap();
        let n = normalization(&Valuation::Infinity, &b, &int(1)).unwrap();
        assert_eq!(*n.mag_sq(), int(1));
        assert_eq!(*n.phase(), UnitPhase::from_ratio(7, 8));
        let singular = Matrix::from_rows(vec![vec![int(0)]]).unwrap();
        assert!(normalization(&Valuation::Infinity, &singular, &int(1)).is_err());
    }

    #[test]
    fn real_kernel_agrees_with_exact() {
        let prop = free(int(1));
        for (t2, x2) in [(int(2), 1), (ratio(1, 3), -2), (int(7), 5)] {
            let b = boundary(0, 0, t2, x2);
            let exact = prop.kernel(&Valuation::Infinity, &b).unwrap().amplitude.to_complex();
            assert!((exact - prop.real_kernel(&b).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn free_particle_composition_is_exact() {
        let prop = free(int(1));
        for (vv, t, t2) in [(v(3), int(3), int(9)), (v(5), int(5), int(-10)), (Valuation::Infinity, int(1), int(3))] {
            let r = prop.composition_check(&vv, &int(0), &t, &t2).unwrap();
            assert!(r.exact(), "{vv}: {r:?}");
            assert_eq!(r.hilbert_factor, Sign::Plus);
        }
    }

    #[test]
    fn unitarity_free_particle() {
        let prop = free(int(1));
        let p = Prime::new(3).unwrap();
        let ys = [int(0), int(1), int(3), ratio(1, 3)];
        let r = prop
            .unitarity_check(&p, &int(0), &int(3), &ys, DEFAULT_BUDGET, Strategy::default())
            .unwrap();
        assert!(r.mag_sq_exact);
        assert!(r.max_deviation < 1e-9, "{r:?}");
    }

    #[test]
    fn delta_limit_free_particle() {
        let prop = free(int(1));
        let p = Prime::new(3).unwrap();
        let ts = [int(1), int(3), int(9), int(27)];
        let r = prop.delta_limit_check(&p, &int(0), &ts, &[int(0), int(1), ratio(1, 3)]).unwrap();
        assert!(r.converged, "{r:?}");
        let brute = prop
            .initial_ball_integral_brute(&p, &int(0), &int(9), &int(1), DEFAULT_BUDGET, Strategy::Sequential)
            .unwrap();
        assert!((brute - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn oscillator_composition_holds_to_truncation() {
        let prop = Propagator::from_lagrangian(QuadraticLagrangian::oscillator(&int(1)), 32, int(1)).unwrap();
        for p in [3i64, 5] {
            let r = prop.composition_check(&v(p as u64), &int(0), &int(p), &int(3 * p)).unwrap();
            assert!(r.holds(DEFAULT_GUARD_PRECISION, 1e-9), "{r:?}");
            assert_eq!(r.hilbert_factor, Sign::Plus);
        }
        let r = prop
            .composition_check(&Valuation::Infinity, &int(0), &ratio(1, 5), &ratio(1, 2))
            .unwrap();
        assert!(r.holds(DEFAULT_GUARD_PRECISION, 1e-9), "{r:?}");
    }

    #[test]
    fn two_dimensional_free_particle_reports_hilbert_factor() {
        // For n = 2 the real diagonal of H is negative definite, so (d, d)_∞ = −1
        // and the normalization phases no longer compose.
        let prop = Propagator::from_lagrangian(QuadraticLagrangian::free_particle(2), 8, int(1)).unwrap();
        let r = prop.composition_check(&Valuation::Infinity, &int(0), &int(1), &int(2)).unwrap();
        assert_eq!(r.hilbert_factor, Sign::Minus);
        assert_eq!(r.id3_residual, UnitPhase::from_ratio(1, 2));
        assert!(r.id1_3_residual.is_zero() && r.id1_ratio.is_one());
        assert!(r.lmul_residual.is_zero());
    }
}
