//! Classical action of a quadratic Lagrangian.
//!
//! Fundamental solutions come from an order-by-order series recursion; the
//! boundary-form coefficients Ā, B̄, C̄ come from the dotted Δ-determinants and
//! D̄, Ē, ε̄ from exact interpolation of the directly evaluated action.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lagrangian::{eval, eval_vec, euler_lagrange, QuadraticLagrangian};
use crate::linalg::{dot, Matrix, Ring};
use crate::padic::Valuation;
use crate::rational::{format_rational, int, to_f64, Rational};
use crate::series::{Guard, Series};

pub const DEFAULT_ORDER: usize = 32;

/// Below this magnitude a real Δ is treated as singular.
pub const REAL_SINGULAR_THRESHOLD: f64 = 1e-12;

/// 2n homogeneous solutions (columns of `f`) and a particular solution `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalMatrix {
    pub f: Matrix<Series>,
    pub fdot: Matrix<Series>,
    pub xi: Vec<Series>,
    pub xidot: Vec<Series>,
    /// det[F; Ḟ]·det A.
    pub normalization: Rational,
    pub order: i64,
}

impl FundamentalMatrix {
    /// The same solution space in the basis F·G.
    pub fn with_basis(&self, g: &Matrix<Rational>) -> Result<Self> {
        let m = 2 * self.f.rows();
        if g.rows() != m || g.cols() != m {
            return Err(Error::Dimension("basis change"));
        }
        let det_g = g.det();
        if det_g.is_zero() {
            return Err(Error::Singular("basis change"));
        }
        let gs = g.map(|x| Series::constant(x.clone()));
        Ok(FundamentalMatrix {
            f: self.f.mul(&gs),
            fdot: self.fdot.mul(&gs),
            xi: self.xi.clone(),
            xidot: self.xidot.clone(),
            normalization: &self.normalization * det_g,
            order: self.order,
        })
    }
}

/// Fundamental matrix normalised so that det[F; Ḟ]·det A = 1.
pub fn solve_fundamental(l: &QuadraticLagrangian, order: usize) -> Result<FundamentalMatrix> {
    solve_fundamental_with(l, order, true)
}

pub fn solve_fundamental_with(
    l: &QuadraticLagrangian,
    order: usize,
    unit_normalization: bool,
) -> Result<FundamentalMatrix> {
    if order < 4 {
        return Err(Error::Invalid(format!("series order {order} is below 4")));
    }
    let n = l.dim();
    let sys = euler_lagrange(l);
    let a0 = l.a_at(&Rational::zero())?;
    let a0inv = a0.inverse().map_err(|_| Error::Singular("A(0)"))?;

    let known = sys
        .a
        .iter()
        .chain(sys.damping.iter())
        .chain(sys.stiffness.iter())
        .chain(sys.source.iter())
        .map(Series::precision)
        .min()
        .unwrap_or(i64::MAX);
    let order = (order as i64).min(known.saturating_add(2)) as usize;

    let coeffs = |m: &Matrix<Series>| -> Vec<Matrix<Rational>> {
        (0..=order).map(|j| m.map(|s| s.coeff_or_zero(j as i64))).collect()
    };
    let a = coeffs(&sys.a);
    let damping = coeffs(&sys.damping);
    let stiffness = coeffs(&sys.stiffness);
    let source: Vec<Vec<Rational>> = (0..=order)
        .map(|j| sys.source.iter().map(|s| s.coeff_or_zero(j as i64)).collect())
        .collect();

    let solve = |q0: Vec<Rational>, v0: Vec<Rational>, driven: bool| -> Vec<Vec<Rational>> {
        let mut q = vec![q0, v0];
        for k in 0..=order - 2 {
            let mut rhs = if driven { source[k].clone() } else { vec![Rational::zero(); n] };
            let mut subtract = |m: &Matrix<Rational>, factor: i64, v: &[Rational]| {
                if factor == 0 {
                    return;
                }
                let f = int(factor);
                for (i, r) in rhs.iter_mut().enumerate() {
                    for (j, x) in v.iter().enumerate() {
                        if !x.is_zero() && !m[(i, j)].is_zero() {
                            *r -= &m[(i, j)] * x * &f;
                        }
                    }
                }
            };
            for j in 1..=k {
                let d = (k - j + 2) as i64;
                subtract(&a[j], d * (d - 1), &q[k - j + 2]);
            }
            for j in 0..=k {
                subtract(&damping[j], (k - j + 1) as i64, &q[k - j + 1]);
                subtract(&stiffness[j], 1, &q[k - j]);
            }
            let denom = int(((k + 2) * (k + 1)) as i64);
            q.push(a0inv.mul_vec(&rhs).into_iter().map(|x| x / &denom).collect());
        }
        q
    };
    let to_series = |q: &[Vec<Rational>]| -> Vec<Series> {
        (0..n)
            .map(|i| Series::truncated(q.iter().map(|c| c[i].clone()).collect(), order as i64))
            .collect()
    };

    let det_a0 = a0.det();
    let mut columns = Vec::with_capacity(2 * n);
    for m in 0..2 * n {
        let mut init = vec![Rational::zero(); 2 * n];
        init[m] = Rational::one();
        if unit_normalization && m == 2 * n - 1 {
            init[m] = det_a0.recip();
        }
        let (q0, v0) = init.split_at(n);
        columns.push(to_series(&solve(q0.to_vec(), v0.to_vec(), false)));
    }
    let f = Matrix::from_fn(n, 2 * n, |i, m| columns[m][i].clone());
    let fdot = f.map(Series::derivative);
    let xi = to_series(&solve(vec![Rational::zero(); n], vec![Rational::zero(); n], true));
    let xidot = xi.iter().map(Series::derivative).collect();
    Ok(FundamentalMatrix {
        f,
        fdot,
        xi,
        xidot,
        normalization: if unit_normalization { Rational::one() } else { det_a0 },
        order: order as i64,
    })
}

/// det[F(t); Ḟ(t)]·det A(t) as a series; constant for a true fundamental system.
pub fn wronskian_constant(fm: &FundamentalMatrix, l: &QuadraticLagrangian) -> Series {
    fm.f.vstack(&fm.fdot).det().mul(&l.a().det())
}

/// Endpoint data at t' (`lo`) and t'' (`hi`), over rationals or series in T.
#[derive(Clone, Debug)]
pub struct Frame<T> {
    pub f_lo: Matrix<T>,
    pub f_hi: Matrix<T>,
    pub fdot_lo: Matrix<T>,
    pub fdot_hi: Matrix<T>,
    pub a_lo: Matrix<T>,
    pub a_hi: Matrix<T>,
    pub b_lo: Matrix<T>,
    pub b_hi: Matrix<T>,
}

/// Δ = det 𝓕 for 𝓕 = [F(t''); F(t')], and the dotted determinants:
/// `dotted_hi[(r, t)]` is det 𝓕 with row r replaced by row t of Ḟ(t''),
/// `dotted_lo` likewise with Ḟ(t').
#[derive(Clone, Debug)]
pub struct Deltas<T> {
    pub script_f: Matrix<T>,
    pub delta: T,
    pub dotted_hi: Matrix<T>,
    pub dotted_lo: Matrix<T>,
}

impl<T: Ring> Frame<T> {
    pub fn dim(&self) -> usize {
        self.f_lo.rows()
    }

    pub fn deltas(&self) -> Deltas<T> {
        let n = self.dim();
        let script_f = self.f_hi.vstack(&self.f_lo);
        let dotted = |fdot: &Matrix<T>| Matrix::from_fn(2 * n, n, |r, t| script_f.with_row(r, fdot.row(t)).det());
        Deltas {
            delta: script_f.det(),
            dotted_hi: dotted(&self.fdot_hi),
            dotted_lo: dotted(&self.fdot_lo),
            script_f,
        }
    }
}

/// Ā, B̄, C̄ from the dotted determinants.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticPart<T> {
    pub a_bar: Matrix<T>,
    pub b_bar: Matrix<T>,
    pub c_bar: Matrix<T>,
}

pub fn quadratic_part<T: Ring>(frame: &Frame<T>, d: &Deltas<T>) -> Result<QuadraticPart<T>> {
    let n = frame.dim();
    let half = T::from_rational(&Rational::new(1.into(), 2.into()));
    let inv = d.delta.try_inverse().ok_or(Error::SingularBoundary)?;
    let k = inv.times(&half);
    let sum = |f: &dyn Fn(usize) -> T| (0..n).fold(T::zero_value(), |acc, t| acc.plus(&f(t)));
    let (a2, a1, b2, b1) = (&frame.a_hi, &frame.a_lo, &frame.b_hi, &frame.b_lo);
    let (dh, dl) = (&d.dotted_hi, &d.dotted_lo);
    let a_bar = Matrix::from_fn(n, n, |k_, l| {
        let s = sum(&|t| a2[(l, t)].times(&dh[(k_, t)]).plus(&a2[(k_, t)].times(&dh[(l, t)])));
        s.times(&k).plus(&b2[(l, k_)].plus(&b2[(k_, l)]).times(&half))
    });
    let b_bar = Matrix::from_fn(n, n, |k_, l| {
        let s = sum(&|t| a2[(k_, t)].times(&dh[(n + l, t)]).minus(&a1[(l, t)].times(&dl[(k_, t)])));
        s.times(&k)
    });
    let c_bar = Matrix::from_fn(n, n, |k_, l| {
        let s = sum(&|t| a1[(l, t)].times(&dl[(n + k_, t)]).plus(&a1[(k_, t)].times(&dl[(n + l, t)])));
        s.times(&k).negated().minus(&b1[(l, k_)].plus(&b1[(k_, l)]).times(&half))
    });
    Ok(QuadraticPart { a_bar, b_bar, c_bar })
}

/// det B̄ against 𝒟/Δ and, for n = 2, against the expansion
/// (W″ + W′)/(4Δ) + vec(A′)ᵀ Δ̃ vec(A″)/(4Δ²).
#[derive(Clone, Debug)]
pub struct DetBbar<T> {
    pub det_b_bar: T,
    /// det B̄·Δ − 𝒟.
    pub residual: T,
    pub expansion: Option<T>,
    pub expansion_residual: Option<T>,
}

fn det_bbar<T: Ring>(frame: &Frame<T>, d: &Deltas<T>, q: &QuadraticPart<T>, normalization: &Rational) -> Result<DetBbar<T>> {
    let n = frame.dim();
    if n > 2 {
        return Err(Error::UnsupportedDimension(n, "det B̄ check"));
    }
    let det_b_bar = q.b_bar.det();
    let residual = det_b_bar.times(&d.delta).minus(&T::from_rational(normalization));
    let (expansion, expansion_residual) = if n == 2 {
        let e = i5_expansion(frame, d)?;
        let r = e.minus(&det_b_bar);
        (Some(e), Some(r))
    } else {
        (None, None)
    };
    Ok(DetBbar {
        det_b_bar,
        residual,
        expansion,
        expansion_residual,
    })
}

fn i5_expansion<T: Ring>(frame: &Frame<T>, d: &Deltas<T>) -> Result<T> {
    // dd[i][j] (1-based i = 1..4, j = 1..2): rows 1,2 use Ḟ(t'), rows 3,4 use Ḟ(t'').
    let dd = |i: usize, j: usize| -> T {
        if i <= 2 {
            d.dotted_lo[(i - 1, j - 1)].clone()
        } else {
            d.dotted_hi[(i - 1, j - 1)].clone()
        }
    };
    let p = |a: T, b: T| a.times(&b);
    let m = |a: T, b: T| a.times(&b).negated();
    let tilde = [
        [p(dd(2, 1), dd(4, 1)), p(dd(2, 1), dd(4, 2)), m(dd(1, 1), dd(4, 1)), m(dd(1, 1), dd(4, 2))],
        [p(dd(2, 2), dd(4, 1)), p(dd(2, 2), dd(4, 2)), m(dd(1, 2), dd(4, 1)), m(dd(1, 2), dd(4, 2))],
        [m(dd(2, 1), dd(3, 1)), m(dd(2, 1), dd(3, 2)), p(dd(1, 1), dd(3, 1)), p(dd(1, 1), dd(3, 2))],
        [m(dd(2, 2), dd(3, 1)), m(dd(2, 2), dd(3, 2)), p(dd(1, 2), dd(3, 1)), p(dd(1, 2), dd(3, 2))],
    ];
    let vec = |a: &Matrix<T>| vec![a[(0, 0)].clone(), a[(0, 1)].clone(), a[(1, 0)].clone(), a[(1, 1)].clone()];
    let (va1, va2) = (vec(&frame.a_lo), vec(&frame.a_hi));
    let mut bilinear = T::zero_value();
    for (i, row) in tilde.iter().enumerate() {
        bilinear = bilinear.plus(&va1[i].times(&dot(row, &va2)));
    }
    let w = |f: &Matrix<T>, fdot: &Matrix<T>, a: &Matrix<T>| f.vstack(fdot).det().times(&a.det());
    let w_sum = w(&frame.f_hi, &frame.fdot_hi, &frame.a_hi).plus(&w(&frame.f_lo, &frame.fdot_lo, &frame.a_lo));
    let inv = d.delta.try_inverse().ok_or(Error::SingularBoundary)?;
    let quarter = T::from_rational(&Rational::new(1.into(), 4.into()));
    Ok(w_sum.times(&inv).times(&quarter).plus(&bilinear.times(&inv).times(&inv).times(&quarter)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    pub t_prime: Rational,
    pub t_double_prime: Rational,
    pub x_prime: Vec<Rational>,
    pub x_double_prime: Vec<Rational>,
}

impl Boundary {
    pub fn new(t_prime: Rational, x_prime: Vec<Rational>, t_double_prime: Rational, x_double_prime: Vec<Rational>) -> Result<Self> {
        if t_prime == t_double_prime {
            return Err(Error::Invalid("t' and t'' must differ".into()));
        }
        if x_prime.len() != x_double_prime.len() {
            return Err(Error::Dimension("boundary positions"));
        }
        Ok(Boundary {
            t_prime,
            t_double_prime,
            x_prime,
            x_double_prime,
        })
    }
}

/// S̄(x″, x′) = ½x″ᵀĀx″ + x″ᵀB̄x′ + ½x′ᵀC̄x′ + D̄ᵀx″ + Ēᵀx′ + ε̄.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalAction {
    pub t_prime: Rational,
    pub t_double_prime: Rational,
    pub a_bar: Matrix<Rational>,
    pub b_bar: Matrix<Rational>,
    pub c_bar: Matrix<Rational>,
    pub d_bar: Vec<Rational>,
    pub e_bar: Vec<Rational>,
    pub eps_bar: Rational,
    pub delta: Rational,
}

impl ClassicalAction {
    pub fn dim(&self) -> usize {
        self.d_bar.len()
    }

    pub fn evaluate(&self, x2: &[Rational], x1: &[Rational]) -> Rational {
        let half = Rational::new(1.into(), 2.into());
        let quad = |m: &Matrix<Rational>, u: &[Rational], v: &[Rational]| dot(u, &m.mul_vec(v));
        &half * quad(&self.a_bar, x2, x2)
            + quad(&self.b_bar, x2, x1)
            + &half * quad(&self.c_bar, x1, x1)
            + dot(&self.d_bar, x2)
            + dot(&self.e_bar, x1)
            + &self.eps_bar
    }
}

/// A Lagrangian with its fundamental system and the antiderivatives the
/// action needs, ready for evaluation at any pair of times.
#[derive(Clone, Debug)]
pub struct ClassicalSystem {
    lagrangian: QuadraticLagrangian,
    fundamental: FundamentalMatrix,
    /// ∫(DᵀḞ_m + EᵀF_m) for each column m.
    column_integrals: Vec<Series>,
    /// ∫(Dᵀξ̇ + Eᵀξ).
    xi_integral: Series,
    eps_integral: Series,
}

struct Endpoints {
    f: Matrix<Rational>,
    fdot: Matrix<Rational>,
    xi: Vec<Rational>,
    xidot: Vec<Rational>,
    a: Matrix<Rational>,
    b: Matrix<Rational>,
    d: Vec<Rational>,
    column_integrals: Vec<Rational>,
    xi_integral: Rational,
    eps_integral: Rational,
}

impl ClassicalSystem {
    pub fn new(lagrangian: QuadraticLagrangian, order: usize) -> Result<Self> {
        let fundamental = solve_fundamental(&lagrangian, order)?;
        Self::with_fundamental(lagrangian, fundamental)
    }

    pub fn with_fundamental(lagrangian: QuadraticLagrangian, fundamental: FundamentalMatrix) -> Result<Self> {
        let n = lagrangian.dim();
        if fundamental.f.rows() != n || fundamental.f.cols() != 2 * n {
            return Err(Error::Dimension("fundamental matrix"));
        }
        let source = |q: &[Series], qdot: &[Series]| -> Result<Series> {
            dot(lagrangian.d(), qdot).add(&dot(lagrangian.e(), q)).antiderivative()
        };
        let column_integrals = (0..2 * n)
            .map(|m| source(&fundamental.f.column(m), &fundamental.fdot.column(m)))
            .collect::<Result<_>>()?;
        let xi_integral = source(&fundamental.xi, &fundamental.xidot)?;
        let eps_integral = lagrangian.eps().antiderivative()?;
        Ok(ClassicalSystem {
            lagrangian,
            fundamental,
            column_integrals,
            xi_integral,
            eps_integral,
        })
    }

    pub fn lagrangian(&self) -> &QuadraticLagrangian {
        &self.lagrangian
    }

    pub fn fundamental(&self) -> &FundamentalMatrix {
        &self.fundamental
    }

    pub fn dim(&self) -> usize {
        self.lagrangian.dim()
    }

    pub fn wronskian(&self) -> Series {
        wronskian_constant(&self.fundamental, &self.lagrangian)
    }

    fn endpoints(&self, t: &Rational, g: Option<&Guard>) -> Result<Endpoints> {
        let fm = &self.fundamental;
        let l = &self.lagrangian;
        let m = |x: &Matrix<Series>| x.try_map(|s| eval(s, t, g));
        Ok(Endpoints {
            f: m(&fm.f)?,
            fdot: m(&fm.fdot)?,
            xi: eval_vec(&fm.xi, t, g)?,
            xidot: eval_vec(&fm.xidot, t, g)?,
            a: l.a_at_guarded(t, g)?,
            b: l.b_at_guarded(t, g)?,
            d: l.d_at_guarded(t, g)?,
            column_integrals: eval_vec(&self.column_integrals, t, g)?,
            xi_integral: eval(&self.xi_integral, t, g)?,
            eps_integral: eval(&self.eps_integral, t, g)?,
        })
    }

    fn frame_from(lo: &Endpoints, hi: &Endpoints) -> Frame<Rational> {
        Frame {
            f_lo: lo.f.clone(),
            f_hi: hi.f.clone(),
            fdot_lo: lo.fdot.clone(),
            fdot_hi: hi.fdot.clone(),
            a_lo: lo.a.clone(),
            a_hi: hi.a.clone(),
            b_lo: lo.b.clone(),
            b_hi: hi.b.clone(),
        }
    }

    pub fn frame(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<Frame<Rational>> {
        Ok(Self::frame_from(&self.endpoints(t1, g)?, &self.endpoints(t2, g)?))
    }

    /// Δ(t″, t′) and its dotted variants; errors when Δ vanishes (or, for a
    /// real guard, is numerically negligible).
    pub fn deltas(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<Deltas<Rational>> {
        checked(self.frame(t1, t2, g)?.deltas(), g)
    }

    pub fn delta(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<Rational> {
        Ok(self.deltas(t1, t2, g)?.delta)
    }

    /// 𝒞 = (Δ₁/Δ, …, Δ_{2n}/Δ), Δ_i being det 𝓕 with column i replaced by
    /// (x″ − ξ(t″), x′ − ξ(t′)).
    pub fn integration_constants(&self, b: &Boundary, g: Option<&Guard>) -> Result<Vec<Rational>> {
        let lo = self.endpoints(&b.t_prime, g)?;
        let hi = self.endpoints(&b.t_double_prime, g)?;
        let d = checked(Self::frame_from(&lo, &hi).deltas(), g)?;
        let x_xi = x_xi(b, &lo, &hi);
        Ok((0..2 * self.dim())
            .map(|i| d.script_f.with_column(i, &x_xi).det() / &d.delta)
            .collect())
    }

    /// Trajectory x(t) = F(t)𝒞 + ξ(t).
    pub fn trajectory(&self, b: &Boundary, t: &Rational, g: Option<&Guard>) -> Result<Vec<Rational>> {
        let c = self.integration_constants(b, g)?;
        let e = self.endpoints(t, g)?;
        Ok(e.f.mul_vec(&c).into_iter().zip(e.xi).map(|(x, y)| x + y).collect())
    }

    pub fn quadratic_part(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<QuadraticPart<Rational>> {
        let frame = self.frame(t1, t2, g)?;
        let d = checked(frame.deltas(), g)?;
        quadratic_part(&frame, &d)
    }

    /// All six pieces of the action at (t′, t″): the quadratic part from the
    /// determinant formulas, the rest by interpolating the direct evaluation,
    /// whose quadratic part must agree.
    pub fn classical_action(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<ClassicalAction> {
        let n = self.dim();
        let lo = self.endpoints(t1, g)?;
        let hi = self.endpoints(t2, g)?;
        let frame = Self::frame_from(&lo, &hi);
        let d = checked(frame.deltas(), g)?;
        let q = quadratic_part(&frame, &d)?;
        let inv = d.script_f.inverse().map_err(|_| Error::SingularBoundary)?;

        let s = |z: &[Rational]| -> Rational {
            let b = Boundary {
                t_prime: t1.clone(),
                t_double_prime: t2.clone(),
                x_double_prime: z[..n].to_vec(),
                x_prime: z[n..].to_vec(),
            };
            direct_action(&b, &lo, &hi, &inv)
        };
        let unit = |i: usize, k: i64| {
            let mut z = vec![Rational::zero(); 2 * n];
            z[i] = int(k);
            z
        };
        let c0 = s(&vec![Rational::zero(); 2 * n]);
        let plus: Vec<Rational> = (0..2 * n).map(|i| s(&unit(i, 1))).collect();
        let minus: Vec<Rational> = (0..2 * n).map(|i| s(&unit(i, -1))).collect();
        let half = Rational::new(1.into(), 2.into());
        let lin: Vec<Rational> = (0..2 * n).map(|i| (&plus[i] - &minus[i]) * &half).collect();
        let mut h = Matrix::<Rational>::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            h[(i, i)] = &plus[i] + &minus[i] - &c0 - &c0;
            for j in 0..i {
                let mut z = unit(i, 1);
                z[j] = int(1);
                let v = s(&z) - &plus[i] - &plus[j] + &c0;
                h[(i, j)] = v.clone();
                h[(j, i)] = v;
            }
        }
        let interpolated = QuadraticPart {
            a_bar: h.block(0, 0, n, n),
            b_bar: h.block(0, n, n, n),
            c_bar: h.block(n, n, n, n),
        };
        if interpolated != q {
            return Err(Error::InconsistentInterpolation(format!(
                "quadratic part at t' = {}, t'' = {} disagrees with the determinant formulas",
                format_rational(t1),
                format_rational(t2)
            )));
        }
        Ok(ClassicalAction {
            t_prime: t1.clone(),
            t_double_prime: t2.clone(),
            a_bar: q.a_bar,
            b_bar: q.b_bar,
            c_bar: q.c_bar,
            d_bar: lin[..n].to_vec(),
            e_bar: lin[n..].to_vec(),
            eps_bar: c0,
            delta: d.delta,
        })
    }

    /// The action pieces and the value S̄ on the given boundary data; the
    /// reconstructed quadratic form must reproduce the direct evaluation.
    pub fn full_action(&self, b: &Boundary, g: Option<&Guard>) -> Result<(ClassicalAction, Rational)> {
        if b.x_prime.len() != self.dim() || b.x_double_prime.len() != self.dim() {
            return Err(Error::Dimension("boundary positions"));
        }
        let action = self.classical_action(&b.t_prime, &b.t_double_prime, g)?;
        let value = self.direct_action(b, g)?;
        if action.evaluate(&b.x_double_prime, &b.x_prime) != value {
            return Err(Error::InconsistentInterpolation(
                "reconstructed action disagrees with direct evaluation".into(),
            ));
        }
        Ok((action, value))
    }

    /// S̄ = ½[xᵀAẋ + xᵀBx + Dᵀx]_{t′}^{t″} + ½∫(Dᵀẋ + Eᵀx) + ∫ε.
    pub fn direct_action(&self, b: &Boundary, g: Option<&Guard>) -> Result<Rational> {
        let lo = self.endpoints(&b.t_prime, g)?;
        let hi = self.endpoints(&b.t_double_prime, g)?;
        let d = checked(Self::frame_from(&lo, &hi).deltas(), g)?;
        let inv = d.script_f.inverse().map_err(|_| Error::SingularBoundary)?;
        Ok(direct_action(b, &lo, &hi, &inv))
    }

    /// Ā, B̄, C̄ and Δ as series in T for t′ = 0, t″ = T.
    pub fn series_frame(&self) -> Frame<Series> {
        let fm = &self.fundamental;
        let l = &self.lagrangian;
        let at0 = |m: &Matrix<Series>| m.map(|s| Series::constant(s.coeff_or_zero(0)));
        Frame {
            f_lo: at0(&fm.f),
            f_hi: fm.f.clone(),
            fdot_lo: at0(&fm.fdot),
            fdot_hi: fm.fdot.clone(),
            a_lo: at0(l.a()),
            a_hi: l.a().clone(),
            b_lo: at0(l.b()),
            b_hi: l.b().clone(),
        }
    }

    pub fn series_action(&self) -> Result<(QuadraticPart<Series>, Series)> {
        let frame = self.series_frame();
        let d = frame.deltas();
        Ok((quadratic_part(&frame, &d)?, d.delta))
    }

    /// det B̄(T)·Δ(T) − 𝒟 as a series (n = 1, 2), plus the n = 2 expansion.
    pub fn det_bbar_check(&self) -> Result<DetBbar<Series>> {
        let frame = self.series_frame();
        let d = frame.deltas();
        let q = quadratic_part(&frame, &d)?;
        det_bbar(&frame, &d, &q, &self.fundamental.normalization)
    }

    /// The same check at fixed rational times.
    pub fn det_bbar_at(&self, t1: &Rational, t2: &Rational, g: Option<&Guard>) -> Result<DetBbar<Rational>> {
        let frame = self.frame(t1, t2, g)?;
        let d = checked(frame.deltas(), g)?;
        let q = quadratic_part(&frame, &d)?;
        det_bbar(&frame, &d, &q, &self.fundamental.normalization)
    }
}

fn checked(d: Deltas<Rational>, g: Option<&Guard>) -> Result<Deltas<Rational>> {
    if d.delta.is_zero() {
        return Err(Error::SingularBoundary);
    }
    if matches!(g, Some(Guard { valuation: Valuation::Infinity, .. })) && to_f64(&d.delta).abs() < REAL_SINGULAR_THRESHOLD {
        return Err(Error::SingularBoundary);
    }
    Ok(d)
}

fn x_xi(b: &Boundary, lo: &Endpoints, hi: &Endpoints) -> Vec<Rational> {
    b.x_double_prime
        .iter()
        .zip(&hi.xi)
        .chain(b.x_prime.iter().zip(&lo.xi))
        .map(|(x, xi)| x - xi)
        .collect()
}

fn direct_action(b: &Boundary, lo: &Endpoints, hi: &Endpoints, script_f_inv: &Matrix<Rational>) -> Rational {
    let c = script_f_inv.mul_vec(&x_xi(b, lo, hi));
    let half = Rational::new(1.into(), 2.into());
    let boundary_term = |e: &Endpoints, x: &[Rational]| -> Rational {
        let xdot: Vec<Rational> = e.fdot.mul_vec(&c).into_iter().zip(&e.xidot).map(|(a, b)| a + b).collect();
        dot(x, &e.a.mul_vec(&xdot)) + dot(x, &e.b.mul_vec(x)) + dot(&e.d, x)
    };
    let integral = |e: &Endpoints| dot(&c, &e.column_integrals) + &e.xi_integral;
    &half * (boundary_term(hi, &b.x_double_prime) - boundary_term(lo, &b.x_prime))
        + &half * (integral(hi) - integral(lo))
        + (&hi.eps_integral - &lo.eps_integral)
}

/// Returns (det T, det[Y;Z]^{n−1}·det[Y;W]^{n−1}·det[Z;W]·det[X;Y]) where
/// t_kl = det[Y_kl; Z]·det[Y; W] − det[Y_kl; W]·det[Y; Z] and Y_kl is Y with
/// row k replaced by row l of X.
pub fn determinant_identity(
    x: &Matrix<Rational>,
    y: &Matrix<Rational>,
    z: &Matrix<Rational>,
    w: &Matrix<Rational>,
) -> Result<(Rational, Rational)> {
    let n = x.rows();
    for m in [x, y, z, w] {
        if m.rows() != n || m.cols() != 2 * n {
            return Err(Error::Dimension("determinant identity"));
        }
    }
    let yz = y.vstack(z).det();
    let yw = y.vstack(w).det();
    let t = Matrix::from_fn(n, n, |k, l| {
        let ykl = y.with_row(k, x.row(l));
        ykl.vstack(z).det() * &yw - ykl.vstack(w).det() * &yz
    });
    let p = (n - 1) as usize;
    let rhs = num_traits::pow(yz, p) * num_traits::pow(yw, p) * z.vstack(w).det() * x.vstack(y).det();
    Ok((t.det(), rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    fn factorial(k: i64) -> Rational {
        (1..=k).fold(int(1), |a, i| a * int(i))
    }

    #[test]
    fn free_particle_fundamental() {
        let l = QuadraticLagrangian::free_particle(1);
        let fm = solve_fundamental(&l, 10).unwrap();
        assert_eq!(fm.f[(0, 0)].truncate(10), Series::truncated(vec![int(1)], 10));
        assert_eq!(fm.f[(0, 1)], Series::truncated(vec![int(0), int(1)], 10));
        assert_eq!(fm.fdot[(0, 1)].coeff(0), Some(int(1)));
        assert!(fm.xi[0].is_zero_known());
        let w = wronskian_constant(&fm, &l);
        assert_eq!(w.coeff(0), Some(int(1)));
        assert!(w.nonzero_between(1, w.precision()).is_empty());
    }

    #[test]
    fn oscillator_is_cos_and_sin() {
        let l = QuadraticLagrangian::oscillator(&int(1));
        let fm = solve_fundamental(&l, 16).unwrap();
        for k in 0..=16i64 {
            let sign = if (k / 2) % 2 == 0 { int(1) } else { int(-1) };
            let (c, s) = if k % 2 == 0 {
                (&sign / factorial(k), int(0))
            } else {
                (int(0), &sign / factorial(k))
            };
            assert_eq!(fm.f[(0, 0)].coeff(k), Some(c), "cos t^{k}");
            assert_eq!(fm.f[(0, 1)].coeff(k), Some(s), "sin t^{k}");
        }
        let w = wronskian_constant(&fm, &l);
        assert_eq!(w.coeff(0), Some(int(1)));
        assert!(w.nonzero_between(1, w.precision()).is_empty());
    }

    #[test]
    fn driven_particular_solution() {
        let l = QuadraticLagrangian::from_json(r#"{"n":1,"A":[[["1"]]],"E":[["3"]]}"#).unwrap();
        let fm = solve_fundamental(&l, 8).unwrap();
        assert_eq!(fm.xi[0].truncate(8), Series::truncated(vec![int(0), int(0), ratio(3, 2)], 8));
    }

    #[test]
    fn singular_mass_matrix_is_rejected() {
        assert!(QuadraticLagrangian::from_json(r#"{"n":1,"A":[[["0","1"]]]}"#).is_err());
    }

    #[test]
    fn free_particle_deltas_and_action() {
        let sys = ClassicalSystem::new(QuadraticLagrangian::free_particle(1), 8).unwrap();
        let (q, delta) = sys.series_action().unwrap();
        assert_eq!(delta.truncate(3), Series::truncated(vec![int(0), int(-1)], 3));
        assert_eq!(q.a_bar[(0, 0)].coefficients(), (-1, &[int(1)][..]));
        assert_eq!(q.b_bar[(0, 0)].coefficients(), (-1, &[int(-1)][..]));
        assert_eq!(q.c_bar[(0, 0)].coefficients(), (-1, &[int(1)][..]));

        let b = Boundary::new(int(0), vec![int(0)], int(2), vec![int(1)]).unwrap();
        let (action, value) = sys.full_action(&b, None).unwrap();
        assert_eq!(value, ratio(1, 4));
        assert_eq!(action.a_bar[(0, 0)], ratio(1, 2));
        assert_eq!(action.b_bar[(0, 0)], ratio(-1, 2));
        assert_eq!(action.c_bar[(0, 0)], ratio(1, 2));
        assert!(action.d_bar[0].is_zero() && action.e_bar[0].is_zero() && action.eps_bar.is_zero());
        assert_eq!(sys.integration_constants(&b, None).unwrap(), vec![int(0), ratio(1, 2)]);
    }

    #[test]
    fn zero_boundary_gives_zero_constants() {
        let sys = ClassicalSystem::new(QuadraticLagrangian::oscillator(&int(3)), 16).unwrap();
        let b = Boundary::new(int(0), vec![int(0)], ratio(1, 10), vec![int(0)]).unwrap();
        assert!(sys.integration_constants(&b, None).unwrap().iter().all(Zero::is_zero));
    }

    #[test]
    fn driven_action_matches_hand_integral() {
        let c = int(3);
        let t = int(2);
        let l = QuadraticLagrangian::from_json(r#"{"n":1,"A":[[["1"]]],"E":[["3"]]}"#).unwrap();
        let sys = ClassicalSystem::new(l, 8).unwrap();
        let b = Boundary::new(int(0), vec![int(0)], t.clone(), vec![int(0)]).unwrap();
        let (action, value) = sys.full_action(&b, None).unwrap();
        let expected = -(&c * &c) * &t * &t * &t / int(24);
        assert_eq!(action.eps_bar, expected);
        assert_eq!(value, expected);
        for s in [ratio(1, 3), int(1), ratio(3, 2)] {
            let x = sys.trajectory(&b, &s, None).unwrap();
            assert_eq!(x[0], &c / int(2) * &s * (&s - &t));
        }
    }

    #[test]
    fn oscillator_bbar_series() {
        // −ω/sin(ωT) = −1/T·(1 + (ωT)²/6 + 7(ωT)⁴/360 + …)
        let w2 = int(4);
        let sys = ClassicalSystem::new(QuadraticLagrangian::oscillator(&w2), 24).unwrap();
        let (q, _) = sys.series_action().unwrap();
        let b = &q.b_bar[(0, 0)];
        assert_eq!(b.coeff(-1), Some(int(-1)));
        assert_eq!(b.coeff(0), Some(int(0)));
        assert_eq!(b.coeff(1), Some(-&w2 / int(6)));
        assert_eq!(b.coeff(3), Some(-(&w2 * &w2) * int(7) / int(360)));
        let check = sys.det_bbar_check().unwrap();
        assert!(check.residual.is_zero_known());
        assert!(check.residual.precision() >= 24 - 4);
    }

    #[test]
    fn decoupled_pair_is_block_diagonal() {
        let sys = ClassicalSystem::new(QuadraticLagrangian::free_particle(2), 8).unwrap();
        let a = sys.classical_action(&int(0), &int(3), None).unwrap();
        assert_eq!(a.a_bar, Matrix::diagonal(&[ratio(1, 3), ratio(1, 3)]));
        let check = sys.det_bbar_check().unwrap();
        assert!(check.residual.is_zero_known());
        assert!(check.expansion_residual.unwrap().is_zero_known());
    }

    #[test]
    fn determinant_identity_examples() {
        let (lhs, rhs) = determinant_identity(&mat(&[&[1, 0]]), &mat(&[&[0, 1]]), &mat(&[&[1, 1]]), &mat(&[&[1, -1]])).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, int(-2));
        let z = mat(&[&[1, 2, 3, 4], &[0, 1, 5, 2]]);
        let (lhs, rhs) =
            determinant_identity(&mat(&[&[3, 1, 4, 1], &[5, 9, 2, 6]]), &mat(&[&[2, 7, 1, 8], &[2, 8, 1, 8]]), &z, &z).unwrap();
        assert!(lhs.is_zero() && rhs.is_zero());
    }

    #[test]
    fn real_guard_rejects_tiny_delta() {
        let sys = ClassicalSystem::new(QuadraticLagrangian::free_particle(1), 8).unwrap();
        let g = Guard::new(Valuation::Infinity);
        assert_eq!(
            sys.delta(&int(0), &ratio(1, 10i64.pow(13)), Some(&g)),
            Err(Error::SingularBoundary)
        );
        assert!(sys.delta(&int(0), &ratio(1, 10i64.pow(13)), None).is_ok());
    }
}
